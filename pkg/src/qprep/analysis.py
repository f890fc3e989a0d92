"""Measured-versus-analytic comparison of preparation error and success bounds.

The distance metric is the plain Euclidean 2-norm of the amplitude difference
with no global-phase alignment, exactly as the analytic bounds state it;
``overlap_fidelity`` is reported alongside as the phase-insensitive companion.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .prepare import (
    DETERMINISTIC,
    PROBABILISTIC,
    PrecisionConfig,
    TargetVector,
    build,
    build_phase_stage,
    simulate_preparation,
)
from .sim import StateVector
from .synth import count_gate_list

BOUND_SLACK = 1e-12


def state_distance(a: StateVector, b: StateVector) -> float:
    """2-norm || |a> - |b> ||; sensitive to global phase by design."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def overlap_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, invariant under global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def success_lower_bound(x: TargetVector) -> float:
    """||x||^2 / (2^n * max_i x_i^2): the guaranteed post-selection probability."""
    peak = float(np.max(x.magnitudes))
    if peak <= 0.0:
        raise ValueError("all magnitudes are zero")
    norm_sq = float(np.sum(x.magnitudes.astype(float) ** 2))
    return norm_sq / ((1 << x.num_qubits) * peak * peak)


def deterministic_distance_bound(num_qubits: int, estimation_bits: int) -> float:
    """Magnitude error of the iterative scheme: (n-1) * sqrt(2)*pi / 2**(t-1)."""
    return (num_qubits - 1) * math.sqrt(2.0) * math.pi / (1 << (estimation_bits - 1))


def probabilistic_distance_bound(num_qubits: int, estimation_bits: int) -> float:
    """Post-selected magnitude error of the one-shot scheme: 2^(2n+1)*pi/2^(t+1)."""
    return (1 << (2 * num_qubits + 1)) * math.pi / (1 << (estimation_bits + 1))


def phase_stage_distance_bound(num_qubits: int, phase_bits: int) -> float:
    """Error added by quantizing the phases: 2^n * pi / 2**(t'-1)."""
    return (1 << num_qubits) * math.pi / (1 << (phase_bits - 1))


def total_distance_bound(x: TargetVector, cfg: PrecisionConfig) -> float:
    """Magnitude bound for the configured mode plus the phase-stage term.

    The phase term is exactly zero when every target phase is zero, since the
    quantized phases then vanish identically.
    """
    if cfg.mode == DETERMINISTIC:
        bound = deterministic_distance_bound(x.num_qubits, cfg.estimation_bits)
    else:
        bound = probabilistic_distance_bound(x.num_qubits, cfg.estimation_bits)
    if np.any(x.phases != 0.0):
        bound += phase_stage_distance_bound(x.num_qubits, cfg.phase_bits)
    return bound


@dataclass
class BoundReport:
    """One measured-versus-bound cell of a verification run."""

    config: dict
    measured_distance: float
    theoretical_bound: float
    measured_success_probability: float | None
    success_lower_bound: float | None
    gate_counts: dict[tuple[int, int], int]
    satisfied: bool
    seed: int | None = None
    error: str | None = None

    def to_json_dict(self) -> dict:
        record = {
            "config": self.config,
            "measured_distance": self.measured_distance,
            "theoretical_bound": self.theoretical_bound,
            "measured_success_probability": self.measured_success_probability,
            "success_lower_bound": self.success_lower_bound,
            "gate_counts": {f"{k},{l}": c for (k, l), c in sorted(self.gate_counts.items())},
            "satisfied": self.satisfied,
            "seed": self.seed,
        }
        if self.error is not None:
            record["error"] = self.error
        return record


REPORT_COLUMNS = (
    "config",
    "measured_distance",
    "theoretical_bound",
    "measured_success_probability",
    "success_lower_bound",
    "gate_counts",
    "satisfied",
    "seed",
)


def report_row(report: BoundReport) -> dict:
    """CSV row with the same columns as the JSON keys, flattened to strings."""
    record = report.to_json_dict()
    row = dict(record)
    row["config"] = json.dumps(record["config"], sort_keys=True)
    row["gate_counts"] = ";".join(
        f"{key}:{count}" for key, count in record["gate_counts"].items()
    )
    return {key: row[key] for key in REPORT_COLUMNS}


def write_reports_csv(path, reports: Iterable[BoundReport]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for report in reports:
            writer.writerow(report_row(report))


def write_reports_json(path, reports: Iterable[BoundReport]) -> None:
    # One object per line so long sweeps stream and partial output stays usable.
    with open(path, "w") as handle:
        for report in reports:
            handle.write(json.dumps(report.to_json_dict(), sort_keys=True))
            handle.write("\n")


def _config_dict(x: TargetVector, cfg: PrecisionConfig, epsilon: float | None) -> dict:
    return {
        "n": x.num_qubits,
        "t": cfg.estimation_bits,
        "t_prime": cfg.phase_bits,
        "m": cfg.phase_bits,
        "mode": cfg.mode,
        "angle_multiplier": cfg.angle_multiplier,
        "epsilon": epsilon,
    }


def evaluate_bounds(x: TargetVector, cfg: PrecisionConfig,
                    epsilon: float | None = None,
                    seed: int | None = None) -> BoundReport:
    """Run the full pipeline for one vector and compare against the bounds.

    When ``epsilon`` is given it is used as the bound (the widths are then
    expected to come from ``required_precision``); otherwise the analytic
    formula for the configured widths applies.
    """
    prepared = simulate_preparation(build(x, cfg))
    target = StateVector(x.num_qubits, x.amplitudes())
    distance = state_distance(prepared.state(), target)
    bound = epsilon if epsilon is not None else total_distance_bound(x, cfg)

    if cfg.mode == PROBABILISTIC:
        measured_success = prepared.success_probability
        lower = success_lower_bound(x)
        satisfied = (distance <= bound + BOUND_SLACK
                     and measured_success >= lower - BOUND_SLACK)
    else:
        measured_success = None
        lower = None
        satisfied = distance <= bound + BOUND_SLACK

    counts = count_gate_list(build_phase_stage(x, cfg.phase_bits).gates)
    return BoundReport(
        config=_config_dict(x, cfg, epsilon),
        measured_distance=distance,
        theoretical_bound=bound,
        measured_success_probability=measured_success,
        success_lower_bound=lower,
        gate_counts=counts,
        satisfied=satisfied,
        seed=seed,
    )


def iter_sweep(vectors: list[TargetVector],
               estimation_bits: list[int],
               phase_bits: list[int],
               modes: list[str],
               seeds: list[int] | None = None) -> Iterator[BoundReport]:
    """Cartesian evaluation in deterministic order (vector, mode, t, t').

    A failing cell is recorded with ``error`` set and the sweep continues.
    """
    if not estimation_bits or not phase_bits or not modes:
        raise ValueError("sweep grid must be nonempty")
    for index, x in enumerate(vectors):
        seed = seeds[index] if seeds is not None else None
        for mode in modes:
            for t in estimation_bits:
                for tp in phase_bits:
                    try:
                        cfg = PrecisionConfig(t, tp, mode)
                        yield evaluate_bounds(x, cfg, seed=seed)
                    except Exception as exc:  # record and keep sweeping
                        yield BoundReport(
                            config={"n": x.num_qubits, "t": t, "t_prime": tp,
                                    "m": tp, "mode": mode,
                                    "angle_multiplier": None, "epsilon": None},
                            measured_distance=math.nan,
                            theoretical_bound=math.nan,
                            measured_success_probability=None,
                            success_lower_bound=None,
                            gate_counts={},
                            satisfied=False,
                            seed=seed,
                            error=f"{type(exc).__name__}: {exc}",
                        )


def sweep(vectors: list[TargetVector],
          estimation_bits: list[int],
          phase_bits: list[int],
          modes: list[str],
          seeds: list[int] | None = None) -> list[BoundReport]:
    return list(iter_sweep(vectors, estimation_bits, phase_bits, modes, seeds))


def random_target_vector(num_qubits: int, rng: np.random.Generator,
                         complex_phases: bool = True,
                         zero_fraction: float = 0.0) -> TargetVector:
    """Magnitudes from absolute normal deviates, phases uniform in [0, 2*pi)."""
    size = 1 << num_qubits
    magnitudes = np.abs(rng.standard_normal(size))
    if zero_fraction > 0.0:
        zeros = rng.random(size) < zero_fraction
        zeros[int(np.argmax(magnitudes))] = False  # keep at least one nonzero
        magnitudes[zeros] = 0.0
    if complex_phases:
        phases = rng.uniform(0.0, 2.0 * math.pi, size)
        # uniform() can return the upper endpoint after float rounding
        phases = np.where(phases >= 2.0 * math.pi, 0.0, phases)
        phases[magnitudes == 0.0] = 0.0
    else:
        phases = np.zeros(size)
    return TargetVector(num_qubits, magnitudes, phases)
