"""Command-line entry point: prepare vectors, synthesize diagonals, verify bounds.

Exit codes: 0 on success/bound satisfaction, 1 on usage or input errors,
2 on bound violation, reconstruction mismatch, or unsatisfied verify cells.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import analysis
from .dyadic import PhaseSpec, quantize
from .gateformat import save_circuit
from .prepare import (
    DETERMINISTIC,
    PROBABILISTIC,
    LeakageError,
    PrecisionConfig,
    TargetVector,
    build,
    fast_path_prepare,
    required_precision,
    simulate_preparation,
)
from .sim import Circuit, StateVector
from .synth import peel_synthesize, reconstruct, sparse_synthesize

_MODES = {"det": DETERMINISTIC, "prob": PROBABILISTIC}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def _load_json_or_csv(path: str):
    if str(path).endswith(".csv"):
        with open(path, newline="") as handle:
            return list(csv.reader(handle))
    with open(path) as handle:
        return json.load(handle)


def load_vector(path: str) -> TargetVector:
    """Read a target vector from JSON {"n", "entries"} or CSV index,magnitude,phase."""
    raw = _load_json_or_csv(path)
    if isinstance(raw, dict):
        try:
            n = int(raw["n"])
            entries = raw["entries"]
            magnitudes = [float(e["magnitude"]) for e in entries]
            phases = [float(e["phase"]) for e in entries]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed vector file {path}: {exc}") from exc
        if len(entries) != 1 << n:
            raise ValueError(
                f"{path}: expected {1 << n} entries for n={n}, got {len(entries)}"
            )
        return TargetVector(n, np.array(magnitudes), np.array(phases))
    rows = [row for row in raw if row]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]  # header row
    size = len(rows)
    if size < 2 or size & (size - 1):
        raise ValueError(f"{path}: row count {size} is not a power of two >= 2")
    magnitudes = np.zeros(size)
    phases = np.zeros(size)
    seen = set()
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"{path}: row {row!r} needs index,magnitude,phase")
        index = int(row[0])
        if index in seen or not 0 <= index < size:
            raise ValueError(f"{path}: bad or repeated index {index}")
        seen.add(index)
        magnitudes[index] = float(row[1])
        phases[index] = float(row[2])
    return TargetVector(size.bit_length() - 1, magnitudes, phases)


def load_phases(path: str) -> list[float]:
    """Read diagonal phases from JSON {"n", "phases"} or CSV index,phase."""
    raw = _load_json_or_csv(path)
    if isinstance(raw, dict):
        try:
            n = int(raw["n"])
            phases = [float(v) for v in raw["phases"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed phases file {path}: {exc}") from exc
        if len(phases) != 1 << n:
            raise ValueError(
                f"{path}: expected {1 << n} phases for n={n}, got {len(phases)}"
            )
        return phases
    rows = [row for row in raw if row]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    size = len(rows)
    if size < 2 or size & (size - 1):
        raise ValueError(f"{path}: row count {size} is not a power of two >= 2")
    phases = [0.0] * size
    for row in rows:
        if len(row) != 2:
            raise ValueError(f"{path}: row {row!r} needs index,phase")
        phases[int(row[0])] = float(row[1])
    return phases


def _amplitude_pairs(amplitudes: np.ndarray) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in amplitudes]


def cmd_prepare(args) -> int:
    x = load_vector(args.input)
    mode = _MODES[args.mode]
    if args.epsilon is not None:
        if args.t is not None or args.t_prime is not None:
            raise UsageError("give either --epsilon or --t/--t-prime, not both")
        cfg = required_precision(x.num_qubits, args.epsilon, mode)
        if args.multiplier is not None:
            cfg = PrecisionConfig(cfg.estimation_bits, cfg.phase_bits, mode,
                                  args.multiplier)
    else:
        if args.t is None or args.t_prime is None:
            raise UsageError("give --epsilon, or both --t and --t-prime")
        cfg = PrecisionConfig(args.t, args.t_prime, mode, args.multiplier)

    result = build(x, cfg)
    if args.fast_path:
        amplitudes = fast_path_prepare(x, cfg).amplitudes
        success = result.expected_success_probability
        residual = None
    else:
        prepared = simulate_preparation(result)
        amplitudes = prepared.amplitudes
        success = prepared.success_probability
        residual = prepared.estimation_residual

    target = StateVector(x.num_qubits, x.amplitudes())
    state = StateVector(x.num_qubits, amplitudes)
    distance = analysis.state_distance(state, target)
    fidelity = analysis.overlap_fidelity(state, target)
    bound = args.epsilon if args.epsilon is not None \
        else analysis.total_distance_bound(x, cfg)
    satisfied = distance <= bound + analysis.BOUND_SLACK
    lower = None
    if mode == PROBABILISTIC:
        lower = analysis.success_lower_bound(x)
        satisfied = satisfied and success >= lower - analysis.BOUND_SLACK

    sampled = None
    if args.sample and mode == PROBABILISTIC:
        rng = np.random.default_rng(args.seed)
        outcome = 0 if rng.random() < success else 1
        sampled = {"ancilla_outcome": outcome, "accepted": outcome == 0}

    report = {
        "format": "qprep-report v1",
        "mode": mode,
        "n": x.num_qubits,
        "t": cfg.estimation_bits,
        "t_prime": cfg.phase_bits,
        "angle_multiplier": cfg.angle_multiplier,
        "epsilon": args.epsilon,
        "computation_path": "fast-path" if args.fast_path else "full-circuit",
        "seed": args.seed,
        "qubits": result.circuit.num_qubits,
        "gate_count": len(result.circuit.gates),
        "prepared_amplitudes": _amplitude_pairs(amplitudes),
        "distance_to_target": distance,
        "overlap_fidelity": fidelity,
        "theoretical_bound": bound,
        "bound_satisfied": satisfied,
        "success_probability": success if mode == PROBABILISTIC else None,
        "success_lower_bound": lower,
        "estimation_residual": residual,
        "sampled_outcome": sampled,
    }
    text = json.dumps(report, indent=2)
    if args.report:
        with open(args.report, "w") as handle:
            handle.write(text)
            handle.write("\n")
    else:
        print(text)
    if args.emit:
        save_circuit(args.emit, result.circuit, x.num_qubits)
    if not satisfied:
        print(f"bound violated: distance {distance:.6g} > {bound:.6g}",
              file=sys.stderr)
        return 2
    return 0


def cmd_synth_diag(args) -> int:
    if args.m < 1:
        raise UsageError(f"--m must be >= 1, got {args.m}")
    angles = load_phases(args.input)
    spec = quantize(angles, args.m)
    n = spec.num_qubits
    if args.sparse:
        support = [i for i, p in enumerate(spec.numerators) if p]
        result = sparse_synthesize(spec, support)
        bound = len(support) * (2 * n + args.m)
        bound_label = f"|support|*(2n+m) = {bound}"
    else:
        result = peel_synthesize(spec)
        bound = args.m * ((1 << n) - 1)
        bound_label = f"m*(2^n - 1) = {bound}"

    exact = reconstruct(result, n) == spec
    print(f"n={n} m={args.m} gates={len(result.gates)} bound {bound_label}")
    for (arity, level), count in sorted(result.counts.items()):
        kind = "X" if level == 0 else f"CZP(l={level})"
        print(f"  arity {arity:>2}  {kind:<12} x{count}")
    if result.global_phase.numerator:
        print(f"  global phase 2*pi*{result.global_phase.numerator}"
              f"/2^{result.global_phase.level} (as conjugated gate block)")
    if args.emit:
        save_circuit(args.emit, Circuit(n, result.product_gates()), n)
    if not exact:
        print("reconstruction mismatch", file=sys.stderr)
        return 2
    print("reconstruction exact")
    return 0


def _suite_synth(n: int, trials: int, rng: np.random.Generator) -> list[dict]:
    rows = []
    if n <= 3:  # exhaustive +/-1 diagonals
        for pattern in range(1 << (1 << n)):
            numerators = tuple((pattern >> i) & 1 for i in range(1 << n))
            spec = PhaseSpec(n, 1, numerators)
            result = peel_synthesize(spec)
            rows.append({
                "suite": "synth", "case": f"exhaustive-m1-{pattern}",
                "gate_count": len(result.gates), "bound": (1 << n) - 1,
                "exact": reconstruct(result, n) == spec,
            })
    for trial in range(trials):
        nn = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, 6))
        numerators = tuple(int(v) for v in rng.integers(0, 1 << m, 1 << nn))
        spec = PhaseSpec(nn, m, numerators)
        result = peel_synthesize(spec)
        rows.append({
            "suite": "synth", "case": f"random-peel-{trial}",
            "gate_count": len(result.gates), "bound": m * ((1 << nn) - 1),
            "exact": reconstruct(result, nn) == spec,
        })
        support_size = int(rng.integers(1, nn + 1))
        support = [int(v) for v in
                   rng.choice(1 << nn, size=support_size, replace=False)]
        sparse_numerators = [0] * (1 << nn)
        for index in support:
            sparse_numerators[index] = int(rng.integers(0, 1 << m))
        sparse_spec = PhaseSpec(nn, m, tuple(sparse_numerators))
        sparse_result = sparse_synthesize(sparse_spec, support)
        rows.append({
            "suite": "synth", "case": f"random-sparse-{trial}",
            "gate_count": len(sparse_result.gates),
            "bound": support_size * (2 * nn + m),
            "exact": reconstruct(sparse_result, nn) == sparse_spec,
        })
    for row in rows:
        row["satisfied"] = bool(row["exact"] and row["gate_count"] <= row["bound"])
    return rows


def _suite_dualpath(n: int, trials: int, rng: np.random.Generator) -> list[dict]:
    rows = []
    for trial in range(trials):
        x = analysis.random_target_vector(n, rng)
        for mode in (DETERMINISTIC, PROBABILISTIC):
            cfg = PrecisionConfig(8, 6, mode)
            prepared = simulate_preparation(build(x, cfg))
            fast = fast_path_prepare(x, cfg)
            deviation = float(np.max(np.abs(prepared.amplitudes - fast.amplitudes)))
            rows.append({
                "suite": "dualpath", "mode": mode, "trial": trial,
                "deviation": deviation,
                "estimation_residual": prepared.estimation_residual,
                "satisfied": bool(deviation <= 1e-9
                                  and prepared.estimation_residual <= 1e-10),
            })
    return rows


def _suite_bounds(n: int, trials: int, rng: np.random.Generator) -> list[dict]:
    rows = []
    for trial in range(trials):
        real = analysis.random_target_vector(n, rng, complex_phases=False)
        for t in (6, 8, 10):
            report = analysis.evaluate_bounds(
                real, PrecisionConfig(t, 1, DETERMINISTIC), seed=trial)
            rows.append({"suite": "bounds", **report.to_json_dict()})
        for epsilon in (0.5, 0.1):
            t = 2 * n + math.ceil(math.log2(math.pi / epsilon))
            report = analysis.evaluate_bounds(
                real, PrecisionConfig(t, 1, PROBABILISTIC), seed=trial)
            rows.append({"suite": "bounds", **report.to_json_dict()})
        full = analysis.random_target_vector(n, rng)
        for mode in (DETERMINISTIC, PROBABILISTIC):
            cfg = required_precision(n, 0.5, mode)
            report = analysis.evaluate_bounds(full, cfg, epsilon=0.5, seed=trial)
            rows.append({"suite": "bounds", **report.to_json_dict()})
    return rows


def _write_rows(path: str | None, rows: list[dict]) -> None:
    if path is None:
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    elif path.endswith(".csv"):
        fieldnames = list(rows[0].keys()) if rows else ["suite"]
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=fieldnames)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, dict) else v
                                 for k, v in row.items()})
    else:
        with open(path, "w") as handle:
            for row in rows:
                handle.write(json.dumps(row, sort_keys=True))
                handle.write("\n")


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.suite == "synth":
        rows = _suite_synth(args.n, args.trials, rng)
    elif args.suite == "dualpath":
        rows = _suite_dualpath(args.n, args.trials, rng)
    else:
        rows = _suite_bounds(args.n, args.trials, rng)
    _write_rows(args.out, rows)
    failing = [row for row in rows if not row["satisfied"]]
    print(f"suite {args.suite}: {len(rows) - len(failing)}/{len(rows)} cells satisfied")
    if failing:
        for row in failing:
            print(f"unsatisfied: {json.dumps(row, sort_keys=True)}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="qprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    prepare = sub.add_parser("prepare", help="compile and run a preparation circuit")
    prepare.add_argument("input", help="vector file (JSON or CSV)")
    prepare.add_argument("--mode", choices=("det", "prob"), required=True)
    prepare.add_argument("--epsilon", type=float)
    prepare.add_argument("--t", type=int, help="estimation register width")
    prepare.add_argument("--t-prime", dest="t_prime", type=int,
                         help="phase stage width")
    prepare.add_argument("--multiplier", type=int, choices=(1, 2, 4))
    prepare.add_argument("--emit", help="write the gate list here")
    prepare.add_argument("--report", help="write the JSON report here (default stdout)")
    path = prepare.add_mutually_exclusive_group()
    path.add_argument("--full-circuit", dest="fast_path", action="store_false")
    path.add_argument("--fast-path", dest="fast_path", action="store_true")
    prepare.set_defaults(fast_path=False)
    prepare.add_argument("--sample", action="store_true",
                         help="sample the ancilla outcome with the seeded generator")
    prepare.add_argument("--seed", type=int)

    synth = sub.add_parser("synth-diag", help="synthesize a diagonal unitary")
    synth.add_argument("input", help="phases file (JSON or CSV)")
    synth.add_argument("--m", type=int, required=True, help="grid level")
    synth.add_argument("--sparse", action="store_true")
    synth.add_argument("--emit", help="write the gate list here")

    verify = sub.add_parser("verify", help="run a verification suite")
    verify.add_argument("--suite", choices=("bounds", "synth", "dualpath"),
                        required=True)
    verify.add_argument("--n", type=int, default=3)
    verify.add_argument("--trials", type=int, default=20)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", help="write rows here (.csv or JSON lines)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "prepare":
            return cmd_prepare(args)
        if args.command == "synth-diag":
            return cmd_synth_diag(args)
        return cmd_verify(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LeakageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
