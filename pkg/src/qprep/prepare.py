"""Builders for phase-estimation based amplitude-encoding circuits.

Two preparation schemes share the same machinery:

* deterministic: grow the state one qubit at a time; each round estimates the
  branch rotation angles of a marginal-probability tree into an estimation
  register, applies the conditioned rotation to a fresh data qubit, and
  uncomputes the register.
* probabilistic: start from the uniform superposition, estimate per-index
  amplitude angles in one shot, rotate an ancilla, uncompute, and post-select
  the ancilla on 0.

Both end with a synthesized diagonal applying the quantized target phases.
The oracles always carry the floor-quantized (grid-exact) angles, so the
estimation register uncomputes to |0...0> exactly and only the rotation-angle
truncation contributes error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import TAU, floor_fraction, quantize
from .sim import (
    Circuit,
    ControlledZPow,
    DiagonalOracle,
    Gate,
    Hadamard,
    PauliX,
    RotationY,
    StateVector,
    apply_circuit,
    new_basis_state,
    project_measure,
    qft_circuit,
)
from .synth import peel_synthesize

DETERMINISTIC = "deterministic"
PROBABILISTIC = "probabilistic"

# Marginal probabilities below this are identically zero branches.
_ZERO_BRANCH = 1e-300

LEAKAGE_TOLERANCE = 1e-6


class LeakageError(RuntimeError):
    """The estimation register failed to return to |0...0>."""


@dataclass(frozen=True)
class TargetVector:
    """Magnitudes and phases of the vector to encode; need not be normalized."""

    num_qubits: int
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        size = 1 << self.num_qubits
        magnitudes = np.asarray(self.magnitudes, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        object.__setattr__(self, "magnitudes", magnitudes)
        object.__setattr__(self, "phases", phases)
        if magnitudes.shape != (size,):
            raise ValueError(f"expected {size} magnitudes, got {magnitudes.shape}")
        if phases.shape != (size,):
            raise ValueError(f"expected {size} phases, got {phases.shape}")
        for index, value in enumerate(magnitudes):
            if not value >= 0.0:
                raise ValueError(f"entry {index}: magnitude {value!r} is negative")
        if not np.any(magnitudes > 0.0):
            raise ValueError("all magnitudes are zero")
        for index, value in enumerate(phases):
            if not 0.0 <= value < TAU:
                raise ValueError(f"entry {index}: phase {value!r} outside [0, 2*pi)")

    @classmethod
    def from_magnitudes(cls, magnitudes) -> "TargetVector":
        magnitudes = np.asarray(magnitudes, dtype=float)
        n = int(magnitudes.size).bit_length() - 1
        return cls(n, magnitudes, np.zeros(magnitudes.size))

    def amplitudes(self) -> np.ndarray:
        """The normalized complex target e^{i*phase} * magnitude / norm."""
        norm = float(np.linalg.norm(self.magnitudes))
        return self.magnitudes / norm * np.exp(1.0j * self.phases)


@dataclass(frozen=True)
class MarginalTree:
    """levels[k-1] holds the 2**k bit-prefix probabilities; the last level is
    the normalized per-index distribution."""

    levels: tuple[np.ndarray, ...]


def compute_marginals(x: TargetVector) -> MarginalTree:
    weights = x.magnitudes.astype(float) ** 2
    probabilities = weights / weights.sum()
    levels = [probabilities]
    while levels[-1].size > 2:
        levels.append(levels[-1].reshape(-1, 2).sum(axis=1))
    return MarginalTree(tuple(reversed(levels)))


@dataclass(frozen=True)
class PrecisionConfig:
    """Register widths and which multiple of the angle the oracle encodes."""

    estimation_bits: int
    phase_bits: int
    mode: str = DETERMINISTIC
    angle_multiplier: int | None = None

    def __post_init__(self) -> None:
        if self.estimation_bits < 1:
            raise ValueError(f"estimation_bits must be >= 1, got {self.estimation_bits}")
        if self.phase_bits < 1:
            raise ValueError(f"phase_bits must be >= 1, got {self.phase_bits}")
        if self.mode not in (DETERMINISTIC, PROBABILISTIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.angle_multiplier is None:
            default = 4 if self.mode == PROBABILISTIC else 2
            object.__setattr__(self, "angle_multiplier", default)
        if self.angle_multiplier not in (1, 2, 4):
            raise ValueError(f"angle_multiplier must be 1, 2 or 4, got {self.angle_multiplier}")
        if self.mode == PROBABILISTIC and self.angle_multiplier != 4:
            raise ValueError("probabilistic mode fixes angle_multiplier = 4")


def required_precision(num_qubits: int, epsilon: float, mode: str) -> PrecisionConfig:
    """Register widths guaranteeing final 2-norm error at most epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    phase_bits = num_qubits + 1 + math.ceil(math.log2(TAU / epsilon))
    if mode == DETERMINISTIC:
        if num_qubits < 2:
            raise ValueError("deterministic width formula needs num_qubits >= 2")
        t = math.ceil(math.log2(2.0 * (num_qubits - 1) * math.sqrt(2.0) * math.pi / epsilon)) + 1
    elif mode == PROBABILISTIC:
        t = 2 * num_qubits + math.ceil(math.log2(TAU / epsilon))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PrecisionConfig(t, phase_bits, mode)


@dataclass(frozen=True)
class AngleTable:
    """Exact rotation angles plus their grid estimates at the working width.

    branch_angles[k-1][j] halves the probability of tree branch j at depth k;
    the root angle is applied directly (never estimated) so it carries no grid
    version.  amplitude_angles are the per-index arccos(x_i / max) used by the
    probabilistic scheme, always estimated at multiplier 4.
    """

    estimation_bits: int
    multiplier: int
    root_angle: float
    branch_angles: tuple[np.ndarray, ...]
    branch_estimates: tuple[np.ndarray, ...]
    amplitude_angles: np.ndarray
    amplitude_estimates: np.ndarray

    def quantized_branch(self, k: int) -> np.ndarray:
        """Rotation angles the circuit realizes at depth k (radians)."""
        scale = TAU / (self.multiplier * (1 << self.estimation_bits))
        return self.branch_estimates[k - 1] * scale

    def quantized_amplitude(self) -> np.ndarray:
        return self.amplitude_estimates * (TAU / (4 << self.estimation_bits))


def compute_angles(tree: MarginalTree, x: TargetVector,
                   cfg: PrecisionConfig) -> AngleTable:
    t, c = cfg.estimation_bits, cfg.angle_multiplier
    root = math.acos(min(1.0, math.sqrt(tree.levels[0][0])))

    branch_angles = []
    branch_estimates = []
    for k in range(1, x.num_qubits):
        parents = tree.levels[k - 1]
        left = tree.levels[k][0::2]
        alpha = np.zeros(parents.size)
        live = parents > _ZERO_BRANCH
        alpha[live] = np.arccos(np.clip(np.sqrt(left[live] / parents[live]), 0.0, 1.0))
        if cfg.mode == DETERMINISTIC and c == 4 and np.any(alpha >= math.pi / 2):
            raise ValueError("angle_multiplier 4 requires every branch angle < pi/2")
        branch_angles.append(alpha)
        branch_estimates.append(
            np.array([floor_fraction(c * a / TAU, t) for a in alpha], dtype=np.int64)
        )

    peak = float(np.max(x.magnitudes))
    amplitude_angles = np.arccos(np.clip(x.magnitudes / peak, 0.0, 1.0))
    # x_i = 0 gives 4*alpha = 2*pi, which floor_fraction wraps onto the top
    # grid cell, keeping every estimate strictly below a full turn.
    amplitude_estimates = np.array(
        [floor_fraction(4.0 * a / TAU, t) for a in amplitude_angles], dtype=np.int64
    )
    return AngleTable(t, c, root, tuple(branch_angles), tuple(branch_estimates),
                      amplitude_angles, amplitude_estimates)


@dataclass(frozen=True)
class RegisterMap:
    """Builders place the estimation register on the top bits, then the data
    register, then (probabilistic only) the rotation ancilla on the last bit."""

    estimation: tuple[int, ...]
    data: tuple[int, ...]
    ancilla: int | None


@dataclass(frozen=True)
class BuildResult:
    circuit: Circuit
    registers: RegisterMap
    expected_success_probability: float


def _shift_gates(gates: tuple[Gate, ...], offset: int) -> list[Gate]:
    shifted: list[Gate] = []
    for gate in gates:
        if isinstance(gate, ControlledZPow):
            shifted.append(ControlledZPow(gate.level, tuple(q + offset for q in gate.qubits)))
        elif isinstance(gate, PauliX):
            shifted.append(PauliX(gate.target + offset))
        else:
            raise TypeError(f"phase stage contains unexpected gate {gate!r}")
    return shifted


def build_phase_stage(x: TargetVector, phase_bits: int) -> Circuit:
    """Diagonal applying the target phases quantized at ``phase_bits``.

    The synthesized product realizes every quantized phase exactly, the
    all-zeros entry included (via the synthesizer's global-phase block), so
    per-component phase error stays below one grid step 2*pi/2**phase_bits.
    """
    spec = quantize(x.phases, phase_bits)
    result = peel_synthesize(spec)
    return Circuit(x.num_qubits, result.product_gates())


def _estimation_block(estimation: tuple[int, ...], register: tuple[int, ...],
                      phases: tuple[float, ...], total: int) -> list[Gate]:
    t = len(estimation)
    gates: list[Gate] = [Hadamard(q) for q in estimation]
    for s in range(t):
        gates.append(DiagonalOracle(register, phases, power=1 << (t - 1 - s),
                                    controls=(estimation[s],)))
    gates.extend(qft_circuit(estimation, inverse=True, num_qubits=total).gates)
    return gates


def _unestimation_block(estimation: tuple[int, ...], register: tuple[int, ...],
                        phases: tuple[float, ...], total: int) -> list[Gate]:
    t = len(estimation)
    gates: list[Gate] = list(qft_circuit(estimation, num_qubits=total).gates)
    for s in reversed(range(t)):
        gates.append(DiagonalOracle(register, phases, power=-(1 << (t - 1 - s)),
                                    controls=(estimation[s],)))
    gates.extend(Hadamard(q) for q in estimation)
    return gates


def _rotation_ladder(estimation: tuple[int, ...], target: int,
                     multiplier: int) -> list[Gate]:
    # Estimate bit s carries weight 2**(t-1-s), so rotating by 2*pi/(c*2**s)
    # when it is set totals the doubled quantized angle, as R_Y(2a)|0> must.
    return [
        RotationY(TAU / (multiplier << s), target, controls=(estimation[s],))
        for s in range(len(estimation))
    ]


def build_deterministic(x: TargetVector, cfg: PrecisionConfig) -> BuildResult:
    """Iterative preparation: one estimation round per data qubit after the first.

    The first data qubit gets the exact root rotation directly; every further
    qubit k is set by estimating the depth-k branch angles (times the angle
    multiplier) of the quantized oracle, rotating conditioned on the estimate,
    and uncomputing, which returns the estimation register to |0...0> exactly.
    """
    if cfg.mode != DETERMINISTIC:
        raise ValueError(f"config mode is {cfg.mode!r}")
    n, t = x.num_qubits, cfg.estimation_bits
    estimation = tuple(range(t))
    data = tuple(range(t, t + n))
    total = t + n
    table = compute_angles(compute_marginals(x), x, cfg)

    gates: list[Gate] = [RotationY(2.0 * table.root_angle, data[0])]
    for k in range(1, n):
        phases = tuple(TAU * int(y) / (1 << t) for y in table.branch_estimates[k - 1])
        gates.extend(_estimation_block(estimation, data[:k], phases, total))
        gates.extend(_rotation_ladder(estimation, data[k], cfg.angle_multiplier))
        gates.extend(_unestimation_block(estimation, data[:k], phases, total))
    gates.extend(_shift_gates(build_phase_stage(x, cfg.phase_bits).gates, t))
    circuit = Circuit(total, tuple(gates))
    return BuildResult(circuit, RegisterMap(estimation, data, None), 1.0)


def build_probabilistic(x: TargetVector, cfg: PrecisionConfig) -> BuildResult:
    """One-shot preparation: uniform superposition, amplitude-angle estimation,
    ancilla rotation, uncomputation, then post-selection on ancilla 0.

    ``expected_success_probability`` is the exact ancilla-0 probability
    mean(cos^2 of the quantized angles), never below ||x||^2/(2^n max x_i^2)
    because floor quantization only shrinks each angle.
    """
    if cfg.mode != PROBABILISTIC:
        raise ValueError(f"config mode is {cfg.mode!r}")
    n, t = x.num_qubits, cfg.estimation_bits
    estimation = tuple(range(t))
    data = tuple(range(t, t + n))
    ancilla = t + n
    total = t + n + 1
    table = compute_angles(compute_marginals(x), x, cfg)
    phases = tuple(TAU * int(y) / (1 << t) for y in table.amplitude_estimates)

    gates: list[Gate] = [Hadamard(q) for q in data]
    gates.extend(_estimation_block(estimation, data, phases, total))
    gates.extend(_rotation_ladder(estimation, ancilla, 4))
    gates.extend(_unestimation_block(estimation, data, phases, total))
    gates.extend(_shift_gates(build_phase_stage(x, cfg.phase_bits).gates, t))
    circuit = Circuit(total, tuple(gates))

    success = float(np.mean(np.cos(table.quantized_amplitude()) ** 2))
    return BuildResult(circuit, RegisterMap(estimation, data, ancilla), success)


def build(x: TargetVector, cfg: PrecisionConfig) -> BuildResult:
    if cfg.mode == DETERMINISTIC:
        return build_deterministic(x, cfg)
    return build_probabilistic(x, cfg)


@dataclass(frozen=True)
class PreparedState:
    """Post-selected data-register state extracted from a full simulation."""

    amplitudes: np.ndarray
    success_probability: float
    estimation_residual: float

    def state(self) -> StateVector:
        n = int(self.amplitudes.size).bit_length() - 1
        return StateVector(n, self.amplitudes)


def simulate_preparation(build_result: BuildResult) -> PreparedState:
    """Run the circuit on |0...0>, post-select the ancilla (if any) on 0, check
    the estimation register uncomputed, and return the data-register state."""
    circuit = build_result.circuit
    registers = build_result.registers
    state = apply_circuit(new_basis_state(circuit.num_qubits, 0), circuit)
    success = 1.0
    if registers.ancilla is not None:
        success, projected = project_measure(state, registers.ancilla, 0)
        if projected is None:
            raise ValueError("ancilla outcome 0 has zero probability")
        state = projected
    # Estimation qubits are the top bits, so estimation = |0...0> is the
    # leading block of the amplitude array.
    t = len(registers.estimation)
    keep = state.amplitudes[: 1 << (circuit.num_qubits - t)]
    residual = max(0.0, 1.0 - float(np.sum(np.abs(keep) ** 2)))
    if residual > LEAKAGE_TOLERANCE:
        raise LeakageError(
            f"estimation register failed to uncompute (residual {residual:.3e})"
        )
    data_amps = keep[0::2] if registers.ancilla is not None else keep
    data_amps = data_amps / np.linalg.norm(data_amps)
    return PreparedState(np.asarray(data_amps, dtype=complex), success, residual)


def prepare(x: TargetVector, cfg: PrecisionConfig) -> PreparedState:
    """Build, simulate, and post-select in one call."""
    return simulate_preparation(build(x, cfg))


def fast_path_prepare(x: TargetVector, cfg: PrecisionConfig) -> StateVector:
    """Ancilla-free reference: the state the ideal-estimation circuit produces.

    Applies the same floor-quantized angles branch-by-branch over the marginal
    tree (deterministic) or cos of the quantized amplitude angles with exact
    post-selection renormalization (probabilistic), then the quantized phases.
    No estimation register is involved.
    """
    n = x.num_qubits
    table = compute_angles(compute_marginals(x), x, cfg)
    if cfg.mode == DETERMINISTIC:
        amps = np.ones(1)
        level_angles = [np.array([table.root_angle])]
        level_angles += [table.quantized_branch(k) for k in range(1, n)]
        for angles in level_angles:
            grown = np.empty(2 * amps.size)
            grown[0::2] = amps * np.cos(angles)
            grown[1::2] = amps * np.sin(angles)
            amps = grown
    else:
        kept = np.cos(table.quantized_amplitude())
        amps = kept / np.linalg.norm(kept)
    phase_spec = quantize(x.phases, cfg.phase_bits)
    amplitudes = amps.astype(complex) * np.exp(1.0j * np.array(phase_spec.angles()))
    return StateVector(n, amplitudes)
