"""Exact dyadic angles: integer multiples of 2*pi/2**level.

Angles on the uniform grid {2*pi*p/2**m : p = 0, ..., 2**m - 1} are carried
as the integer pair (p, m) so that synthesis and reconstruction can run on
integers alone.  Quantization onto the grid always truncates (floor), never
rounds to nearest: the grid value is the largest one not exceeding the input.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable

TAU = 2.0 * math.pi

# Grid points recomputed through floats land within a few ulps of an integer
# cell count; snap them back up so float(2*pi*p/2**m) quantizes to exactly p.
_SNAP = 8.0 * sys.float_info.epsilon


def floor_fraction(fraction: float, level: int) -> int:
    """Largest p with p/2**level <= fraction, snapped against float noise.

    ``fraction`` is an angle in turns (angle / 2*pi) and must lie in [0, 1].
    A fraction of exactly 1.0 wraps onto the top grid cell 2**level - 1.
    """
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction!r} outside [0, 1]")
    cells = 1 << level
    p = math.floor(fraction * cells + cells * _SNAP)
    return min(p, cells - 1)


@dataclass(frozen=True)
class DyadicPhase:
    """The angle 2*pi*numerator/2**level, held exactly as integers."""

    numerator: int
    level: int

    def __post_init__(self) -> None:
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if not 0 <= self.numerator < (1 << self.level):
            raise ValueError(
                f"numerator {self.numerator} outside [0, 2**{self.level})"
            )

    @property
    def radians(self) -> float:
        return TAU * self.numerator / (1 << self.level)


@dataclass(frozen=True)
class PhaseSpec:
    """2**num_qubits grid phases at a common level, one per basis index."""

    num_qubits: int
    level: int
    numerators: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise ValueError(f"num_qubits must be >= 0, got {self.num_qubits}")
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        size = 1 << self.num_qubits
        if len(self.numerators) != size:
            raise ValueError(
                f"expected {size} entries for {self.num_qubits} qubits, "
                f"got {len(self.numerators)}"
            )
        cells = 1 << self.level
        for index, p in enumerate(self.numerators):
            if not 0 <= p < cells:
                raise ValueError(
                    f"entry {index}: numerator {p} outside [0, {cells})"
                )

    @property
    def entries(self) -> tuple[DyadicPhase, ...]:
        return tuple(DyadicPhase(p, self.level) for p in self.numerators)

    def angles(self) -> tuple[float, ...]:
        cells = 1 << self.level
        return tuple(TAU * p / cells for p in self.numerators)


def quantize(angles: Iterable[float], level: int) -> PhaseSpec:
    """Floor each angle onto the 2**level grid.

    Angles must lie in [0, 2*pi) and the sequence length must be a power of
    two (one entry per basis index of some qubit count).
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    values = [float(a) for a in angles]
    size = len(values)
    if size < 1 or size & (size - 1):
        raise ValueError(f"entry count {size} is not a power of two")
    numerators = []
    for index, angle in enumerate(values):
        if not 0.0 <= angle < TAU:
            raise ValueError(f"angle {index} = {angle!r} outside [0, 2*pi)")
        numerators.append(floor_fraction(angle / TAU, level))
    return PhaseSpec(size.bit_length() - 1, level, tuple(numerators))
