"""Plain-text gate lists, one gate per line in application order.

Grammar (header first, then gates; later ``#`` lines are comments):

    # qprep v1 n=<data qubits> qubits=<total qubits>
    H q=<qubit>
    X q=<qubit>
    CZP l=<signed level> q=<qubit,qubit,...>
    RY theta=<radians> q=<qubit> c=<controls or -> [p=<int> m=<int>]
    DIAG j=<power> reg=<qubits> c=<controls or -> phases=<radians,...> [p=<ints> m=<int>]

Angles are written with 17 significant digits, which round-trips doubles
exactly; angles that are dyadic multiples of 2*pi additionally carry a
``p=... m=...`` annotation meaning theta = 2*pi*p/2**m, which the parser
prefers.  Fourier blocks are expanded into primitive gates on writing.
"""

from __future__ import annotations

import math
from typing import Iterable, TextIO

from .sim import (
    Circuit,
    ControlledZPow,
    DiagonalOracle,
    Gate,
    Hadamard,
    PauliX,
    QFTBlock,
    RotationY,
    qft_circuit,
)

TAU = 2.0 * math.pi

_MAX_DYADIC_LEVEL = 32


def format_float(value: float) -> str:
    return f"{value:.17g}"


def as_dyadic(angle: float) -> tuple[int, int] | None:
    """(p, m) with angle == 2*pi*p/2**m exactly as floats, if one exists."""
    for level in range(1, _MAX_DYADIC_LEVEL + 1):
        p = round(angle * (1 << level) / TAU)
        if TAU * p / (1 << level) == angle:
            return p, level
    return None


def _indices(values: Iterable[int]) -> str:
    return ",".join(str(v) for v in values)


def _controls(values: tuple[int, ...]) -> str:
    return _indices(values) if values else "-"


def gate_lines(gate: Gate) -> list[str]:
    if isinstance(gate, Hadamard):
        return [f"H q={gate.target}"]
    if isinstance(gate, PauliX):
        return [f"X q={gate.target}"]
    if isinstance(gate, ControlledZPow):
        return [f"CZP l={gate.level} q={_indices(gate.qubits)}"]
    if isinstance(gate, RotationY):
        line = (f"RY theta={format_float(gate.angle)} q={gate.target} "
                f"c={_controls(gate.controls)}")
        dyadic = as_dyadic(gate.angle)
        if dyadic is not None:
            line += f" p={dyadic[0]} m={dyadic[1]}"
        return [line]
    if isinstance(gate, DiagonalOracle):
        line = (f"DIAG j={gate.power} reg={_indices(gate.register)} "
                f"c={_controls(gate.controls)} "
                f"phases={','.join(format_float(p) for p in gate.phases)}")
        dyadics = [as_dyadic(p) for p in gate.phases]
        if all(d is not None for d in dyadics):
            level = max(d[1] for d in dyadics)
            numerators = [d[0] << (level - d[1]) for d in dyadics]
            line += f" p={_indices(numerators)} m={level}"
        return [line]
    if isinstance(gate, QFTBlock):
        expanded = qft_circuit(gate.register, gate.inverse,
                               num_qubits=max(gate.register) + 1)
        lines: list[str] = []
        for sub in expanded.gates:
            lines.extend(gate_lines(sub))
        return lines
    raise TypeError(f"unknown gate type {type(gate).__name__}")


def circuit_lines(circuit: Circuit, data_qubits: int) -> list[str]:
    lines = [f"# qprep v1 n={data_qubits} qubits={circuit.num_qubits}"]
    for gate in circuit.gates:
        lines.extend(gate_lines(gate))
    return lines


def write_circuit(handle: TextIO, circuit: Circuit, data_qubits: int) -> None:
    for line in circuit_lines(circuit, data_qubits):
        handle.write(line)
        handle.write("\n")


def save_circuit(path, circuit: Circuit, data_qubits: int) -> None:
    with open(path, "w") as handle:
        write_circuit(handle, circuit, data_qubits)


def _parse_fields(parts: list[str]) -> dict[str, str]:
    fields: dict[str, str] = {}
    for part in parts:
        key, _, value = part.partition("=")
        if not _ or key in fields:
            raise ValueError(f"malformed field {part!r}")
        fields[key] = value
    return fields


def _parse_index_list(text: str) -> tuple[int, ...]:
    if text == "-" or text == "":
        return ()
    return tuple(int(v) for v in text.split(","))


def parse_gate_line(line: str) -> Gate:
    parts = line.split()
    mnemonic, fields = parts[0], _parse_fields(parts[1:])
    if mnemonic == "H":
        return Hadamard(int(fields["q"]))
    if mnemonic == "X":
        return PauliX(int(fields["q"]))
    if mnemonic == "CZP":
        return ControlledZPow(int(fields["l"]), _parse_index_list(fields["q"]))
    if mnemonic == "RY":
        if "p" in fields and "m" in fields:
            theta = TAU * int(fields["p"]) / (1 << int(fields["m"]))
        else:
            theta = float(fields["theta"])
        return RotationY(theta, int(fields["q"]), _parse_index_list(fields["c"]))
    if mnemonic == "DIAG":
        if "p" in fields and "m" in fields:
            level = int(fields["m"])
            phases = tuple(TAU * int(p) / (1 << level)
                           for p in fields["p"].split(","))
        else:
            phases = tuple(float(v) for v in fields["phases"].split(","))
        return DiagonalOracle(_parse_index_list(fields["reg"]), phases,
                              int(fields["j"]), _parse_index_list(fields["c"]))
    raise ValueError(f"unknown gate mnemonic {mnemonic!r}")


def parse_circuit(text: str) -> tuple[int, Circuit]:
    """Returns (data qubit count, circuit) from gate-list text."""
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines or not lines[0].startswith("# qprep v1 "):
        raise ValueError("missing '# qprep v1' header line")
    header = _parse_fields(lines[0].split()[3:])
    data_qubits = int(header["n"])
    num_qubits = int(header["qubits"])
    gates = [parse_gate_line(line) for line in lines[1:]
             if not line.startswith("#")]
    return data_qubits, Circuit(num_qubits, tuple(gates))


def load_circuit(path) -> tuple[int, Circuit]:
    with open(path) as handle:
        return parse_circuit(handle.read())
