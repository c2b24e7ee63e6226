"""Line-oriented circuit text format.

    # comment
    name bell
    qubits 2
    step H 0, I 1
    step CNOT 0 1

Statements end at a newline or ';'. Gates: H X Y Z S T I, PHASE(theta),
U(8 reals, re/im row-major) or U(4 reals, real row-major), CNOT c t.
"""
from __future__ import annotations

import hashlib
import re

from .ir import (
    NAMED_GATES,
    Circuit,
    Gate1Q,
    Gate2Q,
    GateOp,
    Operation,
    custom_gate,
    named_gate,
    phase_gate,
    require_valid,
)

_ITEM = re.compile(
    r"^(?P<name>[A-Za-z]+)\s*(?:\((?P<args>[^()]*)\))?\s*(?P<qubits>[+-]?\d+(?:\s+[+-]?\d+)*)?\s*$"
)


class CircuitSyntaxError(Exception):
    """Raised when circuit text does not follow the grammar."""

    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


def parse_circuit(text: str, name: str = "") -> Circuit:
    """Parse and validate circuit text.

    Raises CircuitSyntaxError for grammar problems and
    CircuitValidationError for invariant violations (non-unitary gates,
    qubit indices out of range, incomplete or overlapping steps).
    """
    num_qubits: int | None = None
    steps: list[tuple[Operation, ...]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for stmt, col in _split_top_level(line, ";", base=1):
            body = stmt.strip()
            if not body:
                continue
            col += len(stmt) - len(stmt.lstrip())
            keyword, _, rest = body.partition(" ")
            rest_col = col + len(keyword) + 1
            keyword = keyword.lower()

            if keyword == "name":
                name = rest.strip()
            elif keyword == "qubits":
                if num_qubits is not None:
                    raise CircuitSyntaxError("duplicate 'qubits' header", line_no, col)
                if steps:
                    raise CircuitSyntaxError("'qubits' header must precede steps", line_no, col)
                try:
                    num_qubits = int(rest.strip())
                except ValueError:
                    raise CircuitSyntaxError(
                        f"expected an integer qubit count, got {rest.strip()!r}", line_no, rest_col
                    ) from None
            elif keyword == "step":
                if num_qubits is None:
                    raise CircuitSyntaxError("missing 'qubits' header before first step", line_no, col)
                steps.append(_parse_step(rest, line_no, rest_col))
            else:
                raise CircuitSyntaxError(f"unknown statement '{keyword}'", line_no, col)

    if num_qubits is None:
        raise CircuitSyntaxError("missing 'qubits' header", 1, 1)

    circuit = Circuit(num_qubits=num_qubits, steps=tuple(steps), name=name)
    require_valid(circuit)
    return circuit


def render_circuit(circuit: Circuit) -> str:
    """Emit the canonical text form; parse_circuit(render_circuit(c)) == c."""
    lines: list[str] = []
    if circuit.name:
        lines.append(f"name {_clean_name(circuit.name)}")
    lines.append(f"qubits {circuit.num_qubits}")
    for step in circuit.steps:
        lines.append("step " + ", ".join(_render_op(op) for op in step))
    return "\n".join(lines) + "\n"


def circuit_hash(circuit: Circuit) -> str:
    return hashlib.sha256(render_circuit(circuit).encode("utf-8")).hexdigest()


def _parse_step(text: str, line_no: int, col: int) -> tuple[Operation, ...]:
    ops: list[Operation] = []
    for item, item_col in _split_top_level(text, ",", base=col):
        body = item.strip()
        item_col += len(item) - len(item.lstrip())
        if not body:
            raise CircuitSyntaxError("empty gate in step", line_no, item_col)
        ops.append(_parse_item(body, line_no, item_col))
    return tuple(ops)


def _parse_item(body: str, line_no: int, col: int) -> Operation:
    match = _ITEM.match(body)
    if not match:
        raise CircuitSyntaxError(f"malformed gate {body!r}", line_no, col)

    gate_name = match["name"].upper()
    args_text = match["args"]
    qubits = [int(q) for q in (match["qubits"] or "").split()]

    if gate_name == "CNOT":
        if args_text is not None:
            raise CircuitSyntaxError("CNOT takes no parameters", line_no, col)
        if len(qubits) != 2:
            raise CircuitSyntaxError("CNOT needs a control and a target qubit", line_no, col)
        return Gate2Q(control=qubits[0], target=qubits[1])

    if len(qubits) != 1:
        raise CircuitSyntaxError(f"{gate_name} needs exactly one qubit", line_no, col)

    gate = _parse_gate(gate_name, args_text, line_no, col)
    return GateOp(qubit=qubits[0], gate=gate)


def _parse_gate(gate_name: str, args_text: str | None, line_no: int, col: int) -> Gate1Q:
    if gate_name in NAMED_GATES:
        if args_text is not None:
            raise CircuitSyntaxError(f"{gate_name} takes no parameters", line_no, col)
        return named_gate(gate_name)

    if args_text is None:
        raise CircuitSyntaxError(f"unknown gate '{gate_name}'", line_no, col)
    args = _parse_floats(args_text, line_no, col)

    if gate_name == "PHASE":
        if len(args) != 1:
            raise CircuitSyntaxError("PHASE takes exactly one angle", line_no, col)
        return phase_gate(args[0])
    if gate_name == "U":
        if len(args) == 8:
            return custom_gate([complex(args[k], args[k + 1]) for k in range(0, 8, 2)])
        if len(args) == 4:
            return custom_gate(args)
        raise CircuitSyntaxError(f"U takes 8 (or 4 real) values, got {len(args)}", line_no, col)
    raise CircuitSyntaxError(f"unknown gate '{gate_name}'", line_no, col)


def _parse_floats(text: str, line_no: int, col: int) -> list[float]:
    values: list[float] = []
    for piece in text.split(","):
        try:
            values.append(float(piece.strip()))
        except ValueError:
            raise CircuitSyntaxError(f"expected a number, got {piece.strip()!r}", line_no, col) from None
    return values


def _split_top_level(text: str, sep: str, base: int) -> list[tuple[str, int]]:
    """Split on ``sep`` outside parentheses; return (piece, 1-based column)."""
    pieces: list[tuple[str, int]] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            pieces.append((text[start:i], base + start))
            start = i + 1
    pieces.append((text[start:], base + start))
    return pieces


def _render_op(op: Operation) -> str:
    if isinstance(op, Gate2Q):
        return f"CNOT {op.control} {op.target}"
    gate = op.gate
    if gate.label == "PHASE":
        return f"PHASE({_fmt(gate.params[0])}) {op.qubit}"
    if gate.label == "U":
        return f"U({','.join(_fmt(v) for v in gate.params)}) {op.qubit}"
    return f"{gate.label} {op.qubit}"


def _fmt(value: float) -> str:
    return format(value, ".17g")


def _clean_name(name: str) -> str:
    return " ".join(name.replace("#", " ").replace(";", " ").split())
