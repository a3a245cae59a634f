"""Solver-agnostic mixed-integer model: variables, linear rows, LP text.

Models are immutable once built; emission and the census are pure, so a
model can be shared freely across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

NEG_INF = float("-inf")
POS_INF = float("inf")


class VarKind(Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Sense(Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class ModelError(ValueError):
    pass


class SolutionParseError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: float = 0.0
    upper: float = POS_INF
    objective_coefficient: float = 0.0

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise ModelError(f"illegal variable name {self.name!r}")
        if self.kind is VarKind.BINARY and not (0 <= self.lower and self.upper <= 1):
            raise ModelError(f"binary variable {self.name} has bounds outside [0,1]")
        if self.lower > self.upper:
            raise ModelError(f"variable {self.name}: lower bound above upper")


@dataclass(frozen=True)
class LinearRow:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: Sense
    rhs: float

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise ModelError(f"illegal row name {self.name!r}")
        if not self.terms:
            raise ModelError(f"row {self.name} has no terms")
        if len({v for v, _ in self.terms}) != len(self.terms):
            seen = set()
            for var, _ in self.terms:
                if var in seen:
                    raise ModelError(f"row {self.name}: repeated variable {var}")
                seen.add(var)


def merge_terms(terms: Iterable[tuple[str, float]]) -> tuple[tuple[str, float], ...]:
    """Sum coefficients per variable, preserving first-appearance order and
    dropping exact zeros."""
    acc: dict[str, float] = {}
    for var, coef in terms:
        if var in acc:
            acc[var] += coef
        else:
            acc[var] = coef
    return tuple(item for item in acc.items() if item[1] != 0.0)


@dataclass(frozen=True)
class MipModel:
    """A maximization model; variable and row order is the build order."""

    variables: tuple[Variable, ...]
    rows: tuple[LinearRow, ...]
    annotations: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        names = {v.name for v in self.variables}
        if len(names) != len(self.variables):
            raise ModelError("duplicate variable names")
        for row in self.rows:
            for var, _ in row.terms:
                if var not in names:
                    raise ModelError(f"row {row.name} references undeclared {var}")

    def variable_map(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}


class ModelBuilder:
    def __init__(self):
        self._variables: list[Variable] = []
        self._rows: list[LinearRow] = []
        self._annotations: dict[str, str] = {}

    def add_variable(self, name: str, kind: VarKind, lower: float = 0.0,
                     upper: float = POS_INF, objective: float = 0.0) -> str:
        self._variables.append(Variable(name, kind, lower, upper, objective))
        return name

    def add_row(self, name: str, terms: Iterable[tuple[str, float]],
                sense: Sense, rhs: float, merged: bool = False) -> None:
        """merged=True skips coefficient merging for terms the caller
        guarantees to be duplicate-free with nonzero coefficients (the row
        itself still rejects duplicates)."""
        row_terms = tuple(terms) if merged else merge_terms(terms)
        self._rows.append(LinearRow(name, row_terms, sense, rhs))

    def annotate(self, key: str, value: str) -> None:
        self._annotations[key] = value

    def build(self) -> MipModel:
        return MipModel(variables=tuple(self._variables), rows=tuple(self._rows),
                        annotations=dict(self._annotations))


def census(model: MipModel) -> tuple[int, int]:
    """(variable count, row count); bound declarations are not rows."""
    return len(model.variables), len(model.rows)


def _num(x: float) -> str:
    # shortest representation that round-trips
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _terms_text(terms: tuple[tuple[str, float], ...]) -> str:
    parts: list[str] = []
    for i, (var, coef) in enumerate(terms):
        if i == 0:
            if coef < 0:
                parts.append(f"- {_num(-coef)} {var}" if coef != -1 else f"- {var}")
            else:
                parts.append(f"{_num(coef)} {var}" if coef != 1 else var)
        else:
            sign = "+" if coef >= 0 else "-"
            mag = abs(coef)
            parts.append(f"{sign} {_num(mag)} {var}" if mag != 1 else f"{sign} {var}")
    return " ".join(parts)


def emit_lp(model: MipModel) -> str:
    """CPLEX-LP dialect text, byte-identical for identical models."""
    lines: list[str] = ["Maximize", " obj:"]
    objective_terms = tuple((v.name, v.objective_coefficient)
                            for v in model.variables if v.objective_coefficient != 0.0)
    if objective_terms:
        lines[-1] = " obj: " + _terms_text(objective_terms)
    else:
        lines[-1] = " obj: 0 " + model.variables[0].name if model.variables else " obj:"
    lines.append("Subject To")
    for row in model.rows:
        lines.append(f" {row.name}: {_terms_text(row.terms)} {row.sense.value} {_num(row.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        if v.kind is VarKind.BINARY:
            if (v.lower, v.upper) != (0.0, 1.0):
                lines.append(f" {_num(v.lower)} <= {v.name} <= {_num(v.upper)}")
            continue
        lo = "-inf" if v.lower == NEG_INF else _num(v.lower)
        hi = "+inf" if v.upper == POS_INF else _num(v.upper)
        lines.append(f" {lo} <= {v.name} <= {hi}")
    generals = [v.name for v in model.variables if v.kind is VarKind.INTEGER]
    if generals:
        lines.append("Generals")
        lines.extend(f" {name}" for name in generals)
    binaries = [v.name for v in model.variables if v.kind is VarKind.BINARY]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_solution(text: str, model: MipModel) -> tuple[dict[str, float], list[str]]:
    """Read 'name value' lines into a full assignment.

    Unknown names are collected as warnings; variables absent from the text
    default to 0.
    """
    known = {v.name for v in model.variables}
    values: dict[str, float] = {v.name: 0.0 for v in model.variables}
    warnings: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value'")
        name, value_text = parts
        try:
            value = float(value_text)
        except ValueError:
            raise SolutionParseError(f"line {lineno}: bad value {value_text!r}")
        if name not in known:
            warnings.append(f"line {lineno}: unknown variable {name}")
            continue
        values[name] = value
    return values, warnings


def objective_value(model: MipModel, assignment: dict[str, float]) -> float:
    return sum(v.objective_coefficient * assignment.get(v.name, 0.0)
               for v in model.variables)


def row_residual(row: LinearRow, assignment: dict[str, float]) -> float:
    """How far the row is from holding; 0 when satisfied."""
    lhs = sum(coef * assignment.get(var, 0.0) for var, coef in row.terms)
    if row.sense is Sense.LE:
        return max(0.0, lhs - row.rhs)
    if row.sense is Sense.GE:
        return max(0.0, row.rhs - lhs)
    return abs(lhs - row.rhs)
