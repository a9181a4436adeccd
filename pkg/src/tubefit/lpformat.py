"""Minimal LP-file-format writer and reader.

Covers the subset of the de-facto MILP interchange text format that the
exporter emits: a Minimize objective, named constraint rows, a Bounds
section, a Binaries section, and End.  The reader is deliberately small
but token-based, so it tolerates arbitrary whitespace and line wrapping,
and every file the writer produces parses back to an equivalent model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

__all__ = ["LpRow", "ParsedMilp", "write_milp", "parse_lp_text", "row_violation"]

_SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class LpRow:
    name: str
    coeffs: dict
    sense: str
    rhs: float


@dataclass(frozen=True)
class ParsedMilp:
    objective: dict
    rows: tuple
    binaries: tuple
    bounds: dict = field(default_factory=dict)
    objective_name: str = "obj"

    def row(self, name: str) -> LpRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def _term_text(parts: list[str], coeffs: Mapping[str, float]) -> None:
    first = True
    for name, value in coeffs.items():
        value = float(value)
        if value == 0.0:
            continue
        sign = "-" if value < 0.0 else "+"
        mag = abs(value)
        body = name if mag == 1.0 else f"{mag!r} {name}"
        if first:
            parts.append(body if sign == "+" else f"- {body}")
            first = False
        else:
            parts.append(f"{sign} {body}")
    if first:
        # Degenerate all-zero expression; keep the file syntactically valid.
        anchor = next(iter(coeffs), "x")
        parts.append(f"0.0 {anchor}")


def write_milp(
    objective: Mapping[str, float],
    rows: Sequence[LpRow],
    binaries: Sequence[str],
    nonneg: Sequence[str],
) -> str:
    """Render a minimization MILP.  Coefficients are written with repr so
    they survive a round trip through the reader bit-exactly."""
    lines = ["Minimize"]
    parts: list[str] = []
    _term_text(parts, objective)
    lines.append(" obj: " + " ".join(parts))
    lines.append("Subject To")
    for row in rows:
        if row.sense not in _SENSES:
            raise ValueError(f"row {row.name}: bad sense {row.sense!r}")
        parts = []
        _term_text(parts, row.coeffs)
        lines.append(
            f" {row.name}: " + " ".join(parts) + f" {row.sense} {float(row.rhs)!r}"
        )
    if nonneg:
        lines.append("Bounds")
        for name in nonneg:
            lines.append(f" {name} >= 0.0")
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"<=|>=|<|>|=|\+|-|:|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z0-9_]*"
)
_NUMBER = re.compile(r"^(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")

_SECTION_STARTS = {
    "minimize": "objective",
    "min": "objective",
    "subject to": "rows",
    "such that": "rows",
    "st": "rows",
    "s.t.": "rows",
    "bounds": "bounds",
    "bound": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "end": "end",
}


def _split_sections(text: str) -> dict:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0]  # backslash starts a comment
        stripped = line.strip()
        key = stripped.lower()
        if key in _SECTION_STARTS:
            current = _SECTION_STARTS[key]
            if current == "end":
                break
            sections.setdefault(current, [])
            continue
        if stripped and current:
            sections[current].append(stripped)
    return sections


def _tokens(lines: Sequence[str]) -> list[str]:
    out: list[str] = []
    for line in lines:
        out.extend(_TOKEN.findall(line))
    return out


def _parse_expression(tokens: list[str], pos: int) -> tuple[dict, int]:
    """Consume sign/coefficient/name terms until a sense token or the end."""
    coeffs: dict[str, float] = {}
    sign = 1.0
    coef = None
    while pos < len(tokens):
        tok = tokens[pos]
        if tok in ("<=", ">=", "=", "<", ">"):
            break
        if tok == "+":
            sign, coef = 1.0, None
        elif tok == "-":
            sign = -sign if coef is not None else -1.0
        elif _NUMBER.match(tok):
            coef = float(tok) if coef is None else coef * float(tok)
        else:
            value = sign * (1.0 if coef is None else coef)
            coeffs[tok] = coeffs.get(tok, 0.0) + value
            sign, coef = 1.0, None
        pos += 1
    return coeffs, pos


def _read_signed_number(tokens: list[str], pos: int) -> tuple[float, int]:
    sign = 1.0
    while pos < len(tokens) and tokens[pos] in ("+", "-"):
        if tokens[pos] == "-":
            sign = -sign
        pos += 1
    if pos >= len(tokens) or not _NUMBER.match(tokens[pos]):
        raise ValueError("expected a number")
    return sign * float(tokens[pos]), pos + 1


def parse_lp_text(text: str) -> ParsedMilp:
    """Parse LP-format text into coefficient dictionaries."""
    sections = _split_sections(text)
    if "objective" not in sections:
        raise ValueError("no Minimize section found")

    toks = _tokens(sections["objective"])
    pos = 0
    obj_name = "obj"
    if len(toks) >= 2 and toks[1] == ":":
        obj_name = toks[0]
        pos = 2
    objective, pos = _parse_expression(toks, pos)
    if pos != len(toks):
        raise ValueError("trailing tokens in objective")

    rows: list[LpRow] = []
    toks = _tokens(sections.get("rows", []))
    pos = 0
    auto = 0
    while pos < len(toks):
        if pos + 1 < len(toks) and toks[pos + 1] == ":":
            name = toks[pos]
            pos += 2
        else:
            name = f"c{auto}"
        auto += 1
        coeffs, pos = _parse_expression(toks, pos)
        if pos >= len(toks):
            raise ValueError(f"row {name}: missing sense")
        sense = {"<": "<=", ">": ">="}.get(toks[pos], toks[pos])
        pos += 1
        rhs, pos = _read_signed_number(toks, pos)
        rows.append(LpRow(name, coeffs, sense, rhs))

    bounds: dict[str, tuple] = {}
    toks = _tokens(sections.get("bounds", []))
    pos = 0
    while pos < len(toks):
        if _NUMBER.match(toks[pos]) or toks[pos] in ("+", "-"):
            value, pos = _read_signed_number(toks, pos)
            sense = toks[pos]
            name = toks[pos + 1]
            pos += 2
            lo, hi = bounds.get(name, (0.0, None))
            bounds[name] = (value, hi) if sense in ("<=", "<") else (lo, value)
        else:
            name = toks[pos]
            sense = toks[pos + 1]
            pos += 2
            value, pos = _read_signed_number(toks, pos)
            lo, hi = bounds.get(name, (0.0, None))
            bounds[name] = (value, hi) if sense in (">=", ">") else (lo, value)

    binaries = tuple(_tokens(sections.get("binaries", [])))
    return ParsedMilp(objective, tuple(rows), binaries, bounds, obj_name)


def row_violation(row: LpRow, values: Mapping[str, float]) -> float:
    """How far an assignment violates the row; <= 0 means satisfied."""
    lhs = sum(coef * values.get(name, 0.0) for name, coef in row.coeffs.items())
    if row.sense == "<=":
        return lhs - row.rhs
    if row.sense == ">=":
        return row.rhs - lhs
    return abs(lhs - row.rhs)
