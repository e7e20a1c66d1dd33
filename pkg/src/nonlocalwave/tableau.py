"""Butcher tableaus: construction, text-file parsing, and the shipped methods.

File format (whitespace separated, ``#`` comments and blank lines ignored):
line 1 holds the stage count ``s``; each of the next ``s`` lines holds the
node ``p_i`` followed by row ``i`` of the stage matrix ``G``; the final line
holds the ``s`` weights.  Entries may be decimals or exact rationals such as
``1/6`` (parsed through :class:`fractions.Fraction` to avoid rounding drift
in trace comparisons).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import TableauParseError

_EXPLICIT_TOL = 0.0  # strictly lower triangular means exact zeros


@dataclass(frozen=True)
class ButcherTableau:
    """Stage matrix ``matrix``, weights, and nodes of a Runge-Kutta method."""

    matrix: np.ndarray
    weights: np.ndarray
    nodes: np.ndarray
    name: str = "tableau"
    exact: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        g = np.asarray(self.matrix, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        p = np.asarray(self.nodes, dtype=np.float64)
        s = w.shape[0]
        if g.shape != (s, s) or p.shape != (s,):
            raise ValueError("inconsistent tableau dimensions")
        object.__setattr__(self, "matrix", g)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "nodes", p)
        if abs(w.sum() - 1.0) > 1e-12:
            warnings.warn(
                f"tableau {self.name!r}: weights sum to {w.sum():.6g}, not 1",
                stacklevel=2,
            )

    @property
    def stages(self) -> int:
        return self.weights.shape[0]

    @property
    def explicit(self) -> bool:
        return bool(np.all(np.abs(np.triu(self.matrix)) <= _EXPLICIT_TOL))

    def __hash__(self):
        return hash((self.name, self.stages, self.matrix.tobytes(),
                     self.weights.tobytes()))


def _parse_entry(token: str, line_no: int) -> Fraction:
    try:
        if "/" in token:
            return Fraction(token)
        return Fraction(token)  # Fraction accepts decimal strings exactly
    except (ValueError, ZeroDivisionError) as exc:
        raise TableauParseError(f"bad entry {token!r} on line {line_no}", line_no) from exc


def parse_tableau(text: str, name: str = "tableau") -> ButcherTableau:
    """Parse the plain-text tableau format described in the module docstring."""
    rows = []
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            rows.append((i, stripped.split()))
    if not rows:
        raise TableauParseError("empty tableau file", None)
    line_no, head = rows[0]
    if len(head) != 1:
        raise TableauParseError(f"line {line_no}: expected the stage count alone", line_no)
    try:
        s = int(head[0])
    except ValueError as exc:
        raise TableauParseError(f"line {line_no}: bad stage count {head[0]!r}", line_no) from exc
    if s <= 0:
        raise TableauParseError(f"line {line_no}: stage count must be positive", line_no)
    if len(rows) != s + 2:
        raise TableauParseError(
            f"expected {s + 2} content lines for {s} stages, found {len(rows)}", None
        )
    g = [[Fraction(0)] * s for _ in range(s)]
    p = [Fraction(0)] * s
    for i in range(s):
        line_no, toks = rows[1 + i]
        if len(toks) != s + 1:
            raise TableauParseError(
                f"line {line_no}: expected node plus {s} row entries", line_no
            )
        p[i] = _parse_entry(toks[0], line_no)
        for j in range(s):
            g[i][j] = _parse_entry(toks[1 + j], line_no)
    line_no, toks = rows[s + 1]
    if len(toks) != s:
        raise TableauParseError(f"line {line_no}: expected {s} weights", line_no)
    w = [_parse_entry(t, line_no) for t in toks]
    return ButcherTableau(
        matrix=np.array([[float(x) for x in row] for row in g]),
        weights=np.array([float(x) for x in w]),
        nodes=np.array([float(x) for x in p]),
        name=name,
        exact=(tuple(tuple(row) for row in g), tuple(w), tuple(p)),
    )


_SHIPPED = ("forward-euler", "backward-euler", "crank-nicolson", "weighted-euler", "rk4")


def load_tableau(source) -> ButcherTableau:
    """Load a tableau from a shipped name, a path, or literal text."""
    s = str(source)
    if s in _SHIPPED:
        text = resources.files("nonlocalwave.tableaus").joinpath(f"{s}.txt").read_text()
        return parse_tableau(text, name=s)
    path = Path(s)
    if path.exists():
        return parse_tableau(path.read_text(), name=path.stem)
    raise TableauParseError(
        f"unknown tableau {source!r}; shipped names are {', '.join(_SHIPPED)}", None
    )


def forward_euler() -> ButcherTableau:
    return load_tableau("forward-euler")


def backward_euler() -> ButcherTableau:
    return load_tableau("backward-euler")


def crank_nicolson() -> ButcherTableau:
    return load_tableau("crank-nicolson")


def rk4() -> ButcherTableau:
    return load_tableau("rk4")


def weighted_euler(delta: float = 0.5) -> ButcherTableau:
    """Two-stage semi-implicit method with implicit weight ``delta``."""
    d = float(delta)
    return ButcherTableau(
        matrix=np.array([[0.0, 0.0], [1.0 - d, d]]),
        weights=np.array([1.0 - d, d]),
        nodes=np.array([0.0, 1.0]),
        name=f"weighted-euler({d:g})",
    )
