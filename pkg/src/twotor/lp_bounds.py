"""Exact-rational linear programming for the Szpiro-ratio exponent bound.

The program lives on nine exponent variables
(gamma_I0*, gamma_III, gamma_III*, alpha1, alpha2, beta1, beta2, upsilon, nu).
Everything is done in Fractions: the target is exact equality of the simplex
optimum with the closed form 3/2 - 3 delta + 3 r, so floats have no place here.

Rows 4 and 5 of the right-hand side carry r/2, not r: with r the closed-form
primal certificate would violate those rows, and the dual certificate value
would come out as 3/2 - 3 delta + 6 r.  r/2 is the unique choice under which
both certificates are feasible and tight at the same optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

HALF = Fraction(1, 2)


class LPError(Exception):
    pass


class LPInfeasibleError(LPError):
    pass


class LPUnboundedError(LPError):
    pass


def _frac_tuple(xs) -> tuple:
    return tuple(Fraction(x) for x in xs)


@dataclass(frozen=True)
class LinearProgram:
    """sense "min_ge": min c.x, Ax >= b, x >= 0; "max_le": max c.x, Ax <= b, x >= 0."""

    sense: str
    objective: tuple
    matrix: tuple
    rhs: tuple

    def __post_init__(self) -> None:
        if self.sense not in ("min_ge", "max_le"):
            raise ValueError(f"unknown sense {self.sense!r}")
        n = len(self.objective)
        if len(self.matrix) != len(self.rhs):
            raise ValueError("row count mismatch between matrix and rhs")
        for row in self.matrix:
            if len(row) != n:
                raise ValueError("matrix width does not match objective length")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.matrix)


_OBJECTIVE = _frac_tuple((6, 0, 12, 0, 0, 3, 3, 0, 0))
_MATRIX = tuple(
    _frac_tuple(row)
    for row in (
        (-2, -2, -2, -1, -1, 0, 0, -1, -1),
        (0, 0, 0, 1, 1, 0, 0, 0, 0),
        (0, 0, 0, 1, -1, 1, -1, 0, 0),
        (0, 0, 0, -1, 0, 1, 0, 0, 0),
        (0, 0, 0, 0, -1, 0, 1, 0, 0),
    )
)


def build_primal(delta, r) -> LinearProgram:
    """The 5x9 exponent program at parameters (delta, r), exact rationals."""
    delta, r = Fraction(delta), Fraction(r)
    if not 0 <= delta < HALF:
        raise ValueError("need 0 <= delta < 1/2")
    if r < 0:
        raise ValueError("need r >= 0")
    rhs = (Fraction(-1), HALF - delta, Fraction(0), r / 2, r / 2)
    return LinearProgram("min_ge", _OBJECTIVE, _MATRIX, rhs)


def build_dual(lp: LinearProgram) -> LinearProgram:
    """Symmetric dual; applying it twice returns the original program."""
    transpose = tuple(
        tuple(lp.matrix[i][j] for i in range(lp.n_rows)) for j in range(lp.n_vars)
    )
    sense = "max_le" if lp.sense == "min_ge" else "min_ge"
    return LinearProgram(sense, lp.rhs, transpose, lp.objective)


def certificate_primal(delta, r) -> tuple:
    delta, r = Fraction(delta), Fraction(r)
    s = HALF - delta
    t = HALF + delta
    return _frac_tuple(
        (0, 0, 0, s / 2, s / 2, (s + r) / 2, (s + r) / 2, t / 2, t / 2)
    )


def certificate_dual() -> tuple:
    return _frac_tuple((0, 3, 0, 3, 3))


def certificate_value(delta, r) -> Fraction:
    return Fraction(3, 2) - 3 * Fraction(delta) + 3 * Fraction(r)


def objective_value(lp: LinearProgram, x: Sequence) -> Fraction:
    if len(x) != lp.n_vars:
        raise ValueError("dimension mismatch")
    return sum((Fraction(c) * Fraction(v) for c, v in zip(lp.objective, x)), Fraction(0))


def check_feasible(lp: LinearProgram, x: Sequence) -> bool:
    if len(x) != lp.n_vars:
        raise ValueError("dimension mismatch")
    xs = _frac_tuple(x)
    if any(v < 0 for v in xs):
        return False
    for row, b in zip(lp.matrix, lp.rhs):
        lhs = sum((c * v for c, v in zip(row, xs)), Fraction(0))
        if lp.sense == "min_ge" and lhs < b:
            return False
        if lp.sense == "max_le" and lhs > b:
            return False
    return True


# ---------------------------------------------------------------------------
# Two-phase simplex, Bland's rule, exact Fractions.
# ---------------------------------------------------------------------------


def _pivot(tab, basis, row, col) -> None:
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for i, line in enumerate(tab):
        if i != row and line[col] != 0:
            f = line[col]
            tab[i] = [a - f * b for a, b in zip(line, tab[row])]
    basis[row] = col


def _bland_step(tab, basis, n_cols) -> bool:
    """One simplex step on tableau with objective in the last row.

    Returns False at optimality; raises LPUnboundedError on an unbounded ray.
    """
    obj = tab[-1]
    col = next((j for j in range(n_cols) if obj[j] < 0), None)
    if col is None:
        return False
    best: Optional[tuple] = None
    for i in range(len(tab) - 1):
        if tab[i][col] > 0:
            ratio = tab[i][-1] / tab[i][col]
            key = (ratio, basis[i])
            if best is None or key < best[0]:
                best = (key, i)
    if best is None:
        raise LPUnboundedError(f"unbounded along variable index {col}")
    _pivot(tab, basis, best[1], col)
    return True


def _simplex_min_eq(c, A, b):
    """min c.x subject to Ax = b, x >= 0; returns (optimum, x)."""
    m, n = len(A), len(c)
    rows = [list(A[i]) + [b[i]] for i in range(m)]
    for row in rows:
        if row[-1] < 0:
            row[:] = [-v for v in row]
    # phase 1: artificials n..n+m-1
    tab = [rows[i][:-1] + [Fraction(int(i == j)) for j in range(m)] + [rows[i][-1]] for i in range(m)]
    basis = [n + i for i in range(m)]
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m + [Fraction(0)]
    for i in range(m):  # price out the artificial basis
        phase1 = [a - b_ for a, b_ in zip(phase1, tab[i])]
    tab.append(phase1)
    while _bland_step(tab, basis, n + m):
        pass
    if -tab[-1][-1] != 0:
        raise LPInfeasibleError(f"phase-1 optimum {-tab[-1][-1]} > 0")
    # drive any lingering artificial out of the basis (degenerate rows)
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)
    keep = [i for i in range(m) if basis[i] < n]
    tab = [
        [tab[i][j] for j in range(n)] + [tab[i][-1]]
        for i in keep
    ]
    basis = [basis[i] for i in keep]
    obj = list(c) + [Fraction(0)]
    for i, bi in enumerate(basis):  # reduced costs for the inherited basis
        if obj[bi] != 0:
            f = obj[bi]
            obj = [a - f * b_ for a, b_ in zip(obj, tab[i])]
    tab.append(obj)
    while _bland_step(tab, basis, n):
        pass
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        x[bi] = tab[i][-1]
    return -tab[-1][-1], tuple(x)


def solve_simplex(lp: LinearProgram):
    """(optimum, argopt) in the program's own sense, exact rationals."""
    n, m = lp.n_vars, lp.n_rows
    if lp.sense == "min_ge":
        # surplus variables: Ax - s = b
        A = [list(lp.matrix[i]) + [Fraction(-int(i == j)) for j in range(m)] for i in range(m)]
        c = list(lp.objective) + [Fraction(0)] * m
        opt, x = _simplex_min_eq(c, A, list(lp.rhs))
        return opt, x[:n]
    # max c.x, Ax <= b: slacks, then minimize -c.x
    A = [list(lp.matrix[i]) + [Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    c = [-v for v in lp.objective] + [Fraction(0)] * m
    opt, x = _simplex_min_eq(c, A, list(lp.rhs))
    return -opt, x[:n]


def sweep_grid(deltas=None, rs=None) -> list:
    """Certificate vs simplex on a (delta, r) grid; exact equality expected.

    Returns rows (delta, r, certificate_value, simplex_value, match).
    """
    if deltas is None:
        deltas = [Fraction(k, 100) for k in range(11)]
    if rs is None:
        rs = [Fraction(0), Fraction(1, 200), Fraction(1, 102), Fraction(1, 100)]
    rows = []
    for d in deltas:
        for r in rs:
            lp = build_primal(d, r)
            cert = certificate_value(d, r)
            assert check_feasible(lp, certificate_primal(d, r))
            assert check_feasible(build_dual(lp), certificate_dual())
            opt, _ = solve_simplex(lp)
            rows.append((Fraction(d), Fraction(r), cert, opt, cert == opt))
    return rows


# ---------------------------------------------------------------------------
# Exponent vectors and the averaged Szpiro identity.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentVector:
    """Nine log-ratio exponents (components of x in the program above)."""

    gamma_I0star: float
    gamma_III: float
    gamma_IIIstar: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    upsilon: float
    nu: float

    def __post_init__(self) -> None:
        for name, v in self.as_dict().items():
            if v < 0:
                raise ValueError(f"component {name} is negative: {v}")

    def as_dict(self) -> dict:
        return {
            "gamma_I0star": self.gamma_I0star,
            "gamma_III": self.gamma_III,
            "gamma_IIIstar": self.gamma_IIIstar,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "upsilon": self.upsilon,
            "nu": self.nu,
        }

    def as_tuple(self) -> tuple:
        return (
            self.gamma_I0star,
            self.gamma_III,
            self.gamma_IIIstar,
            self.alpha1,
            self.alpha2,
            self.beta1,
            self.beta2,
            self.upsilon,
            self.nu,
        )


def avg_szpiro_from_exponents(v: ExponentVector):
    """3/2 + (6 g1 + 12 g3 + 3 b1 + 3 b2) / (2 (2(g1+g2+g3) + a1 + u + a2 + n))."""
    gs = v.gamma_I0star + v.gamma_III + v.gamma_IIIstar
    denom = 2 * (2 * gs + v.alpha1 + v.upsilon + v.alpha2 + v.nu)
    if denom <= 0:
        raise ValueError("denominator must be positive")
    num = 6 * v.gamma_I0star + 12 * v.gamma_IIIstar + 3 * v.beta1 + 3 * v.beta2
    if isinstance(num, Fraction) and isinstance(denom, Fraction):
        return Fraction(3, 2) + num / denom
    return 1.5 + num / denom
