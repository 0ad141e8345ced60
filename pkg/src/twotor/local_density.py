"""p-adic densities of reduction patterns and the Euler products built from them.

Densities are exact Fractions.  The "empirical" counterparts really count
residue pairs; they are the oracle the closed forms are tested against.

Index-weighted local sums live in Q[q]/(q^4 - p) so that the per-prime
identity between the assembled Dirichlet sums and the closed-form Euler
factors can be checked with exact arithmetic rather than floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import arithmetic as ar
from ._constants import MT1_PREFACTOR
from .curve_core import CurveParams, good_reduction_at_2, good_reduction_at_3

FAMILIES = ("CondPoly", "CubeFree", "Kappa")

ClassName = Union[str, tuple]

_MIN_M = {"Good": 1, "III": 2, "I0*": 3, "III*": 4}
_SCAN_LIMIT = 2 * 10**9  # refuse p^{2m} grids beyond this


class ToleranceUnreachable(ValueError):
    """Requested Euler-product tolerance needs a cutoff beyond the sieve bound."""


def _check_p(p: int) -> None:
    if p < 5 or not ar.is_prime(p):
        raise ValueError("requires a prime p >= 5")


def _normalize_class(cls: ClassName, k: Optional[int]) -> tuple[str, Optional[int]]:
    if isinstance(cls, tuple):
        cls, k = cls
    if cls in ("semistable", "ss"):
        if k is None or k < 1:
            raise ValueError("semistable class needs k >= 1")
        return "semistable", k
    if cls in _MIN_M:
        if k is not None:
            raise ValueError(f"class {cls} takes no k")
        return cls, None
    raise ValueError(f"unknown reduction class {cls!r}")


def density_kodaira(p: int, cls: ClassName, k: Optional[int] = None) -> Fraction:
    """Closed-form density of a valuation pattern among (a, b) mod powers of p.

    Good: (p-1)^2/p^2; III: (p-1)/p^3; I0*: (p-1)/p^4; III*: (p-1)/p^6;
    semistable with index power p^k: 2(p-1)^2/p^{k+2}.
    """
    _check_p(p)
    cls, k = _normalize_class(cls, k)
    if cls == "Good":
        return Fraction((p - 1) ** 2, p**2)
    if cls == "III":
        return Fraction(p - 1, p**3)
    if cls == "I0*":
        return Fraction(p - 1, p**4)
    if cls == "III*":
        return Fraction(p - 1, p**6)
    return Fraction(2 * (p - 1) ** 2, p ** (k + 2))


def _exact_valuation_mask(arr: np.ndarray, p: int, k: int) -> np.ndarray:
    """v_p(arr) == k elementwise; arr entries are residues in [0, p^m)."""
    return (arr % p**k == 0) & (arr % p ** (k + 1) != 0)


def _count_semistable(p: int, m: int, k: int) -> int:
    """Count (a, b) mod p^m with {v(b), v(a^2-4b)} = {0, k} by scanning the grid."""
    M = p**m
    b = np.arange(M, dtype=np.int64)
    b_is_k = _exact_valuation_mask(b, p, k)
    b_is_0 = b % p != 0
    pk, pk1 = p**k, p ** (k + 1)
    total = 0
    chunk = max(1, min(M, (1 << 24) // M))
    for lo in range(0, M, chunk):
        a = np.arange(lo, min(lo + chunk, M), dtype=np.int64)
        c = a[:, None] * a[:, None] - 4 * b[None, :]
        case1 = b_is_k[None, :] & (c % p != 0)
        case2 = b_is_0[None, :] & (c % pk == 0) & (c % pk1 != 0)
        total += int(np.count_nonzero(case1)) + int(np.count_nonzero(case2))
    return total


def density_empirical(p: int, m: int, cls: ClassName, k: Optional[int] = None) -> Fraction:
    """Count residue pairs mod p^m matching the class pattern, over p^{2m}.

    Patterns: III is p | a, p || b; I0* is p | a, p^2 || b; III* is p^2 | a,
    p^3 || b; semistable k is v(b) = k xor v(a^2-4b) = k with the other one 0;
    Good is p dividing neither b nor a^2-4b.
    """
    _check_p(p)
    cls, k = _normalize_class(cls, k)
    min_m = _MIN_M[cls] if cls != "semistable" else k + 1
    if m < min_m:
        raise ValueError(f"{cls} needs m >= {min_m}")
    if p ** (2 * m) > _SCAN_LIMIT:
        raise ValueError("residue grid too large to scan")
    M = p**m

    if cls == "Good":
        # depends on (a, b) mod p only; scale the mod-p grid count
        a = np.arange(p, dtype=np.int64)
        c = a[:, None] * a[:, None] - 4 * np.arange(p, dtype=np.int64)[None, :]
        good = (np.arange(p)[None, :] % p != 0) & (c % p != 0)
        count = int(np.count_nonzero(good)) * p ** (2 * (m - 1))
    elif cls == "semistable":
        count = _count_semistable(p, m, k)
    else:
        v_a_min, v_b_exact = {"III": (1, 1), "I0*": (1, 2), "III*": (2, 3)}[cls]
        r = np.arange(M, dtype=np.int64)
        count_a = int(np.count_nonzero(r % p**v_a_min == 0))
        count_b = int(np.count_nonzero(_exact_valuation_mask(r, p, v_b_exact)))
        count = count_a * count_b
    return Fraction(count, M * M)


# ---------------------------------------------------------------------------
# The 2,3 congruence mass.
# ---------------------------------------------------------------------------


def _residue_representative(a0: int, b0: int) -> CurveParams:
    """A valid curve whose (a, b) matches the class (a0, b0) mod 96."""
    b = b0 if b0 != 0 else 96
    if a0 * a0 == 4 * b:
        b += 96
    return CurveParams(a0, b)


def good_reduction_class_mod96() -> list[tuple[int, int]]:
    """All (a, b) mod 96 passing both congruence predicates (288 classes)."""
    out = []
    for a0 in range(96):
        for b0 in range(96):
            c = _residue_representative(a0, b0)
            if good_reduction_at_2(c) and good_reduction_at_3(c):
                out.append((a0, b0))
    return out


def good_reduction_density_2() -> Fraction:
    count = sum(
        good_reduction_at_2(_residue_representative(a0, b0))
        for a0 in range(32)
        for b0 in range(32)
    )
    return Fraction(count, 32 * 32)


def good_reduction_density_3() -> Fraction:
    count = sum(
        good_reduction_at_3(_residue_representative(a0, b0))
        for a0 in range(3)
        for b0 in range(3)
    )
    return Fraction(count, 9)


def good_reduction_density_23() -> Fraction:
    """Joint mass over (Z/96)^2; equals the product of the 2- and 3-parts."""
    joint = Fraction(len(good_reduction_class_mod96()), 96 * 96)
    assert joint == good_reduction_density_2() * good_reduction_density_3()
    return joint


@dataclass(frozen=True)
class LocalDensityTable:
    p: int
    entries: dict

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))


def local_density_table(p: int, k_max: int = 3) -> LocalDensityTable:
    entries = {
        "Good": density_kodaira(p, "Good"),
        "III": density_kodaira(p, "III"),
        "I0*": density_kodaira(p, "I0*"),
        "III*": density_kodaira(p, "III*"),
    }
    for k in range(1, k_max + 1):
        entries[("semistable", k)] = density_kodaira(p, "semistable", k)
    table = LocalDensityTable(p, entries)
    assert all(0 < v < 1 for v in entries.values())
    assert table.total() < 1
    return table


# ---------------------------------------------------------------------------
# Exact arithmetic in Q[q]/(q^4 - p), q standing for p^{1/4}.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Q4:
    """Element c0 + c1 q + c2 q^2 + c3 q^3 with q^4 = p, coefficients rational."""

    p: int
    coeffs: tuple

    @classmethod
    def rational(cls, p: int, x) -> "Q4":
        return cls(p, (Fraction(x), Fraction(0), Fraction(0), Fraction(0)))

    @classmethod
    def q_power(cls, p: int, k: int) -> "Q4":
        """q^k reduced by q^4 = p."""
        scalar = Fraction(p) ** (k // 4)
        coeffs = [Fraction(0)] * 4
        coeffs[k % 4] = scalar
        return cls(p, tuple(coeffs))

    def _coerce(self, other) -> "Q4":
        if isinstance(other, Q4):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        return Q4.rational(self.p, other)

    def __add__(self, other) -> "Q4":
        o = self._coerce(other)
        return Q4(self.p, tuple(x + y for x, y in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other) -> "Q4":
        o = self._coerce(other)
        return Q4(self.p, tuple(x - y for x, y in zip(self.coeffs, o.coeffs)))

    def __mul__(self, other) -> "Q4":
        o = self._coerce(other)
        raw = [Fraction(0)] * 7
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(o.coeffs):
                raw[i + j] += x * y
        out = list(raw[:4])
        for i in range(4, 7):
            out[i - 4] += raw[i] * self.p
        return Q4(self.p, tuple(out))

    __rmul__ = __mul__

    def to_float(self):
        q = np.float128(self.p) ** np.float128(0.25)
        acc = np.float128(0)
        for i, c in enumerate(self.coeffs):
            acc += np.float128(c.numerator) / np.float128(c.denominator) * q**i
        return acc


# ---------------------------------------------------------------------------
# Euler factors and products.
# ---------------------------------------------------------------------------


def euler_factor_q4(p: int, family: str) -> Q4:
    """Exact local factor as an element of Q[q]/(q^4 - p)."""
    _check_p(p)
    one = Fraction(1)
    if family == "CondPoly":
        return Q4.rational(p, one - Fraction(1, p**6))
    if family == "CubeFree":
        const = one - Fraction(2 * p - 1, p**3)
        q3 = Fraction(2 * (p - 1) ** 2, p**4)
        return Q4(p, (const, Fraction(0), Fraction(0), q3))
    if family == "Kappa":
        # 1 - 1/p^2 + (p-1) q^2/p^3 + 2(p-1)(1 + q + q^2 + q^3)/p^3
        w = Fraction(2 * (p - 1), p**3)
        const = one - Fraction(1, p**2) + w
        return Q4(p, (const, w, Fraction(p - 1, p**3) + w, w))
    raise ValueError(f"unknown family {family!r}")


def euler_factor(p: int, family: str) -> float:
    return float(euler_factor_q4(p, family).to_float())


def dirichlet_local_sum_q4(p: int, family: str) -> Q4:
    """sum over reduction patterns of density * (index p-part)^{3/4}.

    Index p-parts: 1 for Good and III, p^{k-1} for semistable k, p^2 for I0*,
    p^4 for III*.  CondPoly applies no index weight (ordering is by the
    conductor polynomial) and must sum all minimal patterns to 1 - p^{-6};
    CubeFree keeps patterns with v(conductor poly) <= 2; Kappa keeps all.
    """
    _check_p(p)
    good = density_kodaira(p, "Good")
    iii = density_kodaira(p, "III")
    if family == "CondPoly":
        ss_all = Fraction(2 * (p - 1), p**2)  # sum of 2(p-1)^2/p^{k+2}, k >= 1
        additive_parts = [
            iii,  # p | a, p || b
            Fraction(p - 1, p**4),  # p | a, p^2 || b
            Fraction((p - 1) ** 2, p**6),  # p || a, p^3 || b
            Fraction(p - 1, p**6),  # p^2 | a, p^3 || b
            Fraction(1, p**5) - Fraction(1, p**6),  # p | a, p^4 | b, minimal
        ]
        total = good + ss_all + sum(additive_parts)
        assert total == 1 - Fraction(1, p**6)
        return Q4.rational(p, total)
    if family == "CubeFree":
        ss1 = density_kodaira(p, "semistable", 1)
        ss2 = density_kodaira(p, "semistable", 2)
        return (
            Q4.rational(p, good + ss1 + iii)
            + Q4.q_power(p, 3) * ss2
        )
    if family == "Kappa":
        # semistable sum: 2(p-1)^2/p^3 * sum_j q^{-j} = 2(p-1)(p+q+q^2+q^3)/p^3
        w = Fraction(2 * (p - 1), p**3)
        ss = Q4(p, (w * p, w, w, w))
        out = Q4.rational(p, good + iii) + ss
        out = out + Q4.q_power(p, 6) * density_kodaira(p, "I0*")
        out = out + Q4.q_power(p, 12) * density_kodaira(p, "III*")
        return out
    raise ValueError(f"unknown family {family!r}")


# Tail of sum_{p > P} |factor - 1|, via pi(t) <= 1.3 t/log t and partial
# summation: sum p^{-theta} <= (1.3 theta/(theta-1)) P^{1-theta}/log P.
# C_DEV bounds the deviation coefficient |factor(p) - 1| <= C_DEV p^{-theta}.
_TAIL_PARAMS = {"CondPoly": (6.0, 1.0), "CubeFree": (1.25, 2.2), "Kappa": (1.25, 3.0)}

MAX_EULER_CUTOFF = 2 * 10**8


def _tail_bound(family: str, P: float) -> float:
    theta, c_dev = _TAIL_PARAMS[family]
    return 1.3 * theta / (theta - 1) * c_dev * P ** (1 - theta) / np.log(P)


def _tail_cutoff(family: str, tol: float) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if _tail_bound(family, MAX_EULER_CUTOFF) > tol:
        raise ToleranceUnreachable(
            f"{family}: tail bound at cutoff {MAX_EULER_CUTOFF} exceeds tol {tol}"
        )
    lo, hi = 10, MAX_EULER_CUTOFF
    while lo < hi:
        mid = (lo + hi) // 2
        if _tail_bound(family, mid) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _factor_values(primes: np.ndarray, family: str):
    """Vectorized local factors at the given primes, in extended precision."""
    p = primes.astype(np.float128)
    if family == "CondPoly":
        return 1 - p**-6
    if family == "CubeFree":
        return 1 - (2 * p - 1) / p**3 + 2 * (p - 1) ** 2 * p ** np.float128(-3.25)
    if family == "Kappa":
        q = p ** np.float128(0.25)
        return (
            1 - p**-2 + (p - 1) * p ** np.float128(-2.5) + 2 * (p - 1) ** 2 / (p**3 * (q - 1))
        )
    raise ValueError(f"unknown family {family!r}")


def _product_up_to(family: str, P: int) -> float:
    primes = ar.primes_up_to(P)
    primes = primes[primes >= 5]
    return float(np.prod(_factor_values(primes, family)))


def euler_product(family: str, tol: float) -> tuple[float, int]:
    """(product over 5 <= p <= P, P), with P set so the tail bound is < tol."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    P = _tail_cutoff(family, tol)
    return _product_up_to(family, P), P


def dirichlet_index_sum(family: str, tol: float) -> tuple[float, int]:
    """Euler product of the index-weighted local density sums.

    Assembled from the pattern densities; agrees with euler_product factor by
    factor (an exact identity in Q[q]/(q^4 - p)), so the same tail logic
    applies.  The semistable geometric series has ratio p^{-1/4} < 1, so no
    divergence is possible for prime p; the guard is kept for clarity.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    P = _tail_cutoff(family, tol)
    primes = ar.primes_up_to(min(P, 10**5))
    primes = primes[primes >= 5]
    acc = np.float128(1)
    for p in primes:
        acc *= dirichlet_local_sum_q4(int(p), family).to_float()
    if P > 10**5:
        # beyond the exact-assembly range, use the identical closed forms
        rest = ar.primes_up_to(P)
        rest = rest[rest > 10**5]
        acc *= np.prod(_factor_values(rest, family))
    return float(acc), P


_DEFAULT_TOL = {"CondPoly": 1e-10, "CubeFree": 0.01, "Kappa": 0.01}


def mt1_constant(family: str, tol: Optional[float] = None) -> float:
    """Leading constant for the X^{3/4} count: prefactor times Euler product."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if tol is None:
        tol = _DEFAULT_TOL[family]
    value, _ = euler_product(family, tol)
    return float(MT1_PREFACTOR) * value
