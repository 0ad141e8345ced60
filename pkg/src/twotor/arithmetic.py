"""Exact integer arithmetic: factorization, valuations, square-free structure.

Everything downstream (reduction types, conductors, censuses, tail statistics)
consumes factorizations produced here.  The workhorse is a smallest-prime-factor
sieve that grows lazily toward a configurable cap (env CENSUS_SIEVE_BOUND,
default 10**8); values past the sieve fall back to trial division by small
primes, then deterministic Miller-Rabin, then Pollard rho with Brent cycling.

Negative inputs carry an explicit sign; all divisibility logic runs on |n|.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DEFAULT_SIEVE_CAP = 10**8
_SIEVE_ENV = "CENSUS_SIEVE_BOUND"

# Initial sieve size. Small so importing the package stays cheap; grows on demand.
_INITIAL_SIEVE = 1 << 16

# Deterministic Miller-Rabin witness set, valid for n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def sieve_cap() -> int:
    raw = os.environ.get(_SIEVE_ENV)
    if raw is None:
        return DEFAULT_SIEVE_CAP
    cap = int(raw)
    if cap < _INITIAL_SIEVE:
        raise ValueError(f"{_SIEVE_ENV} must be at least {_INITIAL_SIEVE}")
    return cap


class _SpfSieve:
    """Lazily grown smallest-prime-factor table.

    spf[n] = smallest prime factor of n (spf[0] = spf[1] = 0).  Growth doubles
    at least, so repeated slightly-larger queries do not thrash.  The table is
    immutable between growths and reads are safe for concurrent use.
    """

    def __init__(self) -> None:
        self._spf = self._build(_INITIAL_SIEVE)

    @staticmethod
    def _build(limit: int) -> np.ndarray:
        spf = np.zeros(limit + 1, dtype=np.uint32)
        spf[2::2] = 2
        n = limit
        for p in range(3, math.isqrt(n) + 1, 2):
            if spf[p] == 0:
                spf[p * p:: 2 * p][spf[p * p:: 2 * p] == 0] = p
        odd = np.arange(3, n + 1, 2, dtype=np.uint32)
        mask = spf[3::2] == 0
        spf[3::2][mask] = odd[mask]
        return spf

    @property
    def limit(self) -> int:
        return len(self._spf) - 1

    def ensure(self, n: int) -> bool:
        """Grow the table to cover n if allowed; return True when covered."""
        if n <= self.limit:
            return True
        cap = sieve_cap()
        if n > cap:
            return False
        target = max(n, 2 * self.limit)
        target = min(target, cap)
        self._spf = self._build(target)
        return n <= self.limit

    def spf(self, n: int) -> int:
        return int(self._spf[n])

    def array(self) -> np.ndarray:
        return self._spf


_sieve = _SpfSieve()


def ensure_sieve(n: int) -> bool:
    """Pre-grow the SPF table toward n (clamped to the cap); True when covered.

    Batch callers use this once up front so forked workers inherit the table
    instead of each growing their own through the doubling ladder.
    """
    return _sieve.ensure(max(2, min(n, sieve_cap())))


def smallest_prime_factor(n: int) -> int:
    """Smallest prime factor of n >= 2 (sieve-backed, any size via fallback)."""
    if n < 2:
        raise ValueError("smallest_prime_factor needs n >= 2")
    if _sieve.ensure(n):
        return _sieve.spf(n)
    for f in factorize(n).factors:
        return f[0]
    raise AssertionError("unreachable")


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes, not the SPF table)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p:: p] = False
    return np.nonzero(is_p)[0].astype(np.int64)


_TRIAL_PRIMES: np.ndarray | None = None


def _trial_primes() -> np.ndarray:
    # Primes to 10**5: enough to trial-divide anything <= 10**10 down to a
    # cofactor that is 1, prime, or a two-prime product for rho.
    global _TRIAL_PRIMES
    if _TRIAL_PRIMES is None:
        _TRIAL_PRIMES = primes_up_to(10**5)
    return _TRIAL_PRIMES


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24; trust the witness set."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of odd composite n (Brent-cycle Pollard rho)."""
    if n % 2 == 0:
        return 2
    # Deterministic parameter sweep keeps factorize() reproducible.
    for c in range(1, 100):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"pollard rho failed on {n}")


@dataclass(frozen=True)
class Factorization:
    """sign * prod(p**e) == value; primes strictly increasing, exponents >= 1."""

    value: int
    sign: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.value == 0:
            raise ValueError("zero has no factorization")

    def reassemble(self) -> int:
        n = self.sign
        for p, e in self.factors:
            n *= p**e
        return n


def _factor_abs(n: int) -> list[tuple[int, int]]:
    """Factor n >= 1 into sorted (prime, exponent) pairs."""
    out: dict[int, int] = {}
    if _sieve.ensure(n):
        spf = _sieve.array()
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = out.get(p, 0) + e
    else:
        for p in _trial_primes():
            p = int(p)
            if p * p > n:
                break
            while n % p == 0:
                n //= p
                out[p] = out.get(p, 0) + 1
        stack = [n] if n > 1 else []
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_prime(m):
                out[m] = out.get(m, 0) + 1
                continue
            r = math.isqrt(m)
            if r * r == m:
                stack.extend((r, r))
                continue
            d = _pollard_brent(m)
            stack.extend((d, m // d))
    return sorted(out.items())


def factorize(n: int) -> Factorization:
    """Exact factorization of a nonzero integer; deterministic."""
    if n == 0:
        raise ValueError("cannot factorize 0")
    sign = 1 if n > 0 else -1
    m = abs(n)
    if m == 1:
        return Factorization(n, sign, ())
    return Factorization(n, sign, tuple(_factor_abs(m)))


def valuation(n: int, p: int) -> int:
    """Largest e with p**e | n.  Rejects n = 0 and composite p."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined here")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def is_squarefree(n: int) -> bool:
    if n == 0:
        raise ValueError("expected nonzero n")
    return all(e == 1 for _, e in factorize(n).factors)


def is_cubefree(n: int) -> bool:
    if n == 0:
        raise ValueError("expected nonzero n")
    return all(e <= 2 for _, e in factorize(n).factors)


def radical(n: int) -> int:
    """Product of the distinct primes dividing |n| (1 for units)."""
    if n == 0:
        raise ValueError("expected nonzero n")
    r = 1
    for p, _ in factorize(n).factors:
        r *= p
    return r


def tau(n: int) -> int:
    """Number of positive divisors of |n|."""
    if n == 0:
        raise ValueError("expected nonzero n")
    t = 1
    for _, e in factorize(n).factors:
        t *= e + 1
    return t


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write cube-free n >= 1 as n0 * n1**2 with n0, n1 square-free and coprime."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    n0, n1 = 1, 1
    for p, e in factorize(n).factors:
        if e == 1:
            n0 *= p
        elif e == 2:
            n1 *= p
        else:
            raise ValueError(f"{n} is not cube-free (p={p}, e={e})")
    return n0, n1


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of |n|."""
    if n == 0:
        raise ValueError("expected nonzero n")
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def factorize_batch(values: Iterable[int]) -> list[Factorization]:
    """Factor many values; pre-grows the sieve once to cover the max."""
    vals = list(values)
    if vals:
        _sieve.ensure(max(abs(v) for v in vals if v != 0))
    return [factorize(v) for v in vals]
