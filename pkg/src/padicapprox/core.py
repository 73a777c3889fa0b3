"""Exact p-adic integer arithmetic at finite precision and basic number theory.

Everything here is exact: valuations and norms of rationals are computed from
integer factor counts, p-adic integers are residue classes mod p^K, and no
floating point enters any value that a caller might compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class HypothesisError(ValueError):
    """A stated hypothesis of an operation failed; names the failed inequality."""

    def __init__(self, failed: str, detail: str = ""):
        self.failed = failed
        super().__init__(f"hypothesis violated: {failed}" + (f" ({detail})" if detail else ""))


class ExactnessError(ValueError):
    """Requested value has no exact rational representation."""


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond any prime used here."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def valuation(x: int | Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational: x = p^v * (a/b) with p coprime to a, b."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation undefined (infinite) for 0")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def norm(x: int | Fraction, p: int) -> Fraction:
    """p-adic absolute value |x|_p = p^{-v_p(x)}, with |0|_p = 0. Exact rational."""
    x = Fraction(x)
    if x == 0:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return Fraction(0)
    v = valuation(x, p)
    return Fraction(1, p**v) if v >= 0 else Fraction(p ** (-v))


def euler_phi(q: int) -> int:
    """Euler totient via trial-division factorization."""
    if q < 1:
        raise ValueError("euler_phi needs q >= 1")
    result = q
    n = q
    d = 2
    while d * d <= n:
        if n % d == 0:
            result -= result // d
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        result -= result // n
    return result


def totient_sieve(limit: int) -> list[int]:
    """phi(0..limit) as a list; phi[0] set to 0."""
    phi = list(range(limit + 1))
    for i in range(2, limit + 1):
        if phi[i] == i:  # i prime
            for j in range(i, limit + 1, i):
                phi[j] -= phi[j] // i
    if limit >= 0:
        phi[0] = 0
    return phi


@dataclass(frozen=True)
class Params:
    """Ambient configuration: prime p, dimension n, and the d/m split for manifolds."""

    p: int
    n: int
    d: int | None = None
    m: int | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.n < 1:
            raise ValueError("n >= 1 required")
        if (self.d is None) != (self.m is None):
            raise ValueError("d and m must be given together")
        if self.d is not None:
            if self.d < 1 or self.m < 1:
                raise ValueError("d >= 1 and m >= 1 required")
            if self.d + self.m != self.n:
                raise ValueError(f"n = d + m required, got n={self.n}, d={self.d}, m={self.m}")


@dataclass(frozen=True)
class PAdicInt:
    """A p-adic integer known modulo p^precision, stored as its canonical residue.

    The residue-class representation keeps arithmetic fast and equality canonical;
    digits are derived on demand.
    """

    prime: int
    precision: int
    residue: int

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ValueError(f"prime must be prime, got {self.prime}")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        object.__setattr__(self, "residue", self.residue % self.prime**self.precision)

    @property
    def modulus(self) -> int:
        return self.prime**self.precision

    @property
    def is_zero_to_precision(self) -> bool:
        return self.residue == 0

    def valuation(self) -> int:
        """Valuation of the class; defined only when the residue is nonzero."""
        if self.residue == 0:
            raise ValueError("zero to known precision: valuation not determined")
        v = 0
        r = self.residue
        while r % self.prime == 0:
            r //= self.prime
            v += 1
        return v

    def norm(self) -> Fraction:
        """|x|_p when determined; zero-to-precision classes have no exact norm."""
        return Fraction(1, self.prime ** self.valuation())

    def digits(self) -> tuple[int, ...]:
        """Base-p digits (a_0, ..., a_{K-1}) of the residue."""
        out = []
        r = self.residue
        for _ in range(self.precision):
            r, dgt = divmod(r, self.prime)
            out.append(dgt)
        return tuple(out)

    def _check_compatible(self, other: "PAdicInt") -> int:
        if self.prime != other.prime:
            raise ValueError(f"mismatched primes {self.prime} and {other.prime}")
        return min(self.precision, other.precision)

    def __add__(self, other: "PAdicInt") -> "PAdicInt":
        k = self._check_compatible(other)
        return PAdicInt(self.prime, k, self.residue + other.residue)

    def __sub__(self, other: "PAdicInt") -> "PAdicInt":
        k = self._check_compatible(other)
        return PAdicInt(self.prime, k, self.residue - other.residue)

    def __mul__(self, other: "PAdicInt") -> "PAdicInt":
        k = self._check_compatible(other)
        return PAdicInt(self.prime, k, self.residue * other.residue)

    def truncate(self, precision: int) -> "PAdicInt":
        if precision > self.precision:
            raise ValueError("cannot raise precision by truncation")
        return PAdicInt(self.prime, precision, self.residue)

    def __repr__(self) -> str:
        return f"PAdicInt({self.residue} mod {self.prime}^{self.precision})"


def arithmetic(x: PAdicInt, y: PAdicInt, op: str) -> PAdicInt:
    """Dispatch form of the ring operations; op in {'add', 'sub', 'mul'}."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def embed_rational(a: int | Fraction, b: int = 1, *, p: int, precision: int) -> PAdicInt:
    """Embed a/b into Z_p mod p^precision; requires b (and the reduced denominator) coprime to p."""
    frac = Fraction(a) / Fraction(b) if b != 1 else Fraction(a)
    if b == 0:
        raise ZeroDivisionError("b must be nonzero")
    mod = p**precision
    den = frac.denominator
    if den % p == 0:
        raise ValueError(f"not a p-adic integer: denominator {den} divisible by {p}")
    inv = pow(den, -1, mod)
    return PAdicInt(p, precision, frac.numerator * inv)


def shift_map(x: PAdicInt) -> PAdicInt:
    """Digit shift used by the zero-one law: drop the leading digit, re-seed 1 if it was nonzero.

    Output precision is one digit lower than the input's.
    """
    if x.precision < 2:
        raise ValueError("shift_map needs precision >= 2")
    a0 = x.residue % x.prime
    shifted = x.residue // x.prime
    if a0 != 0:
        shifted += 1
    return PAdicInt(x.prime, x.precision - 1, shifted)


def _log_int(n: int) -> float:
    """Natural log of a positive integer, safe for arbitrarily large ints."""
    bits = n.bit_length()
    if bits <= 900:
        return math.log(n)
    return math.log(n >> (bits - 900)) + (bits - 900) * math.log(2)


def floor_log(value: int | Fraction, base: int) -> int:
    """max{e in Z : base^e <= value} for a positive rational value, exact."""
    value = Fraction(value)
    if value <= 0:
        raise ValueError("floor_log needs a positive value")
    est = int((_log_int(value.numerator) - _log_int(value.denominator)) / math.log(base))
    # float estimate, then exact adjustment
    while Fraction(base) ** est > value:
        est -= 1
    while Fraction(base) ** (est + 1) <= value:
        est += 1
    return est
