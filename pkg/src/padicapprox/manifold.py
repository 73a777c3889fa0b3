"""Polynomial maps on Z_p^d with certified quadratic-error Taylor bounds, and
the constructive Dirichlet-style approximation machinery on their graphs.

The maps are restricted to polynomials with p-integral coefficients: their
first-order Taylor remainder is a polynomial with p-integral coefficients all
of degree >= 2 in the displacement, so the quadratic-error constant C = 1 is
certified coefficientwise, the validity radius is all of Z_p^d, and the
derivative bound lambda is 0 by the ultrametric inequality. Every solver
output is re-verified against the target inequality system by exact rational
evaluation before it is returned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .clopen import BallSpec, ClopenSet
from .core import HypothesisError, PAdicInt, embed_rational, is_prime
from .exactcmp import ball_exponent, cmp_powprod, floor_log_powprod
from .minkowski import LinearFormSystem, SolverError, solve_structured

Monomial = tuple[Fraction, tuple[int, ...]]


@dataclass(frozen=True)
class PolyMap:
    """f = (f_1, ..., f_m): Z_p^d -> Z_p^m with p-integral coefficients.

    Each component is a tuple of (coefficient, exponent-vector) monomials.
    """

    p: int
    d: int
    m: int
    polys: tuple[tuple[Monomial, ...], ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.d < 1 or self.m < 1:
            raise ValueError("d >= 1 and m >= 1 required")
        if len(self.polys) != self.m:
            raise ValueError(f"need {self.m} component polynomials")
        normalized = []
        for poly in self.polys:
            mono = []
            for coeff, exps in poly:
                coeff = Fraction(coeff)
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.d or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent vector {exps}")
                if coeff.denominator % self.p == 0:
                    raise ValueError(f"coefficient {coeff} is not a p-adic integer")
                if coeff != 0:
                    mono.append((coeff, exps))
            normalized.append(tuple(sorted(mono, key=lambda t: t[1])))
        object.__setattr__(self, "polys", tuple(normalized))

    @property
    def n(self) -> int:
        return self.d + self.m

    def eval_exact(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Value at a rational point with p-unit denominators; exact."""
        out = []
        for poly in self.polys:
            total = Fraction(0)
            for coeff, exps in poly:
                term = coeff
                for x, e in zip(point, exps):
                    term *= Fraction(x) ** e
                total += term
            out.append(total)
        return tuple(out)

    def partial(self, j: int, i: int) -> tuple[Monomial, ...]:
        """d f_j / d x_i as a monomial list."""
        out = []
        for coeff, exps in self.polys[j]:
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            out.append((coeff * exps[i], tuple(new)))
        return tuple(out)

    def eval_padic(self, mono: Sequence[Monomial], x: Sequence[PAdicInt]) -> PAdicInt:
        """Evaluate a monomial list at a vector of p-adic integers."""
        prec = min(v.precision for v in x)
        mod = self.p**prec
        total = 0
        for coeff, exps in mono:
            term = (coeff.numerator * pow(coeff.denominator, -1, mod)) % mod
            for v, e in zip(x, exps):
                if e:
                    term = term * pow(v.residue, e, mod) % mod
            total += term
        return PAdicInt(self.p, prec, total)

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "d": self.d,
            "m": self.m,
            "polys": [
                [[str(c), list(e)] for c, e in poly] for poly in self.polys
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PolyMap":
        polys = tuple(
            tuple((Fraction(c), tuple(e)) for c, e in poly) for poly in data["polys"]
        )
        return cls(int(data["p"]), int(data["d"]), int(data["m"]), polys)


@dataclass(frozen=True)
class DQEConstants:
    """Certified quadratic-error data: |f(y)-f(x)-Df(x)(y-x)|_p <= C max|y_i-x_i|_p^2
    on the ball of radius epsilon, and p^lambda = max(1, max |df_j/dx_i(x)|_p)."""

    C: Fraction
    epsilon: Fraction
    lam: int
    derivative_norms: tuple[tuple[Fraction, ...], ...] | None


def dqe_constants(f: PolyMap, x: Sequence[PAdicInt] | None = None) -> DQEConstants:
    """C = 1 and epsilon = 1 for p-integral polynomials; lambda evaluated at x.

    The Taylor coefficients of every remainder term are integer combinations of
    the p-integral polynomial coefficients, hence of norm at most 1, which
    certifies C = 1 coefficientwise on all of Z_p^d. All derivative norms are
    at most 1 as well, so lambda = 0 whenever x is in Z_p^d.
    """
    norms = None
    lam = 0
    if x is not None:
        if len(x) != f.d:
            raise ValueError("x must have d coordinates")
        rows = []
        for j in range(f.m):
            row = []
            for i in range(f.d):
                val = f.eval_padic(f.partial(j, i), x)
                row.append(Fraction(0) if val.is_zero_to_precision else val.norm())
            rows.append(tuple(row))
        norms = tuple(rows)
        # p^lambda = max(1, max norms); norms <= 1 always, so lambda = 0
    return DQEConstants(C=Fraction(1), epsilon=Fraction(1), lam=lam, derivative_norms=norms)


@dataclass(frozen=True)
class RationalPoint:
    """Integer vector (a_0, ..., a_n) seen as the rational point (a_1/a_0, ..., a_n/a_0)."""

    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if self.a[0] == 0:
            raise ValueError("a_0 must be nonzero")

    @property
    def a0(self) -> int:
        return self.a[0]

    @property
    def height(self) -> int:
        return max(abs(v) for v in self.a)

    def coprime_to(self, p: int) -> bool:
        return self.a0 % p != 0

    @property
    def primitive(self) -> bool:
        g = 0
        for v in self.a:
            g = math.gcd(g, v)
        return g == 1

    def coordinates(self, count: int | None = None) -> tuple[Fraction, ...]:
        vals = self.a[1:] if count is None else self.a[1 : count + 1]
        return tuple(Fraction(v, self.a0) for v in vals)


@dataclass(frozen=True)
class DirichletInstance:
    """A base point on the graph of f with approximation exponents.

    tau are the dependent-block exponents (length m), v the independent-block
    exponents (length d); hypotheses checked on construction.
    """

    f: PolyMap
    x: tuple[PAdicInt, ...]
    tau: tuple[Fraction, ...]
    v: tuple[Fraction, ...]
    H: int

    def __post_init__(self):
        f = self.f
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "tau", tuple(Fraction(t) for t in self.tau))
        object.__setattr__(self, "v", tuple(Fraction(t) for t in self.v))
        if len(self.x) != f.d:
            raise ValueError("x must have d coordinates")
        if any(xi.prime != f.p for xi in self.x):
            raise ValueError("x coordinates must live over the map's prime")
        if len(self.tau) != f.m or len(self.v) != f.d:
            raise ValueError("tau must have m entries and v must have d entries")
        if sum(self.tau) >= f.m + 1:
            raise HypothesisError("sum(tau) < m+1", f"got {sum(self.tau)}")
        if any(t <= 1 for t in self.tau):
            raise HypothesisError("tau_j > 1", f"got {self.tau}")
        if sum(self.v) != f.n + 1 - sum(self.tau):
            raise HypothesisError(
                "sum(v) = n+1-sum(tau)", f"got {sum(self.v)} != {f.n + 1 - sum(self.tau)}"
            )
        if any(t <= 1 for t in self.v):
            raise HypothesisError("v_i > 1", f"got {self.v}")
        if self.H < 1:
            raise ValueError("H >= 1 required")

    @property
    def precision(self) -> int:
        return min(xi.precision for xi in self.x)

    @property
    def sigma_shift(self) -> Fraction:
        """(n + m*lambda)/d with lambda = 0."""
        return Fraction(self.f.n, self.f.d)


@dataclass(frozen=True)
class H0Report:
    h0: int
    cases: dict

    def admissible(self, H: int) -> bool:
        return H > self.h0


def _int_threshold_strict(p: int, exponent: Fraction) -> int:
    """Largest integer H with NOT (H > p^exponent), i.e. floor of the power."""
    exponent = Fraction(exponent)
    if exponent <= 0:
        return 1  # p^e <= 1: every H >= 2 is strictly above; keep 1 as the floor
    return floor_log_int_power(p, exponent)


def _integer_root_floor(n: int, k: int) -> int:
    """floor(n^(1/k)) by Newton iteration on big integers."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if n == 0:
        return 0
    if k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)  # upper seed: 2^ceil(bits/k) >= n^(1/k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x


def floor_log_int_power(p: int, exponent: Fraction) -> int:
    """floor(p^exponent) for a positive rational exponent, exact at any size."""
    exponent = Fraction(exponent)
    a, b = exponent.numerator, exponent.denominator
    if a == 0:
        return 1
    if a < 0:
        return 0  # p^e < 1 for negative e
    est = _integer_root_floor(p**a, b)
    # Newton floor can only be exact or one off after integer division noise
    while (est + 1) ** b <= p**a:
        est += 1
    while est**b > p**a:
        est -= 1
    return est


def dirichlet_h0(inst: DirichletInstance) -> H0Report:
    """The height threshold above which the constructive system is solvable.

    Four of the entries are rational powers of p (C and epsilon are powers of
    p by construction); the fifth is the least height whose pigeonhole bucket
    exponents are all nonnegative. Returns the largest inadmissible integer,
    so the guarantee reads "every integer H > h0 works"; all five case values
    are logged in the report.
    """
    f = inst.f
    dqe = dqe_constants(f, inst.x)
    v_min = min(inst.v)
    tau_max = max(inst.tau)
    lam = dqe.lam
    # C = p^c0 with c0 = 0; epsilon = p^0
    c0 = Fraction(0)
    cases = {}
    exps = {
        "alpha1": 2 * c0 / (2 * v_min - tau_max),
        "alpha2": c0 / (v_min - 1),
        "beta": (Fraction(f.n + f.m * lam, f.d)) / (v_min - 1),
        "gamma": Fraction(f.n + f.n * lam, f.d) / (v_min - 1),
    }
    h0 = 1
    for name, e in exps.items():
        thr = _int_threshold_strict(f.p, e)
        cases[name] = {"value": f"{f.p}^({e})", "float": float(f.p) ** float(e), "h0": thr}
        h0 = max(h0, thr)
    feas = _bucket_feasible_height(inst)
    cases["delta"] = {"value": f"least feasible H = {feas}", "float": float(feas), "h0": feas - 1}
    h0 = max(h0, feas - 1)
    return H0Report(h0=h0, cases=cases)


def _bucket_feasible_height(inst: DirichletInstance) -> int:
    """Least H >= 1 whose linearized system has all bucket exponents >= 0."""
    f = inst.f
    sigma = [inst.sigma_shift] * f.d + [Fraction(0)] * f.m
    tau = list(inst.v) + list(inst.tau)
    H = 1
    while True:
        t_power = (H + 1) ** (f.n + 1)
        ok = True
        for s, t in zip(sigma, tau):
            value = [(Fraction(f.p), -s), (Fraction(t_power), t / (f.n + 1))]
            if floor_log_powprod(f.p, value) + 1 < 0:
                ok = False
                break
        if ok:
            return H
        H += 1
        if H > 10**6:
            raise SolverError("no feasible height below 10^6")


def _linearized_system(inst: DirichletInstance) -> LinearFormSystem:
    """Forms of the proof: x_i b_0 - b_i for the independent block and the
    first-order Taylor forms for the dependent block (lambda = 0)."""
    f = inst.f
    p = f.p
    prec = inst.precision
    zero = PAdicInt(p, prec, 0)
    minus_one = PAdicInt(p, prec, -1)
    rows = []
    for i in range(f.d):
        row = [zero] * (f.n + 1)
        row[0] = inst.x[i].truncate(prec)
        row[i + 1] = minus_one
        rows.append(tuple(row))
    fx = [f.eval_padic(f.polys[j], inst.x) for j in range(f.m)]
    for j in range(f.m):
        row = [zero] * (f.n + 1)
        const = fx[j].truncate(prec)
        for i in range(f.d):
            dji = f.eval_padic(f.partial(j, i), inst.x).truncate(prec)
            row[i + 1] = dji
            const = const - dji * inst.x[i].truncate(prec)
        row[0] = const
        row[f.d + j + 1] = minus_one
        rows.append(tuple(row))
    sigma = [inst.sigma_shift] * f.d + [Fraction(0)] * f.m
    tau = list(inst.v) + list(inst.tau)
    return LinearFormSystem(
        p, f.n, tuple(rows), (inst.H,) * (f.n + 1), tuple(tau), tuple(sigma)
    )


@dataclass(frozen=True)
class DirichletSolution:
    point: RationalPoint
    k: int
    verified: bool
    method: str


def _strip_non_p_gcd(p: int, b: Sequence[int]) -> list[int]:
    g = 0
    for v in b:
        g = math.gcd(g, v)
    while g % p == 0:
        g //= p
    return [v // g for v in b] if g > 1 else list(b)


def verify_dirichlet(inst: DirichletInstance, point: RationalPoint, k: int) -> bool:
    """Exact re-check of the full inequality system and side conditions."""
    f = inst.f
    p = f.p
    a = point.a
    if k < 0 or a[0] % p == 0 or not point.primitive:
        return False
    pkH = [(Fraction(p), Fraction(k)), (Fraction(inst.H), Fraction(1))]
    # heights: max |a_i| <= p^{-k} H, i.e. p^k max|a_i| <= H
    if p**k * point.height > inst.H:
        return False
    prec = inst.precision
    for i in range(f.d):
        diff = inst.x[i].truncate(prec) - embed_rational(a[i + 1], a[0], p=p, precision=prec)
        vexp = prec if diff.is_zero_to_precision else diff.valuation()
        bound = [(Fraction(p), inst.sigma_shift + k), (Fraction(inst.H), -inst.v[i])]
        if cmp_powprod([(Fraction(p), Fraction(-vexp))], bound) >= 0:
            if diff.is_zero_to_precision:
                raise SolverError(
                    f"comparison below precision {prec}: increase the base point precision"
                )
            return False
    y = point.coordinates(f.d)
    values = f.eval_exact(y)
    for j in range(f.m):
        w = values[j] - Fraction(a[f.d + j + 1], a[0])
        # |w|_p < (p^{-k} H)^{-tau_j}
        if w != 0:
            num, den = w.numerator, w.denominator
            vexp = 0
            while num % p == 0:
                num //= p
                vexp += 1
            while den % p == 0:
                den //= p
                vexp -= 1
            lhs = [(Fraction(p), Fraction(-vexp))]
            rhs = [(Fraction(p), k * inst.tau[j]), (Fraction(inst.H), -inst.tau[j])]
            if cmp_powprod(lhs, rhs) >= 0:
                return False
    return True


def dirichlet_solve(inst: DirichletInstance) -> DirichletSolution:
    """Constructive solution of the approximation system at height H.

    Runs the pigeonhole solver on the linearized system (as a structured
    congruence scan), cancels the p-part of b_0, verifies everything exactly,
    and falls back to exhaustive search if any step fails. Requires H above
    the computed threshold.
    """
    report = dirichlet_h0(inst)
    if not report.admissible(inst.H):
        raise HypothesisError("H > H_0", f"H={inst.H}, H_0={report.h0}")
    f = inst.f
    p = f.p
    try:
        sys = _linearized_system(inst)
        sol = solve_structured(sys, pivots=list(range(1, f.n + 1)))
        b = _strip_non_p_gcd(p, sol.x)
        if b[0] < 0:
            b = [-v for v in b]
        k = 0
        b0 = b[0]
        while b0 % p == 0:
            b0 //= p
            k += 1
        if all(v % p**k == 0 for v in b):
            a = [v // p**k for v in b]
            point = RationalPoint(tuple(a))
            if verify_dirichlet(inst, point, k):
                return DirichletSolution(point, k, True, "congruence-scan")
    except SolverError:
        pass
    point, k = _exhaustive_dirichlet(inst)
    return DirichletSolution(point, k, True, "exhaustive")


def _exhaustive_dirichlet(inst: DirichletInstance) -> tuple[RationalPoint, int]:
    """Direct search: for each admissible a_0 and shift k, the congruences pin
    every other coordinate to at most a few candidates."""
    f = inst.f
    p = f.p
    prec = inst.precision
    k = 0
    while p**k <= inst.H:
        Hk = inst.H // p**k
        s_exps = []
        for i in range(f.d):
            radius = [(Fraction(p), inst.sigma_shift + k), (Fraction(inst.H), -inst.v[i])]
            s_exps.append(max(0, ball_exponent(p, radius)))
        u_exps = []
        for j in range(f.m):
            radius = [(Fraction(p), k * inst.tau[j]), (Fraction(inst.H), -inst.tau[j])]
            u_exps.append(max(0, ball_exponent(p, radius)))
        if max(s_exps, default=0) > prec:
            raise SolverError("needed congruence level exceeds the base point precision")
        for a0 in range(1, Hk + 1):
            if a0 % p == 0:
                continue
            coords: list[list[int]] = []
            ok = True
            for i in range(f.d):
                mod = p ** s_exps[i]
                target = a0 * inst.x[i].residue % mod
                cands = _centered_candidates(target, mod, Hk)
                if not cands:
                    ok = False
                    break
                coords.append(cands)
            if not ok:
                continue
            for combo in itertools.product(*coords):
                y = tuple(Fraction(c, a0) for c in combo)
                values = f.eval_exact(y)
                dep: list[list[int]] = []
                good = True
                for j in range(f.m):
                    mod = p ** u_exps[j]
                    w = values[j] * a0
                    if w.denominator % p == 0:
                        good = False
                        break
                    target = w.numerator * pow(w.denominator, -1, mod) % mod if mod > 1 else 0
                    cands = _centered_candidates(target, mod, Hk)
                    if not cands:
                        good = False
                        break
                    dep.append(cands)
                if not good:
                    continue
                for tail in itertools.product(*dep):
                    a = (a0,) + combo + tail
                    g = 0
                    for vv in a:
                        g = math.gcd(g, vv)
                    if g != 1:
                        continue
                    point = RationalPoint(a)
                    if verify_dirichlet(inst, point, k):
                        return point, k
        k += 1
    raise SolverError("no solution found: H below threshold or an implementation bug")


def _centered_candidates(target: int, mod: int, bound: int) -> list[int]:
    """Integers congruent to target mod `mod` within [-bound, bound], ascending."""
    if mod == 1:
        return list(range(-bound, bound + 1))
    t = target % mod
    first = t - ((t + bound) // mod) * mod
    return [v for v in range(first, bound + 1, mod)]


# ---------------------------------------------------------------------------
# Resonant integer points and preimage covers
# ---------------------------------------------------------------------------


def enumerate_S_tau(
    f: PolyMap,
    tau_dep: Sequence[Fraction],
    h_max: int,
    h_min: int = 1,
    budget: int = 30_000_000,
    workers: int = 1,
) -> list[RationalPoint]:
    """All primitive (a_0, ..., a_n), gcd(a_0, p)=1, height in [h_min, h_max],
    with |f_j(a_1/a_0, ..., a_d/a_0) - a_{d+j}/a_0|_p < h^{-tau_{d+j}} for all j.

    Enumerates the independent block and pins each dependent coordinate by its
    congruence class at the weakest admissible level, then checks membership
    exactly at the point's true height. With workers > 1 the denominators are
    sharded across a thread pool; the sorted merge makes the result identical
    to the sequential run (CPython threads trade no exactness, just latency).
    """
    p = f.p
    tau_dep = [Fraction(t) for t in tau_dep]
    if len(tau_dep) != f.m:
        raise ValueError("need one dependent exponent per component")
    if (2 * h_max + 1) ** f.d * h_max > budget:
        raise ValueError("enumeration budget exceeded")
    denominators = [a0 for a0 in range(1, h_max + 1) if a0 % p]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        shards = [denominators[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda shard: _enumerate_s_tau_shard(f, tau_dep, h_max, h_min, shard), shards
            )
        found = [pt for part in parts for pt in part]
        return sorted(found, key=lambda pt: pt.a)
    return sorted(
        _enumerate_s_tau_shard(f, tau_dep, h_max, h_min, denominators), key=lambda pt: pt.a
    )


def _enumerate_s_tau_shard(
    f: PolyMap,
    tau_dep: list[Fraction],
    h_max: int,
    h_min: int,
    denominators: Sequence[int],
) -> list[RationalPoint]:
    p = f.p
    # weakest congruence level: smallest t with p^{-t} < h_base^{-tau}
    exp_cache: dict[tuple[int, int], int] = {}

    def level(h: int, j: int) -> int:
        key = (h, j)
        out = exp_cache.get(key)
        if out is None:
            out = max(0, ball_exponent(p, [(Fraction(h), -tau_dep[j])]))
            exp_cache[key] = out
        return out

    found: list[RationalPoint] = []
    for a0 in denominators:
        for combo in itertools.product(range(-h_max, h_max + 1), repeat=f.d):
            h_base = max(a0, *(abs(c) for c in combo)) if f.d else a0
            if h_base < 1:
                continue
            y = tuple(Fraction(c, a0) for c in combo)
            values = f.eval_exact(y)
            dep_cands: list[list[int]] = []
            ok = True
            for j in range(f.m):
                mod = p ** level(max(h_base, h_min), j)
                w = values[j] * a0
                target = w.numerator * pow(w.denominator, -1, mod) % mod if mod > 1 else 0
                cands = _centered_candidates(target, mod, h_max)
                if not cands:
                    ok = False
                    break
                dep_cands.append(cands)
            if not ok:
                continue
            for tail in itertools.product(*dep_cands):
                a = (a0,) + combo + tail
                h = max(abs(v) for v in a)
                if h > h_max or h < h_min:
                    continue
                g = 0
                for vv in a:
                    g = math.gcd(g, vv)
                if g != 1:
                    continue
                if _s_tau_member(f, tau_dep, a, h):
                    found.append(RationalPoint(a))
    return sorted(found, key=lambda pt: pt.a)


def _s_tau_member(f: PolyMap, tau_dep: Sequence[Fraction], a: tuple[int, ...], h: int) -> bool:
    p = f.p
    y = tuple(Fraction(c, a[0]) for c in a[1 : f.d + 1])
    values = f.eval_exact(y)
    for j in range(f.m):
        w = values[j] - Fraction(a[f.d + j + 1], a[0])
        if w == 0:
            continue
        num, den = w.numerator, w.denominator
        vexp = 0
        while num % p == 0:
            num //= p
            vexp += 1
        while den % p == 0:
            den //= p
            vexp -= 1
        # need p^{-vexp} < h^{-tau_j}
        if cmp_powprod([(Fraction(p), Fraction(-vexp))], [(Fraction(h), -tau_dep[j])]) >= 0:
            return False
    return True


def cover_preimage(
    f: PolyMap,
    tau: Sequence[Fraction],
    delta: Fraction,
    h_max: int,
    depth: int,
    h_min: int = 1,
    points: Sequence[RationalPoint] | None = None,
    lipschitz_bound: Fraction | None = None,
) -> ClopenSet:
    """Union over resonant points of the rectangles
    prod_{i <= d} {|x_i - a_i/a_0|_p < delta * h^{-tau_i}}, as a set in Z_p^d.

    A finite-level inner approximation of the preimage of the weighted
    approximable set under x -> (x, f(x)).
    """
    p = f.p
    tau = [Fraction(t) for t in tau]
    if len(tau) != f.n:
        raise ValueError("tau must carry all n exponents")
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("need 0 < delta <= 1")
    indep_min = min(tau[: f.d])
    dep_max = max(tau[f.d :])
    if indep_min < dep_max:
        raise HypothesisError("min indep tau >= max dep tau", f"{indep_min} < {dep_max}")
    if indep_min == dep_max:
        if lipschitz_bound is None:
            raise HypothesisError(
                "min indep tau > max dep tau",
                "equality requires a Lipschitz bound and delta <= min(1, 1/L)",
            )
        if delta > min(Fraction(1), 1 / lipschitz_bound):
            raise ValueError("delta too large for the Lipschitz bound")
    worst = max(
        max(0, ball_exponent(p, [(delta, Fraction(1)), (Fraction(h_max), -tau[i])]))
        for i in range(f.d)
    )
    if worst > depth:
        raise ValueError(f"insufficient depth: need {worst}, have {depth}")
    if points is None:
        points = enumerate_S_tau(f, tau[f.d :], h_max, h_min=h_min)
    out = ClopenSet.empty(p, f.d, depth)
    for pt in points:
        h = pt.height
        exps = tuple(
            max(0, ball_exponent(p, [(delta, Fraction(1)), (Fraction(h), -tau[i])]))
            for i in range(f.d)
        )
        out = out.insert_rectangle(BallSpec(pt.coordinates(f.d), exps))
    return out
