"""Approximation layers in Z_p^n, their exact Haar measures, and volume series.

A layer at denominator a0 is the union over admissible numerator vectors of
open rectangles |x_i - a_i/a0|_p < psi_i(a0). Each open bound is converted to
the equivalent closed-ball exponent t_i(a0) (the unique t with
p^{-t} < psi_i(a0) <= p^{-t+1}), which makes every layer an exact clopen set.

Because the numerator constraints are independent per coordinate, a layer is a
cartesian product of one-dimensional coset unions; measures and intersections
factor accordingly and are computed exactly.

Reduced layers use the positive residue system 1 <= a_i <= a0 coprime to a0,
which has exactly phi(a0) numerators per coordinate and makes the layers
disjoint unions for every proper psi (distinct numerators differ by less than
a0 < p^{t_i}, so they land in distinct cosets). Non-reduced layers range over
|a_i| <= a0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .clopen import BallSpec, ClopenSet, product_set
from .core import ExactnessError, Params, euler_phi, totient_sieve
from .exactcmp import ball_exponent, cmp_powprod, frac_pow

# ---------------------------------------------------------------------------
# Approximation functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLaw:
    """psi(q) = q^{-tau}."""

    tau: Fraction

    def __post_init__(self):
        if Fraction(self.tau) <= 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "tau", Fraction(self.tau))


@dataclass(frozen=True)
class ScaledPower:
    """psi(q) = c * q^{-e}."""

    c: Fraction
    e: Fraction

    def __post_init__(self):
        if Fraction(self.c) <= 0:
            raise ValueError("c must be positive")
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "e", Fraction(self.e))


@dataclass(frozen=True)
class TableFunction:
    """Explicit finite table of exact values."""

    values: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        vals = tuple(sorted((int(q), Fraction(v)) for q, v in dict(self.values).items()))
        if any(v <= 0 for _, v in vals):
            raise ValueError("table values must be positive")
        object.__setattr__(self, "values", vals)

    def lookup(self, q: int) -> Fraction:
        for key, v in self.values:
            if key == q:
                return v
        raise ValueError(f"table has no value at q={q}")


PsiComponent = PowerLaw | ScaledPower | TableFunction


def psi_powprod(comp: PsiComponent, q: int):
    """psi(q) as an exact power product for threshold comparisons."""
    if isinstance(comp, PowerLaw):
        return [(Fraction(q), -comp.tau)]
    if isinstance(comp, ScaledPower):
        return [(comp.c, Fraction(1)), (Fraction(q), -comp.e)]
    return [(comp.lookup(q), Fraction(1))]


def psi_value(comp: PsiComponent, q: int) -> Fraction:
    """Exact rational value of psi(q); raises ExactnessError when irrational."""
    if isinstance(comp, PowerLaw):
        return frac_pow(q, -comp.tau)
    if isinstance(comp, ScaledPower):
        return comp.c * frac_pow(q, -comp.e)
    return comp.lookup(q)


def psi_value_float(comp: PsiComponent, q: int) -> float:
    if isinstance(comp, PowerLaw):
        return float(q) ** -float(comp.tau)
    if isinstance(comp, ScaledPower):
        return float(comp.c) * float(q) ** -float(comp.e)
    return float(comp.lookup(q))


def step_exponent(comp: PsiComponent, a0: int, p: int) -> int:
    """The unique t >= 1 with p^{-t} < psi(a0) <= p^{-t+1}, clamped to 0 when psi(a0) > 1.

    The clamped case still describes the exact set: an open ball of radius
    greater than 1 around a point of Z_p is all of Z_p, i.e. exponent 0.
    """
    if a0 < 1:
        raise ValueError("a0 must be a positive integer")
    t = ball_exponent(p, psi_powprod(comp, a0))
    return max(t, 0)


@dataclass(frozen=True)
class ApproxTuple:
    """The n-tuple Psi = (psi_1, ..., psi_n)."""

    components: tuple[PsiComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("need at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def uniform(cls, comp: PsiComponent, n: int) -> "ApproxTuple":
        return cls((comp,) * n)

    @property
    def n(self) -> int:
        return len(self.components)

    def proper_at(self, q: int) -> bool:
        """psi_i(q) < 1/q for every component."""
        return all(
            cmp_powprod(psi_powprod(c, q), [(Fraction(q), Fraction(-1))]) < 0
            for c in self.components
        )

    def proper_on(self, lo: int, hi: int) -> bool:
        for c in self.components:
            if isinstance(c, PowerLaw):
                qs = [lo]  # q^{1-tau} is monotone; properness at lo implies it beyond
                if lo == 1:
                    qs = [1, min(2, hi)]
                if any(cmp_powprod(psi_powprod(c, q), [(Fraction(q), Fraction(-1))]) >= 0 for q in qs):
                    return False
            elif isinstance(c, ScaledPower):
                probe = lo if c.e >= 1 else hi
                if cmp_powprod(psi_powprod(c, probe), [(Fraction(probe), Fraction(-1))]) >= 0:
                    return False
            else:
                for q, _ in c.values:
                    if lo <= q <= hi and cmp_powprod(psi_powprod(c, q), [(Fraction(q), Fraction(-1))]) >= 0:
                        return False
        return True

    def step_exponents(self, a0: int, p: int) -> tuple[int, ...]:
        return tuple(step_exponent(c, a0, p) for c in self.components)

    def permuted(self, order: Sequence[int]) -> "ApproxTuple":
        return ApproxTuple(tuple(self.components[i] for i in order))


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------


def layer_numerators(a0: int, reduced: bool) -> list[int]:
    if a0 < 1:
        raise ValueError("a0 must be a positive integer")
    if reduced:
        return [a for a in range(1, a0 + 1) if math.gcd(a, a0) == 1]
    return list(range(-a0, a0 + 1))


def _coordinate_residues(p: int, a0: int, t: int, numerators: Sequence[int]) -> set[int]:
    """Distinct level-t cosets met by the admissible centers a/a0, as residues mod p^t."""
    mod = p**t
    if mod == 1:
        return {0}
    out: set[int] = set()
    inv_cache: dict[int, int] = {}
    for a in numerators:
        c = Fraction(a, a0)
        den = c.denominator
        if den % p == 0:
            continue  # center outside Z_p contributes nothing
        inv = inv_cache.get(den)
        if inv is None:
            inv = pow(den, -1, mod)
            inv_cache[den] = inv
        out.add(c.numerator * inv % mod)
    return out


def layer_coordinate_data(
    params: Params, psi: ApproxTuple, a0: int, reduced: bool
) -> list[tuple[int, set[int]]]:
    """Per coordinate: (closed-ball exponent t_i, residue set mod p^{t_i})."""
    if psi.n != params.n:
        raise ValueError(f"psi has {psi.n} components, params.n = {params.n}")
    if reduced and a0 % params.p == 0:
        return [(0, set()) for _ in range(params.n)]
    nums = layer_numerators(a0, reduced)
    out = []
    for comp in psi.components:
        t = step_exponent(comp, a0, params.p)
        out.append((t, _coordinate_residues(params.p, a0, t, nums)))
    return out


def layer_measure(params: Params, psi: ApproxTuple, a0: int, reduced: bool) -> Fraction:
    """Exact Haar measure of the layer, via its product structure."""
    mu = Fraction(1)
    for t, residues in layer_coordinate_data(params, psi, a0, reduced):
        if not residues:
            return Fraction(0)
        mu *= Fraction(len(residues), params.p**t)
    return mu


def reference_measure(params: Params, psi: ApproxTuple, a0: int) -> Fraction:
    """phi(a0)^n * prod_i p^{-t_i(a0)}: the disjoint-union value for reduced layers."""
    if a0 % params.p == 0:
        return Fraction(0)
    phi = euler_phi(a0)
    mu = Fraction(phi) ** params.n
    for t in psi.step_exponents(a0, params.p):
        mu /= params.p**t
    return mu


def build_layer(params: Params, psi: ApproxTuple, a0: int, reduced: bool, depth: int) -> ClopenSet:
    """The layer as an exact ClopenSet in Z_p^n."""
    data = layer_coordinate_data(params, psi, a0, reduced)
    for t, _ in data:
        if t > depth:
            raise ValueError(f"insufficient depth: layer a0={a0} needs level {t}, depth is {depth}")
    factors = []
    for t, residues in data:
        if not residues:
            return ClopenSet.empty(params.p, params.n, depth)
        factors.append(
            ClopenSet.from_rectangles(
                params.p, 1, depth, [BallSpec((Fraction(r),), (t,)) for r in sorted(residues)]
            )
        )
    if params.n == 1:
        return factors[0]
    return product_set(factors)


def required_depth(params: Params, psi: ApproxTuple, lo: int, hi: int) -> int:
    """Max closed-ball exponent over the range; the depth a sweep must provision."""
    worst = 0
    for a0 in range(lo, hi + 1):
        worst = max(worst, max(psi.step_exponents(a0, params.p)))
    return worst


def partial_limsup(
    params: Params, psi: ApproxTuple, lo: int, hi: int, reduced: bool, depth: int
) -> ClopenSet:
    """Union of the layers for a0 in [lo, hi], exact."""
    if lo > hi or lo < 1:
        raise ValueError("need 1 <= lo <= hi")
    need = required_depth(params, psi, lo, hi)
    if need > depth:
        raise ValueError(f"insufficient depth: range needs level {need}, depth is {depth}")
    out = ClopenSet.empty(params.p, params.n, depth)
    for a0 in range(lo, hi + 1):
        out = out.union(build_layer(params, psi, a0, reduced, depth))
    return out


def divergence_curve(
    params: Params,
    psi: ApproxTuple,
    n_max: int,
    depth: int,
    reduced: bool = True,
    stop_above: Fraction | None = None,
) -> list[tuple[int, Fraction]]:
    """Measure of partial_limsup[1, N] for N = 1..n_max, computed incrementally.

    Stops early once the measure exceeds stop_above, if given.
    """
    out: list[tuple[int, Fraction]] = []
    acc = ClopenSet.empty(params.p, params.n, depth)
    for a0 in range(1, n_max + 1):
        acc = acc.union(build_layer(params, psi, a0, reduced, depth))
        mu = acc.measure()
        out.append((a0, mu))
        if stop_above is not None and mu > stop_above:
            break
    return out


# ---------------------------------------------------------------------------
# Volume series
# ---------------------------------------------------------------------------


def khintchine_sum(params: Params, psi: ApproxTuple, n_terms: int) -> Fraction:
    """sum_{q=1}^{N} q^n prod_i psi_i(q), exact rational."""
    total = Fraction(0)
    for q in range(1, n_terms + 1):
        term = Fraction(q) ** params.n
        for comp in psi.components:
            term *= psi_value(comp, q)
        total += term
    return total


def duffin_schaeffer_sum(
    params: Params, psi: ApproxTuple, n_terms: int
) -> tuple[Fraction, Fraction | None]:
    """sum_{q=1}^{N} phi(q)^n prod_i psi_i(q) and its ratio to the khintchine sum."""
    phi = totient_sieve(n_terms) if n_terms >= 1 else [0]
    total = Fraction(0)
    for q in range(1, n_terms + 1):
        term = Fraction(phi[q]) ** params.n
        for comp in psi.components:
            term *= psi_value(comp, q)
        total += term
    k = khintchine_sum(params, psi, n_terms)
    return total, (total / k if k else None)


def layer_reference_sum(params: Params, psi: ApproxTuple, lo: int, hi: int) -> Fraction:
    """sum over a0 in [lo, hi] coprime to p of phi(a0)^n prod p^{-t_i(a0)}.

    Always rational, so it serves as the exact convergence-tail bound even for
    power laws whose psi values are irrational.
    """
    total = Fraction(0)
    for a0 in range(lo, hi + 1):
        if a0 % params.p == 0:
            continue
        total += reference_measure(params, psi, a0)
    return total


# ---------------------------------------------------------------------------
# The measure claims
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaimsReport:
    a0: int
    b0: int
    measure_a: Fraction
    reference_a: Fraction
    equal_a: bool
    measure_b: Fraction
    reference_b: Fraction
    equal_b: bool
    intersection_measure: Fraction
    ratio_denominator: Fraction
    ratio: Fraction | None


def intersection_measure(params: Params, psi: ApproxTuple, a0: int, b0: int, reduced: bool = True) -> Fraction:
    """Exact measure of layer(a0) cap layer(b0), via coordinatewise coset filtering."""
    da = layer_coordinate_data(params, psi, a0, reduced)
    db = layer_coordinate_data(params, psi, b0, reduced)
    mu = Fraction(1)
    for (ta, ra), (tb, rb) in zip(da, db):
        if ta > tb:
            (ta, ra), (tb, rb) = (tb, rb), (ta, ra)
        mod = params.p**ta
        count = sum(1 for r in rb if r % mod in ra)
        if count == 0:
            return Fraction(0)
        mu *= Fraction(count, params.p**tb)
    return mu


def measure_claims_check(params: Params, psi: ApproxTuple, a0: int, b0: int) -> ClaimsReport:
    """Exact check of the layer-measure identity and the pairwise intersection bound.

    The ratio compares mu(layer(a0) cap layer(b0)) against
    a0^n b0^n prod_i psi_i(a0) psi_i(b0); it is None on the diagonal a0 = b0,
    where the intersection is the layer itself and the bound does not apply.
    """
    if math.gcd(a0, params.p) != 1 or math.gcd(b0, params.p) != 1:
        raise ValueError("a0 and b0 must be coprime to p")
    mu_a = layer_measure(params, psi, a0, reduced=True)
    mu_b = layer_measure(params, psi, b0, reduced=True)
    ref_a = reference_measure(params, psi, a0)
    ref_b = reference_measure(params, psi, b0)
    mu_ab = intersection_measure(params, psi, a0, b0, reduced=True)
    denom = Fraction(a0) ** params.n * Fraction(b0) ** params.n
    for comp in psi.components:
        denom *= psi_value(comp, a0) * psi_value(comp, b0)
    ratio = None if a0 == b0 else mu_ab / denom
    return ClaimsReport(
        a0=a0,
        b0=b0,
        measure_a=mu_a,
        reference_a=ref_a,
        equal_a=mu_a == ref_a,
        measure_b=mu_b,
        reference_b=ref_b,
        equal_b=mu_b == ref_b,
        intersection_measure=mu_ab,
        ratio_denominator=denom,
        ratio=ratio,
    )


def claim_c_max_ratio(
    params: Params, psi: ApproxTuple, bound: int
) -> tuple[Fraction, tuple[int, int]]:
    """Max off-diagonal intersection ratio over 1 <= a0 < b0 <= bound coprime to p."""
    best = Fraction(0)
    arg = (0, 0)
    pairs = [q for q in range(1, bound + 1) if math.gcd(q, params.p) == 1]
    data = {q: layer_coordinate_data(params, psi, q, True) for q in pairs}
    psis = {q: [psi_value(c, q) for c in psi.components] for q in pairs}
    for i, a0 in enumerate(pairs):
        da = data[a0]
        for b0 in pairs[i + 1 :]:
            db = data[b0]
            mu = Fraction(1)
            for (ta, ra), (tb, rb) in zip(da, db):
                if ta > tb:
                    ta, ra, tb, rb = tb, rb, ta, ra
                mod = params.p**ta
                count = sum(1 for r in rb if r % mod in ra)
                if count == 0:
                    mu = Fraction(0)
                    break
                mu *= Fraction(count, params.p**tb)
            if mu == 0:
                continue
            denom = Fraction(a0 * b0) ** params.n
            for va, vb in zip(psis[a0], psis[b0]):
                denom *= va * vb
            ratio = mu / denom
            if ratio > best:
                best, arg = ratio, (a0, b0)
    return best, arg


# ---------------------------------------------------------------------------
# Local ubiquity check
# ---------------------------------------------------------------------------


def ubiquity_fraction(
    params: Params,
    alpha: Sequence[Fraction],
    M: int,
    k: int,
    depth: int,
    c1: Fraction = Fraction(1),
    ball: ClopenSet | None = None,
) -> Fraction:
    """mu(B cap union_{M^k <= a0 <= M^{k+1}} Delta(R_a0, (c1/M^{k+1})^alpha)) / mu(B).

    Rectangles of the fixed dyadic-block radius around every rational point
    a/a0 with |a_i| <= a0; the local-ubiquity experiment reports how much of
    the ball the block covers.
    """
    if len(alpha) != params.n:
        raise ValueError("alpha must have n components")
    exps = []
    for a in alpha:
        radius = [(c1, Fraction(1)), (Fraction(M), -Fraction(a) * (k + 1))]
        exps.append(max(0, ball_exponent(params.p, radius)))
    if max(exps) > depth:
        raise ValueError(f"insufficient depth: need {max(exps)}")
    acc = ClopenSet.empty(params.p, params.n, depth)
    for a0 in range(M**k, M ** (k + 1) + 1):
        nums = layer_numerators(a0, reduced=False)
        factors = []
        for i in range(params.n):
            residues = _coordinate_residues(params.p, a0, exps[i], nums)
            if not residues:
                factors = []
                break
            factors.append(
                ClopenSet.from_rectangles(
                    params.p, 1, depth, [BallSpec((Fraction(r),), (exps[i],)) for r in sorted(residues)]
                )
            )
        if not factors:
            continue
        layer = factors[0] if params.n == 1 else product_set(factors)
        acc = acc.union(layer)
    if ball is not None:
        acc = acc.intersect(ball)
        return acc.measure() / ball.measure()
    return acc.measure()


# ---------------------------------------------------------------------------
# Sweep rows for CSV emission
# ---------------------------------------------------------------------------


def layer_sweep_rows(
    params: Params, psi: ApproxTuple, lo: int, hi: int, reduced: bool, depth: int
) -> Iterator[Mapping[str, object]]:
    """One row per a0: layer measure, the phi-formula reference, the running
    union measure, and both partial series (series skipped if irrational)."""
    acc = ClopenSet.empty(params.p, params.n, depth)
    kh = Fraction(0)
    ds = Fraction(0)
    series_exact = True
    phi = totient_sieve(hi)
    for a0 in range(lo, hi + 1):
        layer = build_layer(params, psi, a0, reduced, depth)
        acc = acc.union(layer)
        if series_exact:
            try:
                term = Fraction(1)
                for comp in psi.components:
                    term *= psi_value(comp, a0)
                kh += Fraction(a0) ** params.n * term
                ds += Fraction(phi[a0]) ** params.n * term
            except ExactnessError:
                series_exact = False
        yield {
            "a0": a0,
            "layer_measure": layer.measure(),
            "reference": reference_measure(params, psi, a0) if a0 % params.p else Fraction(0),
            "union_measure": acc.measure(),
            "khintchine_partial": kh if series_exact else None,
            "duffin_schaeffer_partial": ds if series_exact else None,
        }
