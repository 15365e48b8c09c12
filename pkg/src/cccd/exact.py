"""Exact and numerical evaluation of the two-point cover probability.

For a density on the unit interval with anchors {0, 1}, the quantity of
interest is p_n(F) = P(gamma = 2) for a sample of size n. Writing s, t for
the extreme order statistics, gamma = 2 exactly when no sample point falls
in the open interval (t/2, (1+s)/2), which reduces the probability to a
two-dimensional integral

    p_n = iint n (n-1) f(s) f(t) G(s, t)^{n-2} dt ds,
    G(s, t) = A(t) - B(s),  A(t) = F(t) + F(t/2),  B(s) = F(s) + F((1+s)/2),

over s in [0, 1/2], t in [L(s), 1] with L(s) = max(2s, (1+s)/2). G is the
probability mass of [s, t] minus the mass of the excluded middle interval,
so 0 <= G <= 1 on the region.

Evaluation routes, from most to least exact:
  * closed forms for the uniform family and three step-density families;
  * an exact rational integrator for any piecewise-constant density
    (Fraction arithmetic end to end);
  * a one-dimensional polynomial reduction for the density 2x on (0, 1);
  * adaptive two-dimensional quadrature for everything else;
  * plain Monte Carlo as an independent check.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .densities import GapUniform, ShrunkUniform, TwoStep, Uniform

LIMIT_UNIFORM = 4.0 / 9.0

_GL15 = np.polynomial.legendre.leggauss(15)
_GL7 = np.polynomial.legendre.leggauss(7)


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement hits the subdivision cap.

    Carries the best running estimate so a caller can still inspect it.
    """

    def __init__(self, message, best_estimate, error_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 20000
    log_domain: bool = True

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("rel_tol/abs_tol: tolerances must be positive")
        if self.max_subdivisions < 4:
            raise ValueError("max_subdivisions: need at least 4 panels")


@dataclass(frozen=True)
class ProbabilityReport:
    value: float
    method: str
    n: int
    exact: Fraction | None = None
    error_estimate: float | None = None
    panels: int | None = None
    detail: dict = field(default_factory=dict)


def _require_sample_size(n):
    n = int(n)
    if n < 1:
        raise ValueError(f"n: sample size must be at least 1, got {n}")
    return n


def _to_unit(model):
    """Rescale to unit support; the law is invariant under affine maps."""
    if (model.support.lo, model.support.hi) == (0.0, 1.0):
        return model
    to_unit = getattr(model, "to_unit", None)
    if to_unit is None:
        raise ValueError(
            f"support: family {model.family!r} on {model.support} cannot be "
            "rescaled to the unit interval")
    return to_unit()


def p_uniform_fraction(n):
    """P(gamma = 2) for the uniform density, as an exact rational."""
    n = _require_sample_size(n)
    return Fraction(4, 9) - Fraction(16, 9) / 4 ** n


def p_uniform(n):
    return float(p_uniform_fraction(n))


def p_closed_form(model, n):
    """Closed-form p_n for the families that admit one.

    Raises for other families; those are served by p_exact_rational (any
    piecewise-constant density) or p_quadrature.
    """
    n = _require_sample_size(n)
    if n == 1:
        # a single point always covers its cell, for any density
        return 0.0
    if isinstance(model, Uniform):
        return p_uniform(n)
    if isinstance(model, ShrunkUniform):
        d = model.delta
        if d >= 1.0 / 3.0:
            # the support is so narrow that some single point always covers it
            return 0.0
        shrink = (1.0 - 3.0 * d) / (1.0 - 2.0 * d)
        return p_uniform(n) * shrink ** n
    if isinstance(model, GapUniform):
        d = model.delta
        if d >= 1.0 / 3.0:
            # points split across the gap always need one ball per side, so
            # gamma = 1 happens only when the whole sample shares a side
            return 1.0 - 2.0 ** (1 - n)
        c = 1.0 - 2.0 * d
        r6 = (1.0 - 6.0 * d) / c
        r4 = (1.0 - 4.0 * d) / c
        r2 = (1.0 + 2.0 * d) / c
        return (1.0 + r6 ** n / 9.0 - (2.0 / 3.0) * r4 ** n
                - (4.0 / 3.0) * (r2 / 4.0) ** n - (4.0 / 9.0) * (r6 / 4.0) ** n)
    if isinstance(model, TwoStep):
        d = model.delta
        if abs(d) == 1.0:
            return 0.0
        lead = 4.0 * (1.0 - d * d) / (9.0 - d * d)
        tail = (8.0 / 3.0) * 4.0 ** (-n) * (1.0 - d * d) * (
            (1.0 + d) ** (n - 1) / (3.0 - d) + (1.0 - d) ** (n - 1) / (3.0 + d))
        return lead - tail
    raise ValueError(
        f"family {model.family!r} has no closed form; use p_quadrature "
        "or p_exact_rational")


# exact rational route for piecewise-constant densities

class _StepCdf:
    """Exact piecewise-linear cdf built from (lo, hi, height) Fractions."""

    def __init__(self, parts):
        self.parts = [(Fraction(lo), Fraction(hi), Fraction(h))
                      for lo, hi, h in parts]
        self.breaks = sorted({e for lo, hi, _ in self.parts for e in (lo, hi)})

    def height(self, x):
        for lo, hi, h in self.parts:
            if lo <= x < hi:
                return h
        return Fraction(0)

    def cdf(self, x):
        total = Fraction(0)
        for lo, hi, h in self.parts:
            if x <= lo:
                break
            total += h * (min(x, hi) - lo)
        return total


def p_exact_rational(model, n):
    """p_n for a piecewise-constant density, in exact rational arithmetic.

    The region is cut so that on each piece the inner integrand is a power
    of a linear function of t and the outer one a power of a linear function
    of s, both integrable in closed form. This is the arbiter the closed
    forms are tested against, and it also covers step families without one.
    """
    n = _require_sample_size(n)
    parts = model.piecewise_constant_parts()
    if parts is None:
        raise ValueError(f"family {model.family!r} is not piecewise constant")
    if (model.support.lo, model.support.hi) != (0.0, 1.0):
        raise ValueError("support: exact integration expects the unit interval")
    if n == 1:
        return Fraction(0)

    F = _StepCdf(parts)
    half, third, one = Fraction(1, 2), Fraction(1, 3), Fraction(1)

    def A(t):
        return F.cdf(t) + F.cdf(t / 2)

    def B(s):
        return F.cdf(s) + F.cdf((1 + s) / 2)

    t_kinks = sorted({b for b in F.breaks if half < b < one}
                     | {2 * b for b in F.breaks if half < 2 * b < one})
    s_kinks = ({b for b in F.breaks if 0 < b < half}
               | {2 * b - 1 for b in F.breaks if 0 < 2 * b - 1 < half})
    crossings = {2 * tau - 1 if tau <= Fraction(2, 3) else tau / 2
                 for tau in t_kinks}
    s_cuts = sorted({Fraction(0), half, third} | s_kinks | crossings)

    total = Fraction(0)
    for s_lo, s_hi in zip(s_cuts[:-1], s_cuts[1:]):
        s_mid = (s_lo + s_hi) / 2
        f_s = F.height(s_mid)
        if f_s == 0:
            continue
        if s_mid <= third:
            lam0, lam1 = half, half          # L(s) = (1 + s) / 2
        else:
            lam0, lam1 = Fraction(0), Fraction(2)   # L(s) = 2 s
        L_mid = lam0 + lam1 * s_mid
        beta1 = (B(s_hi) - B(s_lo)) / (s_hi - s_lo)
        beta0 = B(s_lo) - beta1 * s_lo
        taus = [tau for tau in t_kinks if tau > L_mid]
        edges = [None] + taus + [one]        # None marks the moving edge L(s)
        for t_a, t_b in zip(edges[:-1], edges[1:]):
            probe = (L_mid + t_b) / 2 if t_a is None else (t_a + t_b) / 2
            f_t = F.height(probe)
            if f_t == 0:
                continue
            lo_ref = L_mid if t_a is None else t_a
            alpha1 = (A(t_b) - A(lo_ref)) / (t_b - lo_ref)
            alpha0 = A(t_b) - alpha1 * t_b
            for edge, sign in ((t_b, 1), (t_a, -1)):
                if edge is None:
                    g0 = alpha0 + alpha1 * lam0 - beta0
                    g1 = alpha1 * lam1 - beta1
                else:
                    g0 = alpha0 + alpha1 * edge - beta0
                    g1 = -beta1
                if g1 == 0:
                    piece = n * (s_hi - s_lo) * (g0 ** (n - 1))
                else:
                    hi_val = (g0 + g1 * s_hi) ** n
                    lo_val = (g0 + g1 * s_lo) ** n
                    piece = (hi_val - lo_val) / g1
                total += sign * f_s * f_t * piece / alpha1
    return total


# one-dimensional reduction for the density f(x) = 2x

MULTINOMIAL_MAX_N = 60


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_pow(p, k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _poly_mul(out, p)
    return out


def _poly_integrate_x(p, lo, hi):
    """Integral of x * p(x) between Fraction bounds."""
    total = Fraction(0)
    for k, c in enumerate(p):
        total += c * (hi ** (k + 2) - lo ** (k + 2)) / (k + 2)
    return total


def p_multinomial_squarecdf(n):
    """p_n for the density 2x on (0, 1), by polynomial expansion.

    The t-integral collapses because t f(t) dt is proportional to dG, leaving
    one-dimensional integrals of x times powers of three quadratics:

        p_n = int_0^{1/3} (8 n x / 5) (P1^{n-1} - P2^{n-1}) dx
            + int_{1/3}^{1/2} (8 n x / 5) (P1^{n-1} - P3^{n-1}) dx

    with P1 = 1 - x/2 - 5x^2/4 (value of G at t = 1), P2 = 1/16 + x/8
    - 15x^2/16 (at t = (1+x)/2) and P3 = -1/4 - x/2 + 15x^2/4 (at t = 2x).
    Powers are expanded with exact rational coefficients, so the result is
    a Fraction; the n cap only bounds the polynomial degree.
    """
    n = _require_sample_size(n)
    if n == 1:
        return Fraction(0)
    if n > MULTINOMIAL_MAX_N:
        raise ValueError(
            f"n: polynomial expansion is supported for n <= {MULTINOMIAL_MAX_N}, got {n}")
    p1 = [Fraction(1), Fraction(-1, 2), Fraction(-5, 4)]
    p2 = [Fraction(1, 16), Fraction(1, 8), Fraction(-15, 16)]
    p3 = [Fraction(-1, 4), Fraction(-1, 2), Fraction(15, 4)]
    q1, q2, q3 = (_poly_pow(p, n - 1) for p in (p1, p2, p3))
    third, half = Fraction(1, 3), Fraction(1, 2)
    lam1 = (_poly_integrate_x(q1, Fraction(0), third)
            - _poly_integrate_x(q2, Fraction(0), third))
    lam2 = (_poly_integrate_x(q1, third, half)
            - _poly_integrate_x(q3, third, half))
    return Fraction(8 * n, 5) * (lam1 + lam2)


# adaptive two-dimensional quadrature

def _lower_edge(s):
    return np.maximum(2.0 * s, 0.5 * (1.0 + s))


def _geometric_cuts(n):
    """Extra cuts packing panels into the corner where mass concentrates."""
    cuts = []
    scale = 0.25
    while scale * n > 0.02:
        cuts.append(scale)
        scale *= 0.25
    return cuts


def _t_kinks(model):
    """Ordinates in (1/2, 1) where A or the t-density changes analytic form."""
    kinks = set()
    for k in (float(v) for v in model.interior_knots()):
        for tau in (k, 2.0 * k):
            if 0.5 < tau < 1.0:
                kinks.add(tau)
    return sorted(kinks)


def _initial_cuts(model, n, transformed):
    knots = [float(k) for k in model.interior_knots()]
    s_cuts = {0.0, 1.0 / 3.0, 0.5}
    for k in knots:
        if 0.0 < k < 0.5:
            s_cuts.add(k)
        if 0.0 < 2.0 * k - 1.0 < 0.5:
            s_cuts.add(2.0 * k - 1.0)
    for tau in _t_kinks(model):
        s_cuts.add(2.0 * tau - 1.0 if tau <= 2.0 / 3.0 else tau / 2.0)
    bands = len(_t_kinks(model)) + 1
    v_cuts = {k / bands for k in range(bands + 1)}
    v_cuts.add(1.0 - 0.5 / bands)
    for cut in _geometric_cuts(n):
        s_cuts.add(0.5 * cut)                 # toward s = 0
        v_cuts.add(1.0 - cut / bands)         # toward t = 1, inside top band
    if transformed:
        top = float(model.cdf(0.5))
        s_cuts = {float(model.cdf(c)) for c in s_cuts}
        s_cuts |= {0.0, top}
        s_cuts = {c for c in s_cuts if 0.0 <= c <= top}
    return sorted(s_cuts), sorted(v_cuts)


def _make_integrand(model, n, config):
    """Returns fun(s, v) on the unit square of (outer, sliver) coordinates.

    For a bounded density the outer variable is s itself. For a density
    unbounded at the support edge the outer variable is u = F(s) and the
    sliver is placed in w = F(t); both density factors then cancel and the
    integrand stays finite.
    """
    power = n - 2
    log_domain = config.log_domain and power > 0

    def weight(G):
        G = np.maximum(G, 0.0)
        if power == 0:
            return np.ones_like(G)
        if log_domain:
            with np.errstate(divide="ignore"):
                return np.exp(power * np.log(np.maximum(G, 1e-300)))
        return G ** power

    if model.unbounded:
        def fun(u, w_slot):
            s = model.quantile(u)
            w_lo = model.cdf(_lower_edge(s))
            w = w_lo + w_slot * (1.0 - w_lo)
            t = model.quantile(w)
            G = (w + model.cdf(0.5 * t)) - (u + model.cdf(0.5 * (1.0 + s)))
            return n * (n - 1) * weight(G) * (1.0 - w_lo)
        return fun

    # ladder of t-ordinates: each density break is pinned to a fixed fraction
    # of the v axis, so panels never straddle a jump of f(t)
    rungs = np.array([0.0] + _t_kinks(model) + [1.0])
    bands = rungs.size - 1

    def fun(s, v):
        S, V = np.broadcast_arrays(s, v)
        L = _lower_edge(S)
        ladder = np.maximum(rungs.reshape((-1,) + (1,) * S.ndim), L[None])
        b = np.clip((V * bands).astype(int), 0, bands - 1)
        lo = np.take_along_axis(ladder, b[None], axis=0)[0]
        hi = np.take_along_axis(ladder, b[None] + 1, axis=0)[0]
        t = lo + (V * bands - b) * (hi - lo)
        G = (model.cdf(t) + model.cdf(0.5 * t)
             - model.cdf(S) - model.cdf(0.5 * (1.0 + S)))
        jac = bands * (hi - lo)
        return n * (n - 1) * model.pdf(S) * model.pdf(t) * weight(G) * jac

    return fun


def _evaluate_panels(fun, rect):
    """Two tensor Gauss estimates per panel; rect has rows (a, b, c, d)."""
    out = []
    for nodes, weights in (_GL15, _GL7):
        half_x = 0.5 * (rect[:, 1] - rect[:, 0])
        half_y = 0.5 * (rect[:, 3] - rect[:, 2])
        mid_x = 0.5 * (rect[:, 1] + rect[:, 0])
        mid_y = 0.5 * (rect[:, 3] + rect[:, 2])
        X = mid_x[:, None, None] + half_x[:, None, None] * nodes[None, :, None]
        Y = mid_y[:, None, None] + half_y[:, None, None] * nodes[None, None, :]
        vals = np.broadcast_to(fun(X, Y), (rect.shape[0], nodes.size, nodes.size))
        inner = np.einsum("pij,i,j->p", vals, weights, weights)
        out.append(inner * half_x * half_y)
    return out[0], out[1]


def p_quadrature(model, n, config=None):
    """p_n by adaptive tensor-product Gauss quadrature.

    Panels are seeded on density knots and on the images of the lower edge
    kink, then refined where a 15-point and a 7-point rule disagree most.
    Raises QuadratureError (with the best estimate attached) if the panel
    budget runs out before the requested tolerance is met.
    """
    n = _require_sample_size(n)
    model = _to_unit(model)
    config = config or QuadratureConfig()
    if n == 1:
        return ProbabilityReport(0.0, "quadrature", n, error_estimate=0.0,
                                 panels=0)
    fun = _make_integrand(model, n, config)
    s_cuts, v_cuts = _initial_cuts(model, n, model.unbounded)
    rects = np.array([(a, b, c, d)
                      for a, b in zip(s_cuts[:-1], s_cuts[1:])
                      for c, d in zip(v_cuts[:-1], v_cuts[1:])])
    vals, rough = _evaluate_panels(fun, rects)
    errs = np.abs(vals - rough)
    heap = [(-e, i) for i, e in enumerate(errs)]
    heapq.heapify(heap)
    store_rect = list(map(tuple, rects))
    store_val = list(vals)
    store_err = list(errs)
    dead = set()

    def totals():
        val = sum(v for i, v in enumerate(store_val) if i not in dead)
        err = sum(e for i, e in enumerate(store_err) if i not in dead)
        return val, err

    value, error = totals()
    while error > max(config.abs_tol, config.rel_tol * abs(value)):
        if len(store_rect) - len(dead) >= config.max_subdivisions:
            raise QuadratureError(
                f"quadrature did not reach rel_tol={config.rel_tol:g} within "
                f"{config.max_subdivisions} panels (best estimate {value:.12g}, "
                f"error estimate {error:.3g}); raise max_subdivisions",
                best_estimate=value, error_estimate=error)
        batch = []
        while heap and len(batch) < 64:
            _, i = heapq.heappop(heap)
            if i in dead:
                continue
            dead.add(i)
            batch.append(store_rect[i])
        if not batch:
            break
        children = []
        for a, b, c, d in batch:
            mx, my = 0.5 * (a + b), 0.5 * (c + d)
            children += [(a, mx, c, my), (a, mx, my, d),
                         (mx, b, c, my), (mx, b, my, d)]
        child_rects = np.array(children)
        vals, rough = _evaluate_panels(fun, child_rects)
        errs = np.abs(vals - rough)
        for rect, v, e in zip(children, vals, errs):
            idx = len(store_rect)
            store_rect.append(rect)
            store_val.append(v)
            store_err.append(e)
            heapq.heappush(heap, (-e, idx))
        value, error = totals()
    return ProbabilityReport(float(value), "quadrature", n,
                             error_estimate=float(error),
                             panels=len(store_rect) - len(dead))


def p_monte_carlo(model, n, reps=100000, seed=0):
    """Empirical p_n: fraction of samples leaving the middle region empty."""
    n = _require_sample_size(n)
    model = _to_unit(model)
    reps = int(reps)
    if reps < 1:
        raise ValueError(f"reps: need at least one replicate, got {reps}")
    rng = np.random.default_rng(seed)
    hits = 0
    block = max(1, min(reps, 20_000_000 // max(n, 1)))
    done = 0
    while done < reps:
        k = min(block, reps - done)
        x = model.quantile(rng.random((k, n)))
        mn = x.min(axis=1)
        mx = x.max(axis=1)
        lo = 0.5 * mx
        hi = 0.5 * (1.0 + mn)
        inside = (x > lo[:, None]) & (x < hi[:, None])
        hits += int(np.sum(~inside.any(axis=1)))
        done += k
    p = hits / reps
    se = math.sqrt(max(p * (1.0 - p), 1e-12) / reps)
    return ProbabilityReport(p, "monte-carlo", n, error_estimate=se,
                             detail={"reps": reps, "seed": seed})


def probability(model, n, method="auto", config=None, reps=100000, seed=0):
    """Route to the best available evaluation for this family.

    auto prefers exact arithmetic: the rational integrator for piecewise
    constant densities, the polynomial expansion for the density 2x at
    moderate n, adaptive quadrature otherwise.
    """
    n = _require_sample_size(n)
    model = _to_unit(model)
    if method == "auto":
        if model.piecewise_constant_parts() is not None:
            method = "exact-rational"
        elif model.family == "square_cdf" and n <= MULTINOMIAL_MAX_N:
            method = "multinomial"
        else:
            method = "quadrature"
    if method == "closed-form":
        return ProbabilityReport(p_closed_form(model, n), "closed-form", n)
    if method == "exact-rational":
        exact = p_exact_rational(model, n)
        return ProbabilityReport(float(exact), "exact-rational", n, exact=exact)
    if method == "multinomial":
        if model.family != "square_cdf":
            raise ValueError("method multinomial applies to the square_cdf family only")
        exact = p_multinomial_squarecdf(n)
        return ProbabilityReport(float(exact), "multinomial", n, exact=exact)
    if method == "quadrature":
        return p_quadrature(model, n, config)
    if method == "monte-carlo":
        return p_monte_carlo(model, n, reps=reps, seed=seed)
    raise ValueError(
        f"method: expected one of auto, closed-form, exact-rational, "
        f"multinomial, quadrature, monte-carlo; got {method!r}")


def check_stochastic_order(model, n_values=tuple(range(2, 21)), tol=1e-9):
    """Compare p_n(model) with the uniform law over a grid of sample sizes.

    Returns one of 'equal', 'below-uniform', 'above-uniform', 'inconclusive'.
    """
    diffs = []
    for n in n_values:
        diffs.append(probability(model, n).value - p_uniform(n))
    if all(abs(d) <= tol for d in diffs):
        return "equal"
    if all(d <= tol for d in diffs):
        return "below-uniform"
    if all(d >= -tol for d in diffs):
        return "above-uniform"
    return "inconclusive"
