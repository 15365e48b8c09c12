"""Domination number with more than two anchor points.

Sorted anchors y_(1) < ... < y_(m) split the support into m + 1 cells.  The
digraph restricted to one cell is independent of the others given the cell
counts, so the total domination number is a sum of per-cell contributions:
an end cell contributes 1 exactly when it holds a point, and a middle cell
holding t points contributes 1 or 2 with the two-anchor probability p_t of
its cell density deciding between them.  Everything in this module is built
from that decomposition.

Conditional on the anchor positions the cell counts are multinomial in the
per-cell masses, and the distribution of the total is a small dynamic
program over cells.  With random anchors the conditional law is integrated
against the order-statistic density m! * prod f_Y(y_j) on the ordered
region, deterministically through nested Gauss-Legendre rules for m <= 3
and by Monte Carlo above that.

Middle-cell densities follow the support-rescaled construction: each cell
hosts an affine copy of the point density, which makes the per-cell p
values independent of the cell and is what makes closed-form expectations
possible.  For the uniform family the rescaled copy coincides with the
plain conditional density, so no flag is needed there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .densities import Uniform
from .exact import probability

# Exact cell enumeration is capped here; the composition space grows like
# C(n + m, m) and Monte Carlo takes over beyond the cap.
MAX_EXACT_TOTAL = 24


def compositions(total, parts, part_range=None):
    """Yield all tuples of length ``parts`` from ``part_range`` summing to ``total``.

    ``part_range`` defaults to 0..total.  Each composition appears exactly
    once, in lexicographic order.
    """
    total = int(total)
    parts = int(parts)
    if total < 0:
        raise ValueError(f"total: expected a nonnegative sum, got {total}")
    if parts < 1:
        raise ValueError(f"parts: expected at least one part, got {parts}")
    allowed = sorted(set(range(total + 1) if part_range is None else (int(v) for v in part_range)))
    if any(v < 0 for v in allowed):
        raise ValueError("part_range: parts must be nonnegative integers")
    allowed_set = set(allowed)

    def rec(remaining, slots):
        if slots == 1:
            if remaining in allowed_set:
                yield (remaining,)
            return
        for v in allowed:
            if v > remaining:
                break
            for rest in rec(remaining - v, slots - 1):
                yield (v,) + rest

    yield from rec(total, parts)


def uniform_composition_probability(n, m):
    """Probability of any single cell-count vector under uniform points and anchors.

    When every cell carries the uniform mass of its gap, all C(n+m, m) count
    vectors are equally likely, each with probability n! m! / (n+m)!.
    """
    n, m = int(n), int(m)
    if n < 0 or m < 0:
        raise ValueError("n, m: counts must be nonnegative")
    return Fraction(math.factorial(n) * math.factorial(m), math.factorial(n + m))


@dataclass(frozen=True)
class AnchorConditional:
    """Cell decomposition induced by fixed anchor positions.

    ``cell_probs`` has one entry per cell (m + 1 of them, ends included) and
    sums to 1; ``cell_models`` has one density per middle cell (m - 1 of
    them), each on the unit interval.
    """

    anchors: tuple
    cell_probs: tuple
    cell_models: tuple

    def __post_init__(self):
        m = len(self.anchors)
        if m < 1:
            raise ValueError("anchors: need at least one anchor")
        if any(b <= a for a, b in zip(self.anchors, self.anchors[1:])):
            raise ValueError("anchors: positions must be strictly increasing")
        if len(self.cell_probs) != m + 1:
            raise ValueError(
                f"cell_probs: expected {m + 1} cell masses for {m} anchors, "
                f"got {len(self.cell_probs)}")
        if any(p < 0 for p in self.cell_probs):
            raise ValueError("cell_probs: cell masses must be nonnegative")
        if abs(sum(self.cell_probs) - 1.0) > 1e-9:
            raise ValueError(f"cell_probs: cell masses sum to {sum(self.cell_probs)!r}, not 1")
        if len(self.cell_models) != m - 1:
            raise ValueError(
                f"cell_models: expected {m - 1} middle-cell densities, got {len(self.cell_models)}")


def _unit_model(model):
    if model.support.lo == 0.0 and model.support.hi == 1.0:
        return model
    if hasattr(model, "to_unit"):
        return model.to_unit()
    raise ValueError(f"support: family {model.family} cannot be rescaled to the unit interval")


def conditional_on_anchors(fx, anchors, hu_family=False):
    """Build the cell decomposition of ``fx`` for fixed anchors.

    Uniform point densities condition cleanly on every cell.  Any other
    family needs ``hu_family=True``, which places an affine copy of ``fx``
    in each middle cell and gives every cell the uniform mass of its gap.
    """
    anchors = tuple(sorted(float(a) for a in np.atleast_1d(anchors)))
    if len(set(anchors)) != len(anchors):
        raise ValueError("anchors: duplicate anchor positions")
    lo, hi = fx.support.lo, fx.support.hi
    for a in anchors:
        if not lo < a < hi:
            raise ValueError(f"anchors: {a!r} lies outside the open support ({lo}, {hi})")
    if fx.family != "uniform" and not hu_family:
        raise ValueError(
            f"fx: cell-conditional densities are only available for the uniform family; "
            f"pass hu_family=True to place an affine copy of {fx.family} in every cell")
    edges = np.array([lo, *anchors, hi])
    if hu_family and fx.family != "uniform":
        cell_probs = tuple(np.diff(edges) / (hi - lo))
    else:
        cell_probs = tuple(np.diff(fx.cdf(edges)))
    unit = _unit_model(fx)
    cell_models = (unit,) * (len(anchors) - 1)
    return AnchorConditional(anchors=anchors, cell_probs=cell_probs, cell_models=cell_models)


def _p_tables(cell_models, n):
    """Per-middle-cell tables of the pair probability p_t for t = 0..n."""
    cache = {}
    tables = []
    for model in cell_models:
        key = id(model)
        if key not in cache:
            vec = np.zeros(n + 1)
            for t in range(2, n + 1):
                vec[t] = probability(model, t).value
            cache[key] = vec
        tables.append(cache[key])
    return tables


def _pmf_vector(cell_probs, p_tables, n):
    """Distribution of the domination total via a cell-by-cell program.

    Cells are consumed left to right; conditional on the points remaining,
    the count in the next cell is binomial with the renormalized cell mass.
    States track (points remaining, domination so far).
    """
    cells = len(cell_probs)
    m = cells - 1
    tail = np.concatenate([np.cumsum(np.asarray(cell_probs, dtype=float)[::-1])[::-1], [0.0]])
    dp = np.zeros((n + 1, 2 * m + 1))
    dp[n, 0] = 1.0
    for j in range(cells):
        new = np.zeros_like(dp)
        ratio = 0.0 if tail[j] <= 0.0 else min(cell_probs[j] / tail[j], 1.0)
        is_end = j == 0 or j == cells - 1
        p_vec = None if is_end else p_tables[j - 1]
        for r in range(n + 1):
            row = dp[r]
            if not row.any():
                continue
            for t in range(r + 1):
                w = math.comb(r, t) * ratio ** t * (1.0 - ratio) ** (r - t)
                if w == 0.0:
                    continue
                if t == 0:
                    new[r, :] += w * row
                elif is_end:
                    new[r - t, 1:] += w * row[:-1]
                else:
                    p_two = p_vec[t]
                    new[r - t, 1:] += w * (1.0 - p_two) * row[:-1]
                    new[r - t, 2:] += w * p_two * row[:-2]
        dp = new
    return dp[0]


def pmf_conditional_table(cond, n):
    """Full domination-number pmf given fixed anchors; index k holds P(gamma = k)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n: sample size must be at least 1, got {n}")
    m = len(cond.anchors)
    if n + m > MAX_EXACT_TOTAL:
        raise ValueError(
            f"n + m = {n + m}: exact cell enumeration is capped at {MAX_EXACT_TOTAL}; "
            "use Monte Carlo beyond that")
    return _pmf_vector(cond.cell_probs, _p_tables(cond.cell_models, n), n)


def pmf_conditional(cond, n, k):
    """P(gamma = k) given fixed anchors; zero outside 1 <= k <= 2m."""
    table = pmf_conditional_table(cond, n)
    k = int(k)
    if k < 0 or k >= len(table):
        return 0.0
    return float(table[k])


def _require_matching_supports(fx, fy):
    if (fx.support.lo, fx.support.hi) != (fy.support.lo, fy.support.hi):
        raise ValueError(
            f"fy: anchor support [{fy.support.lo}, {fy.support.hi}] must match the "
            f"point support [{fx.support.lo}, {fx.support.hi}]")


def _cell_mass_probs(fx, anchors_sorted, hu_family):
    lo, hi = fx.support.lo, fx.support.hi
    edges = np.concatenate([[lo], anchors_sorted, [hi]])
    if fx.family == "uniform" or hu_family:
        return np.diff(edges) / (hi - lo)
    raise ValueError(
        f"fx: cell-conditional densities are only available for the uniform family; "
        f"pass hu_family=True to place an affine copy of {fx.family} in every cell")


def _ordered_simplex_quadrature(fn, lo, hi, m, nodes):
    # nested Gauss-Legendre over lo < y_1 < ... < y_m < hi
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w

    def level(depth, a, ys):
        width = hi - a
        total = 0.0
        for xi, wi in zip(x, w):
            y = a + width * xi
            ys.append(y)
            if depth == m:
                total = total + (wi * width) * fn(ys)
            else:
                total = total + (wi * width) * level(depth + 1, y, ys)
            ys.pop()
        return total

    return level(1, lo, [])


def pmf_random_anchors_table(fx, fy, n, m, nodes=24, mc_reps=None, seed=0, hu_family=False):
    """Domination-number pmf with anchors drawn from ``fy``; index k holds P(gamma = k)."""
    n, m = int(n), int(m)
    if n < 1:
        raise ValueError(f"n: sample size must be at least 1, got {n}")
    if m < 1:
        raise ValueError(f"m: need at least one anchor, got {m}")
    if n + m > MAX_EXACT_TOTAL:
        raise ValueError(
            f"n + m = {n + m}: exact cell enumeration is capped at {MAX_EXACT_TOTAL}; "
            "use Monte Carlo beyond that")
    _require_matching_supports(fx, fy)
    p_tables = _p_tables((_unit_model(fx),) * (m - 1), n) if m > 1 else []
    lo, hi = fx.support.lo, fx.support.hi

    if mc_reps is not None:
        reps = int(mc_reps)
        if reps < 1:
            raise ValueError(f"mc_reps: need at least one replicate, got {mc_reps}")
        rng = np.random.default_rng(seed)
        ys = np.sort(fy.quantile(rng.random((reps, m))), axis=1)
        total = np.zeros(2 * m + 1)
        for row in ys:
            probs = _cell_mass_probs(fx, row, hu_family)
            total += _pmf_vector(probs, p_tables, n)
        return total / reps

    if m > 3:
        raise ValueError(
            f"m: deterministic anchor quadrature is limited to m <= 3, got {m}; "
            "pass mc_reps to sample anchors instead")
    norm = math.factorial(m)

    def fn(ys):
        arr = np.asarray(ys)
        probs = _cell_mass_probs(fx, arr, hu_family)
        weight = norm * float(np.prod(fy.pdf(arr)))
        return weight * _pmf_vector(probs, p_tables, n)

    return _ordered_simplex_quadrature(fn, lo, hi, m, nodes)


def pmf_random_anchors(fx, fy, n, m, k, nodes=24, mc_reps=None, seed=0, hu_family=False):
    """P(gamma = k) with random anchors; zero outside 1 <= k <= 2m."""
    table = pmf_random_anchors_table(fx, fy, n, m, nodes=nodes, mc_reps=mc_reps,
                                     seed=seed, hu_family=hu_family)
    k = int(k)
    if k < 0 or k >= len(table):
        return 0.0
    return float(table[k])


def expected_gamma(fx, fy, n, m, nodes=48, hu_family=False):
    """Expected domination number with random anchors.

    Splits into the chance that each end cell is occupied plus, for every
    middle cell, the count distribution integrated against the joint density
    of the two bracketing anchor order statistics.  The count probability
    P(N_j = t) carries the binomial coefficient C(n, t) alongside the mass
    powers.
    """
    n, m = int(n), int(m)
    if n < 1:
        raise ValueError(f"n: sample size must be at least 1, got {n}")
    if m < 1:
        raise ValueError(f"m: need at least one anchor, got {m}")
    if n + m > MAX_EXACT_TOTAL:
        raise ValueError(
            f"n + m = {n + m}: exact cell enumeration is capped at {MAX_EXACT_TOTAL}; "
            "use Monte Carlo beyond that")
    _require_matching_supports(fx, fy)
    lo, hi = fx.support.lo, fx.support.hi
    width = hi - lo
    uniform_mass = fx.family == "uniform" or hu_family
    if not uniform_mass:
        _cell_mass_probs(fx, np.array([]), hu_family)  # raises with the standard message

    x, w = np.polynomial.legendre.leggauss(nodes)
    y = lo + 0.5 * (x + 1.0) * width
    wy = 0.5 * w * width
    fy_pdf = fy.pdf(y)
    Fy = fy.cdf(y)
    mass_left = (y - lo) / width
    mass_right = (hi - y) / width
    left = float(np.sum(wy * m * fy_pdf * (1.0 - Fy) ** (m - 1)
                        * (1.0 - (1.0 - mass_left) ** n)))
    right = float(np.sum(wy * m * fy_pdf * Fy ** (m - 1)
                         * (1.0 - (1.0 - mass_right) ** n)))

    middle = 0.0
    if m > 1:
        p_vec = _p_tables((_unit_model(fx),), n)[0]
        counts = np.arange(1, n + 1)
        binom = np.array([math.comb(n, int(t)) for t in counts], dtype=float)
        one_plus_p = 1.0 + p_vec[1:]
        for j in range(2, m + 1):
            pair_norm = math.factorial(m) / (math.factorial(j - 2) * math.factorial(m - j))
            for yb, wb in zip(y, wy):
                # inner anchor runs below the outer one
                span = yb - lo
                a = lo + 0.5 * (x + 1.0) * span
                wa = 0.5 * w * span
                delta = (yb - a) / width
                occupancy = (binom[None, :] * delta[:, None] ** counts[None, :]
                             * (1.0 - delta[:, None]) ** (n - counts)[None, :])
                inner = occupancy @ one_plus_p
                pair = (pair_norm * fy.cdf(a) ** (j - 2) * fy.pdf(a)
                        * float(fy.pdf(yb)) * (1.0 - float(fy.cdf(yb))) ** (m - j))
                middle += float(wb * np.sum(wa * pair * inner))
    return left + right + middle


def expected_gamma_hu(n, m, p_table):
    """Expected domination number under uniform anchors with equal cell masses.

    Evaluates 2n/(n+m) plus the occupancy-weighted sum of per-count pair
    probabilities.  Exact rational arithmetic up to n + m = 170 (returns a
    Fraction there when the table is rational); floating point via log-gamma
    above.
    """
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise ValueError(f"n, m: counts must be at least 1, got ({n}, {m})")
    p_table = list(p_table)
    if len(p_table) < n:
        raise ValueError(f"p_table: need probabilities for counts 1..{n}, got {len(p_table)}")
    if any(not 0 <= float(p) <= 1 for p in p_table[:n]):
        raise ValueError("p_table: probabilities must lie in [0, 1]")
    if n + m <= 170:
        base = Fraction(2 * n, n + m)
        if m < 2:
            return base
        coef = Fraction(math.factorial(n) * m * (m - 1), math.factorial(n + m))
        acc = Fraction(0)
        for i in range(1, n + 1):
            occ = Fraction(math.factorial(n + m - i - 1), math.factorial(n - i))
            acc += occ * (1 + Fraction(p_table[i - 1]))
        return base + coef * acc
    base = 2.0 * n / (n + m)
    if m < 2:
        return base
    log_coef = math.lgamma(n + 1) - math.lgamma(n + m + 1) + math.log(m * (m - 1))
    acc = 0.0
    for i in range(1, n + 1):
        log_occ = math.lgamma(n + m - i) - math.lgamma(n - i + 1)
        acc += math.exp(log_coef + log_occ) * (1.0 + float(p_table[i - 1]))
    return base + acc


def asymptotic_law_fixed_m(p_cell_limits, m):
    """Limiting law of the domination number as the sample grows, anchors fixed in number.

    Both end cells and every middle cell eventually hold points, so the
    total settles at m + 1 plus one independent Bernoulli per middle cell
    with that cell's limiting pair probability.  Returns {value: prob}.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"m: need at least one anchor, got {m}")
    limits = [float(p) for p in p_cell_limits]
    if len(limits) != m - 1:
        raise ValueError(
            f"p_cell_limits: expected m - 1 = {m - 1} middle-cell limits, got {len(limits)}")
    if any(not 0.0 <= p <= 1.0 for p in limits):
        raise ValueError("p_cell_limits: probabilities must lie in [0, 1]")
    law = np.array([1.0])
    for p in limits:
        law = np.convolve(law, [1.0 - p, p])
    return {m + 1 + i: float(q) for i, q in enumerate(law)}


def _gamma_rows(xs, ys, per_cell=False):
    """Domination numbers for batches of sorted points against sorted anchors.

    ``xs`` is (reps, n) with sorted rows; ``ys`` is (reps, m) or (m,).
    Returns totals of shape (reps,), or the (reps, m + 1) per-cell
    contributions when ``per_cell`` is set.  Float comparisons only;
    intended for Monte Carlo, not for adversarial boundary cases.
    """
    xs = np.asarray(xs, dtype=float)
    reps, _ = xs.shape
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if ys.ndim == 1:
        ys = np.broadcast_to(ys, (reps, ys.shape[0]))
    m = ys.shape[1]
    idx = (xs[:, :, None] >= ys[:, None, :]).sum(axis=2)
    cells = np.zeros((reps, m + 1), dtype=np.int64)
    for c in range(m + 1):
        mask = idx == c
        occupied = mask.any(axis=1)
        if c == 0 or c == m:
            cells[:, c] = occupied
            continue
        mn = np.where(mask, xs, np.inf).min(axis=1)
        mx = np.where(mask, xs, -np.inf).max(axis=1)
        lo_edge = mx + ys[:, c - 1]
        hi_edge = mn + ys[:, c]
        doubled = 2.0 * xs
        witness = (mask & (doubled > lo_edge[:, None]) & (doubled < hi_edge[:, None])).any(axis=1)
        cells[:, c] = np.where(occupied, np.where(witness, 1, 2), 0)
    if per_cell:
        return cells
    return cells.sum(axis=1)


@dataclass(frozen=True)
class GrowthReport:
    """Monte Carlo summary of how the expected domination number scales."""

    n_grid: tuple
    means: tuple
    reps: int
    seed: int
    strictly_increasing: bool
    linear_bound_met: bool


def gamma_growth_check(n_grid, reps=10_000, seed=0):
    """Estimate E[gamma] for equal point and anchor counts over a grid of sizes.

    Uniform points against uniform anchors.  Reports whether the means grow
    strictly and whether the largest size reaches half its point count.
    """
    n_grid = tuple(int(v) for v in n_grid)
    if not n_grid or any(v < 1 for v in n_grid):
        raise ValueError(f"n_grid: need sizes of at least 1, got {n_grid!r}")
    reps = int(reps)
    if reps < 1:
        raise ValueError(f"reps: need at least one replicate, got {reps}")
    rng = np.random.default_rng(seed)
    means = []
    for n in n_grid:
        xs = np.sort(rng.random((reps, n)), axis=1)
        ys = np.sort(rng.random((reps, n)), axis=1)
        means.append(float(_gamma_rows(xs, ys).mean()))
    increasing = all(b > a for a, b in zip(means, means[1:]))
    bound = means[-1] >= 0.5 * n_grid[-1]
    return GrowthReport(n_grid=n_grid, means=tuple(means), reps=reps, seed=seed,
                        strictly_increasing=increasing, linear_bound_met=bound)
