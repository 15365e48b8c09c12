"""Seeded Monte Carlo over the domination number.

A :class:`SimulationPlan` fixes the point model, the anchors (a fixed list
or a model to draw them from), the sample sizes, and a 64-bit seed.
:func:`run` turns a plan into empirical counts per domination number, and
:func:`compare` grades those counts against a predicted distribution with
per-atom binomial z scores.

Replicate ``r`` consumes the Philox stream keyed by ``(seed, r // BATCH_REPS)``
at row ``r % BATCH_REPS``, so the counts depend only on ``(seed, r)`` and are
bit-identical for any worker count and any total replicate budget that
includes ``r``.  Workers split work at batch boundaries and merge integer
counts, which commutes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .densities import DensityModel
from .multianchor import _gamma_rows

BATCH_REPS = 2048
MAX_TIE_REDRAWS = 100
DEFAULT_THRESHOLD = 4.0

# Second Philox key word for per-replicate redraw streams, disjoint from
# batch indices (which stay far below 2**63).
_REDRAW_KEY_BASE = 1 << 63


def _stream(seed: int, word: int) -> np.random.Generator:
    """Philox stream keyed by (seed, word); uint64 dtype keeps every bit."""
    key = np.array([seed, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SimulationPlan:
    """Everything needed to reproduce one simulation run.

    ``fy`` is either a density model (anchors are drawn fresh each
    replicate) or a sequence of fixed anchor positions.  ``m`` may be
    omitted when fixed anchors pin it down.
    """

    fx: DensityModel
    fy: object
    n: int
    m: int = 0
    reps: int = 1
    seed: int = 0
    parallelism: int = 1

    def __post_init__(self):
        if not isinstance(self.fx, DensityModel):
            raise TypeError("fx must be a DensityModel")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if isinstance(self.fy, DensityModel):
            if self.m < 1:
                raise ValueError("m must be at least 1 when anchors are drawn from a model")
            if self.fy.support != self.fx.support:
                raise ValueError("fx and fy must share a support interval")
        else:
            anchors = np.sort(np.asarray(self.fy, dtype=float))
            if anchors.ndim != 1 or anchors.size < 1:
                raise ValueError("fixed anchors must be a nonempty 1-d sequence")
            if np.unique(anchors).size != anchors.size:
                raise ValueError("fixed anchors must be distinct")
            lo, hi = self.fx.support.lo, self.fx.support.hi
            if anchors[0] < lo or anchors[-1] > hi:
                raise ValueError("fixed anchors must lie within the support of fx")
            object.__setattr__(self, "fy", tuple(float(a) for a in anchors))
            if self.m == 0:
                object.__setattr__(self, "m", anchors.size)
            elif self.m != anchors.size:
                raise ValueError("m disagrees with the number of fixed anchors")

    @property
    def random_anchors(self) -> bool:
        return isinstance(self.fy, DensityModel)

    @property
    def gamma_cap(self) -> int:
        return min(self.n, 2 * self.m)


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of grading empirical counts against a predicted law."""

    statistic: float
    threshold: float
    verdict: str
    per_atom: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _bad_rows(xs, ys):
    """Rows with coincident points, within xs or between xs and anchors."""
    bad = (np.diff(xs, axis=1) == 0.0).any(axis=1)
    if ys.ndim == 2 and ys.shape[1] > 1:
        bad |= (np.diff(ys, axis=1) == 0.0).any(axis=1)
    bad |= (xs[:, :, None] == ys[:, None, :]).any(axis=(1, 2))
    return bad


def _redraw_row(plan: SimulationPlan, replicate: int):
    """Replacement draw for one replicate whose first draw had ties."""
    rng = _stream(plan.seed, _REDRAW_KEY_BASE + replicate)
    for _ in range(MAX_TIE_REDRAWS):
        if plan.random_anchors:
            u = rng.random(plan.m + plan.n)
            ys = np.sort(plan.fy.quantile(u[: plan.m]))
            xs = np.sort(plan.fx.quantile(u[plan.m :]))
        else:
            ys = np.asarray(plan.fy, dtype=float)
            xs = np.sort(plan.fx.quantile(rng.random(plan.n)))
        if not _bad_rows(xs[None, :], ys[None, :])[0]:
            return xs, ys
    raise ValueError(
        "replicate %d still has tied points after %d redraws; "
        "ties signal a degenerate model" % (replicate, MAX_TIE_REDRAWS)
    )


def _batch_counts(plan: SimulationPlan, batch: int) -> np.ndarray:
    """Domination-number counts for one batch of replicates."""
    start = batch * BATCH_REPS
    rows = min(BATCH_REPS, plan.reps - start)
    rng = _stream(plan.seed, batch)
    if plan.random_anchors:
        u = rng.random((rows, plan.m + plan.n))
        ys = np.sort(plan.fy.quantile(u[:, : plan.m]), axis=1)
        xs = np.sort(plan.fx.quantile(u[:, plan.m :]), axis=1)
    else:
        xs = np.sort(plan.fx.quantile(rng.random((rows, plan.n))), axis=1)
        ys = np.broadcast_to(np.asarray(plan.fy, dtype=float), (rows, plan.m))
    bad = _bad_rows(xs, ys)
    if bad.any():
        xs = np.array(xs)
        ys = np.array(ys)
        for row in np.flatnonzero(bad):
            xs[row], ys[row] = _redraw_row(plan, start + int(row))
    gammas = _gamma_rows(xs, ys)
    if gammas.min() < 1 or gammas.max() > plan.gamma_cap:
        raise RuntimeError("domination number left [1, min(n, 2m)]; simulation internals are broken")
    return np.bincount(gammas, minlength=plan.gamma_cap + 1)


def run(plan: SimulationPlan) -> dict:
    """Simulate the plan and return ``{gamma: count}`` over observed values.

    Identical plans give bit-identical counts whatever ``parallelism`` says;
    the worker count only changes wall-clock time.
    """
    n_batches = -(-plan.reps // BATCH_REPS)
    if plan.parallelism > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=plan.parallelism) as pool:
            partials = list(pool.map(lambda b: _batch_counts(plan, b), range(n_batches)))
    else:
        partials = [_batch_counts(plan, b) for b in range(n_batches)]
    totals = np.zeros(plan.gamma_cap + 1, dtype=np.int64)
    for part in partials:
        totals += part
    return {int(k): int(c) for k, c in enumerate(totals) if c > 0}


def compare(empirical: dict, predicted: dict, threshold: float = DEFAULT_THRESHOLD) -> ComparisonVerdict:
    """Grade empirical counts against predicted atom probabilities.

    Each atom gets a binomial z score ``(phat - p) / sqrt(p (1 - p) / reps)``;
    the verdict is ``pass`` exactly when every score stays within
    ``threshold``.  The statistic field carries the aggregate chi-square
    over atoms with positive predicted mass.
    """
    reps = sum(empirical.values())
    if reps <= 0:
        raise ValueError("empirical distribution is empty")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    atoms = sorted(set(empirical) | set(predicted))
    per_atom = []
    chi2 = 0.0
    ok = True
    for k in atoms:
        p = float(predicted.get(k, 0.0))
        phat = empirical.get(k, 0) / reps
        spread = math.sqrt(p * (1.0 - p) / reps)
        if spread > 0.0:
            z = (phat - p) / spread
            chi2 += reps * (phat - p) ** 2 / p if p > 0.0 else 0.0
        elif phat == p:
            z = 0.0
        else:
            z = math.inf if phat > p else -math.inf
            chi2 = math.inf
        ok &= abs(z) <= threshold
        per_atom.append((k, phat, p, z))
    return ComparisonVerdict(
        statistic=chi2,
        threshold=float(threshold),
        verdict="pass" if ok else "fail",
        per_atom=tuple(per_atom),
    )
