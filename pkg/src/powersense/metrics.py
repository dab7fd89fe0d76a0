"""Analytic performance of a set of decision regions.

The energy statistic is Gamma(M, s_i) under level i, so the probability of
landing in any threshold interval is a difference of regularized lower
incomplete gamma values. Everything else here is bookkeeping on top of the
resulting decision-probability matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gammafn import reg_lower_gamma
from .regions import DecisionRegions
from .scenario import Scenario, posterior

_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    """Row-stochastic matrix of Pr(decide level j | true level i).

    kind records provenance ("analytic" or "empirical"); empirical matrices
    carry the per-hypothesis trial count and raw counts so confidence
    intervals can be formed.
    """

    probs: np.ndarray
    kind: str = "analytic"
    trials: int | None = None
    counts: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"probs: expected a square matrix, got shape {p.shape}")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probs: entries must lie in [0, 1]")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
            raise ValueError("probs: rows must sum to 1")
        if self.kind not in ("analytic", "empirical"):
            raise ValueError(f"kind: expected 'analytic' or 'empirical', got {self.kind!r}")

    @property
    def n_levels(self) -> int:
        return self.probs.shape[0] - 1


def decision_matrix(s: Scenario, r: DecisionRegions) -> DecisionMatrix:
    """Pr(decide j | true i) for every level pair, from the gamma CDF.

    Entry (i, j) is P(M, t_{j+1}/s_i) - P(M, t_j/s_i); masked levels get
    exactly zero columns because their interval has zero width.
    """
    if r.scenario is not None and r.scenario != s:
        raise ValueError("decision_matrix: regions were built from a different scenario")
    n = s.n_levels
    m = s.samples
    cdf = np.empty((n + 1, n + 2))
    cdf[:, 0] = 0.0
    cdf[:, n + 1] = 1.0
    for i in range(n + 1):
        si = float(s.scales[i])
        for j in range(1, n + 1):
            cdf[i, j] = reg_lower_gamma(m, r.thresholds[j] / si)
    q = np.diff(cdf, axis=1)
    return DecisionMatrix(probs=q, kind="analytic")


def pfa_pd(q: DecisionMatrix, s: Scenario) -> tuple[float, float]:
    """(false-alarm probability, detection probability) of the regions.

    False alarm: any presence decision while the transmitter is off.
    Detection: any presence decision while it is on, averaged over the
    conditional priors of the nonzero levels.
    """
    p = q.probs
    p_on = s.prior_on()
    if p_on <= 0:
        raise ValueError("pfa_pd: no nonzero level has prior mass")
    pfa = float(p[0, 1:].sum())
    weights = np.asarray(s.priors[1:]) / p_on
    pd = float((weights * p[1:, 1:].sum(axis=1)).sum())
    return pfa, pd


def discrimination(q: DecisionMatrix, s: Scenario, variant: str = "dis1") -> float:
    """Probability of deciding the exact level.

    "dis1" conditions on presence (weighted diagonal over nonzero levels);
    "dis2" counts absence as a level of its own (full weighted trace).
    """
    p = q.probs
    pri = np.asarray(s.priors)
    if variant == "dis1":
        p_on = s.prior_on()
        if p_on <= 0:
            raise ValueError("discrimination: no nonzero level has prior mass")
        return float((np.diag(p)[1:] * pri[1:]).sum() / p_on)
    if variant == "dis2":
        return float((np.diag(p) * pri).sum())
    raise ValueError(f"discrimination: variant must be 'dis1' or 'dis2', got {variant!r}")


def offset_error(q: DecisionMatrix, s: Scenario, delta: int) -> float:
    """Prior-weighted probability that the decided level is off by delta."""
    n = q.n_levels
    if not 0 <= delta <= n:
        raise ValueError(f"offset_error: delta must lie in 0..{n}, got {delta}")
    p = q.probs
    pri = np.asarray(s.priors)
    i, j = np.indices(p.shape)
    mask = np.abs(i - j) == delta
    return float((p * pri[:, None])[mask].sum())


def zero_one_costs(n_levels: int) -> np.ndarray:
    """Unit cost for every wrong decision, zero for the right one."""
    return 1.0 - np.eye(n_levels + 1)


def bayes_risk_decide(y, s: Scenario, costs: np.ndarray):
    """Minimum-posterior-risk level for the energy y.

    costs[i][j] is the price of deciding j when i is true; with 0-1 costs
    this reduces to the level-first MAP rule. Exact risk ties resolve to
    the larger level index.
    """
    c = np.asarray(costs, dtype=float)
    n = s.n_levels
    if c.shape != (n + 1, n + 1):
        raise ValueError(f"costs: expected shape {(n + 1, n + 1)}, got {c.shape}")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("costs: entries must be finite and nonnegative")
    post = posterior(y, s)
    risks = c.T @ post
    flipped = risks[::-1] if risks.ndim == 1 else risks[::-1, :]
    idx = n - np.argmin(flipped, axis=0)
    return int(idx) if np.isscalar(y) else idx
