"""MAP decision regions on the energy axis.

Two sensing strategies share one geometric fact: the per-level log joints,
as functions of the energy y, are straight lines with slopes -1/s_i that
ascend with the level index. The MAP winner is therefore the upper envelope
of those lines, each level owning one (possibly empty) interval, and the
intervals tile (0, inf) with no gaps. Levels that never reach the envelope
are "masked": they can never be decided.

PRESENCE_FIRST gates on the aggregate presence-vs-absence posterior at a
root of the balance function, then runs the envelope over nonzero levels
only. LEVEL_FIRST runs the envelope over all levels including 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .gammafn import inv_reg_lower_gamma
from .scenario import Scenario

_CROSSCHECK_RTOL = 1e-8


class Strategy(Enum):
    PRESENCE_FIRST = 1
    LEVEL_FIRST = 2


class DegenerateThresholdError(RuntimeError):
    """The on/off balance is nonnegative already at zero energy.

    The MAP rule would then always claim presence; the model's usual
    assumption is that the sample count is large enough to exclude this.
    """


@dataclass(frozen=True, eq=False)
class DecisionRegions:
    """Ordered thresholds partitioning (0, inf) into per-level intervals.

    thresholds has length N+2 with thresholds[0] == 0 and
    thresholds[N+1] == inf; level i owns [thresholds[i], thresholds[i+1]).
    Masked levels have zero-width intervals. onoff_threshold separates the
    absence decision from every presence decision (== thresholds[1]).
    """

    strategy: Strategy
    thresholds: np.ndarray
    masked: frozenset[int] = field(default_factory=frozenset)
    onoff_threshold: float = 0.0
    scenario: Scenario | None = None


def theta_pair(i: int, j: int, s: Scenario) -> float:
    """Energy where the log joints of levels i and j cross.

    The higher level wins for energies above the crossing. Symmetric in
    (i, j); computed in log space.
    """
    if i == j:
        raise ValueError("theta_pair: levels must differ")
    si = float(s.scales[i])
    sj = float(s.scales[j])
    num = s.samples * (math.log(si) - math.log(sj)) + math.log(s.priors[j]) - math.log(s.priors[i])
    return si * sj / (s.gain * (s.powers[i] - s.powers[j])) * num


def _balance_terms(s: Scenario):
    # Presence terms of the balance function in log form:
    # ln pi_i - M ln(s_i / sigma2) + rate_i * theta, rate_i = gain P_i / (sigma2 s_i).
    sc = s.scales
    sigma2 = s.noise_var
    idx = np.arange(1, s.n_levels + 1)
    const = np.log(np.asarray(s.priors)[idx]) - s.samples * (np.log(sc[idx]) - math.log(sigma2))
    rates = s.gain * np.asarray(s.powers)[idx] / (sigma2 * sc[idx])
    return const, rates


def _log_balance_gap(theta: float, const: np.ndarray, rates: np.ndarray, log_prior_off: float) -> float:
    v = const + rates * theta
    m = v.max()
    return m + math.log(np.exp(v - m).sum()) - log_prior_off


def presence_balance(theta: float, s: Scenario) -> float:
    """Aggregate presence joint minus the absence prior at energy theta.

    Strictly increasing in theta; its unique root is the MAP on/off
    threshold of the presence-first strategy. Evaluated via log-sum-exp.
    """
    const, rates = _balance_terms(s)
    gap = _log_balance_gap(float(theta), const, rates, math.log(s.priors[0]))
    return s.priors[0] * math.expm1(gap)


def solve_theta_onoff(s: Scenario) -> float:
    """Root of the presence balance: the presence-first on/off threshold.

    Bracketed bisection (the balance is strictly increasing), bracket grown
    by doubling from noise_var * samples. Raises DegenerateThresholdError
    when the balance is already nonnegative at zero energy.
    """
    const, rates = _balance_terms(s)
    lp0 = math.log(s.priors[0])
    g = lambda t: _log_balance_gap(t, const, rates, lp0)

    if g(0.0) >= 0.0:
        raise DegenerateThresholdError(
            "presence balance is nonnegative at zero energy; the MAP rule would always "
            "claim presence (sample count too small for this configuration)"
        )
    lo = 0.0
    hi = s.noise_var * s.samples
    for _ in range(400):
        if g(hi) >= 0.0:
            break
        lo = hi
        hi *= 2.0
    else:  # pragma: no cover - balance grows without bound
        raise RuntimeError("failed to bracket the on/off threshold")

    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def _envelope(levels, s: Scenario):
    # Upper envelope of the log-joint lines for the given ascending level
    # indices. Returns [(level, start)] with start the energy where the
    # level begins to lead; the first entry leads from -inf.
    stack: list[tuple[int, float]] = []
    for i in levels:
        start = -math.inf
        while stack:
            top, top_start = stack[-1]
            cross = theta_pair(i, top, s)
            if cross <= top_start:
                stack.pop()  # top is overtaken before it ever leads
                continue
            start = cross
            break
        stack.append((i, start))
    return stack


def _pairwise_bounds(levels, s: Scenario):
    # Per-level interval [max crossings below, min crossings above) computed
    # directly, the closed-form counterpart of the envelope scan.
    lows, highs = {}, {}
    for i in levels:
        below = [theta_pair(i, j, s) for j in levels if j < i]
        above = [theta_pair(i, j, s) for j in levels if j > i]
        lows[i] = max(below) if below else -math.inf
        highs[i] = min(above) if above else math.inf
    return lows, highs


def _close(a: float, b: float) -> bool:
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= _CROSSCHECK_RTOL * max(abs(a), abs(b), 1e-12)


def build_regions(
    s: Scenario,
    strategy: Strategy,
    onoff_override: float | None = None,
) -> DecisionRegions:
    """Construct the decision regions of a strategy.

    The envelope scan is the ground truth; the closed-form pairwise bounds
    are recomputed independently and any disagreement on a threshold or a
    mask flag raises (it would indicate a numerical inconsistency, not a
    modeling choice). onoff_override substitutes an externally chosen
    presence threshold (e.g. a Neyman-Pearson one) for the MAP root; it is
    only meaningful for PRESENCE_FIRST.
    """
    n = s.n_levels
    if strategy is Strategy.PRESENCE_FIRST:
        theta_on = solve_theta_onoff(s) if onoff_override is None else float(onoff_override)
        if not theta_on > 0:
            raise DegenerateThresholdError(f"on/off threshold must be positive, got {theta_on}")
        entries = _envelope(range(1, n + 1), s)
        # Clip to the presence side: levels whose envelope interval ends at
        # or before the gate are masked by the absence decision.
        surviving = []
        for k, (i, start) in enumerate(entries):
            end = entries[k + 1][1] if k + 1 < len(entries) else math.inf
            if end <= theta_on:
                continue
            surviving.append((i, max(start, theta_on)))
        pairwise_levels = range(1, n + 1)
    else:
        theta_on = None
        entries = _envelope(range(0, n + 1), s)
        if entries[0][0] != 0 or (len(entries) > 1 and entries[1][1] <= 0.0):
            raise DegenerateThresholdError(
                "zero level owns no positive-energy interval; the level-first rule would "
                "always claim presence (sample count too small for this configuration)"
            )
        surviving = entries
        pairwise_levels = range(0, n + 1)

    surviving_idx = [i for i, _ in surviving]
    masked = frozenset(set(pairwise_levels) - set(surviving_idx))

    thresholds = np.empty(n + 2)
    thresholds[0] = 0.0
    thresholds[n + 1] = math.inf
    for i, start in surviving:
        if i >= 1:
            thresholds[i] = start
    for i in range(n, 0, -1):
        if i in masked:
            thresholds[i] = thresholds[i + 1]

    _crosscheck_pairwise(s, pairwise_levels, theta_on, surviving, masked)

    return DecisionRegions(
        strategy=strategy,
        thresholds=thresholds,
        masked=masked,
        onoff_threshold=float(thresholds[1]),
        scenario=s,
    )


def _crosscheck_pairwise(s, levels, theta_on, surviving, masked):
    lows, highs = _pairwise_bounds(levels, s)
    if theta_on is not None:
        lows = {i: max(lo, theta_on) for i, lo in lows.items()}
    pair_masked = {i for i in levels if lows[i] >= highs[i]}
    if pair_masked != set(masked):
        raise RuntimeError(
            f"internal inconsistency: envelope masks {sorted(masked)} but pairwise "
            f"bounds mask {sorted(pair_masked)}"
        )
    for k, (i, start) in enumerate(surviving):
        # The leftmost region of the level-first rule starts at the axis
        # origin; every other start must match the pairwise lower bound, and
        # every region's end must meet the next region's start (no gaps).
        if not (k == 0 and theta_on is None) and not _close(start, lows[i]):
            raise RuntimeError(
                f"internal inconsistency: level {i} starts at {start} (envelope) vs "
                f"{lows[i]} (pairwise)"
            )
        if k + 1 < len(surviving):
            nxt = surviving[k + 1][1]
            if not _close(highs[i], nxt):
                raise RuntimeError(
                    f"internal inconsistency: level {i} ends at {nxt} (envelope) vs "
                    f"{highs[i]} (pairwise)"
                )


def phi_onoff(s: Scenario) -> float:
    """On/off threshold of the level-first strategy.

    Equals the crossing between level 0 and the first nonzero level that is
    not masked under the level-first rule, and strictly exceeds the
    presence-first threshold whenever N >= 2 (they coincide for N = 1).
    """
    r = build_regions(s, Strategy.LEVEL_FIRST)
    j0 = next(i for i in range(1, s.n_levels + 1) if i not in r.masked)
    value = theta_pair(j0, 0, s)
    if not _close(value, r.onoff_threshold):  # pragma: no cover - same crossing formula
        raise RuntimeError(
            f"internal inconsistency: closed-form on/off {value} vs region boundary "
            f"{r.onoff_threshold}"
        )
    return value


def classify(y, r: DecisionRegions):
    """Map energies to decided levels; never returns a masked level.

    Intervals are right-open, so an energy exactly on a threshold belongs
    to the interval on its right.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("classify: energy must be strictly positive")
    idx = np.searchsorted(r.thresholds, arr, side="right") - 1
    return int(idx) if np.isscalar(y) else idx


def np_threshold(s: Scenario, target_pfa: float) -> float:
    """Energy threshold whose false-alarm probability equals target_pfa.

    Pr(y > threshold | off) = target_pfa, i.e. the (1 - target_pfa)
    quantile of the Gamma(M, noise_var) energy distribution.
    """
    if not 0.0 < target_pfa <= 1.0:
        raise ValueError(f"np_threshold: target_pfa must lie in (0, 1], got {target_pfa}")
    if target_pfa == 1.0:
        return 0.0
    return s.noise_var * inv_reg_lower_gamma(s.samples, 1.0 - target_pfa)
