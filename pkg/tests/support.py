"""Shared helpers for the test suite: scenario generators and brute-force
reference implementations kept independent of the code paths they check."""

from __future__ import annotations

import math

import numpy as np

from powersense import (
    DegenerateThresholdError,
    Scenario,
    Strategy,
    build_regions,
    make_scenario,
    solve_theta_onoff,
)


def paper_scenario(samples=1000, snr_db=-12.0, users=5) -> Scenario:
    """The reference experiment: four levels 3:5:7:9, absence prior 0.5,
    equal 0.125 presence priors, unit gain and noise."""
    return make_scenario(
        [3, 5, 7, 9], snr_db, 0.5, [0.125] * 4, gain=1.0, noise_var=1.0,
        samples=samples, users=users,
    )


def random_scenario(
    rng: np.random.Generator,
    n_lo: int = 2,
    n_hi: int = 6,
    equal_priors: bool = False,
    max_tries: int = 5000,
) -> Scenario:
    """A nondegenerate random scenario in the low-SNR regime.

    Ranges keep the on/off balance residual tolerance attainable in float64
    (see the solver tests); configurations where the balance is nonnegative
    at zero energy are rejected, matching the model's large-sample-count
    assumption.
    """
    for _ in range(max_tries):
        n = int(rng.integers(n_lo, n_hi + 1))
        ratios = np.sort(rng.uniform(1.0, 10.0, size=n))
        if np.any(np.diff(ratios) < 0.05):
            continue
        snr_db = float(rng.uniform(-16.0, -8.0))
        m = int(round(10 ** rng.uniform(1.0, 4.0)))
        gain = float(rng.uniform(0.6, 1.6))
        noise = float(10 ** rng.uniform(-0.5, 0.5))
        prior_off = float(rng.uniform(0.3, 0.7))
        if equal_priors:
            on = np.full(n, (1.0 - prior_off) / n)
        else:
            w = rng.uniform(0.05, 1.0, size=n)
            on = (1.0 - prior_off) * w / w.sum()
        s = make_scenario(ratios, snr_db, prior_off, on, gain, noise, m, users=1)
        try:
            build_regions(s, Strategy.LEVEL_FIRST)
            solve_theta_onoff(s)
        except DegenerateThresholdError:
            continue
        return s
    raise RuntimeError("could not draw a nondegenerate scenario")


def reduced_lines(y: np.ndarray, s: Scenario) -> np.ndarray:
    """Per-level log joints with the level-independent terms dropped;
    shape (N+1, len(y)). Written out directly as a reference."""
    sc = np.asarray(s.scales)
    const = np.log(np.asarray(s.priors)) - s.samples * np.log(sc)
    return const[:, None] - np.asarray(y)[None, :] / sc[:, None]


def brute_map_level(y: np.ndarray, s: Scenario, strategy: Strategy, onoff: float) -> np.ndarray:
    """Reference classifier: posterior argmax restricted per strategy."""
    lines = reduced_lines(y, s)
    if strategy is Strategy.LEVEL_FIRST:
        return lines.argmax(axis=0)
    on = lines[1:].argmax(axis=0) + 1
    return np.where(np.asarray(y) < onoff, 0, on)


def grid_for(s: Scenario, regions_list, points: int = 10_000) -> np.ndarray:
    """Energy grid covering every finite threshold of the given regions."""
    tmax = max(
        float(np.max(r.thresholds[np.isfinite(r.thresholds)])) for r in regions_list
    )
    hi = 1.5 * max(tmax, s.samples * float(s.scales[-1]))
    return np.linspace(hi / points, hi, points)


def bisect_root(f, lo: float, hi: float, iters: int = 200) -> float:
    """Plain bisection for strictly monotone f with a sign change."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lemma2_strict_certificate(s: Scenario) -> bool:
    """Exact strictness check of the on/off threshold ordering.

    The level-first boundary is the smallest crossing with level 0; at that
    energy the winning level's balance term cancels the absence prior
    algebraically, so the balance equals the sum of the remaining strictly
    positive terms. Evaluated with mpmath so that terms like e^-1000 do not
    underflow to zero.
    """
    import mpmath as mp

    with mp.workdps(60):
        sigma2 = mp.mpf(s.noise_var)
        scales = [mp.mpf(s.gain) * mp.mpf(p) + sigma2 for p in s.powers]
        priors = [mp.mpf(p) for p in s.priors]
        m = s.samples
        crossings = []
        for i in range(1, s.n_levels + 1):
            rate = mp.mpf(s.gain) * mp.mpf(s.powers[i]) / (sigma2 * scales[i])
            cross = (m * mp.log(scales[i] / sigma2) + mp.log(priors[0] / priors[i])) / rate
            crossings.append(cross)
        j0 = int(np.argmin([float(c) for c in crossings])) + 1
        phi = crossings[j0 - 1]
        remainder = mp.mpf(0)
        for i in range(1, s.n_levels + 1):
            if i == j0:
                continue
            rate = mp.mpf(s.gain) * mp.mpf(s.powers[i]) / (sigma2 * scales[i])
            remainder += priors[i] * mp.exp(-m * mp.log(scales[i] / sigma2) + rate * phi)
        return remainder > 0
