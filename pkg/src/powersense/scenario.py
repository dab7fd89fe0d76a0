"""Statistical model of the sensed channel.

A transmitter is either off (level 0, power 0) or sends at one of N
ascending power levels. Each received sample is complex Gaussian, so the
energy statistic y (sum of M squared magnitudes) is Gamma(M, s_i)
distributed under level i, with energy scale s_i = gain * P_i + noise_var.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gammafn import log_gamma

_PRIOR_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    """Immutable channel/transmitter model.

    powers includes the off level: powers[0] == 0 and the rest strictly
    ascending. priors must be strictly positive and sum to 1. samples is
    the energy-statistic sample count M; users is the number of cooperating
    sensors K (only the fusion layer reads it).
    """

    powers: tuple[float, ...]
    priors: tuple[float, ...]
    gain: float
    noise_var: float
    samples: int
    users: int = 1

    def __post_init__(self):
        if len(self.powers) < 2:
            raise ValueError("powers: need the off level plus at least one nonzero level")
        if len(self.powers) != len(self.priors):
            raise ValueError(
                f"priors: expected {len(self.powers)} entries to match powers, got {len(self.priors)}"
            )
        if self.powers[0] != 0.0:
            raise ValueError(f"powers: level 0 must be 0 (transmitter off), got {self.powers[0]}")
        for i in range(1, len(self.powers)):
            if not self.powers[i] > self.powers[i - 1]:
                raise ValueError(f"powers: must be strictly ascending, violated at index {i}")
        if any(p <= 0 for p in self.priors):
            raise ValueError("priors: every level must have a strictly positive prior")
        if abs(sum(self.priors) - 1.0) > _PRIOR_SUM_TOL:
            raise ValueError(f"priors: must sum to 1, got {sum(self.priors)}")
        if not self.gain > 0:
            raise ValueError(f"gain: must be positive, got {self.gain}")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var: must be positive, got {self.noise_var}")
        if not (isinstance(self.samples, int) and self.samples >= 1):
            raise ValueError(f"samples: must be a positive integer, got {self.samples}")
        if not (isinstance(self.users, int) and self.users >= 1):
            raise ValueError(f"users: must be a positive integer, got {self.users}")

    @property
    def n_levels(self) -> int:
        """Number of nonzero power levels N."""
        return len(self.powers) - 1

    @property
    def scales(self) -> np.ndarray:
        """Per-level energy scales s_i = gain * P_i + noise_var (strictly ascending)."""
        return self.gain * np.asarray(self.powers) + self.noise_var

    def prior_on(self) -> float:
        return 1.0 - self.priors[0]


def make_scenario(
    power_ratios,
    snr_db: float,
    prior_off: float,
    priors_on,
    gain: float = 1.0,
    noise_var: float = 1.0,
    samples: int = 1000,
    users: int = 1,
) -> Scenario:
    """Build a Scenario from power ratios and an average SNR in dB.

    Absolute powers are the ratios rescaled so that the mean nonzero power
    over the noise variance equals 10**(snr_db/10).
    """
    ratios = [float(r) for r in power_ratios]
    if not ratios:
        raise ValueError("power_ratios: need at least one nonzero level")
    if any(r <= 0 for r in ratios):
        raise ValueError("power_ratios: must be positive")
    for i in range(1, len(ratios)):
        if not ratios[i] > ratios[i - 1]:
            raise ValueError(f"power_ratios: must be strictly ascending, violated at index {i}")
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db: must be finite, got {snr_db}")
    if not noise_var > 0:
        raise ValueError(f"noise_var: must be positive, got {noise_var}")
    snr = 10.0 ** (snr_db / 10.0)
    scale = len(ratios) * snr * noise_var / sum(ratios)
    powers = (0.0,) + tuple(r * scale for r in ratios)
    priors = (float(prior_off),) + tuple(float(p) for p in priors_on)
    return Scenario(
        powers=powers,
        priors=priors,
        gain=float(gain),
        noise_var=float(noise_var),
        samples=int(samples),
        users=int(users),
    )


def log_joint(y: float, level: int, s: Scenario):
    """ln[ p(y | level) * prior(level) ] with p the Gamma(M, s_level) density.

    Accepts a scalar or an array of energies; y must be strictly positive.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("log_joint: energy must be strictly positive")
    if not 0 <= level <= s.n_levels:
        raise ValueError(f"log_joint: level {level} outside 0..{s.n_levels}")
    m = s.samples
    si = float(s.scales[level])
    out = (
        math.log(s.priors[level])
        + (m - 1) * np.log(arr)
        - arr / si
        - m * math.log(si)
        - log_gamma(m)
    )
    return float(out) if np.isscalar(y) else out


def _log_joint_lines(y, s: Scenario) -> np.ndarray:
    # ln(prior_i) - M ln(s_i) - y / s_i : the per-level log joints with the
    # level-independent (M-1) ln y - ln Gamma(M) part dropped. Shape
    # (n_levels+1, len(y)).
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    sc = s.scales
    const = np.log(s.priors) - s.samples * np.log(sc)
    return const[:, None] - arr[None, :] / sc[:, None]


def posterior(y, s: Scenario) -> np.ndarray:
    """Posterior probabilities over levels 0..N given the energy y.

    Computed by log-sum-exp normalization of the log joints. For scalar y
    the result has shape (N+1,); for a length-G array, (N+1, G).
    """
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(arr <= 0):
        raise ValueError("posterior: energy must be strictly positive")
    lines = _log_joint_lines(arr, s)
    lines -= lines.max(axis=0, keepdims=True)
    w = np.exp(lines)
    w /= w.sum(axis=0, keepdims=True)
    return w[:, 0] if np.isscalar(y) else w
