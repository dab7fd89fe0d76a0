"""Cooperative sensing at a fusion center.

Each of K sensors forwards its locally decided level; the center sees only
the vote vector d = (d_0, ..., d_N) of per-level counts. With identical
local decision matrices, Pr(d | true level) is multinomial. Two fusion
rules are provided: majority voting (with an on/off gate on d_0 vs K/2 and
ties resolved to the larger level) and the posterior-optimal rule over vote
vectors. Both are realized as precomputable vote -> decision tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .metrics import DecisionMatrix
from .scenario import Scenario

VOTE_VECTOR_CAP = 10**7
HETERO_OUTCOME_CAP = 500_000


class ResourceCapError(RuntimeError):
    """An enumeration would exceed the configured resource cap."""


@dataclass(frozen=True)
class FusionRule:
    """A fused decision for every possible vote vector."""

    kind: str
    users: int
    table: dict[tuple[int, ...], int]

    def decide(self, d) -> int:
        return self.table[tuple(int(v) for v in d)]


def _local_probs(local) -> np.ndarray:
    return local.probs if isinstance(local, DecisionMatrix) else np.asarray(local, dtype=float)


def enumerate_votes(users: int, n_levels: int, cap: int = VOTE_VECTOR_CAP) -> list[tuple[int, ...]]:
    """All vote vectors: compositions of `users` into n_levels+1 ordered
    counts, in ascending lexicographic order."""
    if users < 1 or n_levels < 1:
        raise ValueError("enumerate_votes: need users >= 1 and n_levels >= 1")
    total = math.comb(users + n_levels, n_levels)
    if total > cap:
        raise ResourceCapError(
            f"enumerate_votes: {total} vote vectors exceed the cap of {cap}"
        )
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for v in range(remaining + 1):
            rec(prefix + (v,), remaining - v, slots - 1)

    rec((), users, n_levels + 1)
    return out


def _vote_array(users: int, n_levels: int) -> np.ndarray:
    return np.array(enumerate_votes(users, n_levels), dtype=np.int64)


def _log_multinomial_coef(d: np.ndarray, users: int) -> np.ndarray:
    lg = np.vectorize(math.lgamma)
    return math.lgamma(users + 1) - lg(d + 1.0).sum(axis=-1)


def _vote_logprobs(votes: np.ndarray, local_probs: np.ndarray, users: int) -> np.ndarray:
    # log Pr(d | H_i) for every vote vector and every true level i; shape
    # (n_true, n_votes). 0 * log 0 counts as 0.
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(local_probs)
        terms = votes[None, :, :] * logq[:, None, :]
    terms = np.where(votes[None, :, :] > 0, terms, 0.0)
    return _log_multinomial_coef(votes, users)[None, :] + terms.sum(axis=2)


def vote_prob(d, local, users: int, level: int) -> float:
    """Multinomial probability of the vote vector d under true `level`."""
    dv = np.asarray(d, dtype=np.int64)
    if dv.sum() != users:
        raise ValueError(f"vote_prob: votes must sum to {users}, got {dv.sum()}")
    q = _local_probs(local)
    logp = _vote_logprobs(dv[None, :], q[level : level + 1], users)[0, 0]
    return float(np.exp(logp))


def vote_prob_hetero(d, locals_, level: int, cap: int = HETERO_OUTCOME_CAP) -> float:
    """Pr(vote vector d | true level) for per-sensor decision matrices.

    Exact sum over every assignment of levels to sensors whose counts match
    d, evaluated by dynamic programming over sensors.
    """
    mats = [_local_probs(m) for m in locals_]
    users = len(mats)
    dv = tuple(int(v) for v in d)
    if sum(dv) != users:
        raise ValueError(f"vote_prob_hetero: votes must sum to {users}, got {sum(dv)}")
    n_outcomes = (len(dv)) ** users
    if n_outcomes > cap:
        raise ResourceCapError(
            f"vote_prob_hetero: {n_outcomes} sensor outcomes exceed the cap of {cap}"
        )
    rows = [m[level] for m in mats]
    memo: dict[tuple[int, tuple[int, ...]], float] = {}

    def rec(k: int, remaining: tuple[int, ...]) -> float:
        if k == users:
            return 1.0
        key = (k, remaining)
        if key in memo:
            return memo[key]
        total = 0.0
        for j, left in enumerate(remaining):
            if left:
                nxt = remaining[:j] + (left - 1,) + remaining[j + 1 :]
                total += rows[k][j] * rec(k + 1, nxt)
        memo[key] = total
        return total

    return rec(0, dv)


def majority_decide(d) -> int:
    """Majority vote with an on/off gate: absent only if a strict majority
    voted level 0; otherwise the most-voted nonzero level, ties to the
    larger index."""
    dv = [int(v) for v in d]
    users = sum(dv)
    if dv[0] * 2 > users:
        return 0
    best = max(dv[1:])
    return max(j for j in range(1, len(dv)) if dv[j] == best)


def make_majority_rule(users: int, n_levels: int) -> FusionRule:
    table = {d: majority_decide(d) for d in enumerate_votes(users, n_levels)}
    return FusionRule(kind="majority", users=users, table=table)


def optimal_decide(d, s: Scenario, local) -> int:
    """Posterior-optimal fused decision for the vote vector d.

    Log joints log prior_i + sum_n d_n log q[i][n] feed an on/off gate
    (absence joint vs log-sum-exp of the presence joints), then an argmax
    over nonzero levels. Exact ties resolve to the larger index.
    """
    dv = np.asarray(d, dtype=np.int64)
    q = _local_probs(local)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(dv[None, :] > 0, dv[None, :] * np.log(q), 0.0)
    joint = np.log(np.asarray(s.priors)) + terms.sum(axis=1)
    lse_on = np.logaddexp.reduce(joint[1:])
    if joint[0] > lse_on:
        return 0
    flipped = joint[1:][::-1]
    return len(joint) - 1 - int(np.argmax(flipped))


def make_optimal_rule(s: Scenario, local, users: int) -> FusionRule:
    table = {d: optimal_decide(d, s, local) for d in enumerate_votes(users, s.n_levels)}
    return FusionRule(kind="optimal", users=users, table=table)


def _fused_matrix(local, users: int, decisions, votes: np.ndarray) -> DecisionMatrix:
    q = _local_probs(local)
    n = q.shape[0] - 1
    probs = np.exp(_vote_logprobs(votes, q, users))
    fused = np.zeros((n + 1, n + 1))
    dec = np.asarray(decisions)
    for j in range(n + 1):
        sel = dec == j
        if np.any(sel):
            fused[:, j] = probs[:, sel].sum(axis=1)
    kind = local.kind if isinstance(local, DecisionMatrix) else "analytic"
    trials = local.trials if isinstance(local, DecisionMatrix) else None
    return DecisionMatrix(probs=fused, kind=kind, trials=trials)


def majority_matrix(local, users: int) -> DecisionMatrix:
    """Fused decision probabilities of majority voting, by enumerating all
    vote vectors."""
    q = _local_probs(local)
    votes = _vote_array(users, q.shape[0] - 1)
    decisions = [majority_decide(d) for d in votes]
    return _fused_matrix(local, users, decisions, votes)


def optimal_matrix(s: Scenario, local, users: int) -> DecisionMatrix:
    """Fused decision probabilities of the posterior-optimal rule."""
    q = _local_probs(local)
    votes = _vote_array(users, q.shape[0] - 1)
    decisions = [optimal_decide(d, s, local) for d in votes]
    return _fused_matrix(local, users, decisions, votes)


@lru_cache(maxsize=None)
def _majority_vote_sets(users: int, n_levels: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    # Vote vectors grouped by fused majority decision, enumerated through
    # the closed-form nested summation bounds (floors/ceilings verbatim).
    # The last free count is pinned by its own degenerate range, so every
    # emitted vector sums to the user count.
    k, n = users, n_levels
    sets: list[list[tuple[int, ...]]] = [[] for _ in range(n + 1)]

    # Decision 0: d_0 ranges over floor(K/2)+1 .. K, the rest fill freely.
    def rec_zero(d: list[int], pos: int):
        assigned = sum(d[:pos])
        if pos == n:
            d[n] = k - assigned
            sets[0].append(tuple(d))
            return
        for v in range(0, k - assigned + 1):
            d[pos] = v
            rec_zero(d, pos + 1)

    for d0 in range(k // 2 + 1, k + 1):
        rec_zero([d0] + [0] * n, 1)

    # Decision j >= 1: d_0 <= floor(K/2); d_j from ceil((K-d_0)/N) keeps it
    # a (weak) maximum; counts below j may tie with d_j, counts above j may
    # not; lower bounds alpha_n stop later counts from being forced past
    # their own caps.
    for j in range(1, n + 1):
        order = [x for x in range(1, n + 1) if x != j]

        def rec_j(d: list[int], pos: int, dj: int):
            if pos == len(order):
                sets[j].append(tuple(d))
                return
            nn = order[pos]
            if nn < j:
                s_n = sum(d[:nn])  # counts 0..n-1 exclude d_j
                alpha = k - s_n - (n - nn) * dj + n - j
                beta = k - s_n - dj
                lo, hi = max(0, alpha), min(dj, beta)
            else:
                s_n = sum(d[:nn])  # counts 0..n-1 include d_j
                alpha = k - s_n - (n - nn) * dj + n - nn
                beta = k - s_n
                lo, hi = max(0, alpha), min(dj - 1, beta)
            for v in range(lo, hi + 1):
                d[nn] = v
                rec_j(d, pos + 1, dj)
            d[nn] = 0

        for d0 in range(0, k // 2 + 1):
            dj_lo = -((-(k - d0)) // n)  # ceil((K - d_0) / N)
            for dj in range(dj_lo, k - d0 + 1):
                d = [0] * (n + 1)
                d[0] = d0
                d[j] = dj
                rec_j(d, 0, dj)

    return tuple(tuple(group) for group in sets)


def majority_matrix_closed(local, users: int) -> DecisionMatrix:
    """Fused decision probabilities of majority voting via the closed-form
    nested summation (no exhaustive enumeration of the vote space)."""
    q = _local_probs(local)
    n = q.shape[0] - 1
    if math.comb(users + n, n) > VOTE_VECTOR_CAP:
        raise ResourceCapError("majority_matrix_closed: vote space exceeds the cap")
    sets = _majority_vote_sets(users, n)
    fused = np.zeros((n + 1, n + 1))
    for j, group in enumerate(sets):
        if not group:
            continue
        votes = np.array(group, dtype=np.int64)
        fused[:, j] = np.exp(_vote_logprobs(votes, q, users)).sum(axis=1)
    kind = local.kind if isinstance(local, DecisionMatrix) else "analytic"
    trials = local.trials if isinstance(local, DecisionMatrix) else None
    return DecisionMatrix(probs=fused, kind=kind, trials=trials)
