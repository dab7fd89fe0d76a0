import math

import numpy as np
import pytest

from powersense import (
    DecisionMatrix,
    Scenario,
    Strategy,
    TrialPlan,
    bayes_risk_decide,
    build_regions,
    classify,
    decision_matrix,
    discrimination,
    empirical_matrix,
    make_scenario,
    offset_error,
    pfa_pd,
    reg_lower_gamma,
    zero_one_costs,
)
from support import grid_for, paper_scenario, random_scenario


@pytest.fixture(scope="module")
def reference():
    s = paper_scenario(samples=1000)
    r1 = build_regions(s, Strategy.PRESENCE_FIRST)
    r2 = build_regions(s, Strategy.LEVEL_FIRST)
    return s, r1, r2, decision_matrix(s, r1), decision_matrix(s, r2)


class TestDecisionMatrix:
    def test_rows_sum_to_one(self, reference):
        s, r1, r2, q1, q2 = reference
        for q in (q1, q2):
            assert np.allclose(q.probs.sum(axis=1), 1.0, atol=1e-9)

    def test_masked_columns_exactly_zero(self, reference):
        s, r1, r2, q1, q2 = reference
        assert r2.masked == frozenset({1})
        assert np.all(q2.probs[:, 1] == 0.0)

    def test_two_level_false_alarm_reduction(self):
        rng = np.random.default_rng(21)
        s = random_scenario(rng, n_lo=1, n_hi=1)
        r = build_regions(s, Strategy.PRESENCE_FIRST)
        q = decision_matrix(s, r)
        theta = r.onoff_threshold
        assert q.probs[0, 1] == pytest.approx(
            1.0 - reg_lower_gamma(s.samples, theta / s.noise_var), abs=1e-12
        )

    def test_against_monte_carlo(self, reference):
        s, r1, _, q1, _ = reference
        t = 50_000
        emp = empirical_matrix(TrialPlan(trials=t, seed=99), s, r1)
        bound = 4.0 * np.sqrt(q1.probs * (1.0 - q1.probs) / t)
        assert np.all(np.abs(q1.probs - emp.probs) <= bound)

    def test_mismatched_scenario_rejected(self, reference):
        s, r1, *_ = reference
        other = paper_scenario(samples=500)
        with pytest.raises(ValueError):
            decision_matrix(other, r1)

    def test_rescaling_invariance(self):
        rng = np.random.default_rng(22)
        s = random_scenario(rng)
        r = build_regions(s, Strategy.LEVEL_FIRST)
        q = decision_matrix(s, r)
        for alpha in (0.1, 3.7, 120.0):
            scaled = Scenario(
                powers=tuple(alpha * p for p in s.powers),
                priors=s.priors,
                gain=s.gain,
                noise_var=alpha * s.noise_var,
                samples=s.samples,
                users=s.users,
            )
            rs = build_regions(scaled, Strategy.LEVEL_FIRST)
            assert rs.masked == r.masked
            finite = np.isfinite(r.thresholds)
            assert np.allclose(rs.thresholds[finite], alpha * r.thresholds[finite], rtol=1e-9)
            qs = decision_matrix(scaled, rs)
            assert np.allclose(qs.probs, q.probs, atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            DecisionMatrix(probs=np.array([[0.5, 0.4], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            DecisionMatrix(probs=np.ones((2, 3)) / 3)
        with pytest.raises(ValueError):
            DecisionMatrix(probs=np.eye(3), kind="guessed")


class TestPfaPd:
    def test_identity_matrix(self, reference):
        s = reference[0]
        q = DecisionMatrix(probs=np.eye(5))
        assert pfa_pd(q, s) == (0.0, 1.0)

    def test_uniform_rows(self, reference):
        s = reference[0]
        q = DecisionMatrix(probs=np.full((5, 5), 0.2))
        pfa, pd = pfa_pd(q, s)
        assert pfa == pytest.approx(0.8, abs=1e-12)
        assert pd == pytest.approx(0.8, abs=1e-12)

    def test_matches_direct_tail_formulas(self, reference):
        s, r1, r2, q1, q2 = reference
        m = s.samples
        for r, q in ((r1, q1), (r2, q2)):
            theta = r.onoff_threshold
            pfa, pd = pfa_pd(q, s)
            assert pfa == pytest.approx(
                1.0 - reg_lower_gamma(m, theta / s.noise_var), abs=1e-10
            )
            mix = sum(
                (s.priors[i] / s.prior_on())
                * (1.0 - reg_lower_gamma(m, theta / float(s.scales[i])))
                for i in range(1, 5)
            )
            assert pd == pytest.approx(mix, abs=1e-10)

    def test_presence_first_detects_more(self):
        for m in range(500, 5001, 500):
            s = paper_scenario(samples=m)
            pd = {}
            for strategy in Strategy:
                r = build_regions(s, strategy)
                pd[strategy] = pfa_pd(decision_matrix(s, r), s)[1]
            assert pd[Strategy.PRESENCE_FIRST] > pd[Strategy.LEVEL_FIRST]

    def test_detection_grows_with_samples(self):
        for snr in (-10.0, -12.0):
            for strategy in Strategy:
                values = []
                for m in range(500, 5001, 500):
                    s = paper_scenario(samples=m, snr_db=snr)
                    r = build_regions(s, strategy)
                    values.append(pfa_pd(decision_matrix(s, r), s)[1])
                assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))


class TestDiscrimination:
    def test_identity(self, reference):
        s = reference[0]
        q = DecisionMatrix(probs=np.eye(5))
        assert discrimination(q, s, "dis1") == pytest.approx(1.0)
        assert discrimination(q, s, "dis2") == pytest.approx(1.0)

    def test_zero_diagonal(self, reference):
        s = reference[0]
        probs = np.roll(np.eye(5), 1, axis=1)
        q = DecisionMatrix(probs=probs)
        assert discrimination(q, s, "dis2") == 0.0

    def test_level_first_wins_dis2_at_low_snr(self):
        for m in (500, 1000, 1500, 2000):
            s = paper_scenario(samples=m)
            d = {}
            for strategy in Strategy:
                r = build_regions(s, strategy)
                d[strategy] = discrimination(decision_matrix(s, r), s, "dis2")
            assert d[Strategy.LEVEL_FIRST] >= d[Strategy.PRESENCE_FIRST] - 1e-6

    def test_unknown_variant(self, reference):
        s, _, _, q1, _ = reference
        with pytest.raises(ValueError):
            discrimination(q1, s, "dis3")


class TestOffsetError:
    def test_partition_of_unity(self, reference):
        s, _, _, q1, _ = reference
        total = sum(offset_error(q1, s, d) for d in range(s.n_levels + 1))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_identity_no_offset(self, reference):
        s = reference[0]
        q = DecisionMatrix(probs=np.eye(5))
        assert offset_error(q, s, 1) == 0.0

    def test_decreasing_in_offset(self, reference):
        s, _, _, q1, _ = reference
        values = [offset_error(q1, s, d) for d in (1, 2, 3)]
        assert values[0] > values[1] > values[2]

    def test_domain(self, reference):
        s, _, _, q1, _ = reference
        with pytest.raises(ValueError):
            offset_error(q1, s, 5)


class TestBayesRisk:
    def test_zero_one_cost_is_level_first_map(self, reference):
        s, _, r2, _, _ = reference
        y = grid_for(s, [r2], points=3000)
        decided = bayes_risk_decide(y, s, zero_one_costs(s.n_levels))
        assert np.array_equal(decided, classify(y, r2))

    def test_all_zero_costs_tie_break(self, reference):
        s = reference[0]
        assert bayes_risk_decide(1.0, s, np.zeros((5, 5))) == s.n_levels

    def test_expensive_false_alarm_shrinks_absence_region(self, reference):
        # Charging 100 for deciding absence when any level is on moves the
        # first boundary left of the MAP one; located by grid scan.
        s, _, r2, _, _ = reference
        costs = zero_one_costs(s.n_levels)
        costs[1:, 0] = 100.0
        y = grid_for(s, [r2], points=20_000)
        map_dec = bayes_risk_decide(y, s, zero_one_costs(s.n_levels))
        risk_dec = bayes_risk_decide(y, s, costs)
        map_boundary = y[np.argmax(map_dec > 0)]
        risk_boundary = y[np.argmax(risk_dec > 0)]
        assert risk_boundary < map_boundary

    def test_cost_validation(self, reference):
        s = reference[0]
        with pytest.raises(ValueError):
            bayes_risk_decide(1.0, s, np.zeros((3, 3)))
        bad = zero_one_costs(s.n_levels)
        bad[0, 1] = -1.0
        with pytest.raises(ValueError):
            bayes_risk_decide(1.0, s, bad)
        bad[0, 1] = math.inf
        with pytest.raises(ValueError):
            bayes_risk_decide(1.0, s, bad)
