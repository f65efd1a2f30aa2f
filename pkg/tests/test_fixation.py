import math

import numpy as np
import pytest

from jointcommit import (
    FixationQuery,
    GameParams,
    PopulationState,
    Regime,
    Strategy,
    fixation_probability,
    fixation_table,
    format_table_text,
    payoff_matrix,
    predicted_reputations,
    state_payoffs,
)
from jointcommit.fixation import TABLE_ORDER, _payoff_gaps

from helpers import simulate_fixation_chain

S = Strategy.parse


def game(b, c_a=1.0, epsilon=0.01, regime=Regime.LONG):
    return GameParams(b=b, c_a=c_a, epsilon=epsilon, regime=regime)


def query(inv, res, b, s=1.0, N=100):
    return FixationQuery(S(inv), S(res), game(b), N=N, s=s)


# -- state payoffs ---------------------------------------------------------------

def _pair_matrix(inv, res, k, N, g):
    pop = PopulationState({inv: k, res: N - k})
    reps = predicted_reputations(pop, g)
    return payoff_matrix((inv, res), reps, g)


def test_lone_invader_meets_only_residents():
    g = game(5.5)
    inv, res = S("RA"), S("0-")
    P = _pair_matrix(inv, res, 1, 100, g)
    pi_i, pi_j = state_payoffs(inv, res, 1, 100, g)
    assert pi_i == pytest.approx(P[0, 1], abs=1e-15)
    P = _pair_matrix(inv, res, 99, 100, g)
    pi_i, pi_j = state_payoffs(inv, res, 99, 100, g)
    assert pi_j == pytest.approx(P[1, 0], abs=1e-15)


def test_state_payoffs_hand_value():
    # 50 RA among 0-: only the 49 other RA contribute, at the RA self-payoff
    g = game(5.5)
    pi_i, pi_j = state_payoffs(S("RA"), S("0-"), 50, 100, g)
    assert pi_i == pytest.approx(3.43035 * 49 / 99, abs=1e-12)
    assert pi_j == 0.0


def test_state_payoffs_bounds_check():
    with pytest.raises(ValueError):
        state_payoffs(S("RA"), S("0-"), 0, 100, game(5.5))
    with pytest.raises(ValueError):
        state_payoffs(S("RA"), S("0-"), 100, 100, game(5.5))


def test_gap_fast_path_matches_state_payoffs():
    for inv, res, b in [("R-", "1A", 1.5), ("RA", "0-", 5.5), ("1-", "R+", 9.5),
                        ("1A", "1-", 5.5), ("0-", "R-", 1.5)]:
        q = query(inv, res, b)
        gaps = _payoff_gaps(q)
        for k in (1, 2, 50, 98, 99):
            pi_i, pi_j = state_payoffs(q.invader, q.resident, k, q.N, q.game)
            assert gaps[k - 1] == pytest.approx(pi_i - pi_j, abs=1e-15)


# -- fixation probability ---------------------------------------------------------

def test_neutral_pair_is_exact_drift():
    for N in (2, 10, 100):
        q = FixationQuery(S("0-"), S("0A"), game(5.5), N=N)
        assert fixation_probability(q).rho == 1.0 / N
        assert fixation_probability(q).drift_multiple == pytest.approx(1.0, rel=1e-12)


def test_reference_anchor_entries():
    anchors = [
        ("R-", "1A", 1.5, 0.8624),
        ("RA", "0-", 5.5, 0.9664),
        ("1A", "RA", 5.5, 0.0351),
        ("RA", "0-", 9.5, 0.9993),
        ("1A", "RA", 9.5, 0.0715),
    ]
    for inv, res, b, want in anchors:
        got = fixation_probability(query(inv, res, b)).rho
        assert got == pytest.approx(want, abs=0.005), (inv, res, b)


def test_invalid_queries():
    with pytest.raises(ValueError):
        FixationQuery(S("RA"), S("RA"), game(5.5))
    with pytest.raises(ValueError):
        FixationQuery(S("RA"), S("0-"), game(5.5), N=1)


def test_reproducible_to_many_digits():
    q = query("RA", "0-", 5.5)
    a = fixation_probability(q).rho
    b = fixation_probability(q).rho
    assert a == b
    assert math.isfinite(a)


def test_extreme_selection_uses_log_space():
    # huge s drives the disadvantaged invader's sum far beyond float range
    q = query("1A", "R-", 9.5, s=200.0)
    r = fixation_probability(q)
    assert math.isfinite(r.rho)
    assert 0.0 <= r.rho < 1e-100


def test_strong_selection_one_sided_limits():
    strong = fixation_probability(query("RA", "0-", 5.5, s=20.0)).rho
    assert strong > 0.999
    weak = fixation_probability(query("0-", "RA", 5.5, s=20.0)).rho
    assert weak < 1e-12


def test_s_moves_rho_away_from_drift():
    # dominant direction gains over drift as selection strengthens, and the
    # disfavored direction loses, for a few spot pairs
    for inv, res, b in [("RA", "0-", 5.5), ("R-", "1A", 1.5)]:
        drift = 1.0 / 100
        rhos = [fixation_probability(query(inv, res, b, s=s)).rho
                for s in (0.0, 0.5, 1.0)]
        assert rhos[0] == drift
        assert rhos[0] < rhos[1] < rhos[2]
    rhos = [fixation_probability(query("1A", "1-", 5.5, s=s)).rho
            for s in (0.0, 0.5, 1.0)]
    assert rhos[0] == 1.0 / 100
    assert rhos[0] > rhos[1] > rhos[2]


def test_fixation_probabilities_within_unit_interval():
    g = game(9.5)
    table = fixation_table(g)
    assert len(table) == 72
    for r in table.values():
        assert 0.0 <= r.rho <= 1.0
        assert r.drift_multiple == pytest.approx(r.rho * 100, rel=1e-15)


def test_monte_carlo_agreement():
    # empirical absorption rate of the recursion's chain, five spot pairs,
    # 1e5 invasion attempts each, within 3 standard errors
    pairs = [
        ("0-", "0A", 5.5),   # neutral drift
        ("RA", "0-", 5.5),   # strongly favored
        ("1A", "RA", 5.5),   # weakly favored
        ("R-", "1A", 1.5),   # favored faker
        ("0-", "1-", 1.5),   # mildly favored
    ]
    attempts = 100_000
    for i, (inv, res, b) in enumerate(pairs):
        q = query(inv, res, b)
        rho = fixation_probability(q).rho
        emp = simulate_fixation_chain(q, attempts, seed=1000 + i)
        se = math.sqrt(max(rho * (1 - rho), 1e-12) / attempts)
        assert abs(emp - rho) <= 3 * se, (inv, res, b, emp, rho, se)


def test_text_table_layout():
    table = fixation_table(game(1.5))
    text = format_table_text(table)
    lines = text.strip().split("\n")
    assert len(lines) == 1 + len(TABLE_ORDER)
    assert "1-" in lines[0] and "R+" in lines[0]
    # neutral mean pairs render as exact drift
    assert "1.00%" in text
