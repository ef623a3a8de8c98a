import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import norm_sub_bruteforce
from privgraph.dp import (
    PARALLEL,
    SEQUENTIAL,
    BudgetViolationError,
    InvalidBudgetError,
    PhaseBudget,
    PrivacyBudget,
    PrivacyLedger,
    accountant_check,
    em_probabilities,
    em_select,
    enforce,
    laplace_perturb,
    norm_sub,
    norm_sub_shift,
)


def test_laplace_scale_is_sensitivity_over_eps():
    rng = np.random.default_rng(0)
    noise = laplace_perturb(np.zeros(200_000), 2.0, 1.0, rng)
    # mean absolute deviation of Laplace(b) is b
    assert abs(np.mean(np.abs(noise)) - 2.0) < 0.02


def test_laplace_huge_eps_is_identity():
    x = np.array([1.5, -2.0, 7.0])
    out = laplace_perturb(x, 2.0, 1e12, np.random.default_rng(1))
    assert np.allclose(out, x, atol=1e-9, rtol=0)


def test_laplace_mean_within_three_standard_errors():
    n = 100_000
    noise = laplace_perturb(np.zeros(n), 1.0, 0.5, np.random.default_rng(2))
    se = math.sqrt(2 * 2.0**2 / n)
    assert abs(noise.mean()) < 3 * se


@pytest.mark.parametrize("eps", [0, -1, float("nan")])
def test_invalid_eps_rejected(eps):
    with pytest.raises(InvalidBudgetError):
        laplace_perturb([1.0], 1.0, eps, np.random.default_rng(0))
    with pytest.raises(InvalidBudgetError):
        em_select([1.0], 1.0, eps, np.random.default_rng(0))


def test_em_symmetric_and_closed_form():
    assert np.allclose(em_probabilities([5, 5], 1.0, 3.0), [0.5, 0.5])
    p = em_probabilities([1, 0], 1.0, 2.0)
    assert p[0] == pytest.approx(math.e / (math.e + 1), abs=1e-12)
    assert p[0] == pytest.approx(0.7311, abs=1e-4)


def test_em_empty_rejected():
    with pytest.raises(ValueError):
        em_select([], 1.0, 1.0, np.random.default_rng(0))


def test_em_no_overflow_for_large_logits():
    p = em_probabilities([1e6, 0], 1.0, 1e6)
    assert p.tolist() == [1.0, 0.0]
    assert em_select([1e6, 0, 1e6 - 1], 1.0, 1e6, np.random.default_rng(0)) == 0


def test_em_infinite_eps_is_argmax_lowest_index():
    assert em_select([1, 3, 3, 2], 1.0, math.inf, np.random.default_rng(0)) == 1


def test_em_frequencies_match_softmax():
    rng = np.random.default_rng(3)
    q = [3, 1, 0]
    draws = [em_select(q, 1.0, 1.0, rng) for _ in range(100_000)]
    freq = np.bincount(draws, minlength=3) / len(draws)
    w = np.exp(np.array(q) / 2.0)
    assert np.abs(freq - w / w.sum()).max() < 0.01


def test_norm_sub_examples():
    assert norm_sub_shift([3.0, 2.0, 1.0]) == 0
    assert norm_sub([3.0, 2.0, 1.0]).tolist() == [3.0, 2.0, 1.0]
    assert norm_sub_shift([-5.0]) == 0
    assert norm_sub([-5.0]).tolist() == [0.0]
    d, expected = norm_sub_bruteforce([3.2, -1.5, 0.8])
    assert norm_sub_shift([3.2, -1.5, 0.8]) == d
    assert norm_sub([3.2, -1.5, 0.8]).tolist() == expected


def test_norm_sub_empty():
    assert norm_sub([]).size == 0


vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6)


@given(vectors)
def test_norm_sub_matches_bruteforce(x):
    d, expected = norm_sub_bruteforce(x)
    assert norm_sub_shift(x) == d
    assert norm_sub(x).tolist() == expected


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), max_size=40))
def test_norm_sub_non_negative(x):
    assert (norm_sub(x) >= 0).all()


def test_budget_split_and_total():
    b = PrivacyBudget.split(3.0)
    assert b.total() == pytest.approx(3.0)
    with pytest.raises(InvalidBudgetError):
        PrivacyBudget.split(3.0, (0.5, 0.5, 0.0))
    with pytest.raises(InvalidBudgetError):
        PrivacyBudget(1.0, 0.0, 1.0)


def _pipeline_shaped_ledger(e1, e2, e3):
    led = PrivacyLedger()
    led.spend("init", e1, PARALLEL, "inner")
    led.spend("init", e1, PARALLEL, "outer")
    led.spend("adjust", 0.5 * e2, SEQUENTIAL)
    led.spend("adjust", 0.5 * e2, SEQUENTIAL)
    led.spend("extract", e3, PARALLEL, "degrees")
    led.spend("extract", e3, PARALLEL, "inter")
    led.spend("reconstruct", 0.0, SEQUENTIAL)
    return led


def test_accountant_passes_three_phase_ledger():
    v = accountant_check(PrivacyBudget(0.3, 0.5, 0.7), _pipeline_shaped_ledger(0.3, 0.5, 0.7))
    assert v.passed
    assert v.spent == pytest.approx(1.5, rel=1e-12)
    assert v.phase_costs["reconstruct"] == 0.0


def test_accountant_flags_double_phase_one():
    led = PrivacyLedger()
    led.spend("init", 0.3, SEQUENTIAL)
    led.spend("init", 0.3, SEQUENTIAL)
    v = accountant_check(PrivacyBudget(0.3, 0.5, 0.7), led)
    assert not v.passed
    assert any("init" in msg for msg in v.violations)
    with pytest.raises(BudgetViolationError):
        enforce(PrivacyBudget(0.3, 0.5, 0.7), led)


def test_accountant_flags_reconstruction_spend():
    led = _pipeline_shaped_ledger(1, 1, 1)
    led.spend("reconstruct", 1e-3, SEQUENTIAL)
    v = accountant_check(PrivacyBudget(1, 1, 1), led)
    assert not v.passed and "reconstruct" in v.violations[0]


def test_accountant_empty_ledger():
    v = accountant_check(PrivacyBudget(1, 1, 1), PrivacyLedger())
    assert v.passed and v.spent == 0


def test_phase_budget_for_other_pipelines():
    led = PrivacyLedger.from_entries([("count", 0.1, SEQUENTIAL), ("matrix", 0.9, SEQUENTIAL)])
    assert accountant_check(PhaseBudget({"count": 0.1, "matrix": 0.9}), led).passed


def test_ledger_json_round_trip():
    led = _pipeline_shaped_ledger(1, 2, 3)
    doc = led.to_dict()
    assert doc["total"] == pytest.approx(6.0)
    assert len(doc["entries"]) == 7


def test_fixed_seed_reproducible():
    a = laplace_perturb(np.ones(5), 1, 1, np.random.default_rng(9))
    b = laplace_perturb(np.ones(5), 1, 1, np.random.default_rng(9))
    assert a.tolist() == b.tolist()
    ra, rb = np.random.default_rng(4), np.random.default_rng(4)
    assert [em_select([1, 2, 3], 1, 1, ra) for _ in range(20)] == [em_select([1, 2, 3], 1, 1, rb) for _ in range(20)]
