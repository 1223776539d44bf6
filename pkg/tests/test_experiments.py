"""Experiment-layer tests: laws of the random model and bound checks."""

import math
from itertools import permutations

import numpy as np
import pytest
from scipy import stats

from gapdims import (
    DepthUnsupportedError,
    OutOfRegimeError,
    WindowPolicy,
    binomial_tail_check,
    empty_bin_probability,
    interval_length_lemma_check,
    make_dimension_function,
    make_sequence,
    max_load_statistic,
    run_dichotomy_experiment,
    sample_order,
)
from gapdims.experiments import critical_load, length_constant, trial_seed
from gapdims.rng import derive_seed
from gapdims.sequences import level_sums

MID = make_sequence("middle-third")


# -- permutation law ---------------------------------------------------------

def test_restriction_to_three_gaps_is_uniform():
    # relative order of gaps 1..3 should hit all 6 permutations uniformly
    perms = list(permutations((1, 2, 3)))
    counts = dict.fromkeys(perms, 0)
    trials = 60000
    for t in range(trials):
        order = sample_order(derive_seed(31, t), 2)  # 3 gaps at W = 2
        counts[tuple(order)] += 1
    chi2, pval = stats.chisquare(list(counts.values()))
    assert pval > 0.001, (counts, pval)


def test_disjoint_blocks_are_independent():
    # relative order within {1,2,3} vs within {4,5,6}: 6 x 6 contingency
    perms = {p: i for i, p in enumerate(permutations(range(3)))}
    table = np.zeros((6, 6), dtype=np.int64)
    trials = 60000
    for t in range(trials):
        order = sample_order(derive_seed(77, t), 3)  # 7 gaps
        pos = np.empty(7, dtype=np.int64)
        pos[order - 1] = np.arange(7)
        a = tuple(np.argsort(np.argsort(pos[0:3])))
        b = tuple(np.argsort(np.argsort(pos[3:6])))
        table[perms[a], perms[b]] += 1
    chi2, pval, dof, _ = stats.chi2_contingency(table)
    assert dof == 25
    assert pval > 0.001, pval


# -- max load ----------------------------------------------------------------

def test_critical_load_formula():
    # K_n = 2 ln(2^n) / ln(2^n ln(2^n) / 2^(n+phi))
    n, phi = 20, 2
    ln_bins = 20 * math.log(2.0)
    want = 2 * ln_bins / math.log(ln_bins / 4.0)
    assert critical_load(n, phi) == pytest.approx(want, rel=1e-12)
    assert critical_load(20, 2) == pytest.approx(22.307, abs=1e-3)


def test_max_load_regime_guards():
    with pytest.raises(OutOfRegimeError):
        max_load_statistic(MID, 20, 10, 4, 5, 1)  # 2^4 > ln(2^10)
    with pytest.raises(DepthUnsupportedError):
        max_load_statistic(MID, 12, 10, 3, 5, 1)  # W < n + phi_n


def test_max_load_small_case_reproducible():
    r1 = max_load_statistic(MID, 14, 10, 2, 30, master_seed=5)
    r2 = max_load_statistic(MID, 14, 10, 2, 30, master_seed=5)
    assert r1 == r2
    assert sum(r1["histogram"].values()) == 30
    assert r1["cantor_load"] == 3
    # random max load must beat the uniform (cantor) load in every trial:
    # mean deep count is ~3 per interval and the max is far above the mean
    assert min(r1["histogram"]) >= r1["cantor_load"]


def test_max_load_dominates_cantor_stochastically():
    r = max_load_statistic(MID, 14, 8, 2, 50, master_seed=9)
    loads = [v for v, c in r["histogram"].items() for _ in range(c)]
    # empirical CDF of the random M_n sits right of the cantor constant
    assert np.mean(np.array(loads) > r["cantor_load"]) > 0.9


# -- empty bins --------------------------------------------------------------

def test_empty_bin_extremes():
    assert empty_bin_probability(1, 1, 20, 3)["frequency"] == 1.0  # 2 bins, 1 ball
    dense = empty_bin_probability(4, 16 * 40, 50, 3)
    assert dense["frequency"] <= 0.1  # 40 balls per bin on average


def test_empty_bin_matches_poisson_prediction():
    # lambda = bins * exp(-balls/bins) moderate: frequency ~ 1 - e^-lambda
    rep = empty_bin_probability(10, 1024 * 7, 200, master_seed=11)
    assert rep["frequency"] == pytest.approx(rep["poisson_predicted_frequency"], abs=0.1)


# -- interval length lemma ---------------------------------------------------

def test_length_constant_middle_third_is_one():
    # a_{2^{j-1}} = (1 - 2/3) * 3^{-(j-1)} = 3^{-j} = s_j exactly
    assert length_constant(level_sums(MID, 24)) == pytest.approx(1.0, rel=1e-12)


def test_interval_length_check_small():
    rep = interval_length_lemma_check(MID, 14, 8, 40, master_seed=2)
    assert rep["epsilon_n"] == pytest.approx(4 * math.log(8) / 8, rel=1e-12)
    assert 0.0 <= rep["frequency"] <= 1.0
    assert rep["cantor_within_bound"]
    assert rep["median_max_length"] < rep["bound"]


# -- binomial tails ----------------------------------------------------------

def test_exact_tail_matches_scipy():
    from gapdims.experiments import binomial_tail_mass
    m, p = 5000, 1.0 / 32.0
    lo, hi = 130, 180
    want = stats.binom.cdf(lo, m, p) + stats.binom.sf(hi - 1, m, p)
    assert binomial_tail_mass(m, p, lo, hi) == pytest.approx(want, rel=1e-9)
    assert binomial_tail_mass(m, p, None, hi) == pytest.approx(
        stats.binom.sf(hi - 1, m, p), rel=1e-9)


def test_tail_check_example_values():
    rows = binomial_tail_check([(2 ** 13, 5), (2 ** 15, 5)], 1.0 / 12.0)
    r0, r1 = rows
    # Mp = 256: bound = exp(-256/432) / ((1/12) * 16) = 0.75 exp(-0.59259..)
    assert r0.dml_bound == pytest.approx(0.75 * math.exp(-256.0 / 432.0), rel=1e-12)
    assert r0.exact_two_sided_tail <= r0.dml_bound
    # Mp = 1024: corollary bound exp(-1024/432) ~ 0.0935
    assert r1.corollary_bound == pytest.approx(math.exp(-1024.0 / 432.0), rel=1e-12)
    assert r1.corollary_in_hypothesis
    assert max(r1.exact_upper_tail, r1.exact_lower_tail) <= r1.corollary_bound


def test_tail_check_skips_out_of_hypothesis_rows():
    rows = binomial_tail_check([(10, 4)], 1.0 / 12.0)
    assert not rows[0].in_hypothesis
    assert rows[0].skip_reason
    with pytest.raises(Exception):
        binomial_tail_check([(100, 2)], 0.5)  # eta too large


# -- dichotomy purity --------------------------------------------------------

def small_policies():
    pol = WindowPolicy(n_values=(2,), k_min=1, k_max=1, max_centers=16)
    return {8: (pol, pol), 11: (pol, pol), 14: (pol, pol)}


def test_dichotomy_pure_function_of_seed():
    f = make_dimension_function("constant", 0.5)
    r1 = run_dichotomy_experiment(MID, f, 14, 4, 77, small_policies())
    r2 = run_dichotomy_experiment(MID, f, 14, 4, 77, small_policies())
    assert r1.to_json() == r2.to_json()
    r3 = run_dichotomy_experiment(MID, f, 14, 4, 78, small_policies())
    assert r1.to_json() != r3.to_json()


def test_dichotomy_parallel_is_byte_identical():
    f = make_dimension_function("constant", 0.5)
    serial = run_dichotomy_experiment(MID, f, 14, 4, 77, small_policies())
    threaded = run_dichotomy_experiment(MID, f, 14, 4, 77, small_policies(), workers=3)
    assert serial.to_json() == threaded.to_json()


def test_dichotomy_per_trial_sandwich():
    f = make_dimension_function("zero")
    rep = run_dichotomy_experiment(MID, f, 14, 4, 5, small_policies())
    for summary in rep.summaries:
        for t in summary.trials:
            assert t.beta_low <= t.beta_up + 1e-12
    assert rep.targets["box"] == pytest.approx(math.log(2) / math.log(3), abs=1e-9)


def test_dichotomy_matched_seed_ordering():
    # small-regime Phi (zero) vs large-regime Phi (const): on the same
    # seeds the zero-phi upper median dominates and lower median is lower
    zero = run_dichotomy_experiment(MID, make_dimension_function("zero"),
                                    14, 6, 13, None)
    const = run_dichotomy_experiment(MID, make_dimension_function("constant", 0.5),
                                     14, 6, 13, None)
    assert zero.summaries[-1].median_up >= const.summaries[-1].median_up
    assert zero.summaries[-1].median_low <= const.summaries[-1].median_low
    # matched seeds: the same trial draws the same omega stream
    assert [t.seed for t in zero.summaries[0].trials] == \
        [t.seed for t in const.summaries[0].trials]


def test_trial_seed_is_derive_seed():
    assert trial_seed(99, 7) == derive_seed(99, 7)
