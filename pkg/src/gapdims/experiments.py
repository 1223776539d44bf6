"""Seeded statistical experiments on random arrangements.

Every experiment is a pure function of its configuration and a master
seed: per-trial seeds are derived from the master by a fixed mixing
rule, results are aggregated in trial order, and reports serialize with
sorted keys, so re-runs (serial or thread-parallel) are byte-identical.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from . import randmodel, rng
from .cantor import box_dim_estimate, lower_phi_dim_formula, upper_phi_dim_formula
from .covering import WindowPolicy, estimate_dimension
from .dimfuncs import DimensionFunction, depth_function
from .errors import (
    DepthUnsupportedError,
    InvalidRangeError,
    NotLevelComparableError,
    OutOfRegimeError,
)
from .sequences import GapSequence, LevelProfile, level_sums

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# dichotomy experiment


LOAD_CUTOFF_A = 0.5   # empty-interval depth extension phi(n) + floor(A ln n)


@dataclass(frozen=True)
class TrialStats:
    """Per-trial record; fields beyond the betas are filled only by the
    experiments that measure them."""

    trial_id: int
    seed: int
    beta_up: float | None = None
    beta_low: float | None = None
    m_n: int | None = None
    k_n: float | None = None
    empty_bin: bool | None = None
    max_len_n: float | None = None
    len_bound_n: float | None = None
    epsilon_n: float | None = None

    def to_record(self) -> dict:
        rec = {"trial_id": self.trial_id, "seed": self.seed}
        for key, val in (("beta_up", self.beta_up), ("beta_low", self.beta_low),
                         ("M_n", self.m_n), ("K_n", self.k_n),
                         ("empty_bin", self.empty_bin),
                         ("max_len_n", self.max_len_n),
                         ("len_bound_n", self.len_bound_n),
                         ("epsilon_n", self.epsilon_n)):
            if val is not None:
                rec[key] = val
        return rec


@dataclass(frozen=True)
class DepthSummary:
    depth: int
    median_up: float
    median_low: float
    quartiles_up: tuple[float, float]
    quartiles_low: tuple[float, float]
    cantor_up: float
    cantor_low: float
    sandwich_violations: int     # trials with beta_low > box or beta_up < box (0.05 slack)
    trials: tuple[TrialStats, ...] = field(repr=False)

    def to_record(self) -> dict:
        return {
            "depth": self.depth,
            "median_up": self.median_up,
            "median_low": self.median_low,
            "quartiles_up": list(self.quartiles_up),
            "quartiles_low": list(self.quartiles_low),
            "cantor_up": self.cantor_up,
            "cantor_low": self.cantor_low,
            "sandwich_violations": self.sandwich_violations,
            "trials": [t.to_record() for t in self.trials],
        }


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    config: dict
    master_seed: int
    summaries: tuple[DepthSummary, ...]
    targets: dict

    def to_record(self) -> dict:
        return {
            "schema_version": 1,
            "kind": self.kind,
            "config": self.config,
            "master_seed": self.master_seed,
            "targets": self.targets,
            "depths": [s.to_record() for s in self.summaries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))


def trial_seed(master_seed: int, trial: int) -> int:
    return rng.derive_seed(master_seed, trial)


def _run_trial(a, f, p, d, depth, seed, up_pol, lo_pol, trial):
    s = randmodel.build_set(a, depth, "random", seed=seed)
    up = estimate_dimension(s, "upper", f, p, d, up_pol).beta_hat
    lo = estimate_dimension(s, "lower", f, p, d, lo_pol).beta_hat
    return TrialStats(trial_id=trial, seed=seed, beta_up=up, beta_low=lo)


def default_policies(regime: str, depths: tuple[int, ...]) -> dict:
    """Pilot-calibrated window policies per ladder depth.

    Large-regime depth functions concentrate at the rule-based value, so
    both directions probe a shallow window over a depth-ramped r-ladder.
    Small-regime ones drift toward 1/0: the upper estimate needs a deep
    window with a growing center pool to expose the worst interval, the
    lower one a sparse shallow probe.
    """
    out = {}
    for depth in depths:
        if regime != "small":
            if depth >= 14:
                pol = WindowPolicy(n_values=(4,), k_min=depth - 11, k_max=depth - 10)
            else:
                pol = WindowPolicy(n_values=(2,), k_min=1, k_max=2)
            out[depth] = (pol, pol)
        else:
            out[depth] = (
                WindowPolicy(n_values=(max(2, depth - 9),), k_min=3, k_max=4,
                             max_centers=1024),
                WindowPolicy(n_values=(min(4, depth - 4),), k_min=1, k_max=2,
                             auto_n_count=1, max_centers=32),
            )
    return out


def run_dichotomy_experiment(
    a: GapSequence,
    f: DimensionFunction,
    w: int,
    trials: int,
    master_seed: int,
    policies: dict[int, tuple[WindowPolicy, WindowPolicy]] | None = None,
    n_levels: int = 60,
    workers: int = 1,
) -> ExperimentReport:
    """Estimate both dimensions of random arrangements along depths W-6, W-3, W.

    ``policies`` maps each ladder depth to its (upper, lower) window
    policies; these are the pre-registered knobs of the experiment.
    Depths share per-trial seeds, so a deeper set is the refinement of
    its shallower counterpart.  The cantor arrangement runs once per
    depth as the deterministic control.
    """
    p = level_sums(a, n_levels)
    if not p.level_comparable:
        raise NotLevelComparableError("dichotomy theorems assume a level comparable sequence")
    d = depth_function(f, p, n_levels - 1, clip=True)
    box = box_dim_estimate(p)
    depths = (w - 6, w - 3, w)
    if policies is None:
        policies = default_policies(d.regime, depths)
    seeds = [trial_seed(master_seed, t) for t in range(trials)]

    summaries = []
    for depth in depths:
        up_pol, lo_pol = policies[depth]
        args = [(a, f, p, d, depth, seeds[t], up_pol, lo_pol, t) for t in range(trials)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda ar: _run_trial(*ar), args))
        else:
            rows = [_run_trial(*ar) for ar in args]
        ups = np.array([r.beta_up for r in rows])
        los = np.array([r.beta_low for r in rows])
        cset = randmodel.build_set(a, depth, "cantor")
        c_up = estimate_dimension(cset, "upper", f, p, d, up_pol).beta_hat
        c_lo = estimate_dimension(cset, "lower", f, p, d, lo_pol).beta_hat
        bad = int(np.sum((los > box + 0.05) | (ups < box - 0.05)))
        summaries.append(DepthSummary(
            depth=depth,
            median_up=float(np.median(ups)), median_low=float(np.median(los)),
            quartiles_up=(float(np.quantile(ups, 0.25)), float(np.quantile(ups, 0.75))),
            quartiles_low=(float(np.quantile(los, 0.25)), float(np.quantile(los, 0.75))),
            cantor_up=c_up, cantor_low=c_lo,
            sandwich_violations=bad,
            trials=tuple(rows),
        ))

    n_formula = min(p.n_max, 2 * n_levels // 3)
    targets = {
        "formula_upper": upper_phi_dim_formula(p, d, n_formula).beta_limit,
        "formula_lower": lower_phi_dim_formula(p, d, n_formula).beta_limit,
        "box": box,
        "small_regime_upper": 1.0,
        "small_regime_lower": 0.0,
    }
    config = {
        "sequence": a.to_config(),
        "dimension_function": f.to_config(),
        "w": w,
        "trials": trials,
        "n_levels": n_levels,
        "policies": {str(depth): [up.to_config(), lo.to_config()]
                     for depth, (up, lo) in policies.items()},
    }
    return ExperimentReport(kind="dichotomy", config=config, master_seed=master_seed,
                            summaries=tuple(summaries), targets=targets)


# ---------------------------------------------------------------------------
# max-load statistic


def critical_load(n: int, phi_n: int) -> float:
    """K_n = 2 ln(2^n) / ln(2^n ln(2^n) / 2^(n+phi_n))."""
    ln_bins = n * _LN2
    return 2.0 * ln_bins / math.log(2 ** n * ln_bins / 2 ** (n + phi_n))


def max_load_statistic(
    a: GapSequence,
    w: int,
    n: int,
    phi_n: int,
    trials: int,
    master_seed: int,
) -> dict:
    """Frequency of {M_n > K_n} where M_n is the max, over level-n
    intervals, of the number of gaps from levels n+1..n+phi_n inside.

    Uses the label-rank shortcut: a deep gap's level-n interval is the
    rank of its label among the shallow ones, so no geometry is built.
    The cantor arrangement gives exactly 2^phi_n - 1 gaps per interval
    (one level-(n+1) gap, two level-(n+2) gaps, and so on).
    """
    if phi_n < 1:
        raise InvalidRangeError("phi_n must be >= 1")
    if w < n + phi_n:
        raise DepthUnsupportedError(f"need W >= n + phi_n = {n + phi_n}, got {w}")
    margin = 0.05
    if 2 ** phi_n >= (n * _LN2) * (1.0 - margin):
        raise OutOfRegimeError(
            f"2^phi_n = {2 ** phi_n} not << ln(2^n) = {n * _LN2:.2f}")
    k_n = critical_load(n, phi_n)
    ext = phi_n + math.floor(LOAD_CUTOFF_A * math.log(n))
    loads = np.empty(trials, dtype=np.int64)
    rows = []
    for t in range(trials):
        seed = trial_seed(master_seed, t)
        counts = randmodel.slot_counts(seed, w, n, 2 ** n, 2 ** (n + phi_n))
        loads[t] = counts.max()
        empty = None
        if w >= n + ext:
            wide = randmodel.slot_counts(seed, w, n, 2 ** n, 2 ** (n + ext))
            empty = bool(wide.min() == 0)
        rows.append(TrialStats(trial_id=t, seed=seed, m_n=int(loads[t]),
                               k_n=k_n, empty_bin=empty))
    hist_vals, hist_counts = np.unique(loads, return_counts=True)
    empties = [r.empty_bin for r in rows if r.empty_bin is not None]
    return {
        "schema_version": 1,
        "kind": "max_load",
        "config": {"sequence": a.to_config(), "w": w, "n": n,
                   "phi_n": phi_n, "trials": trials,
                   "cutoff_A": LOAD_CUTOFF_A},
        "master_seed": master_seed,
        "K_n": k_n,
        "frequency": float(np.mean(loads > k_n)),
        "empty_bin_frequency": (sum(empties) / len(empties)) if empties else None,
        "cantor_load": 2 ** phi_n - 1,
        "cantor_exceeds": bool(2 ** phi_n - 1 > k_n),
        "histogram": {int(v): int(c) for v, c in zip(hist_vals, hist_counts)},
        "trials_detail": [r.to_record() for r in rows],
    }


# ---------------------------------------------------------------------------
# empty-bin experiment


def empty_bin_probability(n_bins_log2: int, balls: int, trials: int, master_seed: int) -> dict:
    """Frequency of at least one empty bin for iid-uniform ball placement."""
    if n_bins_log2 < 1 or balls < 1:
        raise InvalidRangeError("need at least one bin bit and one ball")
    bins = 2 ** n_bins_log2
    hits = 0
    for t in range(trials):
        idx = rng.bin_indices(trial_seed(master_seed, t), 0, balls, n_bins_log2)
        occupied = np.bincount(idx, minlength=bins) > 0
        hits += int(not occupied.all())
    lam = bins * math.exp(-balls / bins)
    return {
        "schema_version": 1,
        "kind": "empty_bin",
        "config": {"n_bins_log2": n_bins_log2, "balls": balls, "trials": trials},
        "master_seed": master_seed,
        "frequency": hits / trials,
        "poisson_expected_empty": lam,
        "poisson_predicted_frequency": 1.0 - math.exp(-lam),
    }


# ---------------------------------------------------------------------------
# interval-length lemma


def length_constant(p: LevelProfile) -> float:
    """Smallest C with C*s_j >= a_{2^(j-1)} over the computed profile."""
    js = np.arange(1, p.n_max + 1)
    lead = p.sequence.gap_lengths(2 ** (js - 1))
    return float(np.max(lead / p.s[js]))


def interval_length_lemma_check(
    a: GapSequence,
    w: int,
    n: int,
    trials: int,
    master_seed: int,
) -> dict:
    """Frequency of {max level-n interval <= 3C * s_n^(1 - eps_n)}, eps_n = 4 ln n / n."""
    if n < 2 or n + 2 > w:
        raise InvalidRangeError("need 2 <= n <= W - 2 for headroom")
    p = level_sums(a, max(n, 16))
    if not p.level_comparable:
        raise NotLevelComparableError("lemma assumes a level comparable sequence")
    eps_n = 4.0 * math.log(n) / n
    c = length_constant(p)
    bound = 3.0 * c * p.s[n] ** (1.0 - eps_n)
    max_lens = np.empty(trials)
    rows = []
    for t in range(trials):
        seed = trial_seed(master_seed, t)
        s = randmodel.build_set(a, w, "random", seed=seed)
        lefts, rights = s.level_intervals(n)
        max_lens[t] = float(np.max(rights - lefts))
        rows.append(TrialStats(trial_id=t, seed=seed, max_len_n=max_lens[t],
                               len_bound_n=bound, epsilon_n=eps_n))
    cset = randmodel.build_set(a, w, "cantor")
    cl, cr = cset.level_intervals(n)
    return {
        "schema_version": 1,
        "kind": "interval_length",
        "config": {"sequence": a.to_config(), "w": w, "n": n, "trials": trials},
        "master_seed": master_seed,
        "epsilon_n": eps_n,
        "C": c,
        "bound": bound,
        "frequency": float(np.mean(max_lens <= bound)),
        "median_max_length": float(np.median(max_lens)),
        "cantor_max_length": float(np.max(cr - cl)),
        "cantor_within_bound": bool(np.max(cr - cl) <= bound),
        "trials_detail": [r.to_record() for r in rows],
    }


# ---------------------------------------------------------------------------
# binomial tail bounds


@dataclass(frozen=True)
class TailCheck:
    m: int
    n: int
    eta: float
    mp: float
    exact_two_sided_tail: float
    exact_upper_tail: float
    exact_lower_tail: float
    dml_bound: float
    corollary_bound: float
    in_hypothesis: bool
    corollary_in_hypothesis: bool = False   # needs Mp >= 200 as well
    skip_reason: str | None = None

    def to_record(self) -> dict:
        return {
            "M": self.m, "N": self.n, "eta": self.eta, "Mp": self.mp,
            "exact_two_sided_tail": self.exact_two_sided_tail,
            "exact_upper_tail": self.exact_upper_tail,
            "exact_lower_tail": self.exact_lower_tail,
            "dml_bound": self.dml_bound,
            "corollary_bound": self.corollary_bound,
            "in_hypothesis": self.in_hypothesis,
            "corollary_in_hypothesis": self.corollary_in_hypothesis,
            "skip_reason": self.skip_reason,
        }


def _log_binom_pmf(m: int, p: float, ks: np.ndarray) -> np.ndarray:
    return (gammaln(m + 1) - gammaln(ks + 1) - gammaln(m - ks + 1)
            + ks * math.log(p) + (m - ks) * math.log1p(-p))


def binomial_tail_mass(m: int, p: float, lo: int | None, hi: int | None) -> float:
    """Exact P(Y <= lo) + P(Y >= hi) for Y ~ Binomial(m, p), in log space."""
    parts = []
    if lo is not None and lo >= 0:
        parts.append(_log_binom_pmf(m, p, np.arange(0, min(lo, m) + 1)))
    if hi is not None and hi <= m:
        parts.append(_log_binom_pmf(m, p, np.arange(max(hi, 0), m + 1)))
    if not parts:
        return 0.0
    return float(np.exp(logsumexp(np.concatenate(parts))))


ADOPTED_C = 1.0 / 432.0   # eta^2/3 at eta = 1/12


def binomial_tail_check(grid: list[tuple[int, int]], eta: float) -> list[TailCheck]:
    """Exact binomial tails against the normal-approximation and simple
    exponential bounds, row per (M, N) with p = 2^-N.

    Two-sided: P(|Y - Mp| >= eta*Mp) <= exp(-eta^2 Mp / 3) / (eta sqrt(Mp)).
    One-sided at eta = 1/12: each tail <= exp(-Mp/432).
    """
    if not 0.0 < eta <= 1.0 / 12.0:
        raise InvalidRangeError("eta must be in (0, 1/12]")
    out = []
    for m, n in grid:
        p = 2.0 ** (-n)
        mp = m * p
        precondition = eta * p * (1.0 - p) * m
        if precondition < 12.0:
            out.append(TailCheck(m=m, n=n, eta=eta, mp=mp,
                                 exact_two_sided_tail=math.nan,
                                 exact_upper_tail=math.nan, exact_lower_tail=math.nan,
                                 dml_bound=math.nan, corollary_bound=math.nan,
                                 in_hypothesis=False,
                                 skip_reason=f"eta*p*(1-p)*M = {precondition:.3g} < 12"))
            continue
        dev = eta * mp
        hi = math.ceil(mp + dev - 1e-9)
        lo = math.floor(mp - dev + 1e-9)
        two_sided = binomial_tail_mass(m, p, lo, hi)
        upper = binomial_tail_mass(m, p, None, math.ceil(13.0 / 12.0 * mp - 1e-9))
        lower = binomial_tail_mass(m, p, math.floor(11.0 / 12.0 * mp + 1e-9), None)
        out.append(TailCheck(
            m=m, n=n, eta=eta, mp=mp,
            exact_two_sided_tail=two_sided,
            exact_upper_tail=upper, exact_lower_tail=lower,
            dml_bound=math.exp(-eta * eta * mp / 3.0) / (eta * math.sqrt(mp)),
            corollary_bound=math.exp(-ADOPTED_C * mp),
            in_hypothesis=True,
            corollary_in_hypothesis=mp >= 200.0,
        ))
    return out
