"""Event-driven exact simulation of the flip-flop fluid queues.

One path is a sequence of linear segments between competing exponential
clocks; occupation below every grid level is accounted exactly segment by
segment, so there is no discretization bias.  Replications use independent
streams derived from (seed, replication index) and are aggregated in a
fixed order, making every run bit-reproducible for a given configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO
from typing import TextIO

import numpy as np

from ._kernels import simulate_path
from .errors import ValidationError
from .model import MmbmModel
from .regenerative import BoundaryVariant, RegenerationLaw
from .stationary import PhaseCdf

# Fraction of each replication discarded from all accumulators; every path
# starts at (level 0, phase 1), warm-up controls that bias model-free.
WARMUP_FRACTION = 0.01


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Simulation request: dynamics scale, boundary variant, accounting grid.

    ``horizon`` is the total simulated time; it is split evenly over
    ``replications`` independent paths.
    """

    lam: float
    variant: BoundaryVariant
    q: float
    horizon: float
    seed: int
    grid: np.ndarray
    replications: int = 1


@dataclass(frozen=True, eq=False)
class EmpiricalLaw:
    """Path statistics: occupation CDF, phase marginals, cycle statistics.

    ``occupation[j, i]`` is the fraction of (post-warm-up) time with level
    at most ``grid[j]`` and phase i; ``zero_fraction[i]`` the fraction at
    level exactly zero in phase i.  ``cycle_var`` is the sample variance of
    completed cycle lengths, kept so comparisons can attach standard errors.
    """

    grid: np.ndarray
    occupation: np.ndarray
    phase_marginal: np.ndarray
    regen_phase_freq: np.ndarray
    mean_cycle: float
    cycle_var: float
    n_cycles: int
    zero_fraction: np.ndarray
    lam: float
    q: float
    seed: int
    variant_tag: str
    horizon: float
    replications: int

    def to_csv(self, stream: TextIO | None = None) -> str:
        """Metadata as '#' comment lines, then one row per grid level."""
        out = stream if stream is not None else StringIO()
        w = out.write
        w(f"# lambda: {float(self.lam)!r}\n")
        w(f"# q: {float(self.q)!r}\n")
        w(f"# variant: {self.variant_tag}\n")
        w(f"# horizon: {float(self.horizon)!r}\n")
        w(f"# replications: {self.replications}\n")
        w(f"# seed: {self.seed}\n")
        w(f"# n_cycles: {self.n_cycles}\n")
        w(f"# mean_cycle: {float(self.mean_cycle)!r}\n")
        w(f"# cycle_var: {float(self.cycle_var)!r}\n")
        w("# zero_fraction: " + ",".join(repr(float(v)) for v in self.zero_fraction) + "\n")
        w("# phase_marginal: " + ",".join(repr(float(v)) for v in self.phase_marginal) + "\n")
        w("# regen_phase_freq: " + ",".join(repr(float(v)) for v in self.regen_phase_freq) + "\n")
        m = self.occupation.shape[1]
        w("x," + ",".join(f"occ_phase{i + 1}" for i in range(m)) + "\n")
        for j, x in enumerate(self.grid):
            w(repr(float(x)) + "," + ",".join(repr(float(v)) for v in self.occupation[j]) + "\n")
        if stream is None:
            return out.getvalue()
        return ""


def _cumulative_thresholds(rates: np.ndarray) -> np.ndarray:
    """Exponential-scale thresholds for categorical sampling.

    An Exp(1) draw E selects outcome k iff th[k-1] <= E < th[k] where
    th[k] = -log(1 - cum_k); this is exact because 1 - e^{-E} is uniform.
    Zero-rate outcomes collapse to empty intervals, the last threshold is
    +inf so the selection walk always terminates.
    """
    total = rates.sum()
    cum = np.cumsum(rates) / total
    with np.errstate(divide="ignore"):
        th = -np.log1p(-np.minimum(cum, 1.0))
    th[cum >= 1.0 - 1e-15] = np.inf
    th[-1] = np.inf
    return th


def _boundary_tables(variant: BoundaryVariant, model: MmbmModel, lam: float):
    """Per-phase boundary outcome tables (rates, thresholds, targets).

    Outcomes are [exit to (up, j) for each j] then [move to (down, j) for
    each j].  The three variants differ only in these rates:
    standard exits at rate lam with phase moves at Q; sticky exits at
    a_i sqrt(lam) with moves a_i Q_ij / sqrt(lam); resampled exits at
    sqrt(lam) A_ij with boundary moves sqrt(lam) Atilde_ij + Qtilde_ij/sqrt(lam).
    """
    m = model.m
    sq = math.sqrt(lam)
    q_off = np.array(model.Q)
    np.fill_diagonal(q_off, 0.0)
    if variant.tag == "standard":
        exit_rates = lam * np.eye(m)
        move_rates = q_off.copy()
    elif variant.tag == "sticky":
        exit_rates = sq * np.diag(variant.spec.a)
        move_rates = variant.spec.a[:, None] * q_off / sq
    else:
        exit_rates = sq * np.array(variant.spec.A)
        move_rates = sq * np.array(variant.spec.Atilde) + np.array(variant.spec.Qtilde) / sq
        np.fill_diagonal(move_rates, 0.0)
        if np.min(move_rates) < 0.0:
            raise ValidationError(
                "boundary-rates",
                f"lam = {lam} is too small for this resampling spec: a combined "
                f"boundary transition rate is negative ({np.min(move_rates):.3e})")
    rates = np.hstack([exit_rates, move_rates])
    thresh = np.empty_like(rates)
    for i in range(m):
        if rates[i].sum() <= 0.0:
            raise ValidationError("boundary-rates",
                                  f"boundary phase {i} has no outgoing rate")
        thresh[i] = _cumulative_thresholds(rates[i])
    exit_phase = np.hstack([np.arange(m), np.arange(m)]).astype(np.int64)
    exit_phase = np.tile(exit_phase, (m, 1))
    kappa = np.hstack([np.ones(m, dtype=np.int64), 2 * np.ones(m, dtype=np.int64)])
    kappa = np.tile(kappa, (m, 1))
    return rates, thresh, exit_phase, kappa


def _move_thresholds(model: MmbmModel) -> np.ndarray:
    """Phase-move target thresholds, conditional on the event being a move.

    Row i covers the m - 1 targets j != i in index order; rows of an
    all-move-free phase stay +inf (the kernel never samples them).
    """
    m = model.m
    th = np.full((m, max(1, m - 1)), np.inf)
    for i in range(m):
        rates = np.array([model.Q[i, j] for j in range(m) if j != i])
        if rates.size and rates.sum() > 0.0:
            th[i] = _cumulative_thresholds(rates)
    return th


def _validate_config(config: SimConfig, model: MmbmModel) -> np.ndarray:
    if not np.isfinite(config.horizon) or config.horizon <= 0.0:
        raise ValidationError("horizon-positive",
                              f"horizon must be > 0, got {config.horizon}")
    if not np.isfinite(config.q) or config.q <= 0.0:
        raise ValidationError("rate-positive", f"q must be > 0, got {config.q}")
    thresh = model.rate_threshold()
    if not np.isfinite(config.lam) or config.lam <= thresh:
        raise ValidationError("oscillation-rate",
                              f"lam must exceed {thresh:.6g}, got {config.lam}")
    if config.replications < 1:
        raise ValidationError("replications", "need at least one replication")
    if not (0 <= int(config.seed) < 2**64):
        raise ValidationError("seed", "seed must fit in 64 unsigned bits")
    grid = np.asarray(config.grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValidationError("grid-shape", "grid must be a nonempty 1-d array")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0.0):
        raise ValidationError("grid-domain", "grid levels must be finite and >= 0")
    if np.any(np.diff(grid) <= 0.0):
        raise ValidationError("grid-sorted", "grid levels must be strictly increasing")
    spec_m = None
    if config.variant.tag == "sticky":
        spec_m = config.variant.spec.a.shape[0]
    elif config.variant.tag == "resampled":
        spec_m = config.variant.spec.A.shape[0]
    if spec_m is not None and spec_m != model.m:
        raise ValidationError("shape", "boundary spec and model phase counts differ")
    return grid


def simulate(config: SimConfig, model: MmbmModel) -> EmpiricalLaw:
    """Simulate the configured flip-flop queue and return path statistics.

    Deterministic: identical (config, model) give a bit-identical result.
    Each replication runs horizon/replications time units on its own
    stream seeded from (seed, replication index); per-replication
    accumulators are summed along the replication axis afterwards, so the
    aggregate does not depend on execution order.
    """
    grid = _validate_config(config, model)
    m = model.m
    reps = int(config.replications)
    chunk = config.horizon / reps
    warm = WARMUP_FRACTION * chunk
    q_off = np.array(model.Q)
    np.fill_diagonal(q_off, 0.0)
    mv_thresh = _move_thresholds(model)
    bd_rate, bd_thresh, bd_phase, bd_kappa = _boundary_tables(config.variant, model, config.lam)

    ng = grid.size
    occ = np.zeros((reps, m, ng))
    full = np.zeros((reps, m, ng))
    zero_t = np.zeros((reps, m))
    phase_t = np.zeros((reps, m))
    regen_count = np.zeros((reps, m))
    n_cycles = np.zeros(reps, dtype=np.int64)
    cyc_sum = np.zeros(reps)
    cyc_sq = np.zeros(reps)
    for rep in range(reps):
        gen = np.random.Generator(np.random.SFC64(
            np.random.SeedSequence((int(config.seed), rep))))
        nc, cs, csq = simulate_path(
            gen, chunk, warm, grid, model.mu, model.sigma, float(config.lam),
            float(config.q), q_off, mv_thresh, bd_rate, bd_thresh, bd_phase,
            bd_kappa, occ[rep], full[rep], zero_t[rep], phase_t[rep],
            regen_count[rep])
        n_cycles[rep] = nc
        cyc_sum[rep] = cs
        cyc_sq[rep] = csq

    occ_tot = occ.sum(axis=0)
    full_tot = full.sum(axis=0)
    accounted = reps * (chunk - warm)
    occupation = (occ_tot + np.cumsum(full_tot, axis=1)).T / accounted
    n_tot = int(n_cycles.sum())
    c_sum = float(cyc_sum.sum())
    c_sq = float(cyc_sq.sum())
    if n_tot > 0:
        mean_cycle = c_sum / n_tot
        freq = regen_count.sum(axis=0) / n_tot
        cycle_var = max(0.0, (c_sq - n_tot * mean_cycle**2) / max(1, n_tot - 1))
    else:
        mean_cycle = math.nan
        cycle_var = math.nan
        freq = np.full(m, math.nan)
    return EmpiricalLaw(
        grid=grid, occupation=occupation,
        phase_marginal=phase_t.sum(axis=0) / accounted,
        regen_phase_freq=freq, mean_cycle=mean_cycle, cycle_var=cycle_var,
        n_cycles=n_tot, zero_fraction=zero_t.sum(axis=0) / accounted,
        lam=float(config.lam), q=float(config.q), seed=int(config.seed),
        variant_tag=config.variant.tag, horizon=float(config.horizon),
        replications=reps)


def ks_distance(emp: EmpiricalLaw, law: PhaseCdf) -> tuple[np.ndarray, float]:
    """Sup distance between empirical and analytic CDFs on the grid.

    Returns (per-phase sup differences, sup difference of the summed
    level-marginal CDFs).
    """
    if law.m != emp.occupation.shape[1]:
        raise ValidationError("shape", "law and empirical phase counts differ")
    analytic = law.evaluate(emp.grid)
    diff = np.abs(emp.occupation - analytic)
    per_phase = diff.max(axis=0)
    total = float(np.abs(emp.occupation.sum(axis=1) - analytic.sum(axis=1)).max())
    return per_phase, total


@dataclass(frozen=True, eq=False)
class RegenComparison:
    """Empirical regeneration statistics against their analytic targets."""

    freq_dev: np.ndarray
    freq_se: np.ndarray
    cycle_dev: float
    cycle_se: float
    n_cycles: int
    rho: np.ndarray
    mean_cycle_target: float

    def within(self, n_se: float = 3.0) -> bool:
        freq_ok = bool(np.all(np.abs(self.freq_dev) <= n_se * self.freq_se))
        return freq_ok and abs(self.cycle_dev) <= n_se * self.cycle_se


def regen_stats_compare(emp: EmpiricalLaw, law: RegenerationLaw) -> RegenComparison:
    """Compare regeneration phase frequencies and mean cycle length.

    Standard errors: binomial sqrt(rho (1-rho)/n) per phase and the CLT
    error of the sample mean cycle length.  Requires at least 1000
    completed cycles.
    """
    if emp.n_cycles < 1000:
        raise ValidationError(
            "cycles-insufficient",
            f"need >= 1000 completed cycles for comparison, got {emp.n_cycles}; "
            f"increase the horizon")
    rho = law.rho
    target = float(rho @ law.m_vec)
    freq_se = np.sqrt(rho * (1.0 - rho) / emp.n_cycles)
    cycle_se = math.sqrt(emp.cycle_var / emp.n_cycles)
    return RegenComparison(
        freq_dev=emp.regen_phase_freq - rho, freq_se=freq_se,
        cycle_dev=emp.mean_cycle - target, cycle_se=cycle_se,
        n_cycles=emp.n_cycles, rho=rho, mean_cycle_target=target)
