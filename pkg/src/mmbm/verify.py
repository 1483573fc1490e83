"""Cross-check suite tying the analytic layers together.

Each check compares two independently computed representations of the same
quantity and reports the achieved error against a fixed tolerance.  The
suite is what the ``verify`` CLI subcommand runs; tests reuse it directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import MmbmModel, ResampleSpec, StickySpec, validate_model, validate_sticky
from .linalg import solve_stable_quadratic
from .regenerative import (
    BoundaryVariant,
    expected_sojourn,
    regen_cdf,
    resampled_variant,
    standard_variant,
    sticky_variant,
)
from .stationary import (
    PhaseCdf,
    evaluate_cdf,
    matrix_K,
    regulated_weight_forms,
    scalar_sticky_reference,
    stationary_resampled,
    stationary_standard,
    stationary_sticky,
    vector_ell,
    vector_nu,
)

SCALAR_BATTERY = ((-1.0, 1.0, 1.0), (-0.5, 2.0, 0.3), (-2.0, 0.7, 1.5))


@dataclass(frozen=True)
class CheckResult:
    name: str
    tolerance: float
    error: float
    info: str = ""

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.info})" if self.info else ""
        return (f"{status} {self.name}: error {self.error:.3e} "
                f"<= tol {self.tolerance:.1e}{extra}" if self.passed else
                f"{status} {self.name}: error {self.error:.3e} "
                f"> tol {self.tolerance:.1e}{extra}")


def collinearity_gap(u, v) -> float:
    """Sine of the angle between two vectors; 0 means collinear."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uh = u / np.linalg.norm(u)
    vh = v / np.linalg.norm(v)
    return float(np.linalg.norm(uh - (uh @ vh) * vh))


def _tamper(law: PhaseCdf, eps: float) -> PhaseCdf:
    if eps == 0.0:
        return law
    k = np.array(law.K)
    k[0, 0] += eps
    return replace(law, K=k)


def scalar_oracle_check(points: int = 50) -> CheckResult:
    """Single-phase sticky laws against the closed scalar form."""
    worst = 0.0
    for mu, sigma, omega in SCALAR_BATTERY:
        model = validate_model([[0.0]], [mu], [sigma])
        spec = validate_sticky([omega / sigma], model)
        law = stationary_sticky(model, spec)
        xs = np.linspace(0.0, 2.0 * sigma**2 / abs(mu), points)
        got = evaluate_cdf(law, xs)[:, 0]
        want = np.array([scalar_sticky_reference(mu, sigma, omega, x) for x in xs])
        worst = max(worst, float(np.max(np.abs(got - want))))
    return CheckResult("scalar_sticky_oracle", 1e-10, worst)


def run_verify(model: MmbmModel, sticky: StickySpec | None = None,
               resample: ResampleSpec | None = None,
               qs: tuple[float, ...] = (0.25, 1.0, 4.0),
               grid: np.ndarray | None = None,
               k_perturb: float = 0.0) -> tuple[list[CheckResult], list[str]]:
    """Run every cross-check available for the given model and specs.

    Returns (check results, informational report lines).  ``k_perturb``
    is a debug hook that perturbs the closed-form laws' decay matrix so the
    failure path of the harness can be exercised.
    """
    checks: list[CheckResult] = []
    notes: list[str] = []
    if grid is None:
        grid = np.linspace(0.0, 5.0, 100)
    q_ref = qs[len(qs) // 2] if qs else 1.0

    checks.append(scalar_oracle_check())

    sol0 = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0)
    solq = solve_stable_quadratic(model.Q, model.mu, model.sigma, q_ref)
    checks.append(CheckResult("quadratic_residual_q0", 1e-10, sol0.residual_norm))
    checks.append(CheckResult(f"quadratic_residual_q{q_ref:g}", 1e-10, solq.residual_norm))

    # four equivalent representations of the regulated law
    forms = regulated_weight_forms(model)
    law_std = _tamper(stationary_standard(model), k_perturb)
    base = evaluate_cdf(law_std, grid)
    worst = 0.0
    for name, w in forms.items():
        alt = PhaseCdf(mass_zero=np.zeros(model.m), weight=w, K=law_std.K,
                       sigma=model.sigma)
        worst = max(worst, float(np.max(np.abs(evaluate_cdf(alt, grid) - base))))
    regen_std = evaluate_cdf(regen_cdf(standard_variant(), model, q_ref), grid)
    worst = max(worst, float(np.max(np.abs(regen_std - base))))
    checks.append(CheckResult("regulated_four_way", 1e-8, worst))
    checks.append(CheckResult(
        "regulated_marginal_alpha", 1e-10,
        float(np.max(np.abs(law_std.marginal() - model.alpha)))))

    # q-invariance of the cycle-average law, per available variant
    variants: list[tuple[str, BoundaryVariant, PhaseCdf]] = [
        ("standard", standard_variant(), law_std)]
    if sticky is not None:
        variants.append(("sticky", sticky_variant(sticky),
                         _tamper(stationary_sticky(model, sticky), k_perturb)))
    if resample is not None:
        variants.append(("resampled", resampled_variant(resample),
                         _tamper(stationary_resampled(model, resample), k_perturb)))
    for name, variant, law in variants:
        target = evaluate_cdf(law, grid)
        worst = 0.0
        for q in qs:
            got = evaluate_cdf(regen_cdf(variant, model, q), grid)
            worst = max(worst, float(np.max(np.abs(got - target))))
        checks.append(CheckResult(f"q_invariance_{name}", 1e-8, worst,
                                  info=f"q in {list(qs)}"))

    # regulator identities
    nu = vector_nu(model)
    ell = vector_ell(model)
    checks.append(CheckResult("ell_sum_drift", 1e-10,
                              abs(float(ell.sum()) + model.drift)))
    checks.append(CheckResult("ell_left_null", 1e-12,
                              float(np.max(np.abs(ell @ sol0.U)))))
    k_mat = matrix_K(model, sol0.U)
    checks.append(CheckResult("collinear_alpha_theta_K_nu", 1e-10,
                              collinearity_gap(model.alpha * model.sigma @ k_mat, nu)))
    rho_std = expected_sojourn(standard_variant(), model, q_ref).rho
    checks.append(CheckResult(
        "collinear_rho_standard_nu_theta", 1e-10,
        collinearity_gap(rho_std @ np.linalg.inv(-solq.U), nu * model.sigma)))
    if sticky is not None:
        law_r = expected_sojourn(sticky_variant(sticky), model, q_ref)
        pref = np.linalg.inv(np.diag(q_ref / sticky.a) - model.sigma[:, None] * solq.U)
        checks.append(CheckResult("collinear_rho_sticky_nu", 1e-10,
                                  collinearity_gap(law_r.rho @ pref, nu)))
        checks.append(CheckResult(
            "boundary_time_sticky_nu_Ainv", 1e-10,
            collinearity_gap(law_r.rho @ law_r.M_zero, nu / sticky.a)))
        gamma = 1.0 / float(law_r.rho @ law_r.m_vec)
        notes.append(
            f"sticky cycle normalization at q={q_ref:g}: (rho m)^-1 = {gamma!r}; "
            f"doubled variant 2(rho m)^-1 = {2.0 * gamma!r}; laws are "
            f"self-normalized, which matches the single-phase oracle")
    if resample is not None:
        law_r = expected_sojourn(resampled_variant(resample), model, q_ref)
        checks.append(CheckResult(
            "boundary_time_resampled_beta_Atinv", 1e-10,
            collinearity_gap(law_r.rho @ law_r.M_zero,
                             resample.beta @ np.linalg.inv(-resample.Atilde))))
    return checks, notes
