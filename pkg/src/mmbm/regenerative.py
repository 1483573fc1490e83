"""The q-parametrized regenerative layer.

Regeneration epochs are hits of level zero after an exponential timer with
rate q has expired.  For each boundary variant this module computes the
finite-oscillation-rate boundary kernels and embedded transition matrix,
their closed limits, the stationary vector at regeneration epochs, the
expected sojourn matrices per cycle, and the stationary law reassembled
from cycle averages.  The reassembled law must agree with the closed-form
law for every q; the asymptotic report quantifies the finite-rate errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from io import StringIO
from typing import Union

import numpy as np

from .errors import SolverError, ValidationError
from .linalg import matrix_exponential, solve_riccati_psi, solve_stable_quadratic
from .model import MmbmModel, ResampleSpec, StickySpec
from .stationary import PhaseCdf, _normalized_law, matrix_K

VARIANT_TAGS = ("standard", "sticky", "resampled")


@dataclass(frozen=True)
class BoundaryVariant:
    """A boundary behavior tag plus its specification when one is needed."""

    tag: str
    spec: Union[StickySpec, ResampleSpec, None] = None

    def __post_init__(self):
        if self.tag not in VARIANT_TAGS:
            raise ValidationError("variant-tag", f"unknown variant {self.tag!r}")
        if self.tag == "standard" and self.spec is not None:
            raise ValidationError("variant-spec", "standard variant takes no spec")
        if self.tag == "sticky" and not isinstance(self.spec, StickySpec):
            raise ValidationError("variant-spec", "sticky variant needs a StickySpec")
        if self.tag == "resampled" and not isinstance(self.spec, ResampleSpec):
            raise ValidationError("variant-spec", "resampled variant needs a ResampleSpec")


def standard_variant() -> BoundaryVariant:
    return BoundaryVariant("standard")


def sticky_variant(spec: StickySpec) -> BoundaryVariant:
    return BoundaryVariant("sticky", spec)


def resampled_variant(spec: ResampleSpec) -> BoundaryVariant:
    return BoundaryVariant("resampled", spec)


@dataclass(frozen=True, eq=False)
class RegenerationLaw:
    """Cycle quantities of one boundary variant at timer rate q.

    ``rho`` is the stationary phase distribution at regeneration epochs,
    ``m_vec`` the expected cycle length per starting phase, and
    M(x) = M_zero + M_slope (I - e^{Kx}) Theta^-1 the expected sojourn
    time in [0, x] per cycle.
    """

    q: float
    rho: np.ndarray
    m_vec: np.ndarray
    M_zero: np.ndarray
    M_slope: np.ndarray
    K: np.ndarray
    sigma: np.ndarray

    def sojourn(self, x: float) -> np.ndarray:
        """M(x), expected time in [0, x] by ending phase, per starting phase."""
        if np.isinf(x):
            return self.M_zero + self.M_slope / self.sigma[None, :]
        ekx = matrix_exponential(self.K, x)
        return self.M_zero + self.M_slope @ (np.eye(len(self.sigma)) - ekx) / self.sigma[None, :]


def _check_rates(model: MmbmModel, lam: float, q: float) -> None:
    if not np.isfinite(q) or q <= 0.0:
        raise ValidationError("rate-positive", f"q must be finite and > 0, got {q}")
    thresh = model.rate_threshold()
    if not np.isfinite(lam) or lam <= thresh:
        raise ValidationError("oscillation-rate",
                              f"lam must exceed {thresh:.6g}, got {lam}")


def boundary_kernels(variant: BoundaryVariant, model: MmbmModel, lam: float,
                     q: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact finite-rate boundary kernels (P0, P1).

    P0[i, j]: the process stays at level zero until the timer expires, with
    phase j at that moment.  P1[i, j]: the boundary is left (upward) before
    the timer expires, with phase j at departure.  Rows of P0 + P1 sum to
    one: the two events partition every boundary sojourn.
    """
    _check_rates(model, lam, q)
    m = model.m
    sq = np.sqrt(lam)
    eye = np.eye(m)
    if variant.tag == "standard":
        resolvent = np.linalg.inv((lam + q) * eye - model.Q)
        return q * resolvent, lam * resolvent
    if variant.tag == "sticky":
        a = variant.spec.a
        resolvent = np.linalg.inv(sq * np.diag(a) + q * eye - (a[:, None] * model.Q) / sq)
        return q * resolvent, sq * resolvent * a[None, :]
    resolvent = np.linalg.inv(-sq * variant.spec.Atilde + q * eye - variant.spec.Qtilde / sq)
    return q * resolvent, sq * resolvent @ variant.spec.A


def phi_transition_finite(variant: BoundaryVariant, model: MmbmModel, lam: float,
                          q: float) -> np.ndarray:
    """Embedded phase transition matrix at regeneration epochs, finite lam.

    Phi = I - (I - P1 psi_q)^-1 (I - P0 - P1 psi).  The inverse exists for
    q > 0 because returns before the deadline are strictly substochastic.
    """
    p0, p1 = boundary_kernels(variant, model, lam, q)
    ric = solve_riccati_psi(model, lam, q)
    eye = np.eye(model.m)
    try:
        inv = np.linalg.inv(eye - p1 @ ric.psi_q)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "I - P1 psi_q is singular; this requires q > 0 and a valid boundary spec"
        ) from exc
    phi = eye - inv @ (eye - p0 - p1 @ ric.psi)
    worst = float(np.max(np.abs(phi.sum(axis=1) - 1.0)))
    if worst > 1e-6:
        raise SolverError(f"embedded transition matrix is not stochastic: "
                          f"row-sum deviation {worst:.3e}")
    return phi


def _left_null_unit(t: np.ndarray) -> np.ndarray:
    """Solve v t = 0, v 1 = 1 for a rank-deficient generator-like t."""
    m = t.shape[0]
    sys = np.empty((m, m))
    sys[:, : m - 1] = t[:, : m - 1]
    sys[:, m - 1] = 1.0
    rhs = np.zeros(m)
    rhs[m - 1] = 1.0
    return np.linalg.solve(sys.T, rhs)


def _resampled_rho(model: MmbmModel, spec: ResampleSpec, q: float,
                   u0: np.ndarray, uq: np.ndarray) -> np.ndarray:
    neg_at_inv = np.linalg.inv(-spec.Atilde)
    theta = model.sigma[:, None]
    gamma = 1.0 / float(spec.beta @ (q * neg_at_inv - theta * uq) @ np.ones(model.m))
    return gamma * spec.beta @ (q * neg_at_inv + theta * (u0 - uq))


def rho_limit(variant: BoundaryVariant, model: MmbmModel, q: float) -> np.ndarray:
    """Limiting stationary phase distribution at regeneration epochs.

    standard:   rho (-U(q))^-1 U = 0
    sticky:     rho (q A^-1 - Theta U(q))^-1 Theta U = 0
    resampled:  closed form through the resampling matrix's stationary
                vector; the embedded chain forgets its starting phase.
    """
    if not np.isfinite(q) or q <= 0.0:
        raise ValidationError("rate-positive", f"q must be finite and > 0, got {q}")
    u0 = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    uq = solve_stable_quadratic(model.Q, model.mu, model.sigma, q).U
    if variant.tag == "standard":
        return _left_null_unit(np.linalg.solve(-uq, u0))
    if variant.tag == "sticky":
        pref = np.linalg.inv(np.diag(q / variant.spec.a) - model.sigma[:, None] * uq)
        return _left_null_unit(pref @ (model.sigma[:, None] * u0))
    return _resampled_rho(model, variant.spec, q, u0, uq)


def phi_transition_limit(variant: BoundaryVariant, model: MmbmModel,
                         q: float) -> np.ndarray:
    """Closed limit of the embedded transition matrix as lam grows."""
    u0 = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    uq = solve_stable_quadratic(model.Q, model.mu, model.sigma, q).U
    eye = np.eye(model.m)
    if variant.tag == "standard":
        return eye + np.linalg.solve(-uq, u0)
    if variant.tag == "sticky":
        pref = np.linalg.inv(np.diag(q / variant.spec.a) - model.sigma[:, None] * uq)
        return eye + pref @ (model.sigma[:, None] * u0)
    rho = _resampled_rho(model, variant.spec, q, u0, uq)
    return np.ones((model.m, 1)) @ rho[None, :]


def expected_sojourn(variant: BoundaryVariant, model: MmbmModel,
                     q: float) -> RegenerationLaw:
    """Expected per-cycle sojourn matrices M(x) and cycle lengths.

    The regulated variant spends zero expected time at the boundary; the
    resampled variant's matrices are rank one because the phase is
    redistributed on every boundary visit.
    """
    if not np.isfinite(q) or q <= 0.0:
        raise ValidationError("rate-positive", f"q must be finite and > 0, got {q}")
    m = model.m
    u0 = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    uq = solve_stable_quadratic(model.Q, model.mu, model.sigma, q).U
    K = matrix_K(model, u0)
    neg_k_inv = np.linalg.inv(-K)
    theta_col = model.sigma[:, None]
    if variant.tag == "standard":
        m_zero = np.zeros((m, m))
        m_slope = 2.0 * np.linalg.inv(-uq) / model.sigma[None, :] @ neg_k_inv
        rho = _left_null_unit(np.linalg.solve(-uq, u0))
    elif variant.tag == "sticky":
        pref = np.linalg.inv(np.diag(q / variant.spec.a) - theta_col * uq)
        m_zero = pref / variant.spec.a[None, :]
        m_slope = 2.0 * pref @ neg_k_inv
        rho = _left_null_unit(pref @ (theta_col * u0))
    else:
        spec = variant.spec
        neg_at_inv = np.linalg.inv(-spec.Atilde)
        gamma = 1.0 / float(spec.beta @ (q * neg_at_inv - theta_col * uq) @ np.ones(m))
        ones = np.ones((m, 1))
        m_zero = gamma * ones @ (spec.beta @ neg_at_inv)[None, :]
        m_slope = 2.0 * gamma * ones @ (spec.beta @ neg_k_inv)[None, :]
        rho = _resampled_rho(model, spec, q, u0, uq)
    m_vec = (m_zero + m_slope / model.sigma[None, :]) @ np.ones(m)
    return RegenerationLaw(q=float(q), rho=rho, m_vec=m_vec, M_zero=m_zero,
                           M_slope=m_slope, K=K, sigma=model.sigma.copy())


def regen_cdf(variant: BoundaryVariant, model: MmbmModel, q: float) -> PhaseCdf:
    """Stationary law reassembled from cycle averages: G = (rho m)^-1 rho M.

    Agrees with the matching closed-form law for every q > 0.
    """
    law = expected_sojourn(variant, model, q)
    w0 = law.rho @ law.M_zero
    w1 = law.rho @ law.M_slope
    return _normalized_law(w0, w1, law.K, law.sigma)


@dataclass(frozen=True)
class AsymptoticRow:
    """Scaled finite-rate expansion errors at one oscillation rate."""

    lam: float
    err_psi_scaled: float
    err_phi_scaled: float
    err_p0_scaled: float
    err_p1_scaled: float


def asymptotic_report(model: MmbmModel, q: float, lambdas, a=None) -> list[AsymptoticRow]:
    """Quantify the finite-rate expansion remainders over a rate grid.

    For each lam: || psi_q - I - Theta U(q)/sqrt(lam) || * lam (the
    first-order return expansion), || Phi_lam - Phi || * sqrt(lam) for the
    sticky embedded chain, and the analogous kernel remainders
    || P0 - q A^-1/sqrt(lam) || * lam and || P1 - I + q A^-1/sqrt(lam) || * lam.
    Boundary coefficients default to ones.
    """
    if a is None:
        a = np.ones(model.m)
    from .model import validate_sticky  # local import avoids a cycle at module load

    spec = validate_sticky(a, model)
    variant = sticky_variant(spec)
    uq = solve_stable_quadratic(model.Q, model.mu, model.sigma, q).U
    phi_lim = phi_transition_limit(variant, model, q)
    a_inv = 1.0 / spec.a
    rows = []
    for lam in lambdas:
        _check_rates(model, lam, q)
        sq = np.sqrt(lam)
        ric = solve_riccati_psi(model, lam, q)
        err_psi = np.linalg.norm(
            ric.psi_q - np.eye(model.m) - model.sigma[:, None] * uq / sq, np.inf) * lam
        phi = phi_transition_finite(variant, model, lam, q)
        err_phi = np.linalg.norm(phi - phi_lim, np.inf) * sq
        p0, p1 = boundary_kernels(variant, model, lam, q)
        err_p0 = np.linalg.norm(p0 - np.diag(q * a_inv / sq), np.inf) * lam
        err_p1 = np.linalg.norm(p1 - np.eye(model.m) + np.diag(q * a_inv / sq), np.inf) * lam
        rows.append(AsymptoticRow(lam=float(lam), err_psi_scaled=float(err_psi),
                                  err_phi_scaled=float(err_phi),
                                  err_p0_scaled=float(err_p0),
                                  err_p1_scaled=float(err_p1)))
    return rows


def asymptotic_report_csv(rows: list[AsymptoticRow]) -> str:
    """Serialize report rows as CSV with shortest round-trip floats."""
    out = StringIO()
    out.write("lambda,err_psi_scaled,err_phi_scaled,err_p0_scaled,err_p1_scaled\n")
    for r in rows:
        cells = (r.lam, r.err_psi_scaled, r.err_phi_scaled, r.err_p0_scaled, r.err_p1_scaled)
        out.write(",".join(repr(float(c)) for c in cells) + "\n")
    return out.getvalue()
