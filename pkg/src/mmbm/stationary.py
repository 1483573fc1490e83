"""Closed-form stationary laws for the three boundary behaviors.

Every law is carried in the unified form

    G(x) = mass_zero + weight @ (I - e^{K x}) @ Theta^-1

with a strictly stable matrix K, so a single evaluator serves the
regulated, sticky, and resampling variants.  Laws are built from an
unnormalized (mass, weight) pair and divided by the total mass, which
sidesteps every closed-form normalization constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StabilityError, ValidationError
from .linalg import matrix_exponential, solve_stable_quadratic, stationary_row_vector
from .model import MmbmModel, ResampleSpec, StickySpec


@dataclass(frozen=True, eq=False)
class PhaseCdf:
    """A stationary law in the unified matrix-exponential form.

    ``evaluate`` returns P[level <= x, phase = i] rows; ``np.inf`` is the
    explicit sentinel for the marginal phase distribution.
    """

    mass_zero: np.ndarray
    weight: np.ndarray
    K: np.ndarray
    sigma: np.ndarray

    @property
    def m(self) -> int:
        return self.sigma.shape[0]

    def marginal(self) -> np.ndarray:
        """G(inf): the stationary phase distribution."""
        return self.mass_zero + self.weight / self.sigma

    def evaluate(self, xs) -> np.ndarray:
        """Per-phase CDF values, one row per grid level."""
        xs = np.asarray(xs, dtype=float)
        out = np.empty((xs.size, self.m))
        inv_sigma = 1.0 / self.sigma
        for r, x in enumerate(xs.ravel()):
            if math.isinf(x):
                out[r] = self.marginal()
            else:
                ekx = matrix_exponential(self.K, x)
                out[r] = self.mass_zero + self.weight @ (np.eye(self.m) - ekx) * inv_sigma
        return out


def _normalized_law(w0: np.ndarray, w1: np.ndarray, K: np.ndarray,
                    sigma: np.ndarray) -> PhaseCdf:
    total = float(w0.sum() + (w1 / sigma).sum())
    if not np.isfinite(total) or total <= 0.0:
        raise StabilityError(f"law has nonpositive total mass {total}")
    return PhaseCdf(mass_zero=w0 / total, weight=w1 / total, K=K.copy(), sigma=sigma.copy())


def matrix_K(model: MmbmModel, U: np.ndarray) -> np.ndarray:
    """K = Theta U Theta^-1 + 2 Theta^-2 D, the decay matrix of every law.

    ``U`` must be the q = 0 stable solvent.  Raises StabilityError if the
    spectrum of K touches the closed right half-plane, which signals a
    violated drift assumption or a solver failure.
    """
    sigma = model.sigma
    K = (sigma[:, None] * U) / sigma[None, :] + np.diag(2.0 * model.mu / sigma**2)
    eigs = np.linalg.eigvals(K)
    worst = float(np.max(eigs.real))
    if worst >= -1e-12:
        raise StabilityError(
            f"K must be strictly stable; eigenvalue with Re = {worst:.3e}")
    return K


def vector_nu(model: MmbmModel) -> np.ndarray:
    """Probability vector with nu Theta U = 0, shared by all variants."""
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    return stationary_row_vector(model.sigma[:, None] * U, kind="generator")


def vector_ell(model: MmbmModel) -> np.ndarray:
    """Long-run per-phase growth rates of the regulator.

    Solves ell U = 0 normalized by 2 ell Theta^-1 (-K)^-1 Theta^-1 1 = 1;
    the entries sum to the negated mean drift.
    """
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    base = stationary_row_vector(U, kind="generator")
    K = matrix_K(model, U)
    neg_k_inv = np.linalg.inv(-K)
    scale = 2.0 * (base / model.sigma) @ neg_k_inv @ (1.0 / model.sigma)
    return base / scale


def regulated_weight_forms(model: MmbmModel) -> dict[str, np.ndarray]:
    """The three equivalent weight vectors of the regulated law.

    All satisfy G*(x) = w @ (I - e^{Kx}) Theta^-1:  ``nu`` from the kernel
    direction, ``alpha`` directly from the phase marginal, ``ell`` from the
    regulator growth rates.  They agree up to floating-point error and are
    exposed for cross-checking.
    """
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    K = matrix_K(model, U)
    neg_k_inv = np.linalg.inv(-K)
    nu = stationary_row_vector(model.sigma[:, None] * U, kind="generator")
    w_nu = nu @ neg_k_inv
    w_nu = w_nu / ((w_nu / model.sigma).sum())
    ell = vector_ell(model)
    return {
        "nu": w_nu,
        "alpha": model.alpha * model.sigma,
        "ell": 2.0 * (ell / model.sigma) @ neg_k_inv,
    }


def stationary_standard(model: MmbmModel) -> PhaseCdf:
    """Stationary law of the regulated process: no mass at zero."""
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    K = matrix_K(model, U)
    nu = stationary_row_vector(model.sigma[:, None] * U, kind="generator")
    w1 = nu @ np.linalg.inv(-K)
    return _normalized_law(np.zeros(model.m), w1, K, model.sigma)


def stationary_sticky(model: MmbmModel, sticky: StickySpec) -> PhaseCdf:
    """Stationary law with the boundary slowed down phase by phase."""
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    K = matrix_K(model, U)
    nu = stationary_row_vector(model.sigma[:, None] * U, kind="generator")
    w0 = nu / sticky.a
    w1 = 2.0 * nu @ np.linalg.inv(-K)
    return _normalized_law(w0, w1, K, model.sigma)


def stationary_resampled(model: MmbmModel, resample: ResampleSpec) -> PhaseCdf:
    """Stationary law with sticky boundary and phase resampling at zero."""
    U = solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0).U
    K = matrix_K(model, U)
    w0 = resample.beta @ np.linalg.inv(-resample.Atilde)
    w1 = 2.0 * resample.beta @ np.linalg.inv(-K)
    return _normalized_law(w0, w1, K, model.sigma)


def evaluate_cdf(law: PhaseCdf, xs) -> np.ndarray:
    """Evaluate a law on a sorted nonnegative grid.

    ``np.inf`` entries are the sentinel for the marginal phase
    distribution; any other entry must be finite and nonnegative.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1:
        raise ValidationError("grid-shape", "xs must be one-dimensional")
    if np.any(np.isnan(xs)) or np.any(xs < 0.0):
        raise ValidationError("grid-domain", "grid levels must be >= 0")
    if np.any(np.diff(xs) < 0.0):
        raise ValidationError("grid-sorted", "grid levels must be sorted ascending")
    return law.evaluate(xs)


def scalar_sticky_reference(mu: float, sigma: float, omega: float, x: float) -> float:
    """Closed-form single-phase sticky law, the m = 1 oracle.

    Returns |mu|/(|mu|+omega) + omega/(|mu|+omega) (1 - e^{2 mu x / sigma^2})
    for mu < 0, sigma > 0, omega > 0, x >= 0.
    """
    if not (mu < 0.0 and np.isfinite(mu)):
        raise ValidationError("drift-negative", f"mu must be finite and < 0, got {mu}")
    if not (sigma > 0.0 and np.isfinite(sigma)):
        raise ValidationError("volatility-positive", f"sigma must be > 0, got {sigma}")
    if not (omega > 0.0 and np.isfinite(omega)):
        raise ValidationError("stickiness-positive", f"omega must be > 0, got {omega}")
    if math.isnan(x) or x < 0.0:
        raise ValidationError("level-nonnegative", f"x must be >= 0, got {x}")
    am = abs(mu)
    if math.isinf(x):
        return 1.0
    return am / (am + omega) + omega / (am + omega) * (1.0 - math.exp(2.0 * mu * x / sigma**2))
