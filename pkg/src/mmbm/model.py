"""Parameter containers and validation for the free process and the
boundary specifications."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import (
    GENERATOR_TOL,
    is_irreducible,
    rate_threshold,
    stationary_row_vector,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MmbmModel:
    """A validated free Markov-modulated Brownian motion.

    Attributes
    ----------
    Q : ndarray
        Irreducible phase generator, m-by-m.
    mu : ndarray
        Per-phase drifts.
    sigma : ndarray
        Per-phase volatilities, strictly positive.
    alpha : ndarray
        Stationary probability vector of Q.
    drift : float
        Stationary mean drift alpha @ mu, strictly negative.
    """

    Q: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    drift: float

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    def theta(self) -> np.ndarray:
        return np.diag(self.sigma)

    def rate_threshold(self) -> float:
        """Oscillation rates must exceed this for the flip-flop to be valid."""
        return rate_threshold(self.mu, self.sigma)


@dataclass(frozen=True, eq=False)
class StickySpec:
    """Per-phase boundary exit-rate coefficients a_i > 0.

    The stickiness parameters are omega_i = a_i * sigma_i; larger a_i means
    the process leaves level zero faster and carries less mass there.
    """

    a: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True, eq=False)
class ResampleSpec:
    """Boundary specification with phase resampling at level zero.

    ``B = (-Atilde)^-1 @ A`` is the stochastic matrix that redistributes
    the phase over an excursion from the boundary; ``beta`` is its
    stationary probability vector.
    """

    A: np.ndarray
    Atilde: np.ndarray
    Qtilde: np.ndarray
    B: np.ndarray
    beta: np.ndarray


def validate_model(Q, mu, sigma) -> MmbmModel:
    """Validate and assemble a free-process model.

    Raises
    ------
    ValidationError
        If shapes disagree, Q is not an irreducible generator, any
        volatility is nonpositive, or the stationary mean drift is
        nonnegative (the regulated process would have no stationary law).
    """
    Q = np.asarray(Q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValidationError("square-matrix", f"Q must be square, got shape {Q.shape}")
    m = Q.shape[0]
    if mu.shape != (m,) or sigma.shape != (m,):
        raise ValidationError("shape",
                              f"mu and sigma must have length {m}, got {mu.shape} and {sigma.shape}")
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        raise ValidationError("finite-entries", "model parameters must be finite")
    if np.any(sigma <= 0.0):
        bad = int(np.argmin(sigma))
        raise ValidationError("volatility-positive",
                              f"all volatilities must be strictly positive, got sigma[{bad}] = {sigma[bad]}")
    # stationary_row_vector re-checks generator sign/row sums and irreducibility
    alpha = stationary_row_vector(Q, kind="generator")
    drift = float(alpha @ mu)
    if drift >= 0.0:
        raise ValidationError("mean-drift-negative",
                              f"stationary mean drift must be strictly negative, got {drift:.6g}")
    return MmbmModel(Q=_frozen(Q), mu=_frozen(mu), sigma=_frozen(sigma),
                     alpha=_frozen(alpha), drift=drift)


def validate_sticky(a, model: MmbmModel) -> StickySpec:
    """Validate boundary coefficients against a model."""
    a = np.asarray(a, dtype=float)
    if a.shape != (model.m,):
        raise ValidationError("shape", f"a must have length {model.m}, got {a.shape}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise ValidationError("sticky-coefficients-positive",
                              "all boundary exit coefficients must be strictly positive")
    return StickySpec(a=_frozen(a), omega=_frozen(a * model.sigma))


def validate_resample(model: MmbmModel, A, Atilde, Qtilde=None) -> ResampleSpec:
    """Validate a resampling boundary specification.

    ``Qtilde`` defaults to A @ Q; it only perturbs the boundary dynamics at
    a vanishing rate and drops out of the limiting law.
    """
    m = model.m
    A = np.asarray(A, dtype=float)
    At = np.asarray(Atilde, dtype=float)
    if A.shape != (m, m) or At.shape != (m, m):
        raise ValidationError("shape", f"A and Atilde must be {m}-by-{m}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(At))):
        raise ValidationError("finite-entries", "A and Atilde must be finite")
    if np.min(A) < -GENERATOR_TOL:
        raise ValidationError("resample-A-nonnegative",
                              f"A must be entrywise nonnegative, found {np.min(A):.3e}")
    off = At - np.diag(np.diag(At))
    if np.min(off) < -GENERATOR_TOL:
        raise ValidationError("resample-Atilde-off-diagonal",
                              "off-diagonal entries of Atilde must be nonnegative")
    if np.max(np.diag(At)) >= 0.0:
        raise ValidationError("resample-Atilde-diagonal",
                              "diagonal entries of Atilde must be strictly negative")
    gen = A + At
    if np.max(np.abs(gen.sum(axis=1))) > GENERATOR_TOL:
        raise ValidationError("resample-generator-row-sums",
                              "rows of A + Atilde must sum to 0")
    if not is_irreducible(gen):
        raise ValidationError("resample-generator-irreducible",
                              "A + Atilde must be an irreducible generator")
    if Qtilde is None:
        Qt = A @ model.Q
    else:
        Qt = np.asarray(Qtilde, dtype=float)
        if Qt.shape != (m, m):
            raise ValidationError("shape", f"Qtilde must be {m}-by-{m}")
        if not np.all(np.isfinite(Qt)):
            raise ValidationError("finite-entries", "Qtilde must be finite")
        if np.max(np.abs(Qt.sum(axis=1))) > GENERATOR_TOL:
            raise ValidationError("resample-Qtilde-row-sums",
                                  "rows of Qtilde must sum to 0")
    B = np.linalg.solve(-At, A)
    beta = stationary_row_vector(B, kind="stochastic")
    return ResampleSpec(A=_frozen(A), Atilde=_frozen(At), Qtilde=_frozen(Qt),
                        B=_frozen(B), beta=_frozen(beta))


def mean_drift(model: MmbmModel) -> float:
    """Stationary mean drift alpha @ mu of a validated model."""
    return model.drift
