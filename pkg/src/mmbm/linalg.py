"""Dense linear-algebra kernels.

Stationary vectors of generators and stochastic matrices, matrix
exponentials, the stable-subspace solver for the drift-volatility quadratic
matrix equation, and the first-return (Riccati) solver for the fast
oscillating approximation.  All routines are pure functions of their
arguments and operate on small dense matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg as sla
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    ConvergenceError,
    SubspaceSelectionError,
    ValidationError,
)
from ._kernels import riccati_fixed_point

if TYPE_CHECKING:
    from .model import MmbmModel

# Half-width of the eigenvalue band around the imaginary axis inside which
# subspace selection treats an eigenvalue as "zero".
STABLE_EPS = 1e-9

# Absolute tolerance for generator row sums / sign checks; inputs arrive
# from text files with decimal rounding.
GENERATOR_TOL = 1e-10

_RICCATI_TOL = 1e-15
_RICCATI_CAP = 10**6


@dataclass(frozen=True)
class QuadraticSolution:
    """Stable solution U of (1/2) Theta^2 X^2 + D X + (Q - q I) = 0."""

    q: float
    U: np.ndarray
    residual_norm: float


@dataclass(frozen=True)
class RiccatiSolution:
    """First-return probability matrices of the oscillating approximation.

    ``psi_q`` collects returns to the starting level that beat an
    independent exponential deadline with rate ``q``; ``psi`` drops the
    deadline (q = 0); ``psi_c`` is their difference, i.e. returns that
    happen after the deadline.
    """

    lam: float
    q: float
    psi_q: np.ndarray
    psi: np.ndarray
    psi_c: np.ndarray


def _as_square(mat, name: str) -> np.ndarray:
    a = np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError("square-matrix", f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("finite-entries", f"{name} contains non-finite entries")
    return a


def _as_diag_vector(arr, name: str) -> np.ndarray:
    """Accept a length-m vector or an m-by-m diagonal matrix."""
    a = np.asarray(arr, dtype=float)
    if a.ndim == 2:
        if a.shape[0] != a.shape[1]:
            raise ValidationError("square-matrix", f"{name} must be square or a vector")
        off = a - np.diag(np.diag(a))
        if np.any(off != 0.0):
            raise ValidationError("diagonal-matrix", f"{name} must be diagonal")
        a = np.diag(a).copy()
    if a.ndim != 1:
        raise ValidationError("vector", f"{name} must be one-dimensional")
    if not np.all(np.isfinite(a)):
        raise ValidationError("finite-entries", f"{name} contains non-finite entries")
    return a


def is_irreducible(mat: np.ndarray) -> bool:
    """Strong connectivity of the off-diagonal positive sparsity pattern."""
    a = np.asarray(mat, dtype=float)
    m = a.shape[0]
    if m == 1:
        return True
    pattern = (a > GENERATOR_TOL).astype(np.int8)
    np.fill_diagonal(pattern, 0)
    n_comp, _ = connected_components(csr_matrix(pattern), directed=True,
                                     connection="strong")
    return n_comp == 1


def stationary_row_vector(mat, kind: str = "generator") -> np.ndarray:
    """Stationary probability row vector of a generator or stochastic matrix.

    Parameters
    ----------
    mat : array_like
        Square matrix.  For ``kind="generator"`` rows must sum to zero with
        nonnegative off-diagonal entries; for ``kind="stochastic"`` rows
        must sum to one with entries in [0, 1].
    kind : {"generator", "stochastic"}

    Returns
    -------
    ndarray
        Row vector v with v @ mat = 0 (generator) or v @ mat = v
        (stochastic), v >= 0 and sum(v) = 1.
    """
    g = _as_square(mat, "matrix")
    if kind == "stochastic":
        if np.any(g < -GENERATOR_TOL) or np.any(g > 1.0 + GENERATOR_TOL):
            raise ValidationError("stochastic-entries",
                                  "entries must lie in [0, 1]")
        rs = g.sum(axis=1)
        if np.max(np.abs(rs - 1.0)) > GENERATOR_TOL:
            raise ValidationError("stochastic-row-sums",
                                  f"rows must sum to 1, worst deviation {np.max(np.abs(rs - 1.0)):.3e}")
        # one code path: a stochastic B has the same stationary vector as
        # the generator B - I
        g = g - np.eye(g.shape[0])
    elif kind == "generator":
        off = g - np.diag(np.diag(g))
        if np.min(off) < -GENERATOR_TOL:
            raise ValidationError("generator-off-diagonal",
                                  f"off-diagonal entries must be >= 0, found {np.min(off):.3e}")
        rs = g.sum(axis=1)
        if np.max(np.abs(rs)) > GENERATOR_TOL:
            raise ValidationError("generator-row-sums",
                                  f"rows must sum to 0, worst deviation {np.max(np.abs(rs)):.3e}")
    else:
        raise ValidationError("kind", f"unknown kind {kind!r}")
    if not is_irreducible(np.where(g > 0, g, 0.0) - np.diag(np.diag(g))):
        raise ValidationError("irreducible",
                              "matrix is reducible; stationary vector is not unique")
    m = g.shape[0]
    sys = np.empty((m, m))
    sys[:, : m - 1] = g[:, : m - 1]
    sys[:, m - 1] = 1.0
    rhs = np.zeros(m)
    rhs[m - 1] = 1.0
    v = np.linalg.solve(sys.T, rhs)
    if np.min(v) <= 0.0 and m > 1:
        raise ValidationError("irreducible",
                              "computed stationary vector has a nonpositive entry")
    return v


def matrix_exponential(mat, t: float) -> np.ndarray:
    """e^{mat * t} by scaling-and-squaring (degree-13 rational approximant)."""
    a = _as_square(mat, "matrix")
    if not np.isfinite(t) or t < 0.0:
        raise ValidationError("time-nonnegative", f"t must be finite and >= 0, got {t}")
    if t == 0.0:
        return np.eye(a.shape[0])
    return sla.expm(a * t)


def rate_threshold(mu, sigma) -> float:
    """Smallest oscillation rate above which all up rates are positive and
    all down rates negative: lam > (max |mu_i| / sigma_i)^2."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    return float(np.max(np.abs(mu) / sigma) ** 2)


def _quad_residual(U, Q, mu, sigma, q):
    return 0.5 * (sigma**2)[:, None] * (U @ U) + mu[:, None] * U + Q - q * np.eye(len(mu))


def solve_stable_quadratic(Q, drift, vol, q: float) -> QuadraticSolution:
    """Stable solvent of (1/2) Theta^2 X^2 + D X + (Q - q I) = 0.

    The solvent is recovered from the m-dimensional invariant subspace of
    the 2m-by-2m companion matrix whose eigenvalues have real part below
    ``STABLE_EPS``, computed by an ordered real Schur decomposition, then
    polished by one Newton step on the residual.

    Parameters
    ----------
    Q : array_like
        Phase generator (m-by-m).
    drift, vol : array_like
        Per-phase drifts and volatilities, as vectors or diagonal matrices.
        Volatilities must be strictly positive.
    q : float
        Nonnegative kill rate.  For q = 0 the solvent is a generator with a
        single zero eigenvalue; for q > 0 its spectrum lies strictly in the
        open left half-plane.

    Returns
    -------
    QuadraticSolution
    """
    Qm = _as_square(Q, "Q")
    mu = _as_diag_vector(drift, "drift")
    sigma = _as_diag_vector(vol, "vol")
    m = Qm.shape[0]
    if mu.shape != (m,) or sigma.shape != (m,):
        raise ValidationError("shape", "Q, drift and vol must share the phase dimension")
    if np.any(sigma <= 0.0):
        raise ValidationError("volatility-positive",
                              "all volatilities must be strictly positive")
    if not np.isfinite(q) or q < 0.0:
        raise ValidationError("rate-nonnegative", f"q must be finite and >= 0, got {q}")

    th2inv = 1.0 / sigma**2
    comp = np.zeros((2 * m, 2 * m))
    comp[:m, m:] = np.eye(m)
    comp[m:, :m] = -2.0 * th2inv[:, None] * (Qm - q * np.eye(m))
    comp[m:, m:] = -2.0 * (th2inv * mu)[None, :] * np.eye(m)

    _, z, sdim = sla.schur(comp, output="real", sort=lambda re, im: re < STABLE_EPS)
    if sdim != m:
        eigs = np.linalg.eigvals(comp)
        raise SubspaceSelectionError(
            f"selected {sdim} eigenvalues below Re = {STABLE_EPS}, expected {m}; "
            f"spectrum {np.sort_complex(eigs)}")
    v = z[:m, :m]
    w = z[m:, :m]
    try:
        u = np.linalg.solve(v.T, w.T).T
    except np.linalg.LinAlgError as exc:
        raise SubspaceSelectionError(
            "invariant-subspace basis is singular in its top block") from exc

    eigs = np.linalg.eigvals(u)
    near_axis = eigs[np.abs(eigs.real) <= STABLE_EPS]
    if q > 0.0 and near_axis.size:
        raise SubspaceSelectionError(
            f"eigenvalue {near_axis[0]} within {STABLE_EPS} of the imaginary "
            f"axis with q = {q} > 0", eigenvalue=complex(near_axis[0]))
    if q == 0.0 and near_axis.size > 1:
        raise SubspaceSelectionError(
            f"{near_axis.size} eigenvalues within {STABLE_EPS} of the axis at "
            f"q = 0; exactly one zero eigenvalue is admissible",
            eigenvalue=complex(near_axis[0]))

    res = _quad_residual(u, Qm, mu, sigma, q)
    r0 = np.linalg.norm(res, np.inf)
    # one Newton step: E X + (X + 2 Theta^-2 D) E = -2 Theta^-2 residual
    try:
        e = sla.solve_sylvester(u + (2.0 * th2inv * mu)[None, :] * np.eye(m), u,
                                -2.0 * th2inv[:, None] * res)
        u1 = u + e
        r1 = np.linalg.norm(_quad_residual(u1, Qm, mu, sigma, q), np.inf)
        if r1 < r0:
            u, r0 = u1, r1
    except (ValueError, np.linalg.LinAlgError):
        pass  # keep the unpolished subspace solution

    scale = max(1.0, np.abs(Qm).max(), q)
    if r0 > 1e-10 * scale:
        raise ConvergenceError(
            f"quadratic residual {r0:.3e} above tolerance after refinement",
            residual=r0)
    return QuadraticSolution(q=float(q), U=u, residual_norm=float(r0))


def _riccati_minimal(Qm, mu, sigma, lam, q):
    m = len(mu)
    sq = np.sqrt(lam)
    c_up = mu + sq * sigma
    c_dn = sq * sigma - mu
    mq = (lam + q) * np.eye(m) - Qm
    a_c = mq / c_up[:, None]
    b_c = mq / c_dn[:, None]
    rhs0 = np.diag(lam / c_up)
    lop = np.kron(np.eye(m), a_c) + np.kron(b_c.T, np.eye(m))
    linv = np.linalg.inv(lop)
    inv_cdn = 1.0 / c_dn
    x, iters, diff = riccati_fixed_point(linv, rhs0, inv_cdn, float(lam),
                                         _RICCATI_TOL, _RICCATI_CAP)
    resid = rhs0 - a_c @ x - x @ b_c + lam * (x * inv_cdn[None, :]) @ x
    rnorm = float(np.linalg.norm(resid, np.inf))
    # the attainable residual scales with the coefficient magnitude sqrt(lam)
    tol = max(1e-12, 200 * np.finfo(float).eps * lam * np.max(1.0 / c_up) * m)
    if rnorm > tol:
        raise ConvergenceError(
            f"Riccati iteration stopped at residual {rnorm:.3e} after {iters} "
            f"iterations (tolerance {tol:.3e})", residual=rnorm, iterations=iters)
    return x


def solve_riccati_psi(model: "MmbmModel", lam: float, q: float) -> RiccatiSolution:
    """Minimal nonnegative first-return matrices at oscillation rate ``lam``.

    ``psi_q`` solves

        lam C_up^-1 + C_up^-1 (Q - (lam+q) I) X + X C_dn^-1 (Q - (lam+q) I)
            + lam X C_dn^-1 X = 0

    with C_up = D + sqrt(lam) Theta and C_dn = |D - sqrt(lam) Theta|, as the
    limit of the monotone fixed-point iteration started at zero (which is
    what "minimal" means operationally here).  ``psi`` is the same object
    with q = 0 and satisfies psi @ 1 = 1 under a negative mean drift.
    """
    if not np.isfinite(q) or q < 0.0:
        raise ValidationError("rate-nonnegative", f"q must be finite and >= 0, got {q}")
    thresh = rate_threshold(model.mu, model.sigma)
    if not np.isfinite(lam) or lam <= thresh:
        raise ValidationError(
            "oscillation-rate",
            f"lam must exceed {thresh:.6g} so that all up rates are positive "
            f"and all down rates negative; got {lam}")
    psi = _riccati_minimal(model.Q, model.mu, model.sigma, lam, 0.0)
    if q == 0.0:
        psi_q = psi.copy()
    else:
        psi_q = _riccati_minimal(model.Q, model.mu, model.sigma, lam, q)
    return RiccatiSolution(lam=float(lam), q=float(q), psi_q=psi_q, psi=psi,
                           psi_c=psi - psi_q)
