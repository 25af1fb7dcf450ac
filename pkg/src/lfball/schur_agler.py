"""Weighted Hardy-space kernels, Gram positivity and composition-operator bounds.

``H2(m, beta)`` is the space of holomorphic functions on the ball with kernel
``(1 - <z, w>)**(-beta)``; ``beta = 1`` is the Drury-Arveson space,
``beta = m`` the Hardy space and ``beta = m + 1`` the Bergman space.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import classify, orbit
from .errors import DomainError, IllConditionedError, PrecisionExhaustedError
from .lfm import compose, dbr_gram, evaluate_many
from .numcore import DEFAULT_TOL, as_vector, generalized_max_eig, hermitian_min_eig

MIN_SEPARATION = 1e-6
RIDGE = 1e-12


@dataclass(frozen=True)
class SpaceParams:
    m: int
    beta: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if not self.beta >= 1.0:
            raise DomainError(f"beta must be >= 1, got {self.beta}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def drury_arveson(cls, m):
        return cls(m, 1.0)

    @classmethod
    def hardy(cls, m):
        return cls(m, float(m))

    @classmethod
    def bergman(cls, m):
        return cls(m, float(m + 1))


def _power(base, beta):
    # Principal branch: Re(base) > 0 for interior points, so log is unambiguous.
    if beta == 1.0:
        return 1.0 / base
    return np.exp(-beta * np.log(base))


def kbeta(params, z, w):
    """``(1 - <z, w>)**(-beta)`` on the principal branch."""
    z = as_vector(z)
    w = as_vector(w)
    base = 1.0 - np.vdot(w, z)
    if base == 0:
        raise ZeroDivisionError("<z, w> = 1 is the pole of the kernel")
    return complex(_power(base, params.beta))


def kbeta_gram(params, Z, W=None):
    """Matrix ``[k_beta(Z[i], W[j])]``; ``W`` defaults to ``Z``."""
    Z = np.asarray(Z, dtype=complex).reshape(-1, params.m)
    W = Z if W is None else np.asarray(W, dtype=complex).reshape(-1, params.m)
    return _power(1.0 - Z @ W.conj().T, params.beta)


class BetaKernel:
    """The reproducing kernel of ``H2(m, beta)``."""

    def __init__(self, params):
        self.params = params

    def __call__(self, z, w):
        return kbeta(self.params, z, w)

    def gram(self, Z):
        return kbeta_gram(self.params, Z)


class DBRKernel:
    """``(1 - <phi(z), phi(w)>) / (1 - <z, w>)`` for a ball map ``phi``."""

    def __init__(self, phi):
        self.phi = phi

    def __call__(self, z, w):
        return self.gram(np.vstack([as_vector(z), as_vector(w)]))[0, 1]

    def gram(self, Z):
        return dbr_gram(self.phi, Z)


@dataclass(frozen=True, eq=False)
class KernelGramReport:
    points: np.ndarray
    gram: np.ndarray
    min_eig: float
    verdict: str
    tol: float

    @property
    def positive(self):
        return self.verdict == "positive"

    def to_dict(self):
        return {
            "npoints": int(len(self.points)),
            "min_eig": self.min_eig,
            "trace": float(np.trace(self.gram).real),
            "verdict": self.verdict,
            "tol": self.tol,
        }


def min_separation(Z):
    Z = np.asarray(Z, dtype=complex)
    if len(Z) < 2:
        return math.inf
    diff = Z[:, None, :] - Z[None, :, :]
    dist = np.sqrt(np.sum(np.abs(diff) ** 2, axis=2))
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def _check_separated(Z):
    sep = min_separation(Z)
    if sep < MIN_SEPARATION:
        raise IllConditionedError(f"sample points are {sep:.3e} apart (need >= {MIN_SEPARATION:g})")


def gram_positivity(kernel, points, tol=DEFAULT_TOL):
    """Finite-sample positivity test of a kernel.

    ``kernel`` is anything with a ``gram(Z)`` method, or a plain callable
    ``k(z, w)`` evaluated entry by entry.
    """
    Z = np.asarray(points, dtype=complex)
    if Z.ndim == 1:
        Z = Z.reshape(-1, 1)
    _check_separated(Z)
    if hasattr(kernel, "gram"):
        G = kernel.gram(Z)
    else:
        n = len(Z)
        G = np.array([[kernel(Z[i], Z[j]) for j in range(n)] for i in range(n)], dtype=complex)
    G = 0.5 * (G + G.conj().T)
    lam = hermitian_min_eig(G)
    return KernelGramReport(Z, G, lam, "positive" if lam >= -tol else "violated", tol)


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float
    beta: float
    phi0_norm: float

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "beta": self.beta, "phi0_norm": self.phi0_norm}


def norm_bounds(phi0, params):
    """Closed-form bounds on the composition-operator norm from ``|phi(0)|``.

    ``(1 / (1 - r**2))**(beta/2) <= |C_phi| <= ((1 + r) / (1 - r))**(beta/2)``.
    """
    r = float(np.linalg.norm(as_vector(phi0)))
    if not r < 1.0:
        raise DomainError(f"|phi(0)| = {r} is not inside the ball")
    half = params.beta / 2.0
    lower = (1.0 / (1.0 - r * r)) ** half
    upper = ((1.0 + r) / (1.0 - r)) ** half
    return NormBounds(lower, upper, params.beta, r)


def gram_norm_lower_bound(phi, params, points):
    """A certified lower bound for ``|C_phi|`` on ``H2(m, beta)`` from sample points.

    ``C_phi*`` sends ``k(., z)`` to ``k(., phi(z))``, so on the span of the
    kernels at ``points`` the squared norm ratio is the largest generalized
    eigenvalue of ``[k(phi(z_i), phi(z_j))]`` against ``[k(z_i, z_j)]``. A
    ridge of ``1e-12 * trace`` keeps the denominator positive definite.
    """
    Z = np.asarray(points, dtype=complex).reshape(-1, params.m)
    _check_separated(Z)
    W = evaluate_many(phi, Z)
    G = kbeta_gram(params, Z)
    Gphi = kbeta_gram(params, W)
    G = G + RIDGE * np.trace(G).real * np.eye(len(Z))
    try:
        lam = generalized_max_eig(Gphi, G)
    except Exception as exc:
        raise IllConditionedError(f"kernel Gram matrix is singular: {exc}") from exc
    return math.sqrt(max(lam, 0.0))


def spectral_radius_sequence(phi, params, N, method="auto", return_orbit=False):
    """``s_n = (1 - |phi_n(0)|)**(-beta / (2n))`` for ``n = 1..N``.

    ``method="ball"`` iterates in ball coordinates and raises
    :class:`PrecisionExhaustedError` once ``1 - |phi_n(0)|**2 < 1e-15``;
    ``"auto"`` switches to the half-space route for hyperbolic maps, whose
    defects stay resolved for thousands of steps.

    For maps that are not linear fractional this sequence is only numerical
    support for the conjectured radius formula, not a verification of it.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if method == "auto":
        method = "siegel" if classify(phi).kind == "hyperbolic" else "ball"
    orb = orbit(phi, None, N, method=method)
    s = s_from_log_defects(orb.log_defects, params.beta)
    if orb.n < N:
        raise PrecisionExhaustedError(
            f"orbit defect fell below resolution after n = {orb.n}",
            last_n=orb.n,
            partial=s,
        )
    return (s, orb) if return_orbit else s


def s_from_log_defects(log_defects, beta):
    logd = np.asarray(log_defects[1:], dtype=float)
    n = np.arange(1, len(logd) + 1)
    # 1 - |z| = (1 - |z|**2) / (1 + |z|)
    radius = np.sqrt(np.clip(-np.expm1(logd), 0.0, 1.0))
    log_gap = logd - np.log1p(radius)
    return np.exp(-beta * log_gap / (2.0 * n))


def predicted_spectral_radius(kind, alpha, beta):
    """1 for elliptic and parabolic maps, ``alpha**(-beta/2)`` for hyperbolic ones."""
    if kind == "hyperbolic":
        return alpha ** (-beta / 2.0)
    return 1.0


def composition_identity_residual(phi, psi, Z):
    """Largest gap in ``k_{phi o psi}(z, w) = k_phi(psi(z), psi(w)) k_psi(z, w)`` over rows of ``Z``.

    The right side is a Schur product of two positive kernels, which is why
    the class is closed under composition.
    """
    Z = np.asarray(Z, dtype=complex).reshape(-1, phi.m)
    lhs = dbr_gram(compose(phi, psi), Z)
    rhs = dbr_gram(phi, evaluate_many(psi, Z)) * dbr_gram(psi, Z)
    return float(np.abs(lhs - rhs).max())
