"""Points of the unit ball and the Siegel half-space, and the Cayley map between them.

The Siegel right half-space is ``{(w1, w') : Re w1 > |w'|**2}``. The Cayley
transform ``psi(z1, z') = ((1 + z1)/(1 - z1), z'/(1 - z1))`` carries the ball
onto it and sends ``e1`` to the point at infinity.

Point types are thin validated wrappers around complex arrays. Every function
here also accepts raw array-likes; the wrappers exist so that boundary targets
(``BoundaryPoint``) cannot be confused with interior points.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, PoleError
from .numcore import as_vector

SPHERE_GAP = 1e-12


def _frozen(v):
    v = as_vector(v).copy()
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class BallPoint:
    """A point ``z`` of the open unit ball, at least ``1e-12`` from the sphere."""

    z: np.ndarray

    def __post_init__(self):
        z = _frozen(self.z)
        if not np.linalg.norm(z) < 1.0 - SPHERE_GAP:
            raise DomainError(f"|z| = {np.linalg.norm(z):.17g} is not inside the ball")
        object.__setattr__(self, "z", z)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.z, dtype=dtype)

    @property
    def m(self):
        return self.z.shape[0]


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point ``zeta`` of the unit sphere."""

    zeta: np.ndarray

    def __post_init__(self):
        zeta = _frozen(self.zeta)
        if abs(np.linalg.norm(zeta) - 1.0) > SPHERE_GAP:
            raise DomainError(f"|zeta| = {np.linalg.norm(zeta):.17g} is not on the sphere")
        object.__setattr__(self, "zeta", zeta)

    @classmethod
    def normalized(cls, v):
        v = as_vector(v)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return cls(v / n)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.zeta, dtype=dtype)

    @property
    def m(self):
        return self.zeta.shape[0]


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """A point ``(w1, w')`` of the Siegel half-space (or its closure)."""

    w1: complex
    wprime: np.ndarray
    closure: bool = False

    def __post_init__(self):
        wprime = _frozen(np.asarray(self.wprime, dtype=complex).reshape(-1))
        w1 = complex(self.w1)
        gap = siegel_defect(w1, wprime)
        if not np.isfinite(gap) or gap < 0 or (gap == 0 and not self.closure):
            raise DomainError(f"Re w1 - |w'|^2 = {gap:.3e} is not inside the half-space")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "wprime", wprime)

    @property
    def m(self):
        return 1 + self.wprime.shape[0]

    def as_array(self):
        return np.concatenate([[self.w1], self.wprime])


def siegel_defect(w1, wprime):
    """``Re w1 - |w'|**2``, positive exactly on the open half-space."""
    wprime = np.asarray(wprime, dtype=complex)
    return float(np.real(w1) - np.vdot(wprime, wprime).real)


def ball_inner(z, w):
    """Hermitian inner product ``<z, w> = sum z_k conj(w_k)``."""
    z = as_vector(z)
    w = as_vector(w)
    if z.shape != w.shape:
        raise DimensionError(f"length mismatch {z.shape[0]} vs {w.shape[0]}")
    return complex(np.vdot(w, z))


def cayley(z):
    """Map a point of the closed ball (other than ``e1``) to the half-space.

    Interior points give an open half-space point; sphere points give a
    boundary point of the closure.
    """
    z = as_vector(z)
    if abs(1.0 - z[0]) == 0.0:
        raise PoleError("z1 = 1: the Cayley image is the point at infinity")
    denom = 1.0 - z[0]
    return SiegelPoint((1.0 + z[0]) / denom, z[1:] / denom, closure=True)


def inverse_cayley(w):
    """Map a half-space point back to the ball."""
    if isinstance(w, SiegelPoint):
        w1, wprime = w.w1, w.wprime
    else:
        w = as_vector(w)
        w1, wprime = w[0], w[1:]
    denom = w1 + 1.0
    if denom == 0:
        raise PoleError("w1 = -1 is the pole of the inverse Cayley transform")
    return np.concatenate([[(w1 - 1.0) / denom], 2.0 * np.asarray(wprime) / denom])


def cayley_defect_identity(w):
    """``(4/|w1 + 1|**2)(Re w1 - |w'|**2)``, which equals ``1 - |z|**2`` for ``z = psi^-1(w)``."""
    if isinstance(w, SiegelPoint):
        w1, wprime = w.w1, w.wprime
    else:
        w = as_vector(w)
        w1, wprime = w[0], w[1:]
    return 4.0 / abs(w1 + 1.0) ** 2 * siegel_defect(w1, wprime)


def julia_quotient(z, zeta):
    """``|1 - <z, zeta>|**2 / (1 - |z|**2)`` for interior ``z``."""
    z = as_vector(z)
    zeta = as_vector(zeta)
    defect = 1.0 - np.vdot(z, z).real
    if not defect > 0:
        raise DomainError("julia_quotient needs an interior point")
    return abs(1.0 - ball_inner(z, zeta)) ** 2 / defect


# Homogeneous (m+1)x(m+1) matrices for the Cayley transform and its inverse:
# (z1, z', 1) -> (1 + z1, z', 1 - z1)  and  (w1, w', 1) -> (w1 - 1, 2w', w1 + 1).


def cayley_matrix(m):
    P = np.zeros((m + 1, m + 1), dtype=complex)
    P[0, 0] = P[0, m] = 1.0
    P[m, 0], P[m, m] = -1.0, 1.0
    for k in range(1, m):
        P[k, k] = 1.0
    return P


def inverse_cayley_matrix(m):
    Q = np.zeros((m + 1, m + 1), dtype=complex)
    Q[0, 0], Q[0, m] = 1.0, -1.0
    Q[m, 0] = Q[m, m] = 1.0
    for k in range(1, m):
        Q[k, k] = 2.0
    return Q


def rotation_to_e1(zeta):
    """A unitary ``U`` with ``U @ zeta = e1`` (a Householder reflection up to phase)."""
    zeta = as_vector(zeta)
    zeta = zeta / np.linalg.norm(zeta)
    m = zeta.shape[0]
    phase = zeta[0] / abs(zeta[0]) if abs(zeta[0]) > 0 else 1.0
    if m == 1 or np.linalg.norm(zeta[1:]) == 0.0:
        return np.eye(m, dtype=complex) / phase
    # H maps zeta to phase * e1; dividing by the phase finishes the job.
    v = zeta.copy()
    v[0] += phase
    H = np.eye(m, dtype=complex) - 2.0 * np.outer(v, v.conj()) / np.vdot(v, v).real
    U = -H / phase
    return U


def sample_ball(n, m, seed=42, radius=0.9):
    """``n`` points drawn uniformly from the ball of the given radius in C^m.

    Gaussian direction, radius scaled by ``u**(1/(2m))`` (uniform in real
    dimension ``2m``). ``seed`` may be an int or a ``numpy`` Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / (2 * m))
    return g * r
