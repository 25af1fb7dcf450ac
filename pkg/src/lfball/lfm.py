"""Linear fractional self-maps of the unit ball.

A map ``phi(z) = (Az + B) / (<z, C> + D)`` is stored projectively as the
``(m+1) x (m+1)`` matrix ``T = [[A, B], [C*, D]]``. It sends the ball into
itself exactly when some positive multiple ``t`` makes ``J - t T* J T``
positive semidefinite, with ``J = diag(I_m, -1)``; that ``t`` is kept on the
map once found and is used for the kernel factorization.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ball import sample_ball
from .errors import DimensionError, NotSelfMapError, PoleError, ValidationError
from .numcore import as_matrix, as_vector, hermitian_eigh, hermitian_min_eig, psd_factor

POLE_TOL = 1e-14
SCALING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearFractionalMap:
    T: np.ndarray
    scale: float = None
    label: str = None

    def __post_init__(self):
        T = as_matrix(self.T).copy()
        if T.shape[0] != T.shape[1] or T.shape[0] < 2:
            raise DimensionError(f"T must be (m+1)x(m+1) with m >= 1, got {T.shape}")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)

    @classmethod
    def from_blocks(cls, A, B, C, D, label=None):
        """Build from ``A`` (m x m), ``B`` and ``C`` (length m) and scalar ``D``."""
        A = as_matrix(A)
        B = as_vector(B)
        C = as_vector(C)
        m = A.shape[0]
        if A.shape != (m, m) or B.shape != (m,) or C.shape != (m,):
            raise DimensionError("inconsistent block sizes")
        T = np.zeros((m + 1, m + 1), dtype=complex)
        T[:m, :m] = A
        T[:m, m] = B
        T[m, :m] = C.conj()
        T[m, m] = D
        return cls(T, label=label)

    @classmethod
    def identity(cls, m):
        return cls(np.eye(m + 1, dtype=complex), label="identity")

    @property
    def m(self):
        return self.T.shape[0] - 1

    @property
    def A(self):
        return self.T[: self.m, : self.m]

    @property
    def B(self):
        return self.T[: self.m, self.m]

    @property
    def C(self):
        return self.T[self.m, : self.m].conj()

    @property
    def D(self):
        return self.T[self.m, self.m]

    @property
    def validated(self):
        return self.scale is not None

    def scaled_matrix(self):
        """``sqrt(t) T`` for the stored contractive scale ``t``."""
        if self.scale is None:
            raise ValidationError("map has no contractive scaling; call validate() first")
        return math.sqrt(self.scale) * self.T

    def __call__(self, z):
        return evaluate(self, z)


def j_matrix(m):
    """``diag(I_m, -1)``."""
    J = np.eye(m + 1)
    J[m, m] = -1.0
    return J


def evaluate(phi, z):
    """``(Az + B) / (<z, C> + D)`` at a single interior point."""
    z = as_vector(z)
    if z.shape[0] != phi.m:
        raise DimensionError(f"point has length {z.shape[0]}, map has m = {phi.m}")
    T = phi.T
    m = phi.m
    num = T[:m, :m] @ z + T[:m, m]
    den = T[m, :m] @ z + T[m, m]
    if abs(den) < POLE_TOL * max(1.0, np.abs(T).max()):
        raise PoleError(f"denominator {abs(den):.3e} vanishes at z; map data is invalid")
    w = num / den
    if not np.vdot(w, w).real < 1.0:
        raise NotSelfMapError(f"image has norm {np.linalg.norm(w):.17g} >= 1")
    return w


def evaluate_many(phi, Z, check=True):
    """Vectorized :func:`evaluate` over the rows of ``Z`` (shape ``(n, m)``)."""
    Z = np.asarray(Z, dtype=complex).reshape(-1, phi.m)
    T = phi.T
    m = phi.m
    num = Z @ T[:m, :m].T + T[:m, m]
    den = Z @ T[m, :m] + T[m, m]
    if np.any(np.abs(den) < POLE_TOL * max(1.0, np.abs(T).max())):
        raise PoleError("denominator vanishes at a sample point; map data is invalid")
    W = num / den[:, None]
    if check and np.any(np.sum(np.abs(W) ** 2, axis=1) >= 1.0):
        raise NotSelfMapError("a sample point was mapped outside the open ball")
    return W


def compose(phi, psi):
    """The map ``phi o psi``, with matrix ``T_phi @ T_psi``.

    When both factors carry contractive scales their product is again a valid
    scale for the composition, so it is kept.
    """
    if phi.m != psi.m:
        raise DimensionError(f"cannot compose maps on B^{phi.m} and B^{psi.m}")
    scale = None
    if phi.scale is not None and psi.scale is not None:
        scale = phi.scale * psi.scale
    return LinearFractionalMap(phi.T @ psi.T, scale=scale)


def j_defect(phi, t):
    """``J - t T* J T``."""
    if not t > 0:
        raise ValueError("scaling must be positive")
    J = j_matrix(phi.m)
    T = phi.T
    return J - t * (T.conj().T @ (J @ T))


def _min_eig_at(J, K, u):
    return hermitian_min_eig(J - math.exp(u) * K)


def find_contractive_scaling(phi, lo=1e-8, hi=1e8, grid=200, width=1e-12):
    """Positive ``t`` making ``J - t T* J T`` positive semidefinite, or None.

    The smallest eigenvalue of ``J - t K`` is concave in ``t``, so it is
    unimodal along a log-spaced grid. The grid maximum is refined by golden
    section search in ``log t`` down to ``width``, and the maximizer is
    returned if its smallest eigenvalue clears ``-1e-9``.
    """
    J = j_matrix(phi.m)
    T = phi.T
    K = T.conj().T @ (J @ T)
    us = np.linspace(math.log(lo), math.log(hi), grid)
    vals = np.array([_min_eig_at(J, K, u) for u in us])
    i = int(np.argmax(vals))
    a = us[max(i - 1, 0)]
    b = us[min(i + 1, grid - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _min_eig_at(J, K, c)
    fd = _min_eig_at(J, K, d)
    while b - a > width:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _min_eig_at(J, K, c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _min_eig_at(J, K, d)
    candidates = [(vals[i], us[i]), (fc, c), (fd, d)]
    best, u = max(candidates)
    if best < -SCALING_TOL:
        return None
    return math.exp(u)


@dataclass(frozen=True)
class SelfMapReport:
    valid: bool
    scale: float
    min_eig: float
    spot_check_ok: bool
    max_image_norm: float
    reasons: list = field(default_factory=list)

    def to_dict(self):
        return {
            "valid": self.valid,
            "scale": self.scale,
            "min_eig": self.min_eig,
            "spot_check_ok": self.spot_check_ok,
            "max_image_norm": self.max_image_norm,
            "reasons": list(self.reasons),
        }


def check_self_map(phi, npoints=500, seed=0):
    """Scaling search plus an evaluation spot check on seeded interior points."""
    reasons = []
    t = find_contractive_scaling(phi)
    min_eig = float("nan")
    if t is None:
        reasons.append("no t in [1e-8, 1e8] makes J - t T*JT positive semidefinite")
    else:
        min_eig = hermitian_min_eig(j_defect(phi, t))
    Z = sample_ball(npoints, phi.m, seed=seed)
    try:
        W = evaluate_many(phi, Z, check=False)
        norms = np.linalg.norm(W, axis=1)
        max_norm = float(norms.max())
        spot_ok = bool(max_norm < 1.0)
    except PoleError:
        max_norm = float("inf")
        spot_ok = False
    if not spot_ok:
        reasons.append("a sample point was mapped outside the open ball")
    return SelfMapReport(
        valid=t is not None and spot_ok,
        scale=t,
        min_eig=min_eig,
        spot_check_ok=spot_ok,
        max_image_norm=max_norm,
        reasons=reasons,
    )


def validate(phi, npoints=500, seed=0):
    """Return ``phi`` with its contractive scale attached, or raise NotSelfMapError."""
    if phi.scale is not None:
        return phi
    report = check_self_map(phi, npoints=npoints, seed=seed)
    if not report.valid:
        raise NotSelfMapError("; ".join(report.reasons))
    return replace(phi, scale=report.scale)


@dataclass(frozen=True)
class FixedPoint:
    point: np.ndarray
    location: str  # "interior", "boundary" or "exterior"
    eigenvalue: complex


@dataclass(frozen=True)
class FixedPointSet:
    points: list
    degenerate: bool
    eigenvalues: np.ndarray

    def where(self, location):
        return [p for p in self.points if p.location == location]


def _locate(x, lam, tol):
    v, s = x[:-1], x[-1]
    if abs(s) <= 1e-10 * np.linalg.norm(x):
        return None
    p = v / s
    r = np.linalg.norm(p)
    if r < 1.0 - tol:
        return FixedPoint(p, "interior", lam)
    if r <= 1.0 + tol:
        return FixedPoint(p / r, "boundary", lam)
    return FixedPoint(p, "exterior", lam)


def fixed_points(phi, tol=1e-9, cluster_tol=1e-6):
    """Fixed points of ``phi`` in C^m, read off the eigenvectors of ``T``.

    Eigenvalues closer than ``cluster_tol`` (relative) are merged and flagged
    as degenerate. Each cluster is represented by the mean of its members,
    which stays accurate to rounding even for a nontrivial Jordan block, and
    its eigenspace is taken as the numerical null space of ``T - lambda I``.
    A multi-dimensional eigenspace is a projective subspace of fixed points;
    its intersection with the ball is detected through the indefinite form
    restricted to it. Eigenvectors whose last coordinate vanishes are points at
    infinity and are omitted.
    """
    T = phi.T
    n = T.shape[0]
    J = j_matrix(phi.m)
    lams = np.linalg.eigvals(T)
    scale = max(1.0, np.abs(lams).max())
    clusters = []
    for lam in lams:
        for cl in clusters:
            if abs(cl[0] - lam) < cluster_tol * scale:
                cl.append(lam)
                break
        else:
            clusters.append([lam])
    degenerate = any(len(cl) > 1 for cl in clusters)
    norm_T = np.linalg.norm(T, 2)
    points = []
    for cl in clusters:
        lam = complex(np.mean(cl))
        # Eigenvectors of a Jordan block are only accurate to about sqrt(eps).
        loc_tol = tol if len(cl) == 1 else max(tol, 1e-6)
        _, sv, Vh = np.linalg.svd(T - lam * np.eye(n))
        k = max(1, int(np.sum(sv <= 1e-7 * norm_T)))
        basis = Vh[n - k :].conj().T
        if k == 1:
            fp = _locate(basis[:, 0], lam, loc_tol)
            if fp is not None:
                points.append(fp)
            continue
        # Points of the eigenspace: x = basis @ u, with [x, x] = u* G u.
        G = basis.conj().T @ J @ basis
        w, U = hermitian_eigh(G)
        for j in range(k):
            fp = _locate(basis @ U[:, j], lam, loc_tol)
            if fp is not None:
                points.append(fp)
    return FixedPointSet(points, degenerate, lams)


def dbr_kernel(phi, z, w):
    """``(1 - <phi(z), phi(w)>) / (1 - <z, w>)``."""
    pz = evaluate(phi, z)
    pw = evaluate(phi, w)
    z = as_vector(z)
    w = as_vector(w)
    return complex((1.0 - np.vdot(pw, pz)) / (1.0 - np.vdot(w, z)))


def dbr_gram(phi, Z):
    """Gram matrix ``[k_phi(z_i, z_j)]`` over the rows of ``Z``."""
    Z = np.asarray(Z, dtype=complex).reshape(-1, phi.m)
    W = evaluate_many(phi, Z)
    return (1.0 - W @ W.conj().T) / (1.0 - Z @ Z.conj().T)


@dataclass(frozen=True, eq=False)
class KernelFactorization:
    """``X`` with ``X* X = J - T* J T`` for the contractively scaled ``T``.

    With ``L(z) = X (z; 1)`` the kernel factors as
    ``k_phi(z, w) = (1 + <L(z), L(w)> / (1 - <z, w>)) / (s(z) conj(s(w)))``
    where ``s(z) = <z, C> + D``.
    """

    X: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: complex

    @property
    def m(self):
        return self.A.shape[0]

    def L(self, Z):
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.m)
        Zh = np.hstack([Z, np.ones((Z.shape[0], 1))])
        return Zh @ self.X.T

    def denominators(self, Z):
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.m)
        return Z @ self.C.conj() + self.D

    def factored_gram(self, Z, W=None):
        """The factored kernel evaluated on all pairs of rows of ``Z`` and ``W``."""
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.m)
        W = Z if W is None else np.asarray(W, dtype=complex).reshape(-1, self.m)
        LL = self.L(Z) @ self.L(W).conj().T
        inner = 1.0 - Z @ W.conj().T
        sz = self.denominators(Z)
        sw = self.denominators(W)
        return (1.0 + LL / inner) / (sz[:, None] * sw.conj()[None, :])

    def factored(self, z, w):
        return complex(self.factored_gram(z, w)[0, 0])

    def numerator_residual(self, Z, W=None):
        """Largest gap in ``1 - <z,w> + <L(z),L(w)> = s(z) conj(s(w)) - <Az+B, Aw+B>``."""
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.m)
        W = Z if W is None else np.asarray(W, dtype=complex).reshape(-1, self.m)
        lhs = 1.0 - Z @ W.conj().T + self.L(Z) @ self.L(W).conj().T
        az = Z @ self.A.T + self.B
        aw = W @ self.A.T + self.B
        rhs = np.outer(self.denominators(Z), self.denominators(W).conj()) - az @ aw.conj().T
        return float(np.abs(lhs - rhs).max())


def kernel_factorization(phi, tol=1e-9):
    """Factor ``J - T* J T`` for the contractive representative of ``phi``."""
    T = phi.scaled_matrix()
    m = phi.m
    J = j_matrix(m)
    X = psd_factor(J - T.conj().T @ (J @ T), tol=tol)
    return KernelFactorization(
        X=X, A=T[:m, :m].copy(), B=T[:m, m].copy(), C=T[m, :m].conj().copy(), D=complex(T[m, m])
    )
