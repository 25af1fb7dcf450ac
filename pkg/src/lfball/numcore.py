"""Dense complex linear algebra for small matrices.

Everything here works on ``numpy`` arrays of at most a few dozen rows. The
Hermitian eigenvalue routines have two independent back ends: LAPACK through
``numpy.linalg.eigh`` (the default, used on hot paths such as Gram matrices)
and a cyclic complex Jacobi sweep written out below, which the test-suite
uses to cross-check the first.
"""

import math

import numpy as np

from .errors import DimensionError, NotPositiveDefiniteError, NotPSDError

DEFAULT_TOL = 1e-9


def as_matrix(M):
    """Coerce to a finite 2-D complex array."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError("matrix has non-finite entries")
    return M


def as_vector(v):
    """Coerce to a finite 1-D complex array."""
    v = np.asarray(v, dtype=complex)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DimensionError("vector has non-finite entries")
    return v


def _square(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def hermitian_part(M):
    M = _square(M)
    return 0.5 * (M + M.conj().T)


def jacobi_eigh(M, tol=1e-15, max_sweeps=60):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first rotates the phase of the pivot ``a[p, q]`` to make it
    real, then applies the classical real symmetric rotation that annihilates
    it. Sweeps stop once the off-diagonal Frobenius mass drops below
    ``tol * ||M||_F``.

    Returns:
        (w, V) with ascending eigenvalues ``w`` and unitary ``V`` such that
        ``M @ V = V @ diag(w)``.
    """
    a = hermitian_part(M).copy()
    n = a.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        w = a.diagonal().real.copy()
        order = np.argsort(w)
        return w[order], V[:, order]
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g <= 1e-300:
                    continue
                phase = apq / g
                tau = (a[q, q].real - a[p, p].real) / (2.0 * g)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # W = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                W = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ W
                a[idx, :] = W.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                V[:, idx] = V[:, idx] @ W
    w = a.diagonal().real.copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def hermitian_eigh(M, method="lapack"):
    """Ascending eigenvalues and eigenvectors of the Hermitian part of ``M``."""
    H = hermitian_part(M)
    if method == "lapack":
        return np.linalg.eigh(H)
    if method == "jacobi":
        return jacobi_eigh(H)
    raise ValueError(f"unknown eigen method {method!r}")


def hermitian_min_eig(M, method="lapack"):
    """Smallest eigenvalue of ``(M + M*)/2``."""
    H = hermitian_part(M)
    if method == "lapack":
        return float(np.linalg.eigvalsh(H)[0])
    return float(hermitian_eigh(H, method)[0][0])


def psd_factor(M, tol=DEFAULT_TOL):
    """Return ``X`` with ``X* X = M`` for a positive semidefinite ``M``.

    Eigenvalues in ``[-tol, 0)`` are treated as rounding noise and clamped to
    zero; anything more negative raises :class:`NotPSDError`. The factor is
    ``X = diag(sqrt(w)) U*`` from ``M = U diag(w) U*``, which stays robust when
    ``M`` is exactly singular (pivoted Cholesky would not).
    """
    w, U = hermitian_eigh(M)
    if w.size and w[0] < -tol:
        raise NotPSDError(
            f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})",
            float(w[0]),
        )
    w = np.clip(w, 0.0, None)
    return np.sqrt(w)[:, None] * U.conj().T


def generalized_max_eig(Anum, Bden, method="lapack"):
    """Largest value of ``<Anum v, v> / <Bden v, v>`` over nonzero ``v``.

    Reduces to a standard Hermitian problem through the Cholesky factor
    ``Bden = L L*``.
    """
    A = hermitian_part(Anum)
    B = hermitian_part(Bden)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    bmin = hermitian_min_eig(B, method)
    if not bmin > 1e-12:
        raise NotPositiveDefiniteError(
            f"denominator is not positive definite (min eigenvalue {bmin:.3e})"
        )
    L = np.linalg.cholesky(B)
    Y = np.linalg.solve(L, A)
    R = np.linalg.solve(L, Y.conj().T).conj().T
    w, _ = hermitian_eigh(R, method)
    return float(w[-1])


def mat_poly_eval(coeffs, A):
    """Evaluate ``sum(coeffs[k] * A**k)`` by Horner's rule."""
    A = _square(A)
    n = A.shape[0]
    result = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for c in reversed(list(coeffs)):
        result = result @ A + c * eye
    return result


def mat_poly_apply(coeffs, A, v):
    """Evaluate ``p(A) v`` by Horner's rule without forming ``p(A)``."""
    A = _square(A)
    v = as_vector(v)
    if v.shape[0] != A.shape[0]:
        raise DimensionError("vector length does not match matrix")
    result = np.zeros_like(v)
    for c in reversed(list(coeffs)):
        result = A @ result + c * v
    return result


def spectral_norm(A):
    """Largest singular value, from the top eigenvalue of ``A* A``."""
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return math.sqrt(max(0.0, -hermitian_min_eig(-(A.conj().T @ A))))
