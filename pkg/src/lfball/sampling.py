"""Seeded random linear fractional self-maps for property tests and experiments."""

import math

import numpy as np

from .bcd import BCDMap, _quadratic_sup, bcd_to_ball
from .lfm import LinearFractionalMap, compose, validate


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _cnormal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(m, seed=None):
    rng = _rng(seed)
    Q, R = np.linalg.qr(_cnormal(rng, m, m))
    return Q * (R.diagonal() / np.abs(R.diagonal()))


def conjugate_by_unitary(phi, V):
    """The map ``V o phi o V*``."""
    m = phi.m
    R = np.eye(m + 1, dtype=complex)
    R[:m, :m] = V
    return LinearFractionalMap(R @ phi.T @ R.conj().T, scale=phi.scale, label=phi.label)


def automorphism(a):
    """The involutive ball automorphism exchanging ``0`` and ``a``."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    m = a.shape[0]
    r2 = float(np.vdot(a, a).real)
    if not r2 < 1.0:
        raise ValueError("a must lie in the open ball")
    P = np.outer(a, a.conj()) / r2 if r2 > 0 else np.zeros((m, m))
    s = math.sqrt(1.0 - r2)
    T = np.zeros((m + 1, m + 1), dtype=complex)
    T[:m, :m] = -P - s * (np.eye(m) - P)
    T[:m, m] = a
    T[m, :m] = -a.conj()
    T[m, m] = 1.0
    return LinearFractionalMap(T, label="automorphism")


def _random_point(rng, m, rmax):
    v = _cnormal(rng, m)
    return v / np.linalg.norm(v) * rmax * rng.uniform() ** (1.0 / (2 * m))


def random_lfm(m, seed=None, rmax=0.8):
    """A random validated self-map of the ball in ``C^m``.

    Either ``automorphism(a) o R o automorphism(b)`` with a linear contraction
    ``R``, or an affine contraction ``z -> Az + B`` with ``|A| + |B| <= 0.95``.
    """
    rng = _rng(seed)
    if rng.uniform() < 0.75:
        R = _cnormal(rng, m, m)
        R *= rng.uniform(0.3, 1.0) / np.linalg.norm(R, 2)
        lin = LinearFractionalMap.from_blocks(R, np.zeros(m), np.zeros(m), 1.0)
        phi = compose(automorphism(_random_point(rng, m, rmax)), compose(lin, automorphism(_random_point(rng, m, rmax))))
    else:
        A = _cnormal(rng, m, m)
        B = _cnormal(rng, m)
        na = rng.uniform(0.1, 0.8)
        A *= na / np.linalg.norm(A, 2)
        B *= rng.uniform(0.0, 0.95 - na) / np.linalg.norm(B)
        phi = LinearFractionalMap.from_blocks(A, B, np.zeros(m), 1.0)
    T = phi.T / np.abs(phi.T).max()
    return validate(LinearFractionalMap(T, label="random"))


def random_bcd(m, seed=None, alpha=None, parabolic=False):
    """A random valid half-space normal form with ``m >= 1``.

    ``|A| = rho sqrt(alpha)`` with ``rho < 1`` and ``Re c`` set a random margin
    above the least value the self-map inequality allows.
    """
    rng = _rng(seed)
    if alpha is None:
        alpha = 1.0 if parabolic else float(rng.uniform(0.15, 0.85))
    k = m - 1
    A = _cnormal(rng, k, k)
    if k:
        A *= rng.uniform(0.2, 0.95) * math.sqrt(alpha) / np.linalg.norm(A, 2)
    b = _cnormal(rng, k) * rng.uniform(0.0, 1.0)
    d = _cnormal(rng, k) * rng.uniform(0.0, 1.0)
    sup = _quadratic_sup(A, alpha, b, d)
    c = sup / alpha + rng.uniform(0.05, 1.0) + 1j * rng.normal()
    return BCDMap(alpha=alpha, c=c, b=b, d=d, A=A, label="random bcd")


def random_non_elliptic(m, seed=None, parabolic=False):
    """A random hyperbolic (or parabolic) ball map and its Denjoy-Wolff point.

    Built from :func:`random_bcd`, conjugated to the ball and rotated so the
    Denjoy-Wolff point ``V e1`` is generic. Returns ``(phi, zeta, bmap)``.
    """
    rng = _rng(seed)
    bmap = random_bcd(m, rng, parabolic=parabolic)
    V = random_unitary(m, rng)
    phi = conjugate_by_unitary(bcd_to_ball(bmap), V)
    return phi, V[:, 0].copy(), bmap
