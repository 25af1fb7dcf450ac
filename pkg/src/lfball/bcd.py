"""Half-space normal form of non-elliptic linear fractional maps.

Conjugated by the Cayley transform, a non-elliptic linear fractional map with
Denjoy-Wolff point ``e1`` becomes an affine self-map of the Siegel half-space

    w1 -> (w1 + c + <w', b>) / alpha,      w' -> (A w' + d) / alpha,

with ``0 < alpha <= 1`` its dilatation coefficient. Iterating from ``(1, 0)``
has the closed form

    u_n = alpha**-n (1 + beta_{n-1} c + <p_{n-2}(A) d, b>),
    v_n = alpha**-n q_{n-1}(A) d,

where ``beta_n = sum_{k<=n} alpha**k``, ``p_n(z) = sum beta_{n-k} z**k`` and
``q_n(z) = sum alpha**(n-k) z**k``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .ball import (
    SiegelPoint,
    cayley_matrix,
    inverse_cayley_matrix,
    rotation_to_e1,
    siegel_defect,
)
from .errors import DimensionError, DomainError, ValidationError
from .lfm import LinearFractionalMap, find_contractive_scaling
from .numcore import as_vector, hermitian_eigh, mat_poly_apply, mat_poly_eval, spectral_norm

OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True, eq=False)
class BCDMap:
    alpha: float
    c: complex
    b: np.ndarray
    d: np.ndarray
    A: np.ndarray
    label: str = None

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        d = np.asarray(self.d, dtype=complex).reshape(-1)
        k = b.shape[0]
        A = np.asarray(self.A, dtype=complex).reshape(k, k) if k else np.zeros((0, 0), complex)
        if d.shape != (k,):
            raise DimensionError("b and d must have the same length")
        for arr in (b, d, A):
            arr.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "A", A)

    @property
    def m(self):
        return 1 + self.b.shape[0]

    @property
    def hyperbolic(self):
        return self.alpha < 1.0


def eval_bcd(bmap, w):
    """Image of a half-space point."""
    if isinstance(w, SiegelPoint):
        w1, wp = w.w1, w.wprime
    else:
        w = as_vector(w)
        w1, wp = w[0], w[1:]
    if wp.shape[0] != bmap.m - 1:
        raise DimensionError("point dimension does not match the map")
    a = bmap.alpha
    n1 = (w1 + bmap.c + np.vdot(bmap.b, wp)) / a
    np_ = (bmap.A @ wp + bmap.d) / a
    if siegel_defect(w1, wp) > 0 and not siegel_defect(n1, np_) > 0:
        raise ValidationError("an interior point left the open half-space; the map is not valid")
    return SiegelPoint(n1, np_, closure=True)


def affine_matrix(bmap):
    """Homogeneous ``(m+1) x (m+1)`` matrix of the affine map on ``(w1, w', 1)``."""
    m = bmap.m
    a = bmap.alpha
    H = np.zeros((m + 1, m + 1), dtype=complex)
    H[0, 0] = 1.0 / a
    H[0, 1:m] = bmap.b.conj() / a
    H[0, m] = bmap.c / a
    H[1:m, 1:m] = bmap.A / a
    H[1:m, m] = bmap.d / a
    H[m, m] = 1.0
    return H


def _quadratic_sup(A, alpha, b, d):
    """Supremum over ``w'`` of ``|Aw' + d|**2 - alpha |w'|**2 - alpha Re <w', b>``.

    Writing ``K = A*A - alpha I`` (negative semidefinite when ``|A| <= sqrt(alpha)``)
    and ``f = A* d - (alpha/2) b``, the expression is ``w'* K w' + 2 Re <w', f> + |d|**2``
    whose supremum is ``|d|**2 + f* (-K)^+ f``, or infinity if ``f`` has a component in
    the null space of ``K``. The pseudo-inverse handles the singular case ``|A| = sqrt(alpha)``
    directly.
    """
    k = b.shape[0]
    dd = float(np.vdot(d, d).real)
    if k == 0:
        return dd
    K = A.conj().T @ A - alpha * np.eye(k)
    f = A.conj().T @ d - 0.5 * alpha * b
    sig, V = hermitian_eigh(-K)
    ft = V.conj().T @ f
    total = dd
    fscale = max(1.0, float(np.linalg.norm(f)))
    for s, comp in zip(sig, ft):
        if s > 1e-12:
            total += abs(comp) ** 2 / s
        elif abs(comp) > 1e-9 * fscale or s < -1e-12:
            return math.inf
    return total


def _g(bmap, W):
    a = bmap.alpha
    img = W @ bmap.A.T + bmap.d
    return (
        np.sum(np.abs(img) ** 2, axis=1)
        - a * np.sum(np.abs(W) ** 2, axis=1)
        - a * np.real(W @ bmap.b.conj())
        - a * bmap.c.real
    )


@dataclass(frozen=True)
class BCDValidation:
    valid: bool
    norm_A: float
    norm_bound: float
    max_g: float
    sampled_max_g: float
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "valid": self.valid,
            "norm_A": self.norm_A,
            "norm_bound": self.norm_bound,
            "max_g": self.max_g,
            "sampled_max_g": self.sampled_max_g,
            "violations": list(self.violations),
        }


def validate_bcd(bmap, nsamples=1000, seed=0, tol=1e-9):
    """Check ``|A| <= sqrt(alpha)`` and the self-map inequality.

    The inequality ``alpha|w'|**2 + alpha Re<w',b> + alpha Re c >= |Aw' + d|**2`` is
    checked exactly through the supremum of the concave quadratic, and spot
    checked on ``nsamples`` random ``w'`` over several scales.
    """
    a = bmap.alpha
    normA = spectral_norm(bmap.A)
    bound = math.sqrt(a)
    violations = []
    if normA > bound + 1e-12:
        violations.append(f"|A| = {normA:.6g} exceeds sqrt(alpha) = {bound:.6g}")
    sup = _quadratic_sup(bmap.A, a, bmap.b, bmap.d) - a * bmap.c.real
    if sup > tol:
        violations.append(f"self-map inequality fails: sup g = {sup:.6g} > 0")
    sampled = -math.inf
    k = bmap.m - 1
    if k:
        rng = np.random.default_rng(seed)
        W = rng.normal(size=(nsamples, k)) + 1j * rng.normal(size=(nsamples, k))
        W *= np.logspace(-3, 3, nsamples)[:, None]
        sampled = float(_g(bmap, W).max())
        if sampled > tol * max(1.0, float(np.abs(W).max()) ** 2):
            violations.append(f"sampled w' violates the self-map inequality (g = {sampled:.6g})")
    else:
        sampled = -a * bmap.c.real
    return BCDValidation(
        valid=not violations,
        norm_A=normA,
        norm_bound=bound,
        max_g=sup,
        sampled_max_g=sampled,
        violations=violations,
    )


def beta_seq(alpha, n):
    """``beta_n = 1 + alpha + ... + alpha**n``, built with ``beta_{k+1} = alpha beta_k + 1``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    beta = 1.0
    for _ in range(n):
        beta = alpha * beta + 1.0
    return beta


def beta_list(alpha, n):
    out = [1.0]
    for _ in range(n):
        out.append(alpha * out[-1] + 1.0)
    return out


def pq_coeffs(alpha, n):
    """Coefficients (lowest power first) of ``p_n`` and ``q_n``."""
    if n < 0:
        return [], []
    betas = beta_list(alpha, n)
    p = [betas[n - k] for k in range(n + 1)]
    q = [alpha ** (n - k) for k in range(n + 1)]
    return p, q


@dataclass(frozen=True, eq=False)
class IterateData:
    """The ``n``-th iterate ``(u_n, v_n)`` of ``(1, 0)`` with ``x_n = alpha**n u_n``.

    ``v_scaled = alpha**(n/2) v_n`` and ``defect_scaled = alpha**n (Re u_n - |v_n|**2)``
    stay representable when ``u_n`` and ``v_n`` overflow; in that case
    ``u`` and ``v`` are None.
    """

    n: int
    u: complex
    v: np.ndarray
    x: complex
    v_scaled: np.ndarray
    defect_scaled: float

    @property
    def representable(self):
        return self.u is not None

    def csv_row(self):
        nv = float(np.linalg.norm(self.v)) if self.v is not None else float("nan")
        u = self.u if self.u is not None else complex("nan+nanj")
        return [self.n, u.real, u.imag, nv, self.x.real, self.x.imag, self.defect_scaled]


ITERATE_CSV_HEADER = ["n", "re_u", "im_u", "norm_v", "re_x", "im_x", "defect"]


def _scaled_q_apply(bmap, n):
    """``alpha**(-n/2) q_{n-1}(A) d`` by a recurrence that never overflows."""
    a = bmap.alpha
    y = bmap.d / math.sqrt(a)
    for k in range(1, n):
        y = bmap.A @ y / math.sqrt(a) + a ** ((k - 1) / 2.0) * bmap.d
    return y


def closed_form_iterate(bmap, n):
    """``(u_n, v_n, x_n)`` for ``n >= 1`` from the closed form."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a = bmap.alpha
    p, _ = pq_coeffs(a, n - 2)
    x = 1.0 + beta_seq(a, n - 1) * bmap.c
    if bmap.m > 1 and p:
        x += np.vdot(bmap.b, mat_poly_apply(p, bmap.A, bmap.d))
    x = complex(x)
    log_inv = -n * math.log(a)
    if log_inv < math.log(OVERFLOW_LIMIT):
        scale = a ** (-n)
        if bmap.m > 1:
            _, q = pq_coeffs(a, n - 1)
            qd = mat_poly_eval(q, bmap.A) @ bmap.d
        else:
            qd = np.zeros(0, complex)
        u = scale * x
        v = scale * qd
        v_scaled = a ** (n / 2.0) * v
    else:
        u = None
        v = None
        v_scaled = _scaled_q_apply(bmap, n) if bmap.m > 1 else np.zeros(0, complex)
    defect = x.real - float(np.vdot(v_scaled, v_scaled).real)
    return IterateData(n=n, u=u, v=v, x=x, v_scaled=v_scaled, defect_scaled=defect)


def direct_iterate(bmap, n):
    """``n``-fold application of the map to ``(1, 0)``; the oracle for the closed form."""
    w = SiegelPoint(1.0, np.zeros(bmap.m - 1))
    for _ in range(n):
        w = eval_bcd(bmap, w)
    return w


def x_limit(bmap):
    """``lim x_n = 1 + (c + <(I - A)^{-1} d, b>) / (1 - alpha)`` for hyperbolic maps."""
    a = bmap.alpha
    if a >= 1.0:
        raise DomainError("x_limit needs a hyperbolic map (alpha < 1)")
    extra = 0.0
    if bmap.m > 1:
        u = np.linalg.solve(np.eye(bmap.m - 1) - bmap.A, bmap.d)
        extra = np.vdot(bmap.b, u)
    return complex(1.0 + (bmap.c + extra) / (1.0 - a))


def restricted_defect_seq(bmap, N):
    """``t_n = alpha**-n |q_{n-1}(A) d|**2`` for ``n = 1..N``.

    Restricted approach of the orbit to the Denjoy-Wolff point forces
    ``t_n -> 0``. Each ``q_{n-1}(A) d`` is evaluated directly from its
    coefficients.
    """
    a = bmap.alpha
    out = []
    for n in range(1, N + 1):
        if bmap.m == 1:
            out.append(0.0)
            continue
        if -n * math.log(a) < math.log(OVERFLOW_LIMIT):
            _, q = pq_coeffs(a, n - 1)
            y = mat_poly_apply(q, bmap.A, bmap.d)
            out.append(float(np.vdot(y, y).real) * a ** (-n))
        else:
            y = _scaled_q_apply(bmap, n)
            out.append(float(np.vdot(y, y).real))
    return out


def counterexample_map(alpha, m=2):
    """Hyperbolic map whose orbit of 0 does not approach ``e1`` restrictedly.

    ``A = sqrt(alpha) I``, ``d = e1``, ``b = 2 alpha**-1/2 d`` and ``c = 1/alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 2:
        raise DomainError("the construction needs m >= 2")
    k = m - 1
    d = np.zeros(k, dtype=complex)
    d[0] = 1.0
    return BCDMap(
        alpha=alpha,
        c=1.0 / alpha,
        b=2.0 / math.sqrt(alpha) * d,
        d=d,
        A=math.sqrt(alpha) * np.eye(k),
        label=f"counterexample alpha={alpha:g} m={m}",
    )


def bcd_to_ball(bmap, validate=True):
    """The ball map ``psi^-1 o phi~ o psi`` as a linear fractional map.

    With ``validate`` the contractive scaling is searched for and attached;
    an invalid parametrization raises :class:`ValidationError`.
    """
    if validate:
        report = validate_bcd(bmap)
        if not report.valid:
            raise ValidationError("; ".join(report.violations))
    m = bmap.m
    T = inverse_cayley_matrix(m) @ affine_matrix(bmap) @ cayley_matrix(m)
    T = T / np.abs(T).max()
    phi = LinearFractionalMap(T, label=bmap.label)
    if not validate:
        return phi
    t = find_contractive_scaling(phi)
    if t is None:
        raise ValidationError("conjugated map failed the contractive scaling search")
    return LinearFractionalMap(T, scale=t, label=bmap.label)


def ball_to_bcd(phi, zeta, tol=1e-8):
    """Half-space normal form of ``phi`` relative to the boundary fixed point ``zeta``.

    Rotates ``zeta`` to ``e1`` with a unitary ``U`` and conjugates by the
    Cayley transform. Returns ``(bmap, U)``; the ball map equals
    ``U* psi^-1 o bmap o psi U``. Raises :class:`ValidationError` when the
    conjugate is not affine of the normal form (``zeta`` is not the
    Denjoy-Wolff point of a non-elliptic map).
    """
    zeta = as_vector(zeta)
    m = phi.m
    U = rotation_to_e1(zeta)
    R = np.eye(m + 1, dtype=complex)
    R[:m, :m] = U
    Tr = R @ phi.T @ R.conj().T
    H = cayley_matrix(m) @ Tr @ inverse_cayley_matrix(m)
    scale = np.abs(H).max()
    if abs(H[m, m]) < tol * scale:
        raise ValidationError("zeta does not map to infinity affinely")
    H = H / H[m, m]
    scale = np.abs(H).max()
    if np.abs(H[m, :m]).max() > tol * scale:
        raise ValidationError("conjugate map is not affine in half-space coordinates")
    if m > 1 and np.abs(H[1:m, 0]).max() > tol * scale:
        raise ValidationError("conjugate map mixes w1 into w'")
    h11 = H[0, 0]
    if abs(h11.imag) > tol * scale or not h11.real > 0:
        raise ValidationError("w1 coefficient is not a positive real number")
    alpha = 1.0 / h11.real
    if alpha > 1.0 and alpha - 1.0 < 1e-6:
        alpha = 1.0
    bmap = BCDMap(
        alpha=alpha,
        c=alpha * H[0, m],
        b=(alpha * H[0, 1:m]).conj(),
        d=alpha * H[1:m, m],
        A=alpha * H[1:m, 1:m],
        label=phi.label,
    )
    return bmap, U


def scaled_iterates(bmap, w0, N):
    """Orbit of ``w0`` under the affine map in anisotropically rescaled coordinates.

    Returns ``(W, L)`` with ``W[n] = (w1 / lam**2, w' / lam)`` and ``L[n] = log lam``
    for the true iterate ``w = phi~_n(w0)``. Rescaling by ``lam`` keeps
    ``|W[n, 0]|`` of order one however large ``w1`` grows, and
    ``Re w1 - |w'|**2 = lam**2 (Re W1 - |W'|**2)`` keeps its relative accuracy.
    """
    w0 = as_vector(w0)
    m = bmap.m
    a = bmap.alpha
    W = np.empty((N + 1, m), dtype=complex)
    L = np.zeros(N + 1)
    W[0] = w0
    w1, wp, logl = complex(w0[0]), w0[1:].copy(), 0.0
    bconj = bmap.b.conj()
    for n in range(1, N + 1):
        inv = math.exp(-logl)
        w1 = (w1 + bmap.c * inv * inv + (bconj @ wp) * inv) / a
        wp = (bmap.A @ wp + bmap.d * inv) / a
        mag = abs(w1)
        if mag > 4.0:
            mu = math.sqrt(mag)
            w1 /= mu * mu
            wp = wp / mu
            logl += math.log(mu)
        W[n, 0] = w1
        W[n, 1:] = wp
        L[n] = logl
    return W, L
