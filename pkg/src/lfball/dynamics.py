"""Iteration, classification and Julia-type diagnostics for ball maps.

Orbits come in two flavours. The plain route applies the map in ball
coordinates and stops once ``1 - |z|**2`` falls below ``1e-15``, where the
defect is pure rounding noise, or once the iterate stalls on a floating
point value near the sphere. For hyperbolic maps the half-space route
iterates the affine normal form in rescaled coordinates (see
:func:`lfball.bcd.scaled_iterates`) and keeps the logarithm of the defect
accurate far below the smallest representable gap to the sphere.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .ball import cayley
from .bcd import ball_to_bcd, scaled_iterates
from .errors import DomainError, InconclusiveError, PoleError
from .lfm import evaluate_many, fixed_points, j_matrix
from .numcore import as_vector

DEFECT_FLOOR = 1e-15
# Below this defect an iterate that reproduces itself exactly has been
# trapped by rounding rather than by a genuine fixed point.
STALL_DEFECT = 1e-12
KIND_TOL = 1e-6
JULIA_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Orbit:
    """``points[n] = phi_n(start)`` with ``log_defects[n] = log(1 - |points[n]|**2)``.

    ``truncated`` is set when the orbit stopped before the requested length.
    Half-space orbits (``method == "siegel"``) also keep the rescaled
    coordinates ``half_space`` and ``log_scale`` relative to ``zeta``, and
    their ``points`` may round onto the sphere even though the defects are
    still resolved.
    """

    start: np.ndarray
    points: np.ndarray
    log_defects: np.ndarray
    truncated: bool
    requested: int
    method: str = "ball"
    zeta: np.ndarray = None
    half_space: np.ndarray = None
    log_scale: np.ndarray = None
    rotation: np.ndarray = None

    @property
    def n(self):
        return len(self.log_defects) - 1

    @property
    def defects(self):
        return np.exp(self.log_defects)


def _ball_orbit(phi, z0, N, floor=DEFECT_FLOOR):
    T = phi.T
    m = phi.m
    A, B, c, D = T[:m, :m], T[:m, m], T[m, :m], T[m, m]
    pole = 1e-14 * max(1.0, np.abs(T).max())
    pts = [z0]
    logd = [math.log(1.0 - np.vdot(z0, z0).real)]
    z = z0
    truncated = False
    for _ in range(N):
        den = c @ z + D
        if abs(den) < pole:
            raise PoleError("orbit hit the pole of the map; map data is invalid")
        prev, z = z, (A @ z + B) / den
        d = 1.0 - np.vdot(z, z).real
        if not d >= floor or (d < STALL_DEFECT and np.array_equal(z, prev)):
            truncated = True
            break
        pts.append(z)
        logd.append(math.log(d))
    return Orbit(
        start=z0,
        points=np.array(pts),
        log_defects=np.array(logd),
        truncated=truncated,
        requested=N,
    )


def _siegel_orbit(phi, z0, N, zeta):
    bmap, U = ball_to_bcd(phi, zeta)
    w0 = cayley(U @ z0).as_array()
    W, L = scaled_iterates(bmap, w0, N)
    inv2 = np.exp(-2.0 * L)
    W1, Wp = W[:, 0], W[:, 1:]
    gap = W1.real - np.sum(np.abs(Wp) ** 2, axis=1)
    size = np.maximum(np.abs(W1), np.sum(np.abs(Wp) ** 2, axis=1))
    ok = np.isfinite(gap) & (gap > 1e-12 * size)
    stop = N + 1 if ok.all() else int(np.argmin(ok))
    W1, Wp, L, inv2, gap = W1[:stop], Wp[:stop], L[:stop], inv2[:stop], gap[:stop]
    den = W1 + inv2
    logd = math.log(4.0) + np.log(gap) - 2.0 * L - 2.0 * np.log(np.abs(den))
    y = np.empty((stop, phi.m), dtype=complex)
    y[:, 0] = (W1 - inv2) / den
    y[:, 1:] = 2.0 * Wp * (np.exp(-L) / den)[:, None]
    pts = y @ U.conj()  # rows of U* y
    pts[0] = z0
    return Orbit(
        start=z0,
        points=pts,
        log_defects=logd,
        truncated=stop < N + 1,
        requested=N,
        method="siegel",
        zeta=as_vector(zeta),
        half_space=W[:stop],
        log_scale=L,
        rotation=U,
    )


def orbit(phi, start=None, N=100, method="ball", zeta=None):
    """Orbit of ``start`` (default the origin) under ``phi`` for ``N`` steps.

    ``method`` is ``"ball"``, ``"siegel"`` (needs the Denjoy-Wolff point
    ``zeta`` of a hyperbolic or parabolic map; found by :func:`classify` when
    omitted) or ``"auto"``, which uses the half-space route for hyperbolic
    maps only.
    """
    z0 = np.zeros(phi.m, dtype=complex) if start is None else as_vector(start)
    if not np.vdot(z0, z0).real < 1.0:
        raise DomainError("orbit start must lie in the open ball")
    if method == "auto":
        cls = classify(phi)
        if cls.kind == "hyperbolic":
            return _siegel_orbit(phi, z0, N, cls.dw_point)
        return _ball_orbit(phi, z0, N)
    if method == "ball":
        return _ball_orbit(phi, z0, N)
    if method == "siegel":
        if zeta is None:
            cls = classify(phi)
            if cls.kind == "elliptic":
                raise DomainError("elliptic maps have no half-space normal form")
            zeta = cls.dw_point
        return _siegel_orbit(phi, z0, N, zeta)
    raise ValueError(f"unknown orbit method {method!r}")


def defect_ratio_sequence(orb):
    """``r_n = defect[n] / defect[n-1]`` for ``n = 1..N``, computed from log defects."""
    if orb.n < 1:
        raise DomainError("need an orbit with at least two points")
    return np.exp(np.diff(orb.log_defects))


def log_julia_quotients(orb, zeta):
    """``log(|1 - <z_n, zeta>|**2 / (1 - |z_n|**2))`` along the orbit."""
    zeta = as_vector(zeta)
    if orb.method == "siegel" and np.allclose(orb.zeta, zeta, atol=1e-12):
        # 1 - <z, zeta> = 2 / (w1 + 1) with w1 = lam**2 W1.
        W1 = orb.half_space[:, 0]
        L = orb.log_scale
        num = math.log(2.0) - 2.0 * L - np.log(np.abs(W1 + np.exp(-2.0 * L)))
        return 2.0 * num - orb.log_defects
    inner = orb.points @ zeta.conj()
    return 2.0 * np.log(np.abs(1.0 - inner)) - orb.log_defects


def _radial_quotients(phi, zeta, ks):
    """``(1 - |phi(t zeta)|**2) / (1 - t**2)`` at ``t = 1 - 2**-k`` without cancellation.

    With ``x = (t zeta, 1)`` and ``Delta = J - T* J T`` one has
    ``1 - |phi(z)|**2 = ((1 - |z|**2) + <Delta x, x>) / |s|**2`` where
    ``s = <z, C> + D``. Since ``zeta`` is fixed, ``<Delta x0, x0> = 0`` at
    ``x0 = (zeta, 1)``, and expanding in ``h = 1 - t`` leaves only terms that
    are exact in floating point.
    """
    T = phi.T / np.abs(phi.T).max()
    m = phi.m
    J = j_matrix(m)
    Delta = J - T.conj().T @ J @ T
    x0 = np.concatenate([zeta, [1.0]])
    e = np.concatenate([zeta, [0.0]])
    c0 = np.vdot(x0, Delta @ x0).real
    if abs(c0) > 1e-6 * max(1.0, np.abs(Delta).max()):
        raise InconclusiveError(
            "zeta is not a boundary fixed point; the radial quotient diverges",
            {"boundary_defect": c0},
        )
    lin = -2.0 * np.vdot(e, Delta @ x0).real
    quad = np.vdot(e, Delta @ e).real
    out = []
    for k in ks:
        h = 2.0 ** (-k)
        s = (1.0 - h) * (T[m, :m] @ zeta) + T[m, m]
        out.append((1.0 + (lin + h * quad) / (2.0 - h)) / abs(s) ** 2)
    return np.array(out)


def dilatation_coefficient(phi, zeta, clamp=True):
    """Radial limit of ``(1 - |phi(t zeta)|**2) / (1 - t**2)`` as ``t -> 1``.

    Sampled at ``t = 1 - 2**-k`` for ``k = 10..40`` and accelerated by one
    Richardson step (the error is linear in ``1 - t``). Raises
    :class:`InconclusiveError` when the last five extrapolants spread by more
    than ``1e-6``. With ``clamp`` the result is capped at 1.
    """
    zeta = as_vector(zeta)
    zeta = zeta / np.linalg.norm(zeta)
    ks = np.arange(10, 41)
    q = _radial_quotients(phi, zeta, ks)
    rich = 2.0 * q[1:] - q[:-1]
    tail = rich[-5:]
    spread = float(tail.max() - tail.min())
    if not np.all(np.isfinite(tail)) or spread > 1e-6:
        raise InconclusiveError(
            "radial dilatation estimate did not settle",
            {"spread": spread, "last_estimates": tail.tolist()},
        )
    alpha = float(rich[-1])
    if not alpha > 0:
        raise InconclusiveError("radial dilatation estimate is not positive", {"alpha": alpha})
    return min(alpha, 1.0) if clamp else alpha


@dataclass(frozen=True, eq=False)
class ClassificationResult:
    """``kind`` with its Denjoy-Wolff point (an interior fixed point if elliptic).

    ``alpha`` is the dilatation coefficient at ``dw_point``: exactly 1.0 for
    parabolic maps and None for elliptic ones. ``alpha_estimate`` keeps the
    unrounded radial estimate.
    """

    kind: str
    dw_point: np.ndarray
    alpha: float
    alpha_estimate: float = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "dw_point": _complex_list(self.dw_point),
            "alpha": self.alpha,
            "alpha_estimate": self.alpha_estimate,
            "diagnostics": self.diagnostics,
        }


def _complex_list(v):
    return [{"re": float(x.real), "im": float(x.imag)} for x in np.asarray(v, dtype=complex)]


def _dedupe(points, tol=1e-6):
    out = []
    for p in points:
        if all(np.linalg.norm(p.point - q.point) > tol for q in out):
            out.append(p)
    return out


def _orbit_direction(phi, max_steps=100_000, gap=1e-10):
    T = phi.T
    m = phi.m
    A, B, c, D = T[:m, :m], T[:m, m], T[m, :m], T[m, m]
    z = np.zeros(m, dtype=complex)
    for n in range(max_steps):
        z = (A @ z + B) / (c @ z + D)
        r = np.linalg.norm(z)
        if 1.0 - r < gap:
            break
    r = np.linalg.norm(z)
    return (z / r if r > 0 else z), 1.0 - r, n + 1


def classify(phi, tol=KIND_TOL):
    """Elliptic, parabolic or hyperbolic, with Denjoy-Wolff point and dilatation.

    An interior fixed point makes the map elliptic. Otherwise the
    Denjoy-Wolff point is the boundary fixed point where the dilatation
    coefficient is at most 1; Julia's lemma rules out a second such point, so
    the orbit of the origin is only consulted when the radial estimates
    cannot single one out.
    """
    fps = fixed_points(phi)
    interior = fps.where("interior")
    if interior:
        return ClassificationResult(
            kind="elliptic",
            dw_point=interior[0].point,
            alpha=None,
            diagnostics={"fixed_point_eigenvalue": [interior[0].eigenvalue.real, interior[0].eigenvalue.imag]},
        )
    candidates = _dedupe(fps.where("boundary"))
    if not candidates:
        raise InconclusiveError("no interior or boundary fixed point found", {"eigenvalues": str(fps.eigenvalues)})
    estimates = []
    for fp in candidates:
        try:
            estimates.append(dilatation_coefficient(phi, fp.point, clamp=False))
        except InconclusiveError:
            estimates.append(math.inf)
    attracting = [i for i, a in enumerate(estimates) if a <= 1.0 + tol]
    diagnostics = {
        "boundary_candidates": len(candidates),
        "candidate_alphas": [a if math.isfinite(a) else None for a in estimates],
    }
    if len(attracting) == 1:
        idx = attracting[0]
    else:
        direction, gap, steps = _orbit_direction(phi)
        dists = [np.linalg.norm(fp.point - direction) for fp in candidates]
        idx = int(np.argmin(dists))
        diagnostics.update({"orbit_steps": steps, "orbit_gap": gap, "orbit_distance": float(dists[idx])})
        if not math.isfinite(estimates[idx]):
            raise InconclusiveError("dilatation estimate at the Denjoy-Wolff point did not settle", diagnostics)
    zeta = candidates[idx].point
    est = estimates[idx]
    if est < 1.0 - tol:
        return ClassificationResult("hyperbolic", zeta, est, est, diagnostics)
    return ClassificationResult("parabolic", zeta, 1.0, est, diagnostics)


@dataclass(frozen=True)
class JuliaReport:
    n_points: int
    max_ratio: float
    violations: int
    slack: float

    @property
    def holds(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "n_points": self.n_points,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "slack": self.slack,
        }


def julia_check(phi, zeta, alpha, points, slack=JULIA_SLACK):
    """Check ``J(phi(z)) <= alpha J(z)`` at every point, ``J`` the Julia quotient at ``zeta``."""
    Z = np.asarray(points, dtype=complex).reshape(-1, phi.m)
    zeta = as_vector(zeta)
    W = evaluate_many(phi, Z)

    def quotient(X):
        return np.abs(1.0 - X @ zeta.conj()) ** 2 / (1.0 - np.sum(np.abs(X) ** 2, axis=1))

    ratios = quotient(W) / (alpha * quotient(Z))
    return JuliaReport(
        n_points=len(Z),
        max_ratio=float(ratios.max()),
        violations=int(np.sum(ratios > 1.0 + slack)),
        slack=slack,
    )


@dataclass(frozen=True)
class IteratedJuliaReport:
    n_checked: int
    n_skipped: int
    max_log_excess: float
    violations: int

    def to_dict(self):
        return {
            "n_checked": self.n_checked,
            "n_skipped": self.n_skipped,
            "max_log_excess": self.max_log_excess,
            "violations": self.violations,
        }


def iterated_julia_check(orb, zeta, alpha, rel_tol=1e-6):
    """Check ``J(phi_n(z0)) <= alpha**n J(z0)`` along an orbit, in logarithms.

    On a ball-coordinate orbit both ``1 - |z|**2`` and ``|1 - <z, zeta>|**2``
    carry a relative rounding error of a few ``eps / defect``. Points whose
    defect is too small to resolve ``rel_tol`` are skipped and counted in
    ``n_skipped``. Half-space orbits keep their defects accurate and are
    checked in full.
    """
    logj = log_julia_quotients(orb, zeta)
    n = np.arange(len(logj))
    excess = logj - (logj[0] + n * math.log(alpha))
    if orb.method == "ball":
        resolved = orb.defects >= 8.0 * np.finfo(float).eps / rel_tol
    else:
        resolved = np.ones(len(logj), dtype=bool)
    excess = excess[resolved]
    return IteratedJuliaReport(
        n_checked=int(resolved.sum()),
        n_skipped=int((~resolved).sum()),
        max_log_excess=float(excess.max()),
        violations=int(np.sum(excess > math.log1p(rel_tol))),
    )


@dataclass(frozen=True, eq=False)
class RestrictednessReport:
    special_seq: np.ndarray
    restricted_seq: np.ndarray
    special_limit_zero: bool
    restricted_bounded: bool

    def to_dict(self):
        return {
            "special_seq": [float(x) for x in self.special_seq],
            "restricted_seq": [float(x) for x in self.restricted_seq],
            "special_limit_zero": self.special_limit_zero,
            "restricted_bounded": self.restricted_bounded,
        }


def restrictedness_report(orb, zeta):
    """Special and restricted quotients of the orbit relative to ``zeta``.

    With ``gamma = <z, zeta> zeta`` the projection onto the complex line
    through ``zeta``, the special quotient is ``|z - gamma|**2 / (1 - |gamma|**2)``
    and the restricted one ``|zeta - gamma| / (1 - |gamma|**2)``. Both are
    computed from half-space coordinates when available: for ``zeta = e1``
    they equal ``|w'|**2 / Re w1`` and ``|w1 + 1| / (2 Re w1)``.
    """
    zeta = as_vector(zeta)
    zeta = zeta / np.linalg.norm(zeta)
    if orb.method == "siegel" and np.allclose(orb.zeta, zeta, atol=1e-12):
        W1 = orb.half_space[:, 0]
        Wp = orb.half_space[:, 1:]
        L = orb.log_scale
        special = np.sum(np.abs(Wp) ** 2, axis=1) / W1.real
        restricted = np.abs(W1 + np.exp(-2.0 * L)) / (2.0 * W1.real)
    else:
        Z = orb.points
        g = Z @ zeta.conj()
        perp = Z - np.outer(g, zeta)
        denom = 1.0 - np.abs(g) ** 2
        special = np.sum(np.abs(perp) ** 2, axis=1) / denom
        restricted = np.abs(1.0 - g) / denom
    tail = special[-10:]
    special_zero = bool(len(tail) == 10 and np.all(tail < 1e-4) and tail[-1] <= tail[0])
    half = restricted[len(restricted) // 2 :]
    bounded = bool(half.max() <= 10.0 * np.median(half))
    return RestrictednessReport(special, restricted, special_zero, bounded)
