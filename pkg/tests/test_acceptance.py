"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are written with output capture disabled so they show up in a
plain ``pytest -v`` log. Every test asserts the same condition it reports.
"""

import time

import numpy as np
import pytest

from lfball.ball import cayley, cayley_defect_identity, inverse_cayley, sample_ball
from lfball.bcd import (
    bcd_to_ball,
    beta_seq,
    closed_form_iterate,
    counterexample_map,
    direct_iterate,
    eval_bcd,
    pq_coeffs,
    restricted_defect_seq,
)
from lfball.dynamics import (
    defect_ratio_sequence,
    iterated_julia_check,
    julia_check,
    orbit,
    restrictedness_report,
)
from lfball.lfm import compose, evaluate_many, kernel_factorization, validate
from lfball.sampling import random_bcd, random_lfm, random_non_elliptic
from lfball.schur_agler import (
    DBRKernel,
    SpaceParams,
    composition_identity_residual,
    gram_norm_lower_bound,
    gram_positivity,
    norm_bounds,
    spectral_radius_sequence,
)

from conftest import disk_automorphism, parabolic_map, rotation_map

SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, budget):
        status = "PASS" if ok and elapsed < budget else "FAIL"
        with capsys.disabled():
            print(f"\n{status} criterion {number}: {detail} [{elapsed:.2f} s, budget {budget:g} s]")
        return status == "PASS"

    return emit


def _fifty_maps():
    rng = np.random.default_rng(SEED)
    return [random_lfm(1 + i % 4, rng) for i in range(50)]


def _paired_dbr(phi, Z, W):
    pz, pw = evaluate_many(phi, Z), evaluate_many(phi, W)
    num = 1.0 - np.einsum("ij,ij->i", pz, pw.conj())
    return num / (1.0 - np.einsum("ij,ij->i", Z, W.conj()))


def test_criterion_1_kernel_factorization(report):
    start = time.perf_counter()
    worst = 0.0
    for k, phi in enumerate(_fifty_maps()):
        Z = sample_ball(200, phi.m, seed=SEED + 2 * k)
        W = sample_ball(200, phi.m, seed=SEED + 2 * k + 1)
        fact = kernel_factorization(phi)
        factored = np.array([fact.factored(z, w) for z, w in zip(Z, W)])
        worst = max(worst, float(np.abs(factored - _paired_dbr(phi, Z, W)).max()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9
    assert report(1, ok, f"max |k - factored| = {worst:.2e} over 50 maps x 200 pairs (< 1e-9)", elapsed, 10)


def test_criterion_2_gram_positivity_and_composition(report):
    start = time.perf_counter()
    maps = _fifty_maps()
    min_eig = np.inf
    worst_identity = 0.0
    n_comp = 0
    for k, phi in enumerate(maps):
        Z = sample_ball(50, phi.m, seed=SEED + k)
        min_eig = min(min_eig, gram_positivity(DBRKernel(phi), Z, tol=1e-8).min_eig)
    for i, phi in enumerate(maps):
        for j, psi in enumerate(maps):
            if i == j or phi.m != psi.m:
                continue
            Z = sample_ball(50, phi.m, seed=SEED + 1000 + i)
            both = validate(compose(phi, psi))
            min_eig = min(min_eig, gram_positivity(DBRKernel(both), Z, tol=1e-8).min_eig)
            worst_identity = max(worst_identity, composition_identity_residual(phi, psi, Z))
            n_comp += 1
    elapsed = time.perf_counter() - start
    ok = min_eig >= -1e-8 and worst_identity < 1e-10
    detail = (
        f"min Gram eigenvalue {min_eig:.2e} (>= -1e-8) over 50 maps + {n_comp} compositions, "
        f"product identity residual {worst_identity:.2e} (< 1e-10)"
    )
    assert report(2, ok, detail, elapsed, 30)


def test_criterion_3_norm_sandwich(report):
    start = time.perf_counter()
    worst_low = worst_high = worst_origin = 0.0
    checks = 0
    for k, phi in enumerate(_fifty_maps()):
        m = phi.m
        Z = np.vstack([np.zeros((1, m)), sample_ball(49, m, seed=SEED + k)])
        for beta in sorted({1.0, float(m), float(m + 1)}):
            params = SpaceParams(m, beta)
            nb = norm_bounds(phi(np.zeros(m)), params)
            for size in (1, 10, 50):
                g = gram_norm_lower_bound(phi, params, Z[:size])
                worst_low = max(worst_low, (nb.lower - g) / nb.lower)
                worst_high = max(worst_high, g - nb.upper)
                if size == 1:
                    worst_origin = max(worst_origin, abs(g - nb.lower) / nb.lower)
                checks += 1
    elapsed = time.perf_counter() - start
    # The ridge perturbs the bound by about 1e-12 relative, hence the relative
    # tolerance at the lower end.
    ok = worst_low <= 1e-12 and worst_high <= 1e-9 and worst_origin <= 1e-12
    detail = (
        f"{checks} checks: max relative shortfall below lower {worst_low:.1e}, "
        f"max excess over upper {worst_high:.1e} (<= 1e-9), "
        f"{{0}} vs lower bound {worst_origin:.1e} (<= 1e-12)"
    )
    assert report(3, ok, detail, elapsed, 10)


def test_criterion_4_hyperbolic_spectral_radius(report):
    start = time.perf_counter()
    cases = [
        ("disk automorphism", disk_automorphism(0.5, 2), 1 / 3),
        ("counterexample", bcd_to_ball(counterexample_map(0.25)), 0.25),
    ]
    zeta = np.array([1.0, 0.0])
    parts, ok = [], True
    for name, phi, alpha in cases:
        r = defect_ratio_sequence(orbit(phi, None, 60, method="siegel", zeta=zeta))
        r_gap = abs(r[59] - alpha)
        s_gaps = []
        for beta in (1.0, 2.0, 3.0):
            s = spectral_radius_sequence(phi, SpaceParams(2, beta), 500, method="auto")
            target = alpha ** (-beta / 2)
            s_gaps.append(abs(s[499] - target) / target)
        ok = ok and r_gap < 1e-4 and max(s_gaps) < 0.02
        parts.append(
            f"{name}: |r_60 - alpha| = {r_gap:.1e}, s_500 relative gaps "
            + "/".join(f"{g:.2%}" for g in s_gaps)
        )
    elapsed = time.perf_counter() - start
    assert report(4, ok, "; ".join(parts), elapsed, 5)


def test_criterion_5_elliptic_and_parabolic(report):
    start = time.perf_counter()
    s_rot = spectral_radius_sequence(rotation_map(1), SpaceParams(1, 1.0), 500)
    rot_exact = bool(np.all(s_rot == 1.0))
    par = parabolic_map()
    s_par = spectral_radius_sequence(par, SpaceParams(1, 1.0), 500)
    decreasing = bool(np.all(np.diff(s_par) < 0))
    r_par = defect_ratio_sequence(orbit(par, None, 2000))
    r_gap = abs(r_par[-1] - 1.0)
    elapsed = time.perf_counter() - start
    ok = rot_exact and decreasing and s_par[-1] > 1.0 and s_par[-1] < 1.02 and r_gap < 1e-3
    detail = (
        f"rotation s_n == 1: {rot_exact}; parabolic s decreasing: {decreasing}, "
        f"s_500 = {s_par[-1]:.5f} (< 1.02), |r_2000 - 1| = {r_gap:.1e} (< 1e-3)"
    )
    assert report(5, ok, detail, elapsed, 5)


def _padd(a, b):
    n = max(len(a), len(b))
    return np.pad(np.asarray(a, float), (0, n - len(a))) + np.pad(np.asarray(b, float), (0, n - len(b)))


def _rel(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return float(np.abs(x - y).max() / max(np.abs(y).max(), 1e-300))


def test_criterion_6_closed_form_iterates(report):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_iter = 0.0
    alphas = []
    for k in range(20):
        bmap = random_bcd(2 + k % 3, rng)
        alphas.append(bmap.alpha)
        for n in range(1, 31):
            it = closed_form_iterate(bmap, n)
            w = direct_iterate(bmap, n)
            got = np.concatenate([[it.u], it.v])
            want = np.concatenate([[w.w1], w.wprime])
            worst_iter = max(worst_iter, float(np.linalg.norm(got - want) / np.linalg.norm(want)))
    worst_rec = 0.0
    for alpha in alphas + [1.0]:
        for n in range(60):
            p, q = pq_coeffs(alpha, n)
            p1, q1 = pq_coeffs(alpha, n + 1)
            pm, _ = pq_coeffs(alpha, n - 1)
            closed_beta = n + 1 if alpha == 1.0 else (1 - alpha ** (n + 1)) / (1 - alpha)
            worst_rec = max(
                worst_rec,
                abs(beta_seq(alpha, n) - closed_beta) / closed_beta,
                _rel(q1, _padd([alpha ** (n + 1)], [0.0] + q)),
                _rel(p1, _padd([beta_seq(alpha, n + 1)], [0.0] + p)),
                _rel(_padd(q, pm), p),
            )
    elapsed = time.perf_counter() - start
    ok = worst_iter < 1e-9 and worst_rec < 1e-12
    detail = (
        f"closed form vs direct max relative error {worst_iter:.1e} (< 1e-9, 20 maps, n <= 30); "
        f"recurrences and q_n + p_(n-1) = p_n max relative error {worst_rec:.1e} (< 1e-12, n <= 60)"
    )
    assert report(6, ok, detail, elapsed, 5)


def test_criterion_7_counterexample(report):
    start = time.perf_counter()
    bmap = counterexample_map(0.25)
    ts = restricted_defect_seq(bmap, 100)
    phi = bcd_to_ball(bmap)
    zeta = np.array([1.0, 0.0])
    rep = restrictedness_report(orbit(phi, None, 100, method="siegel", zeta=zeta), zeta)
    x50 = closed_form_iterate(bmap, 50).x
    elapsed = time.perf_counter() - start
    ok = (
        min(ts) > 1.0
        and abs(ts[0] - 4.0) < 1e-12
        and not rep.special_limit_zero
        and abs(x50 - 17.0) < 1e-8
        and x50.real >= 1.0
    )
    detail = (
        f"min t_n = {min(ts):.6g} (> 1 for n <= 100), t_1 = {ts[0]:.15g}, "
        f"special_limit_zero = {rep.special_limit_zero}, |x_50 - 17| = {abs(x50 - 17.0):.1e}"
    )
    assert report(7, ok, detail, elapsed, 2)


def test_criterion_8_julia_inequality(report):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    violations = 0
    worst_ratio = 0.0
    iter_violations = 0
    worst_excess = -np.inf
    steps = skipped = 0
    for k in range(20):
        parabolic = k % 4 == 3
        phi, zeta, bmap = random_non_elliptic(1 + k % 4, rng, parabolic=parabolic)
        rep = julia_check(phi, zeta, bmap.alpha, sample_ball(1000, phi.m, seed=rng))
        violations += rep.violations
        worst_ratio = max(worst_ratio, rep.max_ratio)
        routes = [orbit(phi, None, 400)]
        if not parabolic:
            routes.append(orbit(phi, None, 400, method="siegel", zeta=zeta))
        for orb in routes:
            it = iterated_julia_check(orb, zeta, bmap.alpha, rel_tol=1e-6)
            iter_violations += it.violations
            worst_excess = max(worst_excess, it.max_log_excess)
            steps += it.n_checked
            skipped += it.n_skipped
    elapsed = time.perf_counter() - start
    ok = violations == 0 and iter_violations == 0
    detail = (
        f"{violations} violations over 20 maps x 1000 points (max ratio {worst_ratio:.9f}, slack 1e-9); "
        f"iterated bound {iter_violations} violations over {steps} orbit points "
        f"(max log excess {worst_excess:.1e}, tolerance 1e-6; {skipped} ball points past "
        f"precision exhaustion skipped)"
    )
    assert report(8, ok, detail, elapsed, 10)


def test_criterion_9_cayley_and_conjugation(report):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_trip = worst_defect = 0.0
    for m in (1, 2, 3, 4):
        for z in sample_ball(2500, m, seed=rng):
            w = cayley(z)
            worst_trip = max(worst_trip, float(np.abs(inverse_cayley(w) - z).max()))
            defect = 1.0 - np.vdot(z, z).real
            worst_defect = max(worst_defect, abs(cayley_defect_identity(w) - defect) / defect)
    worst_conj = 0.0
    for k in range(20):
        bmap = random_bcd(1 + k % 4, rng, parabolic=k % 5 == 4)
        phi = bcd_to_ball(bmap)
        Z = sample_ball(200, bmap.m, seed=rng)
        via = np.array([inverse_cayley(eval_bcd(bmap, cayley(z))) for z in Z])
        worst_conj = max(worst_conj, float(np.abs(evaluate_many(phi, Z) - via).max()))
    elapsed = time.perf_counter() - start
    ok = worst_trip < 1e-12 and worst_defect < 1e-12 and worst_conj < 1e-10
    detail = (
        f"round trip {worst_trip:.1e}, defect identity {worst_defect:.1e} (< 1e-12, 1e4 points); "
        f"bcd_to_ball conjugation {worst_conj:.1e} (< 1e-10, 20 maps x 200 points)"
    )
    assert report(9, ok, detail, elapsed, 5)
