"""Acceptance criteria; each test prints one PASS/FAIL line before asserting."""

import time

import numpy as np
import pytest

from chen_bounds import cli
from chen_bounds.ambient import AmbientPoint, curvature_tensor_on
from chen_bounds.forge import (
    GeneratorSpec,
    make_ambient,
    make_equality_basic,
    make_instance,
    make_totally_geodesic,
    make_totally_umbilical,
    oracle_invariants,
)
from chen_bounds.inequalities import (
    check_chen_fundamental,
    check_delta_tuple,
    check_mean_vs_scalar,
    check_ricci_bound,
    check_sasakian_suite,
    check_scalar_identity,
    check_theta_bound,
    chen_first_slacks,
    chen_lemma_batch,
    delta_tuple_slacks,
    detect_equality_form_basic,
    detect_equality_form_delta,
    is_sasakian_mode,
    ricci_bound_slacks,
)
from chen_bounds.invariants import (
    SearchBudget,
    TupleSpec,
    delta_pair,
    enumerate_tuples,
    inf_sectional,
    random_frames,
    random_planes,
    random_units,
    scalar_curvature,
)
from chen_bounds.submanifold import build_submanifold, normal_completion, relative_null_space

from conftest import random_instances, unit_f1


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def batch200():
    return random_instances(200, seed=21)


def sasakian(m, f1=1.0):
    return AmbientPoint.canonical(m, unit_f1(f1))


def gauss_two_tau(S):
    n = S.n
    Rt = curvature_tensor_on(S.ambient, S.tangent_frame)
    sig = S.sigma
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += Rt[i, j, j, i] + sig[:, i, i] @ sig[:, j, j] - sig[:, i, j] @ sig[:, i, j]
    return total


def perturbed(S, r, i, j, eps=0.1):
    free = np.array(S.sigma[:-1])
    free[r, i, j] += eps
    free[r, j, i] = free[r, i, j]
    return build_submanifold(S.ambient, S.tangent_frame, S.normal_frame, free)


def test_criterion_01_scalar_identity(verdict):
    t0 = time.perf_counter()
    instances = random_instances(1000, seed=11)
    worst, fails = 0.0, 0
    for S in instances:
        r = check_scalar_identity(S)
        two_tau = gauss_two_tau(S)
        err = abs(two_tau - r.rhs) / (1 + abs(two_tau))
        worst = max(worst, err)
        fails += (err > 1e-9) or not r.passed
    elapsed = time.perf_counter() - t0
    modes = {is_sasakian_mode(S) for S in instances}
    dims = {(S.n, S.ambient.m) for S in instances}
    ok = fails == 0 and elapsed < 10 and len(modes) == 2 and {n for n, _ in dims} == {3, 4, 5}
    verdict(1, ok, f"1000 instances, max rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_chen_first(verdict, batch200):
    t0 = time.perf_counter()
    worst = np.inf
    for i, S in enumerate(batch200):
        lhs, rhs = chen_first_slacks(S, random_planes(i, 10_000, S.n))
        worst = min(worst, float(np.min(rhs - lhs)))
    elapsed = time.perf_counter() - t0
    eq = check_chen_fundamental(make_equality_basic(sasakian(4), 4, 1.0, 2.0), np.eye(4)[:2])
    ok = (worst >= -1e-8 and elapsed < 30 and abs(eq.slack) <= 1e-9
          and abs(eq.lhs - 32) <= 1e-9 and abs(eq.rhs - 32) <= 1e-9)
    verdict(2, ok, f"min slack {worst:.3e} over 2e6 planes in {elapsed:.2f}s; "
                   f"equality instance {eq.lhs:.12g} = {eq.rhs:.12g}")


def test_criterion_03_ricci_bound(verdict, batch200, d1233):
    worst = np.inf
    for i, S in enumerate(batch200):
        lhs, rhs = ricci_bound_slacks(S, random_units(i, 1000, S.n))
        worst = min(worst, float(np.min(rhs - lhs)))
    r = check_ricci_bound(d1233, np.eye(4)[0])
    # minimal instances: sigma^r vanishes on e_1 and is trace free on the rest
    A, E = sasakian(4), np.eye(9)[:4]
    null_err = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        free = np.zeros((4, 4, 4))
        for k in range(4):
            B = rng.standard_normal((3, 3))
            B = B + B.T
            free[k, 1:, 1:] = B - np.trace(B) / 3 * np.eye(3)
        S = build_submanifold(A, E, normal_completion(A, E), free)
        for U in relative_null_space(S).basis:
            null_err = max(null_err, abs(check_ricci_bound(S, U).lhs - 3 * A.f.f1))
    ok = (worst >= -1e-8 and abs(r.lhs - 11) <= 1e-12 and abs(r.rhs - 93 / 4) <= 1e-12
          and null_err <= 1e-9)
    verdict(3, ok, f"min slack {worst:.3e} over 2e5 vectors; diag(1,2,3,3) {r.lhs:.12g} vs {r.rhs:.12g}; "
                   f"null-space |Ric(U)-(n-1)f1| {null_err:.1e}")


def test_criterion_04_mean_vs_scalar(verdict, batch200):
    worst = min(check_mean_vs_scalar(S).slack for S in batch200)
    eq_err = 0.0
    for mode in ("general", "sasakian"):
        for n in (3, 4, 5):
            A = make_ambient(GeneratorSpec(m=5, n=n, mode=mode, seed=n))
            for lam in (0.0, 0.5, 1.0, 2.0):
                eq_err = max(eq_err, abs(check_mean_vs_scalar(make_totally_umbilical(A, n, lam)).slack))
    ok = worst >= -1e-8 and eq_err <= 1e-9
    verdict(4, ok, f"min slack {worst:.3e}; umbilical family max |slack| {eq_err:.1e}")


def test_criterion_05_delta_tuples(verdict):
    worst, count = np.inf, 0
    for n in (3, 4, 5):
        for seed in range(8):
            S = make_instance(GeneratorSpec(m=5, n=n, mode="sasakian", seed=seed,
                                            frame="rotated", conjugate=bool(seed % 2)))
            for j, t in enumerate(enumerate_tuples(n)):
                if t.k == 0:
                    continue
                lhs, rhs = delta_tuple_slacks(S, t, random_frames(100 * seed + j, 1000, n))
                worst = min(worst, float(np.min(rhs - lhs)))
                count += 1
    r = check_delta_tuple(make_totally_geodesic(sasakian(4), 4), TupleSpec((2,)), [np.eye(4)[:2]])
    cb = (r.extra["c"], r.extra["b"])
    ok = (worst >= -1e-8 and abs(r.lhs - 5) <= 1e-9 and abs(r.rhs - 5) <= 1e-9
          and np.allclose(cb, (16 / 3, 5), atol=1e-12))
    verdict(5, ok, f"min slack {worst:.3e} over {count} (instance, tuple) batches x 1000 frames; "
                   f"geodesic t=(2): {r.lhs:.12g} = {r.rhs:.12g}, (c, b) = ({cb[0]:.6g}, {cb[1]:.6g})")


def test_criterion_06_sasakian_suite(verdict):
    S = make_totally_geodesic(sasakian(3), 3)
    first, ric, psd = check_sasakian_suite(S, np.eye(3)[:2], np.eye(3)[0])
    geo_ok = (first.equality and ric.equality and abs(first.lhs - 2) <= 1e-9 and abs(ric.lhs - 2) <= 1e-9
              and psd.rhs >= -1e-12)
    worst = np.inf
    for i, T in enumerate(random_instances(100, seed=31, modes=("sasakian",))):
        U = random_units(i, 1, T.n)[0]
        pi = random_planes(i, 1, T.n)[0]
        # the PSD report's slack is the minimal eigenvalue of the gap matrix
        worst = min(worst, min(r.slack for r in check_sasakian_suite(T, pi, U)))
    ok = geo_ok and worst >= -1e-8
    verdict(6, ok, f"geodesic n=3: {first.lhs:.12g}={first.rhs:.12g}, {ric.lhs:.12g}={ric.rhs:.12g}, "
                   f"PSD margin {psd.rhs:.1e}; random min slack/eigenvalue {worst:.3e}")


def test_criterion_07_lemma_sweep(verdict):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    ok_all, eq_match, total = True, True, 0
    for n in range(2, 9):
        N = 100_000 // 7 + (100_000 % 7 if n == 2 else 0)
        a = rng.uniform(-3, 3, (N, n))
        # a quarter of the rows satisfy the equality structure exactly
        k = N // 4
        a[:k, 1] = rng.uniform(-3, 3, k)
        a[:k, 2:] = (a[:k, 0] + a[:k, 1])[:, None]
        last = a.sum(axis=1) ** 2 / (n - 1) - np.sum(a**2, axis=1)
        holds, eq, margin = chen_lemma_batch(np.column_stack([a, last]))
        values = np.column_stack([a[:, 0] + a[:, 1], a[:, 2:]])
        structural = values.max(axis=1) - values.min(axis=1) <= 1e-9
        scale = np.maximum(1.0, a.sum(axis=1) ** 2)
        ok_all &= bool(holds.all() and np.all(margin >= -1e-12 * scale))
        eq_match &= bool(np.array_equal(eq, structural))
        total += N
    elapsed = time.perf_counter() - t0
    ok = ok_all and eq_match and total == 100_000 and elapsed < 5
    verdict(7, ok, f"{total} tuples, predicate always holds: {ok_all}, equality flag iff structure: "
                   f"{eq_match}, {elapsed:.2f}s")


def test_criterion_08_oracle_agreement(verdict):
    budget = SearchBudget()
    gap, tau_err, order_ok = 0.0, 0.0, True
    instances = random_instances(20, seed=41, ns=(3,))
    for i, S in enumerate(instances):
        o = oracle_invariants(S, 1_000_000, seed=i, frame_density=2000)
        eng = inf_sectional(S, budget).value
        gap = max(gap, abs(eng - o["inf_K"]))
        tau_err = max(tau_err, abs(scalar_curvature(S) - o["tau"]))
        for t in enumerate_tuples(3):
            d, dt = delta_pair(S, t, budget)
            order_ok &= d.value >= dt.value - 1e-12
            order_ok &= o["delta"][str(t)] >= o["tilde_delta"][str(t)] - 1e-12
    ok = gap <= 1e-3 and tau_err <= 1e-10 and order_ok
    verdict(8, ok, f"20 instances n=3: max |inf K gap| {gap:.2e}, max |tau diff| {tau_err:.1e}, "
                   f"delta >= tilde delta: {order_ok}")


def test_criterion_09_detectors(verdict):
    matched, unmatched, worst_res, total, perturbed_total = 0, 0, 0.0, 0, 0
    for i in range(50):
        n = 3 + i % 3
        if i % 2 == 0:
            spec = GeneratorSpec(m=5, n=n, mode="sasakian", family="equality_basic", seed=i)
            S = make_instance(spec)
            rep = detect_equality_form_basic(S, np.eye(n)[:2])
            detect = lambda T: detect_equality_form_basic(T, np.eye(n)[:2])  # noqa: E731
            # off-diagonal in the first normal, outside the 2x2 block in the second, tail diagonal
            moves = [(0, 0, 2), (1, 0, 2), (0, 2, 2)]
        else:
            tuples = [t for t in enumerate_tuples(n) if t.k > 0]
            t = tuples[(i // 2) % len(tuples)]
            spec = GeneratorSpec(m=5, n=n, mode="sasakian", family="equality_delta",
                                 tuple_dims=t.dims, seed=i)
            S = make_instance(spec)
            rep = detect_equality_form_delta(S, t)
            detect = lambda T, t=t: detect_equality_form_delta(T, t)  # noqa: E731
            # block-to-tail coupling, and the tail diagonal
            moves = [(0, 0, n - 1), (1, 0, n - 1), (0, n - 1, n - 1)]
        total += 1
        matched += rep.matched and rep.residual <= 1e-7
        worst_res = max(worst_res, rep.residual)
        for r, a, b in moves:
            perturbed_total += 1
            unmatched += not detect(perturbed(S, r, a, b)).matched
    exact_ok, exact_count = True, 0
    for n in (3, 4, 5):
        for T in [make_totally_geodesic(sasakian(n), n)] + [
                make_totally_umbilical(sasakian(n), n, lam) for lam in (0.5, 1.0, 2.0)]:
            for k in range(2, n + 1):
                r = check_theta_bound(T, k)
                exact_count += 1
                exact_ok &= r.mode == "exact" and r.equality and abs(r.slack) <= 1e-9
    modes = [check_theta_bound(S, 2, SearchBudget(samples=256, multistarts=2)).mode
             for S in random_instances(5, seed=51, ns=(4, 5))]
    conservative_ok = all(m == "conservative" for m in modes)
    ok = matched == total == 50 and unmatched == perturbed_total and exact_ok and conservative_ok
    verdict(9, ok, f"{matched}/{total} matched (max residual {worst_res:.1e}), "
                   f"{unmatched}/{perturbed_total} perturbations unmatched; theta exact on "
                   f"{exact_count} constant-curvature cases: {exact_ok}; random k<n conservative: "
                   f"{conservative_ok}")


def _tree(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_criterion_10_determinism(verdict, tmp_path):
    outs = {}
    for run in ("a", "b"):
        for workers in (1, 4):
            g = tmp_path / f"gen_{run}_{workers}"
            rc1 = cli.main(["--seed", "9", "--workers", str(workers), "gen", "--mode", "sasakian",
                            "--m", "4", "--n", "3", "--count", "6", "--out", str(g)])
            rep = tmp_path / f"rep_{run}_{workers}.json"
            table = tmp_path / f"rep_{run}_{workers}.csv"
            rc2 = cli.main(["--seed", "9", "--workers", str(workers), "check", str(g), "--planes", "256",
                            "--vectors", "256", "--frames", "128", "--out", str(rep), "--csv", str(table)])
            assert rc1 == rc2 == 0
            outs[(run, workers)] = (_tree(g), rep.read_bytes(), table.read_bytes())
    ref = outs[("a", 1)]
    ok = all(v == ref for v in outs.values())
    verdict(10, ok, f"gen/check byte-identical across 2 runs x workers {{1, 4}}: {ok}")
