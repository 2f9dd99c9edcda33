import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chen_bounds.ambient import AmbientPoint, FCoefficients
from chen_bounds.errors import (
    BadPlane,
    BadTuple,
    DimensionTooSmall,
    HypothesisViolated,
    NotSasakianMode,
    NotUnit,
    TupleNotInS,
)
from chen_bounds.forge import (
    make_equality_basic,
    make_equality_delta,
    make_totally_geodesic,
    make_totally_umbilical,
    random_delta_blocks,
)
from chen_bounds.inequalities import (
    InequalityReport,
    check_chen_fundamental,
    check_delta_tuple,
    check_mean_vs_scalar,
    check_ricci_bound,
    check_sasakian_suite,
    check_scalar_identity,
    check_theta_bound,
    chen_first_slacks,
    chen_lemma_check,
    delta_tuple_slacks,
    detect_equality_form_basic,
    detect_equality_form_delta,
    ricci_bound_slacks,
)
from chen_bounds.invariants import (
    SearchBudget,
    TupleSpec,
    coordinate_planes,
    enumerate_tuples,
    inf_sectional,
    random_frames,
    random_planes,
    random_units,
)
from chen_bounds.submanifold import build_submanifold, relative_null_space

from conftest import diagonal_instance, instance, random_instances, unit_f1

E4 = np.eye(4)


def sasakian(m, f1=1.0):
    return AmbientPoint.canonical(m, unit_f1(f1))


def perturbed(S, r, i, j, eps=0.1):
    free = np.array(S.sigma[:-1])
    free[r, i, j] += eps
    free[r, j, i] = free[r, i, j]
    return build_submanifold(S.ambient, S.tangent_frame, S.normal_frame, free)


# ---------------------------------------------------------------- identity


def test_scalar_identity_examples(d1233):
    r = check_scalar_identity(diagonal_instance([0, 0, 0]))
    assert (r.lhs, r.rhs) == pytest.approx((6, 6)) and r.equality
    r = check_scalar_identity(d1233)
    assert (r.lhs, r.rhs) == pytest.approx((70, 70)) and r.equality and r.passed


def test_scalar_identity_random():
    for S in random_instances(150, seed=3):
        r = check_scalar_identity(S)
        assert abs(r.lhs - r.rhs) <= 1e-9 * (1 + abs(r.lhs)), r.to_dict()


def test_scalar_identity_any_n():
    S = instance(m=3, n=2, seed=2, frame="rotated")
    assert check_scalar_identity(S).equality


# ---------------------------------------------------------------- Chen first


def test_chen_first_umbilical():
    S = make_totally_umbilical(sasakian(3), 3, 1.0)
    r = check_chen_fundamental(S, E4[:2, :3])
    assert (r.lhs, r.rhs) == pytest.approx((4.0, 4.25))
    assert r.slack == pytest.approx(0.25) and r.passed and not r.equality


def test_chen_first_equality_instance():
    S = make_equality_basic(sasakian(4), 4, 1.0, 2.0)
    r = check_chen_fundamental(S, E4[:2])
    assert (r.lhs, r.rhs) == pytest.approx((32.0, 32.0))
    assert r.equality and abs(r.slack) <= 1e-9


def test_chen_first_totally_geodesic_every_plane():
    S = make_totally_geodesic(sasakian(3), 3)
    for p in random_planes(1, 20, 3):
        r = check_chen_fundamental(S, p)
        assert (r.lhs, r.rhs) == pytest.approx((2.0, 2.0)) and r.equality


def test_chen_first_errors():
    with pytest.raises(DimensionTooSmall):
        check_chen_fundamental(instance(m=3, n=2, seed=0), np.eye(2))
    with pytest.raises(BadPlane):
        check_chen_fundamental(instance(m=3, n=3, seed=0), np.eye(3))


def test_chen_first_vectorized_matches_scalar():
    S = instance(m=4, n=4, seed=3, frame="rotated", conjugate=True)
    P = random_planes(2, 30, 4)
    lhs, rhs = chen_first_slacks(S, P)
    for s in range(30):
        r = check_chen_fundamental(S, P[s])
        assert (r.lhs, r.rhs) == pytest.approx((lhs[s], rhs[s]), abs=1e-11)


def test_chen_first_plane_independent_rhs_monotone():
    # with f4 = f51 = f52 = 0 the rhs is plane independent, so the inf witness has the smallest slack
    S = instance(m=4, n=4, mode="sasakian", seed=5, frame="rotated")
    w = check_chen_fundamental(S, inf_sectional(S).witness).slack
    for p in random_planes(3, 50, 4):
        assert w <= check_chen_fundamental(S, p).slack + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_chen_first_random_nonnegative(seed):
    for S in random_instances(20, seed=seed):
        P = np.concatenate([coordinate_planes(S.n), random_planes(seed, 2000, S.n)])
        lhs, rhs = chen_first_slacks(S, P)
        assert np.min(rhs - lhs) >= -1e-8


# ---------------------------------------------------------------- Ricci


def test_ricci_examples(d1233):
    r = check_ricci_bound(d1233, E4[0])
    assert (r.lhs, r.rhs) == pytest.approx((11.0, 93 / 4)) and r.slack == pytest.approx(49 / 4)
    S = make_totally_geodesic(sasakian(3), 3)
    r = check_ricci_bound(S, np.eye(3)[1])
    assert (r.lhs, r.rhs) == pytest.approx((2.0, 2.0)) and r.equality
    assert relative_null_space(S).dim == 3


def test_ricci_equality_on_null_space_of_minimal_instance():
    A = sasakian(4)
    E = np.eye(9)[:4]
    from chen_bounds.submanifold import normal_completion

    for seed in range(5):
        rng = np.random.default_rng(seed)
        free = np.zeros((4, 4, 4))
        for r in range(4):
            B = rng.standard_normal((3, 3))
            B = B + B.T
            B -= np.trace(B) / 3 * np.eye(3)
            free[r, 1:, 1:] = B
        S = build_submanifold(A, E, normal_completion(A, E), free)
        N = relative_null_space(S)
        assert N is not None
        for U in N.basis:
            r = check_ricci_bound(S, U)
            assert abs(r.lhs - 3 * A.f.f1) <= 1e-9 and r.equality


def test_ricci_errors():
    S = instance(m=3, n=3, seed=1)
    with pytest.raises(NotUnit):
        check_ricci_bound(S, [1.0, 1.0, 0.0])
    with pytest.raises(DimensionTooSmall):
        check_ricci_bound(instance(m=3, n=2, seed=0), [1.0, 0.0])


@pytest.mark.parametrize("seed", range(3))
def test_ricci_random_nonnegative(seed):
    for S in random_instances(20, seed=seed + 10):
        U = np.concatenate([np.eye(S.n), random_units(seed, 2000, S.n)])
        lhs, rhs = ricci_bound_slacks(S, U)
        assert np.min(rhs - lhs) >= -1e-8
        r = check_ricci_bound(S, U[7])
        assert (r.lhs, r.rhs) == pytest.approx((lhs[7], rhs[7]), abs=1e-10)


# ---------------------------------------------------------------- mean vs scalar and theta


def test_mean_vs_scalar_examples(d1233):
    r = check_mean_vs_scalar(diagonal_instance([0, 0, 0]))
    assert (r.lhs, r.rhs) == pytest.approx((0, 0), abs=1e-12) and r.equality
    r = check_mean_vs_scalar(d1233)
    assert (r.lhs, r.rhs) == pytest.approx((58, 60.75)) and r.slack == pytest.approx(2.75)
    for lam in (0.0, 0.5, 1.0, 2.0):
        r = check_mean_vs_scalar(make_totally_umbilical(sasakian(3), 3, lam))
        assert r.rhs == pytest.approx(6 * lam**2) and r.equality


def test_mean_vs_scalar_random():
    for S in random_instances(60, seed=5):
        assert check_mean_vs_scalar(S).passed


def test_theta_bound_exact_on_constant_curvature():
    for lam in (0.0, 0.7):
        S = make_totally_umbilical(sasakian(4), 4, lam)
        for k in (2, 3, 4):
            r = check_theta_bound(S, k)
            assert r.mode == "exact" and r.extra["theta_k"] == pytest.approx(1 + lam**2)
            assert r.equality and r.passed


def test_theta_bound_conservative_on_random():
    S = instance(m=5, n=5, seed=3, frame="rotated")
    r = check_theta_bound(S, 3, SearchBudget(samples=256, multistarts=2))
    assert r.mode == "conservative"
    assert r.passed is None and r.equality is False
    assert r.to_dict()["passed"] is None
    # the intermediate chain bound is exact
    assert r.extra["chain_lhs"] <= r.rhs + 1e-8
    # k = n is closed form, so exact
    assert check_theta_bound(S, 5).mode == "exact"


# ---------------------------------------------------------------- Sasakian suite


def test_sasakian_suite_totally_geodesic():
    S = make_totally_geodesic(sasakian(3), 3)
    first, ric, psd = check_sasakian_suite(S, np.eye(3)[:2], np.eye(3)[0])
    assert (first.lhs, first.rhs) == pytest.approx((2, 2)) and first.equality
    assert (ric.lhs, ric.rhs) == pytest.approx((2, 2)) and ric.equality
    assert psd.rhs == pytest.approx(0.0, abs=1e-12) and psd.passed


def test_sasakian_suite_d1233(d1233):
    _, _, psd = check_sasakian_suite(d1233, E4[:2], E4[0])
    assert psd.rhs >= 0


def test_sasakian_suite_random():
    for S in random_instances(40, seed=7, modes=("sasakian",)):
        U = random_units(1, 1, S.n)[0]
        for r in check_sasakian_suite(S, np.eye(S.n)[:2], U):
            assert r.passed, r.to_dict()


def test_sasakian_suite_rejects_h():
    S = instance(m=3, n=3, seed=0)
    with pytest.raises(NotSasakianMode):
        check_sasakian_suite(S, np.eye(3)[:2], np.eye(3)[0])


# ---------------------------------------------------------------- delta tuples


def test_delta_tuple_examples():
    t = TupleSpec((2,))
    r = check_delta_tuple(make_totally_geodesic(sasakian(4), 4), t, [E4[:2]])
    assert (r.lhs, r.rhs) == pytest.approx((5, 5)) and r.equality
    assert (r.extra["c"], r.extra["b"]) == pytest.approx((16 / 3, 5))
    r = check_delta_tuple(make_totally_umbilical(sasakian(4), 4, 1.0), t, [E4[:2]])
    assert (r.lhs, r.rhs) == pytest.approx((10, 31 / 3)) and r.slack == pytest.approx(1 / 3)


def test_delta_tuple_errors():
    S = make_totally_geodesic(sasakian(4), 4)
    with pytest.raises(TupleNotInS):
        check_delta_tuple(S, TupleSpec((4,)), [E4])
    with pytest.raises(BadTuple):
        check_delta_tuple(S, TupleSpec((2, 2)), [E4[:2], E4[1:3]])
    with pytest.raises(BadTuple):
        check_delta_tuple(S, TupleSpec((2,)), [E4[:3]])
    with pytest.raises(NotSasakianMode):
        check_delta_tuple(instance(m=4, n=4, seed=0), TupleSpec((2,)), [E4[:2]])


@pytest.mark.parametrize("n", [3, 4, 5])
def test_delta_tuple_random_nonnegative(n):
    for seed in range(6):
        S = instance(m=n, n=n, mode="sasakian", seed=seed, frame="rotated")
        for t in enumerate_tuples(n)[1:]:
            lhs, rhs = delta_tuple_slacks(S, t, random_frames(seed, 500, n))
            assert np.min(rhs - lhs) >= -1e-8


def test_delta_tuple_equality_instances():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5):
        A = sasakian(n)
        for t in enumerate_tuples(n)[1:]:
            S = make_equality_delta(A, n, t, random_delta_blocks(rng, t, 2 * n + 1 - n - 1))
            L, start = [], 0
            for d in t.dims:
                L.append(np.eye(n)[start:start + d])
                start += d
            r = check_delta_tuple(S, t, L)
            assert abs(r.slack) <= 1e-9, (n, t, r.slack)


# ---------------------------------------------------------------- detectors


def test_basic_detector_round_trip():
    S = make_equality_basic(sasakian(4), 4, 1.0, 2.0, [0.3, -1.0, 0.0], [0.5, 0.2, 0.0])
    rep = detect_equality_form_basic(S, E4[:2])
    assert rep.matched and rep.residual <= 1e-12
    assert (rep.parameters["a"], rep.parameters["b"]) == pytest.approx((1.0, 2.0))
    assert check_chen_fundamental(S, E4[:2]).equality


def test_basic_detector_perturbation():
    S = make_equality_basic(sasakian(4), 4, 1.0, 2.0)
    rep = detect_equality_form_basic(perturbed(S, 0, 0, 2), E4[:2])
    assert not rep.matched and rep.residual == pytest.approx(0.1, rel=0.2)


def test_basic_detector_in_form_perturbation_stays_matched():
    # a change inside the pi-block keeps tr(A|pi) and so stays an equality instance
    S = perturbed(make_equality_basic(sasakian(4), 4, 1.0, 2.0), 0, 0, 1)
    assert detect_equality_form_basic(S, E4[:2]).matched
    assert check_chen_fundamental(S, E4[:2]).equality


def test_basic_detector_geodesic():
    rep = detect_equality_form_basic(make_totally_geodesic(sasakian(3), 3), np.eye(3)[:2])
    assert rep.matched
    assert (rep.parameters["a"], rep.parameters["b"]) == pytest.approx((0, 0))


def test_basic_detector_zero_mean_curvature_gauge():
    # H = 0 with the nonzero diagonal operator sitting on the second normal
    A = sasakian(4)
    S0 = make_equality_basic(A, 4, 1.0, -1.0)
    free = np.array(S0.sigma[:-1])
    free[[0, 2]] = free[[2, 0]]
    S = build_submanifold(A, S0.tangent_frame, S0.normal_frame, free)
    assert detect_equality_form_basic(S, E4[:2]).matched


def test_delta_detector():
    A = sasakian(4)
    t = TupleSpec((2,))
    blocks = [[np.diag([2.0, 0.0])]] + [[np.zeros((2, 2))]] * 3
    S = make_equality_delta(A, 4, t, blocks)
    assert np.allclose(S.sigma[0], np.diag([2.0, 0.0, 2.0, 2.0]))
    rep = detect_equality_form_delta(S, t)
    assert rep.matched and rep.parameters["a"][0] == pytest.approx(2.0)
    assert not detect_equality_form_delta(perturbed(S, 0, 0, 2), t).matched
    for lam, want in ((0.0, True), (1.0, False)):
        U = make_totally_umbilical(A, 4, lam)
        assert detect_equality_form_delta(U, t).matched is want
    with pytest.raises(TupleNotInS):
        detect_equality_form_delta(S, TupleSpec((4,)))


def test_delta_form_equality_example():
    S = make_equality_delta(sasakian(4), 4, TupleSpec((2,)), [[np.diag([2.0, 0.0])]])
    r = check_delta_tuple(S, TupleSpec((2,)), [E4[:2]])
    assert r.lhs == pytest.approx(12 + 5) and r.equality


# ---------------------------------------------------------------- lemma


def test_lemma_examples():
    x, y = 0.3, -1.7
    res = chen_lemma_check([x, y, 2 * x * y])
    assert res.holds and res.equality
    res = chen_lemma_check([1, 1, 2, 2])
    assert res.holds and res.equality and res.margin == pytest.approx(0)
    with pytest.raises(HypothesisViolated):
        chen_lemma_check([1, 1, 2, 3])


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_lemma_property(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-3, 3, n)
    last = a.sum() ** 2 / (n - 1) - np.sum(a**2)
    res = chen_lemma_check(np.append(a, last))
    assert res.holds and res.margin >= -1e-12 * max(1, abs(last), a.sum() ** 2)
    assert not res.equality or n == 2


def test_lemma_equality_structure():
    a = [0.4, 0.6, 1.0, 1.0, 1.0]
    last = sum(a) ** 2 / 4 - sum(v * v for v in a)
    res = chen_lemma_check(a + [last])
    assert res.equality and res.margin == pytest.approx(0, abs=1e-12)


# ---------------------------------------------------------------- report


def test_report_dict_shape():
    r = InequalityReport("x", 1.0, 2.0)
    d = r.to_dict()
    assert set(d) >= {"name", "lhs", "rhs", "slack", "equality", "mode", "witness", "tolerances"}
    assert d["slack"] == 1.0 and d["passed"] is True
    bad = InequalityReport("y", 1.0, 1.0 - 1e-7)
    assert bad.passed is False
    cons = InequalityReport("z", 5.0, 1.0, mode="conservative")
    assert cons.passed is None and cons.equality is False


def test_lemma_batch_matches_scalar():
    from chen_bounds.inequalities import chen_lemma_batch

    rng = np.random.default_rng(3)
    a = rng.uniform(-2, 2, (200, 4))
    a[::4, 2] = a[::4, 0] + a[::4, 1]
    a[::4, 3] = a[::4, 2]
    last = a.sum(axis=1) ** 2 / 3 - np.sum(a**2, axis=1)
    rows = np.column_stack([a, last])
    holds, eq, margin = chen_lemma_batch(rows)
    for i, row in enumerate(rows):
        ref = chen_lemma_check(row)
        assert (holds[i], eq[i]) == (ref.holds, ref.equality)
        assert margin[i] == pytest.approx(ref.margin)
    assert eq[::4].all()
    bad = rows.copy()
    bad[5, -1] += 1.0
    with pytest.raises(HypothesisViolated, match="row 5"):
        chen_lemma_batch(bad)
