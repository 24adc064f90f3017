import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relucalc import affine_net, identity_net
from relucalc.catalog import CONSTRUCTIONS, Params, get_construction
from relucalc.constructions import (
    build_clip,
    build_loclip_1d,
    build_max,
    build_prod,
    build_running_max,
    build_running_prod,
    build_square,
    build_square01,
    named_function,
)
from relucalc.errors import ContainmentError
from relucalc.verify import (
    CSV_HEADER,
    Approximant,
    BoundCheck,
    Box,
    Claims,
    SweepCellError,
    VerifyReport,
    cell_seed,
    check_bounds,
    composition_cost_check,
    estimate_lipschitz,
    estimate_sup_error,
    sample_points,
    sweep,
    verify,
)


# bound checks ------------------------------------------------------------------


def test_bound_check_tolerance():
    assert BoundCheck.at_most("x", 1.0, 1.0).passed
    assert BoundCheck.at_most("x", 1.0 + 1e-10, 1.0).passed
    assert not BoundCheck.at_most("x", 1.0 + 1e-8, 1.0).passed
    assert BoundCheck.at_most("x", 1e6 + 1e-4, 1e6).passed
    assert not BoundCheck.at_most("x", 1e6 + 1e-2, 1e6).passed


@given(st.floats(-1e9, 1e9), st.floats(-1e9, 1e9))
def test_bound_check_rule(measured, bound):
    check = BoundCheck.at_most("q", measured, bound)
    assert check.passed == (measured <= bound + 1e-9 * (1 + abs(bound)))


def test_equality_checks_are_exact():
    assert BoundCheck.equal("p", 22, 22).passed
    assert not BoundCheck.equal("p", 23, 22).passed
    assert "==" in str(BoundCheck.equal("p", 23, 22))


def test_max_four_size_check():
    (check,) = check_bounds(build_max(4), Claims(params=3 * 16 + 18 * 4 + 12 * 2 - 6.5))
    assert check.measured == 55 and check.bound == 137.5 and check.passed


@pytest.mark.parametrize("d", range(1, 65))
def test_identity_size_as_equality(d):
    (check,) = check_bounds(identity_net(d), Claims(params_exact=4 * d * d + 3 * d))
    assert check.passed and check.relation == "=="


def test_clip_ten_size():
    (check,) = check_bounds(build_clip(-1, 1, 10), Claims(params_exact=330))
    assert check.passed


def test_report_rejects_duplicate_labels_and_empty_samples():
    c = BoundCheck.at_most("a", 0, 1)
    with pytest.raises(ValueError, match="duplicate"):
        VerifyReport(0.0, 0.0, 1, (c, c), 1, 0)
    with pytest.raises(ValueError):
        VerifyReport(0.0, 0.0, 1, (c,), 0, 0)


# estimators --------------------------------------------------------------------


def test_identity_error_is_zero():
    assert estimate_sup_error(identity_net(3), lambda x: x, 2.0, samples=1000) == 0.0


def test_max_error_is_rounding_only():
    assert estimate_sup_error(build_max(4), lambda x: x.max(axis=1, keepdims=True), 3.0, 5000) <= 1e-12


def test_square01_error_estimate():
    err = estimate_sup_error(build_square01(0.01), lambda x: x**2, Box((0.0,), (1.0,)), 10**4)
    assert err <= 0.01


def test_linear_map_lipschitz_estimate():
    est = estimate_lipschitz(affine_net(2 * np.eye(3)), 1.0, 2000, seed=4)
    assert abs(est - 2) <= 1e-6


def test_max_and_square_lipschitz_estimates():
    assert estimate_lipschitz(build_max(8), 1.0, 4000, seed=1) <= 1 + 1e-9
    assert estimate_lipschitz(build_square(1.0, 0.01), 1.0, 4000, seed=1) <= 2 + 1e-9


def test_lipschitz_estimate_finds_steepest_segment():
    # the steepest of ~1000 short segments sits at 0, where sin' = 1
    net = build_loclip_1d(named_function("sin"), 1.0, 0.001)
    est = estimate_lipschitz(net, 1.0, 2000, seed=0)
    assert 0.99 <= est <= 1 + 1e-9


def test_estimators_reject_zero_samples():
    with pytest.raises(ValueError):
        estimate_sup_error(identity_net(1), lambda x: x, 1.0, samples=0)
    with pytest.raises(ValueError):
        sample_points(Box.cube(2, 1.0), 0, 0)


def test_sampling_methods():
    box = Box((0.0, -1.0), (1.0, 1.0))
    grid = sample_points(box, 100, 0)
    assert grid.shape == (100, 2)
    assert {tuple(p) for p in grid} >= {(0.0, -1.0), (1.0, 1.0)}
    box3 = Box.cube(3, 2.0)
    pts = sample_points(box3, 500, 7)
    assert pts.shape == (508, 3)
    assert np.all(np.abs(pts) <= 2.0)
    # one point per stratum along each axis
    for j in range(3):
        strata = np.floor((pts[:500, j] + 2.0) / 4.0 * 500).astype(int)
        assert sorted(strata) == list(range(500))
    u = sample_points(box3, 50, 7, "uniform")
    assert u.shape == (50, 3)
    with pytest.raises(ValueError):
        sample_points(box3, 5, 0, "sobol")


def test_sampling_is_seeded():
    box = Box.cube(4, 1.0)
    a, b, c = (sample_points(box, 300, s) for s in (5, 5, 6))
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != c.tobytes()


def test_domain_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        estimate_sup_error(identity_net(2), lambda x: x, Box.cube(3, 1.0))


def test_box_validation_and_containment():
    with pytest.raises(ValueError):
        Box((1.0,), (0.0,))
    assert Box.cube(2, 2.0).contains(Box.cube(2, 1.0))
    assert not Box.cube(2, 1.0).contains(Box((0.0, 0.0), (1.0, 1.5)))
    assert Box.cube(3, 2.5).radius == 2.5


# verify --------------------------------------------------------------------------


def _sin_oracle(x):
    return np.sin(x)


def test_verify_loclip_sin_claims_pass():
    net = build_loclip_1d(named_function("sin"), 1.0, 0.1)
    rep = verify(net, _sin_oracle, 1.0, Claims(error=0.1, lipschitz=3.0, params=370), seed=1)
    assert rep.passed, rep.summary()
    assert {c.label for c in rep.checks} == {"error", "lipschitz", "params"}
    assert rep.sample_count == 10_000 and rep.seed == 1


def test_verify_flags_a_loosened_network():
    net = build_loclip_1d(named_function("sin"), 1.0, 0.1)
    err = estimate_sup_error(net, _sin_oracle, 1.0)
    rep = verify(net, _sin_oracle, 1.0, Claims(error=err / 2, lipschitz=3.0, params=370))
    assert not rep.passed
    assert [c.label for c in rep.failures()] == ["error"]
    assert "FAIL error" in rep.summary()


def test_verify_product_claims_pass():
    d, R, eps = 3, 1.0, 0.01
    claims = Claims(
        error=eps,
        lipschitz=math.sqrt(32) * d**2.5 * R ** (2 * d - 1),
        params=1896 * d**3 + 360 * math.log2(1 / eps) * d**2,
    )
    rep = verify(build_prod(d, R, eps), lambda x: x.prod(axis=1, keepdims=True), R, claims, seed=3)
    assert rep.passed, rep.summary()


def test_verify_is_deterministic():
    net = build_running_max(4)
    oracle = lambda x: np.maximum.accumulate(x, axis=1)
    a = verify(net, oracle, 2.0, Claims(lipschitz=2.0), 3000, 3000, seed=99)
    b = verify(net, oracle, 2.0, Claims(lipschitz=2.0), 3000, 3000, seed=99)
    assert a == b and a.summary() == b.summary()


@given(st.integers(0, 2**63))
def test_lipschitz_estimate_never_exceeds_true_constant(seed):
    w = np.array([[3.0, -4.0]])
    assert estimate_lipschitz(affine_net(w), 1.0, 200, seed=seed) <= 5.0 * (1 + 1e-12)


# composition cost ------------------------------------------------------------------


def test_composition_clip_then_running_product():
    d, R = 2, 3.0
    f1 = Approximant(
        build=lambda e: build_clip(-1, 1, d),
        oracle=lambda x: np.clip(x, -1, 1),
        domain=Box.cube(d, R),
        image=Box.cube(d, 1.0),
        lipschitz=1.0,
    )
    f2 = Approximant(
        build=lambda e: build_running_prod(d, 1.0, e),
        oracle=lambda x: np.cumprod(x, axis=1),
        domain=Box.cube(d, 1.0),
        image=Box.cube(d, 1.0),
        lipschitz=math.sqrt(32) * d**3,
    )
    rep = composition_cost_check(f1, f2, 0.1, seed=2)
    assert rep.passed, rep.summary()
    p_clip = build_clip(-1, 1, d).param_count
    p_prod = build_running_prod(d, 1.0, 0.05).param_count
    bound = next(c for c in rep.checks if c.label == "params").bound
    assert bound == 4 * d * (d + 1) + 2 * p_clip + 2 * p_prod


def test_composition_of_identities_is_exact():
    d = 3
    ident = Approximant(lambda e: identity_net(d), lambda x: x, Box.cube(d, 2.0), Box.cube(d, 2.0), 1.0)
    rep = composition_cost_check(ident, ident, 0.1)
    assert rep.passed and rep.sup_error_estimate == 0.0


def test_composition_tanh_then_square():
    tanh = named_function("tanh")
    f1 = Approximant(lambda e: build_loclip_1d(tanh, 1.0, min(e, 1.0)), tanh, Box.cube(1, 1.0), Box.cube(1, 1.0), 1.0)
    f2 = Approximant(lambda e: build_square(1.0, e), lambda x: x**2, Box.cube(1, 1.0), Box((0.0,), (1.0,)), 2.0)
    eps = 0.05
    rep = composition_cost_check(f1, f2, eps, seed=5)
    assert rep.passed, rep.summary()
    assert rep.sup_error_estimate <= eps


def test_composition_requires_containment():
    big = Approximant(lambda e: identity_net(1), lambda x: x, Box.cube(1, 2.0), Box.cube(1, 2.0), 1.0)
    small = Approximant(lambda e: identity_net(1), lambda x: x, Box.cube(1, 1.0), Box.cube(1, 1.0), 1.0)
    with pytest.raises(ContainmentError, match="not inside"):
        composition_cost_check(big, small, 0.1)


# sweeps ----------------------------------------------------------------------------------


def test_sweep_rows_and_csv():
    res = sweep("running_max", [2, 3, 4], [1.0], [0.5, 0.1], seed=3, samples=500, pair_samples=500)
    assert res.passed and len(res.rows) == 6
    text = res.to_csv()
    assert "\r" not in text and text.endswith("\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1][:3] == ["2", "1.0", "0.5"]
    assert rows[1][-1] == "true"
    assert float(rows[1][4]) <= 1e-12
    d_exp, eps_exp = res.fitted_exponents
    assert d_exp is not None and eps_exp is None


def test_sweep_fit_recovers_known_power():
    from relucalc.verify import CellSpec

    def cell(d, R, eps):
        # a chain of identities whose size is 4 d^2 + 3 d exactly
        return CellSpec(identity_net(d), lambda x: x, Box.cube(d, R), Claims(error=0.0))

    res = sweep(cell, [4, 8, 16, 32, 64], [1.0], [0.1], seed=0, samples=50, pair_samples=50)
    sizes = [4 * d * d + 3 * d for d in (4, 8, 16, 32, 64)]
    lx, ly = np.log([4, 8, 16, 32, 64]), np.log(sizes)
    slope = np.polyfit(lx, ly, 1)[0]
    assert abs(res.d_fit.slope - slope) <= 1e-10
    assert res.d_fit.points == 5 and res.d_fit.residual < 0.05


def test_sweep_eps_fit_for_products():
    res = sweep("prod", [3], [1.0], [0.1, 0.01, 0.001], seed=1, samples=500, pair_samples=500)
    assert res.passed
    assert res.fitted_exponents[0] is None
    assert 0 < res.fitted_exponents[1] <= 0.2


def test_sweep_is_deterministic_and_order_free():
    a = sweep("max", [2, 5], [1.0, 2.0], [0.1], seed=8, samples=300, pair_samples=300)
    b = sweep("max", [2, 5], [1.0, 2.0], [0.1], seed=8, samples=300, pair_samples=300, workers=3)
    assert a.to_csv() == b.to_csv()
    c = sweep("max", [5], [2.0], [0.1], seed=8, samples=300, pair_samples=300)
    assert c.rows[0] == a.rows[-1]


def test_cell_seeds_differ_between_cells():
    seeds = {cell_seed(1, d, R, e) for d in (1, 2) for R in (1.0, 2.0) for e in (0.1, 0.01)}
    assert len(seeds) == 8
    assert cell_seed(1, 2, 1.0, 0.1) == cell_seed(1, 2, 1.0, 0.1)


def test_sweep_reports_failing_cell():
    with pytest.raises(SweepCellError) as info:
        sweep("square01", [1], [1.0], [0.5, 2.0], seed=0, samples=10, pair_samples=10)
    assert info.value.cell == (1, 1.0, 2.0)
    assert "eps=2.0" in str(info.value)


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError, match="nonempty"):
        sweep("max", [], [1.0], [0.1])


def test_sweep_marks_violated_claims():
    from relucalc.verify import CellSpec

    def cell(d, R, eps):
        return CellSpec(identity_net(d), lambda x: 0 * x, Box.cube(d, R), Claims(error=eps))

    res = sweep(cell, [1], [1.0], [0.1], seed=0, samples=20, pair_samples=20)
    assert not res.passed
    assert res.rows[0].failures and "error" in res.rows[0].failures[0]
    assert res.to_csv().strip().endswith("false")


# catalog ----------------------------------------------------------------------------


def test_catalog_lookup():
    assert get_construction("max").name == "max"
    with pytest.raises(KeyError, match="running_max"):
        get_construction("maxx")


def test_catalog_missing_parameters():
    with pytest.raises(ValueError, match="--eps"):
        CONSTRUCTIONS["square"].validate(Params(R=1.0))


@pytest.mark.parametrize("name", sorted(CONSTRUCTIONS))
def test_catalog_entries_have_summaries(name):
    c = CONSTRUCTIONS[name]
    assert c.summary and c.name == name
