import math

import numpy as np
import pytest

from akscal import zbound

ROOT2 = math.sqrt(2.0)


# -- model construction and serialization -----------------------------------


def test_make_model_validation():
    with pytest.raises(ValueError):
        zbound.make_model("x", [[2]], [1], n=2)            # det != +-1
    with pytest.raises(ValueError):
        zbound.make_model("x", [[1, 0], [1, 1]], [1, 1], n=2)   # asymmetric
    with pytest.raises(ValueError):
        zbound.make_model("x", [[1]], [1, 2], n=2)         # c1 length
    with pytest.raises(ValueError):
        zbound.make_model("x", [[1]], [1], n=4)
    with pytest.raises(ValueError):
        zbound.make_model("x", [[1]], [1], n=3)            # missing fiber_chern
    with pytest.raises(ValueError):
        zbound.make_model("x", [[1]], [1], n=2, seed=[1.0, 2.0])


def test_serialize_round_trip():
    for m in (zbound.cp2_model(), zbound.barlow_sigma_model(),
              zbound.r8_sigma_model()):
        back = zbound.parse_model(zbound.serialize_model(m))
        assert back.name == m.name and back.n == m.n
        assert (back.q == m.q).all() and (back.c1 == m.c1).all()
        assert back.fiber_chern == m.fiber_chern
        assert back.seed == m.seed


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        zbound.parse_model("name x\nn 7\n")
    with pytest.raises(ValueError):
        zbound.parse_model("")


# -- evaluation --------------------------------------------------------------


def test_cp2_value():
    m = zbound.cp2_model()
    v = zbound.eval_z_bound(m, [1.0])
    assert abs(v - 12.0 * ROOT2 * math.pi) <= 1e-9
    assert zbound.top_power(m, [1.0]) == 1.0
    assert zbound.chern_pairing(m, [1.0]) == 3.0


def test_eval_is_scale_invariant():
    m = zbound.cp2_model()
    base = zbound.eval_z_bound(m, [1.0])
    for lam in (0.3, 2.0, 17.0):
        assert zbound.eval_z_bound(m, [lam]) == pytest.approx(base, rel=1e-12)
    mb = zbound.barlow_sigma_model()
    cls = np.array([-3.0, 1, 1, 1, 1, 1, 1, 1, 1, 2.0])
    assert zbound.eval_z_bound(mb, 0.7 * cls) == pytest.approx(
        zbound.eval_z_bound(mb, cls), rel=1e-12)


def test_cone_rejection():
    rev = zbound.reversed_cp2_model()
    for cls in ([1.0], [-1.0]):
        with pytest.raises(zbound.ConeError):
            zbound.eval_z_bound(rev, cls)
    with pytest.raises(zbound.ConeError):
        zbound.eval_z_bound(zbound.barlow_sigma_model(),
                            [0, 1, 0, 0, 0, 0, 0, 0, 0, 1])


def test_barlow_optimum():
    res = zbound.optimize_z_bound(zbound.barlow_sigma_model())
    assert not res.unbounded
    assert abs(res.value - (-12.0 * math.pi)) <= 1e-6
    want = np.array([-3.0, 1, 1, 1, 1, 1, 1, 1, 1, 2.0])
    a = res.argmax / np.linalg.norm(res.argmax)
    b = want / np.linalg.norm(want)
    assert np.linalg.norm(a - b) <= 1e-4


def test_positive_ray_is_unbounded():
    res = zbound.optimize_z_bound(zbound.r8_sigma_model())
    assert res.unbounded and math.isinf(res.value) and res.argmax is None


def test_optimizer_start_override():
    m = zbound.cp2_model()
    res = zbound.optimize_z_bound(m, seed=[2.5])
    assert res.value == pytest.approx(12.0 * ROOT2 * math.pi, abs=1e-9)


# -- closed-form certificate pieces ------------------------------------------


def test_h_function_max_formulas():
    x_star, h_max = zbound.h_function_max(-1.0, -2.0)
    assert x_star == pytest.approx(np.cbrt(4.0))
    assert h_max == pytest.approx(np.cbrt(-6.0 / 4.0))
    with pytest.raises(ValueError):
        zbound.h_function_max(1.0, -1.0)


def test_h_function_max_beats_grid():
    rng = np.random.default_rng(5)
    for _ in range(100):
        a, b = -rng.uniform(1 / 3, 3, size=2)
        x_star, h_max = zbound.h_function_max(a, b)
        xs = np.geomspace(x_star / 8, x_star * 8, 2001)
        grid = zbound.h_function(a, b, xs).max()
        assert grid <= h_max + 1e-9
        assert zbound.h_function(a, b, np.array([x_star]))[0] == pytest.approx(h_max)


def test_y_ratio_minimum():
    y_star, r_min = zbound.y_ratio_min()
    assert (y_star, r_min) == (8.0 / 9.0, 1.0)
    assert zbound.y_ratio(y_star) == pytest.approx(1.0, abs=1e-12)
    ys = np.linspace(0.0, 1.0 - 1e-6, 100001)
    assert zbound.y_ratio(ys).min() >= 1.0 - 1e-6
    with pytest.raises(ValueError):
        zbound.y_ratio(1.0)


def test_certificate_matches_direct_eval():
    cert = zbound.certify_global(zbound.barlow_sigma_model())
    assert cert is not None
    assert cert.global_bound == pytest.approx(-12.0 * math.pi, abs=1e-9)
    assert cert.extremal_class == (-3.0, 1, 1, 1, 1, 1, 1, 1, 1, 2.0)
    assert (cert.y_star, cert.ratio_min) == (8.0 / 9.0, 1.0)
    cp2 = zbound.certify_global(zbound.cp2_model())
    assert cp2.global_bound == pytest.approx(12.0 * ROOT2 * math.pi)
    assert zbound.certify_global(zbound.r8_sigma_model()) is None


# -- integer existence arithmetic --------------------------------------------


def test_ac_check():
    ok = zbound.make_model("x", [[1]], [3], n=2, chi=3, tau=1, seed=[1.0])
    assert zbound.ac_check(ok)
    bad = zbound.make_model("x", [[1]], [3], n=2, chi=4, tau=1, seed=[1.0])
    assert not zbound.ac_check(bad)
    with pytest.raises(ValueError):
        zbound.ac_check(zbound.barlow_sigma_model())
    with pytest.raises(ValueError):
        zbound.ac_check(zbound.make_model("x", [[1]], [3], n=2))


def test_ac_candidates():
    cands = zbound.ac_candidates(np.diag([1, -1, -1]), chi=5, tau=-2, bound=3)
    assert len(cands) == 18
    assert (2, 0, 0) in cands and (3, 2, 1) in cands
    assert all(v[0] ** 2 - v[1] ** 2 - v[2] ** 2 == 4 for v in cands)
    with pytest.raises(ValueError):
        zbound.ac_candidates(np.eye(4), 1, 1, 1)
