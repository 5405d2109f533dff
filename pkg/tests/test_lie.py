"""Frame curvature on 4-dimensional lattice quotients, exact arithmetic."""

from fractions import Fraction

import numpy as np
import pytest

from akscal import exact, lie

F = Fraction


@pytest.fixture(scope="module")
def kt():
    return lie.curvature_tables(lie.kt_spec(1))


def test_kt_connection(kt):
    # the only independent bracket is [e1,e2] = e3; Koszul gives half-shifts
    assert kt.gamma[0][1][2] == F(1, 2)
    assert kt.gamma[0][2][1] == F(-1, 2)
    assert kt.gamma[1][2][0] == F(1, 2)
    assert kt.gamma[1][0][2] == F(-1, 2)
    assert kt.gamma[2][0][1] == F(-1, 2)
    assert kt.gamma[2][1][0] == F(1, 2)
    assert sum(1 for v in kt.gamma.flat if v != 0) == 6


def test_kt_sectional(kt):
    want = {(0, 1): F(-3, 4), (0, 2): F(1, 4), (1, 2): F(1, 4),
            (0, 3): F(0), (1, 3): F(0), (2, 3): F(0)}
    for (i, j), v in want.items():
        assert kt.sectional[i][j] == v
        assert kt.sectional[j][i] == v


def test_kt_ricci_and_scalar(kt):
    assert (kt.ricci == np.diag(exact.as_exact(
        [F(-1, 2), F(-1, 2), F(1, 2), F(0)]))).all()
    assert kt.scalar == F(-1, 2)
    assert (kt.ricci_anti == np.diag(exact.as_exact(
        [F(-1, 4), F(-1, 2), F(1, 2), F(1, 4)]))).all()


def test_kt_scalar_ladder(kt):
    assert kt.nabla_j_sq == F(2)
    assert kt.star_scalar == F(1, 2)
    assert kt.star_scalar - kt.scalar == F(1, 2) * kt.nabla_j_sq
    assert kt.hermitian_scalar == F(0)
    assert exact.is_exact(kt.ricci)


def test_curvature_route_agreement():
    for spec in (lie.kt_spec(1), lie.abelian_spec(1)):
        direct = lie.curvature_direct(spec)
        cartan = lie.curvature_cartan(spec)
        assert all(a == b for a, b in zip(direct.flat, cartan.flat))


def test_nabla_j_route_agreement():
    kt = lie.kt_spec(1)
    assert lie.nabla_j_norm_sq(kt, route="vectors") == F(2)
    assert lie.nabla_j_norm_sq(kt, route="forms") == F(2)
    ab = lie.abelian_spec(1)
    assert lie.nabla_j_norm_sq(ab, route="vectors") == 0
    assert lie.nabla_j_norm_sq(ab, route="forms") == 0
    with pytest.raises(ValueError):
        lie.nabla_j_norm_sq(kt, route="spinors")


def test_abelian_is_flat():
    tab = lie.curvature_tables(lie.abelian_spec(1))
    assert not any(v != 0 for v in tab.riemann.flat)
    assert tab.scalar == 0 and tab.star_scalar == 0


@pytest.mark.parametrize("d, want", [(1, -0.5), (F(1, 4), -0.25),
                                     (F(1, 100), -0.05)])
def test_z_ratio_collapse(d, want):
    assert lie.z_ratio(lie.kt_spec(d)) == pytest.approx(want, abs=1e-15)


def test_blair_totals():
    # c1 vanishes for both quotients, so both sides must be zero
    rep = lie.blair_check(lie.kt_spec(1), 0.0)
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.matches
    assert lie.blair_check(lie.abelian_spec(1), 0.0).matches
    off = lie.blair_check(lie.kt_spec(1), 1.0)
    assert not off.matches and off.mismatch == pytest.approx(4 * np.pi)


def test_structure_validation():
    j = lie.kt_spec(1).j
    good = exact.zeros((4, 4, 4))

    c = exact.zeros((4, 4, 4))
    c[0][1][2], c[1][0][2] = F(1), F(-1)
    c[0][2][0], c[2][0][0] = F(1), F(-1)
    with pytest.raises(ValueError, match="Jacobi"):
        lie.make_frame_spec("bad", c, j, (1, 1, 1, 1))

    c = exact.zeros((4, 4, 4))
    c[0][1][1], c[1][0][1] = F(1), F(-1)
    with pytest.raises(ValueError, match="unimodular"):
        lie.make_frame_spec("bad", c, j, (1, 1, 1, 1))

    c = exact.zeros((4, 4, 4))
    c[1][2][3], c[2][1][3] = F(1), F(-1)
    with pytest.raises(ValueError, match="not closed"):
        lie.make_frame_spec("bad", c, j, (1, 1, 1, 1))

    with pytest.raises(ValueError):
        lie.make_frame_spec("bad", good, np.eye(4), (1, 1, 1, 1))
    with pytest.raises(ValueError):
        lie.make_frame_spec("bad", good, j, (1, 1, 1))
    with pytest.raises(ValueError):
        lie.make_frame_spec("bad", good, j, (1, 1, 1, 0))


def test_serialize_round_trip():
    for spec in (lie.kt_spec(F(1, 3)), lie.abelian_spec(2)):
        text = lie.serialize_frame_spec(spec)
        back = lie.parse_frame_spec(text)
        assert back.name == spec.name
        assert (back.c == spec.c).all()
        assert (back.j == spec.j).all()
        assert back.lattice_volumes == spec.lattice_volumes


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        lie.parse_frame_spec("name broken\ndim 4\n")
    with pytest.raises(ValueError):
        lie.parse_frame_spec("")
