from fractions import Fraction

import numpy as np
import pytest

from akscal import exact


def test_frac_parses_common_shapes():
    assert exact.frac("-3/4") == Fraction(-3, 4)
    assert exact.frac(2) == Fraction(2)
    assert exact.frac(Fraction(1, 3)) == Fraction(1, 3)


def test_as_exact_keeps_rationals():
    a = exact.as_exact([[1, "1/2"], [0, 2]])
    assert a.dtype == object
    assert a[0][1] == Fraction(1, 2)
    assert exact.is_exact(a)
    assert not exact.is_exact(np.eye(2))


def test_to_float_round_trip():
    a = exact.as_exact([["1/4", 0], [0, "-5/8"]])
    f = exact.to_float(a)
    assert f.dtype == float
    assert f[0, 0] == 0.25 and f[1, 1] == -0.625


def test_mat_inv_exact():
    m = exact.as_exact([[2, 1], [1, 1]])
    inv = exact.mat_inv(m)
    assert (inv == exact.as_exact([[1, -1], [-1, 2]])).all()
    assert all(v == w for v, w in zip((m @ inv).flat, exact.eye(2).flat))


def test_mat_inv_singular():
    with pytest.raises(ZeroDivisionError):
        exact.mat_inv(exact.as_exact([[1, 2], [2, 4]]))


def test_maybe_exact_mixed_inputs():
    arr, flag = exact.maybe_exact([[1, 0], [0, 1]])
    assert flag and exact.is_exact(arr)
    arr, flag = exact.maybe_exact(np.array([[0.5, 0.1]]))
    assert not flag and arr.dtype == float
    with pytest.raises(TypeError):
        exact.maybe_exact([0.5], prefer_exact=True)
