import math
from fractions import Fraction

import numpy as np
import pytest

from su2star import taylor as tl
from su2star.taylor import Taylor


def fact(n):
    return np.array([math.factorial(k) for k in range(n + 1)], dtype=float)


def test_exp_sin_cos_at_zero():
    t = Taylor.variable(0.0, 8)
    np.testing.assert_allclose(tl.exp(t).c, 1 / fact(8))
    s, c = tl.sincos(t)
    k = np.arange(9)
    np.testing.assert_allclose(s.c, np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2), 0) / fact(8))
    np.testing.assert_allclose(c.c, np.where(k % 2 == 0, (-1.0) ** (k // 2), 0) / fact(8))


def test_division_and_log_inverse():
    x = Taylor.variable(np.array([0.5, 2.0]), 6)
    one = tl.exp(tl.log(x))
    np.testing.assert_allclose(one.c, x.c, atol=1e-14)
    q = (x * x + 1) / (x + 3)
    np.testing.assert_allclose((q * (x + 3)).c, (x * x + 1).c, atol=1e-14)


def test_sqrt_squares_back():
    x = Taylor.variable(1.7, 7)
    r = tl.sqrt(x)
    np.testing.assert_allclose((r * r).c, x.c, atol=1e-14)


def test_exact_fraction_arithmetic():
    c = np.array([Fraction(1), Fraction(1), Fraction(0), Fraction(0)], dtype=object)
    x = Taylor(c)
    inv = 1 / x  # 1 - t + t^2 - t^3
    assert list(inv.c) == [1, -1, 1, -1]
    assert all(isinstance(v, Fraction) for v in inv.c)


def test_eval_deriv_integ():
    x = Taylor.variable(0.0, 5)
    e = tl.exp(x)
    assert abs(e(0.1) - math.exp(0.1)) < 1e-8
    np.testing.assert_allclose(e.deriv().c, e.c[:-1])
    np.testing.assert_allclose(e.integ().c[1:-1], e.c[1:])
    with pytest.raises(ValueError):
        x ** -1
