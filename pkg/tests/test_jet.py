import math

import numpy as np
import pytest

from tensional import jet as J
from tensional.errors import DomainError, IndexTooDeep


def test_layout_is_graded_prefix():
    assert J.n_coeffs(3, 2) == 10
    low, high = J.multi_indices(2, 2), J.multi_indices(2, 4)
    assert high[:len(low)] == low


def test_product_rule_and_truncation():
    x, y = J.Jet.variables([0.5, 2.0], 3)
    f = x * x * y
    assert f.partial((2, 1)) == pytest.approx(2.0)
    assert f.partial((1, 1)) == pytest.approx(1.0)
    assert f.truncate(1).order == 1
    with pytest.raises(IndexTooDeep):
        f.truncate(1).partial((1, 1))


def test_elementary_functions_series():
    (x,) = J.Jet.variables([0.3], 5)
    for fn, d in ((J.exp, lambda k: math.exp(0.3)),
                  (J.sin, lambda k: math.sin(0.3 + k * math.pi / 2)),
                  (J.cos, lambda k: math.cos(0.3 + k * math.pi / 2))):
        jet = fn(x)
        for k in range(6):
            assert jet.partial((k,)) == pytest.approx(d(k), rel=1e-12)
    lg = J.log(x)
    assert lg.partial((3,)) == pytest.approx(2 / 0.3 ** 3)
    pw = J.power(x, 2.5)
    assert pw.partial((2,)) == pytest.approx(2.5 * 1.5 * 0.3 ** 0.5)


def test_grad_and_compose():
    x, y = J.Jet.variables([1.0, 2.0], 3)
    f = J.sin(x) * y
    g = f.grad()
    assert g.shape == (2,) and g.order == 2
    assert g.value == pytest.approx([math.cos(1.0) * 2.0, math.sin(1.0)])
    # compose with (s, t) -> (s + t, (25/3) s t), sending (0.6, 0.4) to (1, 2)
    s, t = J.Jet.variables([0.6, 0.4], 3)
    inner = J.stack([s + t, 5 * s * t * 2.0 / 1.2])     # value (1.0, 2.0)
    fx = J.sin(J.Jet.variables([1.0, 2.0], 3)[0]) * J.Jet.variables([1.0, 2.0], 3)[1]
    comp = fx.compose(inner)
    direct = J.sin(s + t) * (5 * s * t * 2.0 / 1.2)
    assert np.allclose(comp.partials(), direct.partials())


def test_matrix_inverse_jet():
    x, y = J.Jet.variables([0.3, -0.2], 4)
    one = J.Jet.constant(1.0, 2, 4)
    m = J.stack([J.stack([2 + x * x, x * y]), J.stack([x * y, 1 + J.exp(y)])])
    ident = J.einsum("ij,jk->ik", m, J.inv(m))
    assert np.allclose(ident.partials()[..., 0], np.eye(2))
    assert np.allclose(ident.partials()[..., 1:], 0.0, atol=1e-12)
    del one


def test_singular_matrix_and_norm():
    z = J.Jet.constant(np.zeros((2, 2)), 1, 1)
    with pytest.raises(DomainError):
        J.inv(z)
    x, y = J.Jet.variables([0.0, 0.0], 1)
    with pytest.raises(DomainError):
        J.norm(x, y)


def test_einsum_mixed_operands():
    x, y = J.Jet.variables([1.0, 2.0], 2)
    v = J.stack([x, y])
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    w = J.einsum("ij,j->i", a, v)
    assert w.value == pytest.approx([5.0, 11.0])
    assert np.allclose(J.einsum("i,i->", v, v).grad().value, [2.0, 4.0])
