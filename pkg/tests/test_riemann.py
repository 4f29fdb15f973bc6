import numpy as np
import pytest

from tensional import casebook as Cb
from tensional import riemann as Rm
from tensional.errors import DomainError, ModeUnsupported, NotPositiveDefinite


def _rotation(m, seed=0):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((m, m)))
    return q


def test_euclidean_quantities_vanish():
    chart = Rm.RiemannianChart.euclidean(3)
    p = [0.2, -0.4, 0.9]
    assert np.array_equal(Rm.metric_at(chart, p), np.eye(3))
    assert np.max(np.abs(Rm.christoffel(chart, p))) == 0
    assert np.max(np.abs(Rm.riemann_curvature(chart, p))) <= 1e-12
    assert Rm.scalar_curvature(chart, p) == 0
    assert np.allclose(Rm.orthonormal_frame(chart, p), np.eye(3))
    ok, _ = Rm.check_constant_curvature(chart, 0.0, Rm.sample_points(chart, 3))
    assert ok


@pytest.mark.parametrize("p, c", [(1.0, -1.0)])
def test_hyperbolic_space_has_constant_curvature(p, c):
    chart = Cb.hyperbolic_chart(p)
    pts = Rm.sample_points(chart, 5, seed=1)
    ok, res = Rm.check_constant_curvature(chart, c, pts)
    assert ok, res
    for q in pts:
        assert Rm.sectional_curvature(chart, q, [1, 0, 0], [0.3, 1, 2]) == pytest.approx(c)
        assert Rm.scalar_curvature(chart, q) == pytest.approx(6 * c)
        assert np.allclose(Rm.ricci_operator(chart, q), 2 * c * np.eye(3))


def test_hyperbolic_p3_is_not_constant_curvature():
    chart = Cb.hyperbolic_chart(3.0)
    pts = Rm.sample_points(chart, 4, seed=1)
    for c in (-1.0, 0.0, 1.0):
        assert not Rm.check_constant_curvature(chart, c, pts)[0]


def test_round_sphere_metric_from_embedding():
    imm = Cb.sphere_immersion(2.0, 2)
    chart = imm.map.source
    for q in Rm.sample_points(chart, 4):
        assert Rm.sectional_curvature(chart, q, [1, 0], [0, 1]) == pytest.approx(0.25)
    polar = Cb.sphere_polar_immersion(2.0).map.source
    q = [1.0, 0.3]
    assert Rm.scalar_curvature(polar, q) == pytest.approx(2 * 0.25)


def test_laplacian_convention_and_frame_independence():
    chart = Rm.RiemannianChart.euclidean(2)
    f = Rm.ScalarFieldExpr(chart, "x1^2+x2^2")
    assert Rm.laplacian(f, [0.3, 0.1]) == pytest.approx(-4.0)
    hyp = Cb.hyperbolic_chart(2.0)
    g = Rm.ScalarFieldExpr(hyp, "x*z^2+sin(y)")
    q = [0.2, 0.4, 1.1]
    ref = Rm.laplacian(g, q)
    for seed in range(3):
        rot = _rotation(3, seed)
        assert Rm.laplacian_in_frame(g, q, rot) == pytest.approx(ref, rel=1e-10)
        e = Rm.orthonormal_frame(hyp, q, rot)
        assert np.allclose(Rm.hessian_in_frame(g, q, rot), e @ Rm.hessian(g, q) @ e.T)


def test_gradient_is_metric_dual():
    hyp = Cb.hyperbolic_chart(1.0)
    f = Rm.ScalarFieldExpr(hyp, "z")
    q = [0.0, 0.0, 1.3]
    assert np.allclose(Rm.grad(f, q), [0, 0, 1.3 ** 2])


def test_frame_connection_is_skew():
    hyp = Cb.hyperbolic_chart(3.0)
    C = Rm.frame_connection(hyp, [0.1, 0.2, 0.9])
    assert np.allclose(C, -C.transpose(0, 2, 1))


def test_strong_convexity():
    chart = Rm.RiemannianChart.euclidean(2)
    pts = Rm.sample_points(chart, 5)
    ok, mins = Rm.is_strongly_convex_at(Rm.ScalarFieldExpr(chart, "x1^2+x1*x2+x2^2"), pts)
    assert ok and min(mins) == pytest.approx(1.0)
    assert not Rm.is_strongly_convex_at(Rm.ScalarFieldExpr(chart, "x1^2"), pts)[0]


def test_not_positive_definite_reports_eigenvalue():
    chart = Rm.RiemannianChart("bad", ["a", "b"], [["1", "2"], [None, "1"]])
    with pytest.raises(NotPositiveDefinite) as info:
        Rm.metric_at(chart, [0.0, 0.0])
    assert info.value.eigenvalue == pytest.approx(-1.0)


def test_domain_and_guard():
    hyp = Cb.hyperbolic_chart(1.0)
    with pytest.raises(DomainError):
        Rm.metric_at(hyp, [0, 0, -1.0])
    psi = Cb.kelvin_map(3, 1)
    assert not psi.source.contains([0.1, 0, 0])
    assert psi.source.contains([1.0, 0, 0])


def test_sampling_is_deterministic_and_respects_margin():
    chart = Rm.RiemannianChart("box", ["a"], [["1"]], domain=[(0.0, 1.0)])
    a = Rm.sample_points(chart, 20, seed=9)
    b = Rm.sample_points(chart, 20, seed=9)
    assert np.array_equal(a, b)
    assert np.all((a >= 1e-3) & (a <= 1 - 1e-3))
    assert not np.array_equal(a, Rm.sample_points(chart, 20, seed=10))


def test_rough_type_modes():
    chart = Rm.RiemannianChart.euclidean(2)
    pts = Rm.sample_points(chart, 5)
    rep = Rm.rough_type_check(Rm.VectorFieldExpr(chart, ["x1*x2+3*x2", "x1-2"]), pts,
                              mode="coordinate")
    assert rep.verdict and rep.coordinate_verdict and not rep.tensorial_verdict
    assert rep.modes_disagree
    hyp = Cb.hyperbolic_chart(1.0)
    xi = Rm.VectorFieldExpr(hyp, ["x", "y", "z"])
    hpts = Rm.sample_points(hyp, 5)
    assert Rm.rough_type_check(xi, hpts).coordinate_verdict is None
    with pytest.raises(ModeUnsupported):
        Rm.rough_type_check(xi, hpts, mode="coordinate")


def test_killing_field_second_derivative_is_curvature():
    """For a Killing field, (nabla^2 xi)(X, Y) = R(X, xi) Y.  The dilation field
    is Killing for the half-space model of hyperbolic space."""
    hyp = Cb.hyperbolic_chart(1.0)
    xi = Rm.VectorFieldExpr(hyp, ["x", "y", "z"])
    for q in Rm.sample_points(hyp, 5, seed=3):
        h = Rm.second_covariant(xi, q)
        R = Rm.riemann_curvature(hyp, q)
        assert np.allclose(h, np.einsum("ljib,b->lij", R, q), atol=1e-10)
        assert np.max(np.abs(h)) > 0.1
