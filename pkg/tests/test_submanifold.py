import numpy as np
import pytest

from tensional import casebook as Cb
from tensional import maps as Mp
from tensional import riemann as Rm
from tensional import submanifold as Sb
from tensional.errors import NotArclength, NotHypersurface, NotNormal, RankDeficient

FIXTURES = [Cb.sphere_immersion(1.0, 2), Cb.ellipsoid_immersion(), Cb.helicoid_immersion(),
            Cb.hyperbolic_graph_immersion(1.0), Cb.hyperbolic_graph_immersion(3.0)]


def tilted_plane(p=2.0):
    """A plane in the conformally flat chart z^(-2p)|dx|^2: totally umbilical with
    non-constant principal curvature."""
    tgt = Cb.hyperbolic_chart(p, name="Hp")
    comps = ["u", "v", "1+0.3*u+0.1*v"]
    src = Rm.InducedChart("tilted", ["u", "v"], comps, tgt, sample_box=[(-1.0, 1.0)] * 2)
    return Sb.Immersion(Mp.SmoothMap(src, tgt, comps), name="tilted")


@pytest.mark.parametrize("imm", FIXTURES, ids=lambda i: i.name)
def test_second_fundamental_form_invariants(imm):
    rng = np.random.default_rng(0)
    for p in Rm.sample_points(imm.map.source, 4, seed=2):
        sf = Sb.SubmanifoldFrame(imm, p, 2)
        B, d, h, g = sf.B.value, sf.ctx.dP.value, sf.h.value, sf.g.value
        assert np.allclose(B, B.transpose(1, 0, 2), atol=1e-9)
        assert np.max(np.abs(np.einsum("ija,ab,bk->ijk", B, h, d))) < 1e-9
        nu = sf.normals.value
        assert np.allclose(nu @ h @ nu.T, np.eye(len(nu)), atol=1e-10)
        assert np.max(np.abs(nu @ h @ d)) < 1e-10
        xi = rng.standard_normal(len(nu)) @ nu
        A = Sb.shape_operator(imm, xi, p)
        X, Y = rng.standard_normal((2, imm.m))
        assert (A @ X) @ g @ Y == pytest.approx(np.einsum("ija,i,j,ab,b->", B, X, Y, h, xi),
                                                abs=1e-9)
        H = Sb.mean_curvature(imm, p)
        assert np.allclose(np.einsum("ij,ija->a", np.linalg.inv(g), B), imm.m * H, atol=1e-9)
        assert np.allclose(Mp.tension_field(imm.map, p), imm.m * H, atol=1e-9)


@pytest.mark.parametrize("imm", FIXTURES, ids=lambda i: i.name)
def test_decomposition_of_lap_h(imm):
    for p in Rm.sample_points(imm.map.source, 3, seed=4):
        rs = Sb.hs_submanifold_residuals(imm, p)
        assert rs.normal_reassembly_error < 1e-8
        assert rs.tangential_reassembly_error < 1e-8


def test_displayed_tangential_form_gap_on_curved_target():
    """Twice the displayed tangential system differs from tangent(lap H) by the
    curvature term; with half the curvature coefficient it matches."""
    imm = Cb.hyperbolic_graph_immersion(3.0)
    p = Rm.sample_points(imm.map.source, 1, seed=4)[0]
    rs = Sb.hs_submanifold_residuals(imm, p)
    assert rs.displayed_tangential_gap > 1e-3
    half = 2 * (rs.tangential - 0.5 * rs.curvature_term)
    assert np.allclose(half, rs.lap_h_tangential, atol=1e-8)
    hr = Sb.hypersurface_residuals(imm, p)
    assert np.allclose(2 * hr.tangential_half_ricci, rs.lap_h_tangential, atol=1e-8)


def test_hypersurface_normal_part_matches_scalar_residual():
    imm = Cb.hyperbolic_graph_immersion(3.0)
    for p in Rm.sample_points(imm.map.source, 3, seed=1):
        hr = Sb.hypersurface_residuals(imm, p)
        rs = Sb.hs_submanifold_residuals(imm, p)
        assert np.allclose(rs.normal, hr.scalar * hr.normal, atol=1e-8)


def test_totally_umbilical_reduction():
    imm = tilted_plane()
    m = imm.m
    for p in Rm.sample_points(imm.map.source, 4, seed=6):
        hr = Sb.hypersurface_residuals(imm, p)
        A = Sb.shape_operator(imm, hr.normal, p)
        lam = hr.alpha
        assert np.allclose(A, lam * np.eye(m), atol=1e-10)
        assert hr.scalar == pytest.approx(hr.laplacian_alpha + m * lam ** 3, rel=1e-10)
        no_ricci = hr.tangential + lam * hr.ricci_term
        assert np.allclose(no_ricci, (m + 2) / 4 * hr.grad_alpha_sq, atol=1e-10)
        rs = Sb.hs_submanifold_residuals(imm, p)
        full = rs.lap_h_tangential - rs.curvature_term
        assert np.allclose(full, (m + 2) / 2 * hr.grad_alpha_sq, atol=1e-8)
        assert np.max(np.abs(hr.grad_alpha_sq)) > 1e-3


def test_einstein_target_drops_ricci_term():
    imm = Cb.hyperbolic_graph_immersion(1.0)
    for p in Rm.sample_points(imm.map.source, 3):
        assert np.allclose(Sb.hypersurface_residuals(imm, p).ricci_term, 0.0, atol=1e-10)


def test_sphere_values_and_pseudo_umbilicity():
    for r in (0.5, 2.0):
        imm = Cb.sphere_immersion(r, 2)
        pts = Rm.sample_points(imm.map.source, 4)
        for p in pts:
            hr = Sb.hypersurface_residuals(imm, p)
            assert hr.alpha == pytest.approx(1 / r)
            assert hr.scalar == pytest.approx(2 / r ** 3)
            assert np.allclose(hr.tangential, 0.0, atol=1e-9)
            rs = Sb.hs_submanifold_residuals(imm, p)
            # constant |H| with vanishing normal Laplacian: normal residual = alpha |A|^2
            assert rs.normal_norm >= hr.alpha * hr.a_norm_sq * (1 - 1e-8)
            hH, grad_sq = Sb.weitzenbock_terms(imm, p)[1:]
            assert hH == pytest.approx(grad_sq, abs=1e-8)
        assert Sb.pseudo_umbilical_check(imm, pts).verdict == "PseudoUmbilical"
    ell = Cb.ellipsoid_immersion()
    assert Sb.pseudo_umbilical_check(ell, Rm.sample_points(ell.map.source, 4)).verdict == \
        "NotPseudoUmbilical"


def test_hm_residual_nonzero_for_nonconstant_curvature_target():
    imm = Cb.hyperbolic_graph_immersion(3.0)
    p = Rm.sample_points(imm.map.source, 1)[0]
    assert np.linalg.norm(Sb.hm_submanifold_residual(imm, p)) > 1e-6
    flat = Cb.ellipsoid_immersion()
    q = Rm.sample_points(flat.map.source, 1)[0]
    assert np.allclose(Sb.hm_submanifold_residual(flat, q), 0.0, atol=1e-12)


def test_isometry_verification():
    ok, res = Sb.verify_isometric(Cb.sphere_polar_immersion(1.5),
                                  Rm.sample_points(Cb.sphere_polar_immersion(1.5).map.source, 4))
    assert ok and max(res) < 1e-9
    src = Rm.RiemannianChart("deg", ["a", "b"], [["1", "0"], [None, "1"]])
    flat = Sb.Immersion(Mp.SmoothMap(src, Rm.RiemannianChart.euclidean(3), ["a", "a", "0"]))
    with pytest.raises(RankDeficient):
        Sb.verify_isometric(flat, Rm.sample_points(src, 3))


def test_error_paths():
    sph = Cb.sphere_immersion(1.0, 2)
    with pytest.raises(NotNormal):
        Sb.shape_operator(sph, [1.0, 0.0, 0.0], [0.0, 0.0])
    curve_imm = Sb.Immersion(Cb.helix_curve(1.0, 1.0).map)
    with pytest.raises(NotHypersurface):
        Sb.hypersurface_residuals(curve_imm, [0.3])
    chart = Rm.RiemannianChart("I", ["s"], [["1"]])
    fast = Sb.Curve(Mp.SmoothMap(chart, Rm.RiemannianChart.euclidean(2), ["2*s", "0"]))
    with pytest.raises(NotArclength):
        Sb.frenet(fast, 0.0)


def test_frenet_degeneracy_for_planar_curve_in_space():
    chart = Rm.RiemannianChart("I", ["s"], [["1"]], sample_box=[(-1.0, 1.0)])
    circle = Sb.Curve(Mp.SmoothMap(chart, Rm.RiemannianChart.euclidean(3),
                                   ["cos(s)", "sin(s)", "0"]))
    fd = Sb.frenet(circle, 0.4)
    assert fd.degenerate
    assert fd.curvatures[0] == pytest.approx(1.0) and fd.curvatures[1] == 0.0
    assert fd.relation_residual < 1e-8


def test_curve_bitension_matches_curvature_system():
    for curve in (Cb.helix_curve(2.0, 1.0), Cb.circle_curve(1.5)):
        rep = Sb.classify_curve(curve, Rm.sample_points(curve.map.source, 3)[:, 0])
        assert np.allclose(rep.bitension_norms, rep.bitension_from_system, rtol=1e-8)


def test_curve_in_curved_target():
    """A horizontal line z = 1 in the hyperbolic half space is not a geodesic."""
    chart = Rm.RiemannianChart("I", ["s"], [["1"]], sample_box=[(-0.5, 0.5)])
    tgt = Cb.hyperbolic_chart(1.0, name="H1")
    # arclength: |gamma'|_h = 1 at height 1 needs x = s, z = 1
    curve = Sb.Curve(Mp.SmoothMap(chart, tgt, ["s", "0", "1"]))
    rep = Sb.classify_curve(curve, [0.0, 0.1, 0.2])
    assert rep.curvatures[0][0] == pytest.approx(1.0)
    assert rep.verdict == "NotHS"
