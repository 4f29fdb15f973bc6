"""Isometric immersions, their extrinsic geometry, and curve systems.

Conventions match :mod:`tensional.maps`: vectors along the immersion are
given in target coordinates, tangent vectors of the submanifold in its own
coordinates.  Laplacians have positive spectrum, so for the mean curvature
``H = tau / m``

* ``normal(lap H)  = lap_perp H + Tr B(., A_H .)``
* ``tangent(lap H) = (m/2) grad|H|^2 + 2 Tr A_{nabla_perp H} + [Tr R(d iota ., H) d iota .]^T``

:func:`hs_submanifold_residuals` returns every term separately so both
identities can be checked against the rough Laplacian computed by the maps
module.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jet as J
from . import maps as Mp
from . import riemann as Rm
from .errors import (DegenerateFrame, NotArclength, NotHypersurface, NotNormal,
                     RankDeficient)

DEFAULT_ORDER = 4
ISOMETRY_TOL = 1e-9
FRENET_CUTOFF = 1e-6
NORMAL_ACCEPT = 1e-8


class Immersion:
    """An immersion ``iota: M^m -> N^n`` (``m < n``) given by a smooth map."""

    def __init__(self, iota, name=None):
        if iota.source.dim >= iota.target.dim:
            raise ValueError("an immersion needs dim(source) < dim(target)")
        self.map = iota
        self.name = name
        self.isometric = None

    @property
    def m(self):
        return self.map.source.dim

    @property
    def n(self):
        return self.map.target.dim


def verify_isometric(imm, points, tol=ISOMETRY_TOL):
    """``(verdict, residuals)`` for ``d iota^T h d iota = g`` at the points."""
    psi = imm.map
    points = np.atleast_2d(np.asarray(points, float))
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    residuals = []
    for p in points:
        d = Mp.differential(psi, p)
        if np.linalg.matrix_rank(d, tol=1e-10) < imm.m:
            raise RankDeficient(f"d iota has rank < {imm.m} at {tuple(p)}")
        h = psi.target.metric_value(psi.jets(p, 0).value)
        g = psi.source.metric_value(p)
        residuals.append(float(np.max(np.abs(d.T @ h @ d - g))))
    imm.isometric = all(r <= tol for r in residuals)
    return imm.isometric, residuals


# -- pointwise submanifold data ------------------------------------------------

class SubmanifoldFrame:
    """All jets of the extrinsic geometry of an immersion at one point."""

    def __init__(self, imm, point, order=DEFAULT_ORDER, rotation=None):
        self.imm = imm
        self.ctx = Mp.PullbackFrame(imm.map, point, order, rotation)
        ctx = self.ctx
        self.m, self.n = imm.m, imm.n
        d0 = ctx.dP.value
        if np.linalg.matrix_rank(d0, tol=1e-10) < self.m:
            raise RankDeficient(f"d iota has rank < {self.m} at {tuple(ctx.point)}")
        self.g = ctx.g
        self.ginv = J.inv(self.g)
        self.h = ctx.h
        self.normals = self._normal_frame()

    def _normal_frame(self):
        ctx, h = self.ctx, self.h
        cols = [ctx.dP[:, i] for i in range(self.m)]
        axes = [J.Jet.constant(np.eye(self.n)[a], h.nvars, h.order, h.point) for a in range(self.n)]
        basis, normals = [], []
        for k, v in enumerate(cols + axes):
            for e in basis:
                v = v - Rm.inner(h, v, e) * e
            sq = Rm.inner(h, v, v)
            if k < self.m:
                basis.append(v * J.power(sq, -0.5))
                continue
            if sq.value <= NORMAL_ACCEPT:
                continue
            nu = v * J.power(sq, -0.5)
            basis.append(nu)
            normals.append(nu)
            if len(normals) == self.n - self.m:
                break
        nu = J.stack(normals)                                  # [r, alpha]
        if self.n == self.m + 1:
            det = np.linalg.det(np.column_stack([ctx.dP.value, nu.value[0]]))
            if det < 0:
                nu = -nu
        return nu

    # projections -----------------------------------------------------------

    def normal_part(self, v):
        """Normal projection of ``v[..., alpha]`` (last axis)."""
        hn = J.einsum("ab,rb->ra", self.h, self.normals)        # h nu_r
        if v.ndim == 1:
            c = J.einsum("ra,a->r", hn, v)
            return J.einsum("r,ra->a", c, self.normals)
        c = J.einsum("ra,xa->xr", hn, v.reshape(-1, self.n))
        return J.einsum("xr,ra->xa", c, self.normals).reshape(*v.shape)

    def tangent_coords(self, v):
        """Submanifold coordinates of the tangential part of a target vector."""
        w = J.einsum("ai,a->i", self.ctx.dP, J.einsum("ab,b->a", self.h, v))
        return J.einsum("ki,i->k", self.ginv, w)

    # extrinsic geometry ------------------------------------------------------

    @property
    def hessian_map(self):
        """``(nabla d iota)(d_i, d_j)`` as ``[alpha, i, j]``."""
        ctx = self.ctx
        d2 = ctx.dP.grad()
        conn = J.einsum("akc,ki->aci", ctx.gamma_n, ctx.dP)
        quad = J.einsum("aci,cj->aij", conn, ctx.dP)
        lin = J.einsum("kij,ak->aij", ctx.gamma_m, ctx.dP)
        return d2 + quad - lin

    @property
    def B(self):
        """Second fundamental form ``[i, j, alpha]``."""
        return self.normal_part(self.hessian_map.transpose(1, 2, 0))

    @property
    def H(self):
        return J.einsum("ij,ija->a", self.ginv.truncate(self.B.order), self.B) * (1.0 / self.m)

    def shape_operator(self, xi):
        """``A_xi[k, j]`` with ``g(A_xi X, Y) = h(B(X, Y), xi)``."""
        hb = J.einsum("ija,ab->ijb", self.B, self.h)
        return J.einsum("ki,ij->kj", self.ginv, J.einsum("ijb,b->ij", hb, xi))

    def cov(self, xi):
        """``nabla^iota_{d_i} xi`` as ``[alpha, i]``."""
        return self.ctx.cov_coordinate(xi)

    def normal_cov(self, xi):
        return self.normal_part(self.cov(xi).T).T

    def scalar_laplacian(self, f):
        df = f.grad()
        hess = df.grad() - J.einsum("kij,k->ij", self.ctx.gamma_m, df)
        return -J.einsum("ij,ij->", self.ginv, hess)

    def scalar_grad(self, f):
        return J.einsum("ij,j->i", self.ginv, f.grad())


@dataclass
class SubmanifoldResiduals:
    normal: np.ndarray              # lap_perp H + Tr B(., A_H .)      (target coords)
    tangential: np.ndarray          # (m/4) grad|H|^2 + Tr A_{nabla_perp H} + [Tr R]^T
    laplacian_perp_h: np.ndarray
    trace_b_ah: np.ndarray
    grad_h2: np.ndarray             # grad |H|^2                        (source coords)
    trace_a_nabla_h: np.ndarray
    curvature_term: np.ndarray      # [Tr R(d iota ., H) d iota .]^T
    lap_h_normal: np.ndarray        # normal part of lap H, via the maps module
    lap_h_tangential: np.ndarray    # tangential part of lap H, source coords
    metric: np.ndarray
    hmetric: np.ndarray

    @property
    def reassembled_tangential(self):
        m = len(self.grad_h2)
        return 0.5 * m * self.grad_h2 + 2.0 * self.trace_a_nabla_h + self.curvature_term

    def _n(self, v):
        return float(np.sqrt(max(v @ self.hmetric @ v, 0.0)))

    def _t(self, v):
        return float(np.sqrt(max(v @ self.metric @ v, 0.0)))

    @property
    def normal_norm(self):
        return self._n(self.normal)

    @property
    def tangential_norm(self):
        return self._t(self.tangential)

    @property
    def normal_reassembly_error(self):
        return self._n(self.normal - self.lap_h_normal)

    @property
    def tangential_reassembly_error(self):
        return self._t(self.reassembled_tangential - self.lap_h_tangential)

    @property
    def displayed_tangential_gap(self):
        """Distance between ``2 * tangential`` and ``tangent(lap H)``."""
        return self._t(2.0 * self.tangential - self.lap_h_tangential)


def hs_submanifold_residuals(imm, point, order=DEFAULT_ORDER):
    sf = SubmanifoldFrame(imm, point, order)
    ctx, m = sf.ctx, sf.m
    H = sf.H                                                  # order K-2
    A_H = sf.shape_operator(H)
    nH = sf.normal_cov(H)                                     # [alpha, i], order K-3
    # lap_perp H = -g^{ij} (nabla_perp_i nabla_perp_j H - Gamma^k_ij nabla_perp_k H)
    second = J.stack([sf.normal_cov(nH[:, j]) for j in range(m)], axis=2)   # [alpha, i, j]
    lap_perp = -J.einsum("ij,aij->a", sf.ginv, second
                         - J.einsum("kij,ak->aij", ctx.gamma_m, nH)).value
    ginv, B, h = sf.ginv.value, sf.B.value, sf.h.value
    trace_b = np.einsum("ij,ika,kj->a", ginv, B, A_H.value)
    h2 = Rm.inner(sf.h, H, H)
    grad_h2 = sf.scalar_grad(h2).value
    hb = np.einsum("lja,ab->ljb", B, h)
    trace_a = np.einsum("ij,kl,ljb,bi->k", ginv, ginv, hb, nH.value)
    d = ctx.dP.value
    Rn = ctx.riem_n.value
    V = np.einsum("ij,lkpq,kj,pi,q->l", ginv, Rn, d, d, H.value)
    curv = ginv @ (d.T @ h @ V)
    lap = ctx.rough_laplacian(H).value
    nor = _normal_value(sf, lap)
    tan = ginv @ (d.T @ h @ lap)
    normal = lap_perp + trace_b
    tangential = 0.25 * m * grad_h2 + trace_a + curv
    return SubmanifoldResiduals(normal, tangential, lap_perp, trace_b, grad_h2, trace_a, curv,
                                nor, tan, sf.g.value, h)


def _normal_value(sf, v):
    nu = sf.normals.value
    h = sf.h.value
    return np.einsum("r,ra->a", nu @ h @ v, nu)


def second_fundamental_form(imm, point):
    return SubmanifoldFrame(imm, point, 2).B.value


def normal_frame(imm, point):
    """Rows are the orthonormal normal vectors (target coordinates)."""
    return SubmanifoldFrame(imm, point, 1).normals.value


def mean_curvature(imm, point):
    return SubmanifoldFrame(imm, point, 2).H.value


def shape_operator(imm, xi, point, tol=1e-9):
    sf = SubmanifoldFrame(imm, point, 2)
    xi = np.asarray(xi, float)
    tang = sf.ctx.dP.value.T @ sf.h.value @ xi
    if np.max(np.abs(tang)) > tol * max(1.0, float(np.max(np.abs(xi)))):
        raise NotNormal("vector has a tangential component")
    return sf.shape_operator(J.Jet.constant(xi, sf.h.nvars, 0)).value


def hm_submanifold_residual(imm, point, order=DEFAULT_ORDER):
    """Tangential part of ``S(H)`` in source coordinates."""
    sf = SubmanifoldFrame(imm, point, order)
    s = sf.ctx.s_term(sf.H).value
    return sf.ginv.value @ (sf.ctx.dP.value.T @ sf.h.value @ s)


@dataclass
class HypersurfaceResiduals:
    scalar: float                   # lap alpha + alpha |A|^2
    tangential: np.ndarray          # (m/4) grad alpha^2 + A(grad alpha) - alpha Ric(nu)^T
    alpha: float
    a_norm_sq: float
    laplacian_alpha: float
    grad_alpha_sq: np.ndarray
    a_grad_alpha: np.ndarray
    ricci_term: np.ndarray          # Ric(nu)^T, source coords
    normal: np.ndarray
    metric: np.ndarray

    @property
    def tangential_half_ricci(self):
        """Tangential system with the coefficient ``alpha / 2`` on the Ricci term;
        this is half the tangential part of ``lap H``."""
        return (0.25 * len(self.grad_alpha_sq) * self.grad_alpha_sq + self.a_grad_alpha
                - 0.5 * self.alpha * self.ricci_term)

    @property
    def tangential_norm(self):
        return float(np.sqrt(max(self.tangential @ self.metric @ self.tangential, 0.0)))


def hypersurface_residuals(imm, point, order=DEFAULT_ORDER):
    if imm.n != imm.m + 1:
        raise NotHypersurface(f"codimension is {imm.n - imm.m}, not 1")
    sf = SubmanifoldFrame(imm, point, order)
    m = sf.m
    nu = sf.normals[0]
    alpha = Rm.inner(sf.h, sf.H, nu)                           # order K-2
    A = sf.shape_operator(nu.truncate(sf.B.order)).value
    a2 = float(np.trace(A @ A))
    lap_alpha = float(sf.scalar_laplacian(alpha).value)
    grad_a = sf.scalar_grad(alpha).value
    grad_a2 = 2.0 * alpha.value * grad_a
    ric = np.einsum("ikij->kj", sf.ctx.riem_n.value)           # lowered Ricci of N
    d, ginv = sf.ctx.dP.value, sf.ginv.value
    ric_t = ginv @ (d.T @ ric @ nu.value)
    a_val = float(alpha.value)
    tangential = 0.25 * m * grad_a2 + A @ grad_a - a_val * ric_t
    return HypersurfaceResiduals(lap_alpha + a_val * a2, tangential, a_val, a2, lap_alpha,
                                 grad_a2, A @ grad_a, ric_t, nu.value, sf.g.value)


@dataclass
class PseudoUmbilicalReport:
    verdict: str                    # "PseudoUmbilical" | "NotPseudoUmbilical" | "Minimal"
    residuals: list
    h_norms: list
    tolerance: float


def pseudo_umbilical_check(imm, points, tol=1e-8):
    points = np.atleast_2d(np.asarray(points, float))
    res, norms = [], []
    for p in points:
        sf = SubmanifoldFrame(imm, p, 2)
        H = sf.H
        A = sf.shape_operator(H).value
        h2 = float(Rm.inner(sf.h, H, H).value)
        res.append(float(np.max(np.abs(A - h2 * np.eye(sf.m)))))
        norms.append(float(np.sqrt(h2)))
    if all(v <= tol for v in norms):
        verdict = "Minimal"
    elif all(r <= tol for r in res):
        verdict = "PseudoUmbilical"
    else:
        verdict = "NotPseudoUmbilical"
    return PseudoUmbilicalReport(verdict, res, norms, tol)


def weitzenbock_terms(imm, point, order=DEFAULT_ORDER):
    """``(1/2 lap|H|^2, h(lap H, H), |nabla H|^2)``."""
    sf = SubmanifoldFrame(imm, point, order)
    H = sf.H
    h2 = Rm.inner(sf.h, H, H)
    half_lap = 0.5 * float(sf.scalar_laplacian(h2).value)
    lapH = sf.ctx.rough_laplacian(H).value
    hH = float(lapH @ sf.h.value @ H.value)
    cov = sf.cov(H).value
    grad_sq = float(np.einsum("ij,ai,ab,bj->", sf.ginv.value, cov, sf.h.value, cov))
    return half_lap, hH, grad_sq


def weitzenbock_residual(imm, point, order=DEFAULT_ORDER):
    half_lap, hH, grad_sq = weitzenbock_terms(imm, point, order)
    return half_lap - hH + grad_sq


@dataclass
class SubmanifoldReport:
    minimal: bool
    hs_tensional: bool
    hm_tensional: bool
    verdict: str
    mean_curvature_norms: list
    hs_normal: list
    hs_tangential: list
    hm_tangential: list
    weitzenbock: list
    tolerance: float
    map_report: object = field(repr=False, default=None)


def classify_submanifold(imm, points, tol=Mp.CLASSIFY_TOL, order=DEFAULT_ORDER):
    """Minimal / HS / HM verdicts; HS uses the rough Laplacian of ``tau``."""
    points = np.atleast_2d(np.asarray(points, float))
    rep = Mp.classify_map(imm.map, points, tol, order)
    hn, hs_n, hs_t, hm_t, wz = [], [], [], [], []
    for p in points:
        r = hs_submanifold_residuals(imm, p, order)
        hs_n.append(r.normal_norm)
        hs_t.append(r.tangential_norm)
        sf = SubmanifoldFrame(imm, p, 2)
        hn.append(float(np.sqrt(Rm.inner(sf.h, sf.H, sf.H).value)))
        v = hm_submanifold_residual(imm, p, order)
        hm_t.append(float(np.sqrt(max(v @ sf.g.value @ v, 0.0))))
        wz.append(abs(weitzenbock_residual(imm, p, order)))
    minimal = all(v <= tol for v in hn)
    hs = minimal or rep.hs_tensional
    hm = hs and (minimal or all(v <= tol for v in hm_t))
    verdict = "Minimal" if minimal else ("HM" if hm else ("HS" if hs else "NotHS"))
    return SubmanifoldReport(minimal, hs, hm, verdict, hn, hs_n, hs_t, hm_t, wz, tol, rep)


# -- curves ---------------------------------------------------------------

class Curve:
    """An arclength-parametrised curve: a map from a one-dimensional chart."""

    def __init__(self, gamma, arclength=True, name=None):
        if gamma.source.dim != 1:
            raise ValueError("a curve needs a one-dimensional source chart")
        self.map = gamma
        self.arclength = arclength
        self.name = name

    @property
    def dim(self):
        return self.map.target.dim


@dataclass
class FrenetData:
    frame: np.ndarray               # rows F_1 .. F_k (target coordinates)
    curvatures: np.ndarray          # chi_1 .. chi_{dim-1}; zero past a degeneracy
    derivatives: np.ndarray         # [i, d] = d-th derivative of chi_{i+1} (d = 0, 1, 2)
    degenerate: bool
    relation_residual: float
    system: np.ndarray              # the four HS-curve equations
    bitension_norm: float


def _curve_order(curve):
    return max(4, curve.dim + 1)


def frenet(curve, s, cutoff=FRENET_CUTOFF, order=None):
    gamma = curve.map
    order = order or _curve_order(curve)
    ctx = Mp.PullbackFrame(gamma, [float(s)], order)
    h = ctx.h
    n = curve.dim
    speed = float(Rm.inner(h.truncate(0), ctx.dP[:, 0].truncate(0), ctx.dP[:, 0].truncate(0)).value)
    if curve.arclength and abs(speed - 1.0) > 1e-8:
        raise NotArclength(f"|gamma'|^2 = {speed} at s = {s}")

    def dcov(v):
        return ctx.cov_coordinate(v)[:, 0]

    vecs = [ctx.dP[:, 0]]
    frame, chis = [], []
    degenerate = False
    for k in range(n):
        v = vecs[-1]
        for f in frame:
            v = v - Rm.inner(h, v, f) * f
        sq = Rm.inner(h, v, v)
        if k and np.sqrt(max(sq.value, 0.0)) <= cutoff * max(1.0, np.sqrt(float(
                Rm.inner(h, vecs[-1], vecs[-1]).value))):
            degenerate = True
            break
        if sq.value <= 0:
            raise DegenerateFrame(f"null tangent at s = {s}")
        frame.append(v * J.power(sq, -0.5))
        if k < n - 1:
            if vecs[-1].order == 0:
                break
            vecs.append(dcov(vecs[-1]))
    derivs = [dcov(f) for f in frame if f.order >= 1]
    chi_jets = []
    for i in range(min(len(frame) - 1, len(derivs))):
        chi_jets.append(Rm.inner(h, derivs[i], frame[i + 1]))
    chi = np.zeros(n - 1)
    ders = np.zeros((n - 1, 3))
    for i, c in enumerate(chi_jets):
        chi[i] = c.value
        for d in range(min(2, c.order) + 1):
            ders[i, d] = c.partial((d,))
    # Frenet relations nabla F_i = -chi_{i-1} F_{i-1} + chi_i F_{i+1}
    resid = 0.0
    fv = [f.value for f in frame]
    for i, dF in enumerate(derivs):
        expect = np.zeros(n)
        if i > 0:
            expect -= chi[i - 1] * fv[i - 1]
        if i + 1 < len(fv):
            expect += chi[i] * fv[i + 1]
        resid = max(resid, float(np.max(np.abs(dF.value - expect))))
    c = np.zeros((4, 3))
    c[:min(4, n - 1)] = ders[:4]
    c1, c1p, c1pp = c[0]
    c2, c2p = c[1, 0], c[1, 1]
    c3 = c[2, 0]
    system = np.array([c1 * c1p, c1pp - c1 ** 3 - c1 * c2 ** 2, 2 * c1p * c2 + c1 * c2p,
                       c1 * c2 * c3])
    lap = ctx.rough_laplacian(ctx.tension).value if ctx.order >= 4 else None
    bit = ctx.h_norm(lap) if lap is not None else float("nan")
    return FrenetData(np.array(fv), chi, ders, degenerate, resid, system, bit)


@dataclass
class CurveReport:
    geodesic: bool
    hs_tensional: bool
    verdict: str
    curvatures: list
    system_residuals: list
    frenet_residuals: list
    bitension_norms: list
    bitension_from_system: list
    tolerance: float


def classify_curve(curve, samples, tol=Mp.CLASSIFY_TOL):
    """Geodesic / HS verdicts from the Frenet data at the parameter samples."""
    samples = np.asarray(samples, float).ravel()
    chis, sys_res, fr, bit, bit_sys = [], [], [], [], []
    for s in samples:
        fd = frenet(curve, s)
        chis.append([float(x) for x in fd.curvatures])
        sys_res.append(float(np.max(np.abs(fd.system))))
        fr.append(fd.relation_residual)
        bit.append(fd.bitension_norm)
        e = fd.system
        bit_sys.append(float(np.sqrt((3 * e[0]) ** 2 + e[1] ** 2 + e[2] ** 2 + e[3] ** 2)))
    geodesic = all(abs(c[0]) <= tol for c in chis) if chis and chis[0] else True
    hs = all(r <= tol for r in sys_res)
    verdict = "Geodesic" if geodesic else ("HS" if hs else "NotHS")
    return CurveReport(geodesic, hs or geodesic, verdict, chis, sys_res, fr, bit, bit_sys, tol)
