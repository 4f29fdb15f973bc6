"""Two-manifold calculus: maps, the pullback bundle, tension and Sasaki data.

All vectors along a map are given by their components in the target
coordinates.  "Frame components" of a vector on the source refer to the
deterministic Gram-Schmidt frame of :func:`tensional.riemann.orthonormal_frame`.

The rough Laplacian follows the positive-spectrum convention
``lap xi = -sum_a (nabla_{e_a} nabla_{e_a} xi - nabla_{nabla_{e_a} e_a} xi)``.
``S(xi) = sum_a R^N(nabla_{e_a} xi, xi) dpsi(e_a)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
import itertools

import numpy as np

from . import jet as J
from . import riemann as Rm
from .errors import DomainError, ImageOutOfChart, OrderTooLarge
from .expr import MAX_ORDER, ExprAst, parse

DEFAULT_ORDER = 4
CLASSIFY_TOL = 1e-7


def _as_ast(src, coords, params):
    return src if isinstance(src, ExprAst) else parse(str(src), coords, params)


def _components_jets(asts, point, order):
    xs = J.Jet.variables(point, order)
    lead = (slice(None),) * (xs.ndim - 1)
    vals = [xs[lead + (i,)] for i in range(xs.shape[-1])]
    out = []
    for a in asts:
        r = a.evaluate(vals)
        if not isinstance(r, J.Jet):
            r = J.Jet.constant(np.broadcast_to(r, xs.shape[:-1]), xs.nvars, order, xs.point)
        out.append(r)
    return J.stack(out, axis=-1)


class SmoothMap:
    """A map between two charts given by component expressions."""

    def __init__(self, source, target, components, params=None, name=None):
        if len(components) != target.dim:
            raise ValueError(f"need {target.dim} components, got {len(components)}")
        self.source = source
        self.target = target
        self.name = name
        self.params = {**source.params, **(params or {})}
        self.components = [_as_ast(c, source.coords, self.params) for c in components]

    @classmethod
    def identity(cls, source, target=None, name=None):
        return cls(source, target or source, list(source.coords), name=name)

    def jets(self, point, order):
        return _components_jets(self.components, point, order)


class PullbackSection:
    """Section of the pullback bundle, components in target coordinates."""

    def __init__(self, psi, components, params=None):
        if len(components) != psi.target.dim:
            raise ValueError(f"need {psi.target.dim} components")
        self.map = psi
        self.components = [_as_ast(c, psi.source.coords, {**psi.params, **(params or {})})
                           for c in components]

    def jets(self, point, order):
        return _components_jets(self.components, point, order)


class TensionSection:
    """The tension field of ``psi`` viewed as a section along ``psi``."""

    def __init__(self, psi):
        self.map = psi

    def jets(self, point, order):
        return PullbackFrame(self.map, point, order + 2).tension


class ScaledSection:
    """``f * xi`` for a scalar expression ``f`` on the source."""

    def __init__(self, factor, section):
        self.map = section.map
        self.section = section
        self.factor = _as_ast(factor, self.map.source.coords, self.map.params)

    def jets(self, point, order):
        f = _components_jets([self.factor], point, order)[0]
        return self.section.jets(point, order) * f


def _check_order(order):
    if order > MAX_ORDER:
        raise OrderTooLarge(f"jet order {order} exceeds cap {MAX_ORDER}")


class PullbackFrame:
    """Jet data of ``psi`` and of the pullback connection at one source point.

    Orders at ``order = K`` (in source variables): map ``K``, source metric
    ``K - 1``, ``Gamma^M`` and ``nabla_{e_a} e_a`` ``K - 2``, target
    Christoffel symbols along ``psi`` ``K - 2``, target curvature ``K - 3``,
    tension ``K - 2``.
    """

    def __init__(self, psi, point, order=DEFAULT_ORDER, rotation=None):
        _check_order(order)
        point = np.asarray(point, dtype=float)
        if not psi.source.contains(point):
            raise DomainError(f"point {tuple(point)} outside chart {psi.source.name!r}")
        self.psi = psi
        self.point = point
        self.order = order
        self.rotation = rotation
        self.P = psi.jets(point, order)
        self.image = self.P.value
        if not psi.target.contains(self.image):
            raise ImageOutOfChart(
                f"image {tuple(self.image)} outside chart {psi.target.name!r}")
        self.dP = self.P.grad()                                   # [alpha, i]

    # -- source geometry ---------------------------------------------------

    @cached_property
    def g(self):
        g = self.psi.source.metric_jet(self.point, self.order - 1)
        Rm._check_spd(g.value)
        return g

    @cached_property
    def gamma_m(self):
        return Rm.christoffel_from_metric(self.g)

    @cached_property
    def frame(self):
        return Rm.frame_jets(self.g, self.rotation)

    @cached_property
    def self_cov(self):
        return Rm.self_covariant(self.frame, self.gamma_m)

    # -- target geometry along psi ------------------------------------------

    @cached_property
    def _h_target(self):
        return self.psi.target.metric_jet(self.image, self.order - 1)

    @cached_property
    def h(self):
        return self._h_target.compose(self.P)

    @cached_property
    def _gamma_target(self):
        return Rm.christoffel_from_metric(self._h_target)

    @cached_property
    def gamma_n(self):
        return self._gamma_target.compose(self.P)

    @cached_property
    def riem_n(self):
        return Rm.riemann_from_christoffel(self._gamma_target).compose(self.P)

    # -- pullback calculus ---------------------------------------------------

    def push(self, v):
        """``dpsi(v)`` for stacked source vectors ``v[..., i]``."""
        if v.ndim == 1:
            return J.einsum("ai,i->a", self.dP, v)
        return J.einsum("ai,bi->ba", self.dP, v)

    def cov(self, xi, v):
        """``nabla^psi_v xi`` for stacked fields: ``xi[b, alpha]``, ``v[b, i]``."""
        d = J.einsum("bai,bi->ba", xi.grad(), v)
        w = self.push(v)
        conn = J.einsum("akc,bk->bac", self.gamma_n, w)
        return d + J.einsum("bac,bc->ba", conn, xi)

    def cov_coordinate(self, xi):
        """``nabla^psi_{d_i} xi`` for every ``i``; result ``[alpha, i]``."""
        conn = J.einsum("akc,ki->aci", self.gamma_n, self.dP)
        return xi.grad() + J.einsum("aci,c->ai", conn, xi)

    def _tile(self, xi):
        m = self.psi.source.dim
        return J.stack([xi] * m)

    @cached_property
    def tension(self):
        de = self.push(self.frame)                              # dpsi(e_a)
        return (self.cov(de, self.frame) - self.push(self.self_cov)).sum(axis=0)

    def rough_laplacian(self, xi):
        xs = self._tile(xi)
        first = self.cov(xs, self.frame)
        return -(self.cov(first, self.frame) - self.cov(xs, self.self_cov)).sum(axis=0)

    def s_term(self, xi):
        first = self.cov(self._tile(xi), self.frame)            # [a, alpha]
        de = self.push(self.frame)                              # [a, alpha]
        # R(U, V) W with U = nabla_{e_a} xi, V = xi, W = dpsi(e_a)
        r = J.einsum("lkij,j->lki", self.riem_n, xi)
        r = J.einsum("lki,ai->alk", r, first)
        return J.einsum("alk,ak->l", r, de)

    def hm_pairing(self, xi):
        s = self.s_term(xi)
        de = self.push(self.frame)
        return J.einsum("b,jb->j", J.einsum("a,ab->b", s, self.h), de)

    def section(self, xi):
        """Jets of a section object, reusing the tension computed here."""
        if isinstance(xi, TensionSection) and xi.map is self.psi:
            return self.tension
        return xi.jets(self.point, self.order)

    def h_norm(self, v):
        h = self.h.value
        return float(np.sqrt(max(v @ h @ v, 0.0)))


# -- public pointwise operations ---------------------------------------------

def differential(psi, point):
    return PullbackFrame(psi, point, 1).dP.value


def energy_density(psi, point):
    ctx = PullbackFrame(psi, point, 1)
    g = psi.source.metric_value(point)
    h = psi.target.metric_value(ctx.image)
    d = ctx.dP.value
    return 0.5 * float(np.einsum("ij,ai,ab,bj->", np.linalg.inv(g), d, h, d))


def tension_field(psi, point, rotation=None):
    return PullbackFrame(psi, point, 2, rotation).tension.value


def pullback_derivative(psi, xi, index, point):
    ctx = PullbackFrame(psi, point, DEFAULT_ORDER)
    return ctx.cov_coordinate(ctx.section(xi)).value[:, index]


def rough_laplacian(psi, xi, point, order=DEFAULT_ORDER, rotation=None):
    ctx = PullbackFrame(psi, point, order, rotation)
    return ctx.rough_laplacian(ctx.section(xi)).value


def s_term(psi, xi, point, order=DEFAULT_ORDER):
    ctx = PullbackFrame(psi, point, order)
    return ctx.s_term(ctx.section(xi)).value


def hm_pairing(psi, xi, point, order=DEFAULT_ORDER, rotation=None):
    ctx = PullbackFrame(psi, point, order, rotation)
    return ctx.hm_pairing(ctx.section(xi)).value


def bitension_data(psi, point, order=DEFAULT_ORDER, rotation=None):
    """``(tau, lap tau, S(tau), pairing, h(image))`` at one point."""
    ctx = PullbackFrame(psi, point, order, rotation)
    tau = ctx.tension
    return (tau.value, ctx.rough_laplacian(tau).value, ctx.s_term(tau).value,
            ctx.hm_pairing(tau).value, ctx.h.value)


# -- quadrature ----------------------------------------------------------

def _midpoints(box, resolution):
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axes = []
    for lo, hi in box:
        step = (hi - lo) / resolution
        axes.append(lo + step * (np.arange(resolution) + 0.5))
    cell = float(np.prod([(hi - lo) / resolution for lo, hi in box]))
    return np.array(list(itertools.product(*axes))), cell


def _integrate(density, chart, box, resolution):
    pts, cell = _midpoints(box, resolution)
    total = 0.0
    for p in pts:
        total += density(p) * np.sqrt(np.linalg.det(chart.metric_value(p)))
    return total * cell


@dataclass
class Quadrature:
    value: float
    error_estimate: float
    resolution: int

    def __float__(self):
        return self.value


def _with_error(density, chart, box, resolution):
    fine = _integrate(density, chart, box, resolution)
    if resolution >= 4:
        coarse = _integrate(density, chart, box, resolution // 2)
        err = abs(fine - coarse) / 3.0
    else:
        err = float("nan")
    return Quadrature(fine, err, resolution)


def energy(psi, box, resolution, with_error=False):
    """Midpoint-rule energy over ``box`` (volume element ``sqrt(det g)``)."""
    _check_box(psi.source, box)
    if with_error:
        return _with_error(lambda p: energy_density(psi, p), psi.source, box, resolution)
    return _integrate(lambda p: energy_density(psi, p), psi.source, box, resolution)


def volume(chart, box, resolution):
    _check_box(chart, box)
    return _integrate(lambda p: 1.0, chart, box, resolution)


def _check_box(chart, box):
    if len(box) != chart.dim:
        raise ValueError("box needs one interval per coordinate")
    for (lo, hi), (dlo, dhi) in zip(box, chart.domain):
        if not (dlo <= lo < hi <= dhi):
            raise DomainError(f"box {box} not inside the domain of {chart.name!r}")


def section_energy_density(psi, xi, point):
    order = 3 if isinstance(xi, TensionSection) else 2
    ctx = PullbackFrame(psi, point, order)
    cov = ctx.cov_coordinate(ctx.section(xi)).value       # [alpha, i]
    ginv = np.linalg.inv(ctx.g.value)
    return 0.5 * (psi.source.dim + float(np.einsum("ij,ai,ab,bj->", ginv, cov, ctx.h.value, cov)))


def section_energy(psi, xi, box, resolution, with_error=False):
    _check_box(psi.source, box)
    dens = lambda p: section_energy_density(psi, xi, p)   # noqa: E731
    if with_error:
        return _with_error(dens, psi.source, box, resolution)
    return _integrate(dens, psi.source, box, resolution)


def section_energy_oracle(psi, xi, box, resolution):
    """Energy of ``x -> (x, xi(x))`` into the Sasaki chart via :func:`energy`."""
    return energy(SectionGraph(psi, xi), box, resolution)


# -- Sasaki metric -------------------------------------------------------

class SasakiBundleChart(Rm.Chart):
    """Coordinates ``(q, u)`` on the pullback bundle with the Sasaki metric.

    ``G = [[g + M^T h M, M^T h], [h M, h]]`` with ``M[alpha, i] =
    u^beta mu^alpha_{beta i}`` and ``mu^alpha_{beta i} = Gamma^alpha_{gamma beta}
    d_i psi^gamma``; every entry is a jet built by composition.
    """

    def __init__(self, psi):
        src, tgt = psi.source, psi.target
        coords = [f"q{i + 1}" for i in range(src.dim)] + [f"u{a + 1}" for a in range(tgt.dim)]
        super().__init__(f"Sasaki({src.name}->{tgt.name})", coords,
                         domain=list(src.domain) + [(None, None)] * tgt.dim)
        self.psi = psi
        self.m, self.n = src.dim, tgt.dim

    def contains(self, point, margin=0.0):
        point = np.asarray(point, float)
        q = point[:self.m]
        if not self.psi.source.contains(q, margin):
            return False
        return self.psi.target.contains(self.psi.jets(q, 0).value)

    def connection_jets(self, q, order):
        """``mu[alpha, beta, i]`` in source variables."""
        P = self.psi.jets(q, order + 1)
        gam = Rm.christoffel_from_metric(self.psi.target.metric_jet(P.value, order + 1))
        return J.einsum("agb,gi->abi", gam.compose(P), P.grad()), P

    def connection_matrix(self, q, u):
        """``M[alpha, i] = u^beta mu^alpha_{beta i}`` at one bundle point."""
        mu, _ = self.connection_jets(q, 0)
        return np.einsum("abi,b->ai", mu.value, np.asarray(u, float))

    def metric_jet(self, point, order):
        point = np.asarray(point, float)
        m, n = self.m, self.n
        q = point[:m]
        mu, P = self.connection_jets(q, order)
        h = self.psi.target.metric_jet(P.value, order).compose(P)
        g = self.psi.source.metric_jet(q, order)
        pos = list(range(m))
        mu, h, g = mu.embed(m + n, pos), h.embed(m + n, pos), g.embed(m + n, pos)
        u = J.Jet.variables(point, order)[m:]
        M = J.einsum("abi,b->ai", mu, u)
        hM = J.einsum("ab,bi->ai", h, M)                     # (h M)[alpha, i]
        gqq = g + J.einsum("ai,aj->ij", M, hM)
        top = J.concatenate([gqq, hM.T], axis=1)
        bottom = J.concatenate([hM, h], axis=1)
        return J.concatenate([top, bottom], axis=0)

    def metric_value(self, point):
        return self.metric_jet(point, 0).value

    def horizontal_lift(self, q, u, x):
        """Coordinate components of ``X^h`` at ``(q, u)``."""
        x = np.asarray(x, float)
        return np.concatenate([x, -self.connection_matrix(q, u) @ x])

    def vertical_lift(self, v):
        return np.concatenate([np.zeros(self.m), np.asarray(v, float)])


class SectionGraph:
    """The map ``x -> (x, xi(x))`` from the source into the Sasaki chart."""

    def __init__(self, psi, xi):
        self.psi = psi
        self.xi = xi
        self.source = psi.source
        self.target = SasakiBundleChart(psi)
        self.params = psi.params

    def jets(self, point, order):
        xs = J.Jet.variables(point, order)
        return J.concatenate([xs, self.xi.jets(point, order)])


def section_tension_direct(psi, xi, point, order=DEFAULT_ORDER, rotation=None):
    """``(horizontal frame components, vertical components)`` of the section tension."""
    ctx = PullbackFrame(psi, point, order, rotation)
    s = ctx.section(xi)
    return -ctx.hm_pairing(s).value, -ctx.rough_laplacian(s).value


def section_tension_oracle(psi, xi, point, rotation=None):
    """Section tension via the generic tension of the graph map into the Sasaki chart."""
    graph = SectionGraph(psi, xi)
    ctx = PullbackFrame(graph, point, 2, rotation)
    t = ctx.tension.value
    m = psi.source.dim
    u = ctx.image[m:]
    a = t[:m]
    vertical = t[m:] + graph.target.connection_matrix(point, u) @ a
    g = psi.source.metric_value(point)
    frame = Rm.orthonormal_frame(psi.source, point, rotation)
    return frame @ g @ a, vertical


# -- classification ------------------------------------------------------

@dataclass
class PointResidual:
    point: list
    tau_norm: float
    bitension_norm: float
    pairing_max: float
    tau: list = field(default_factory=list)
    bitension: list = field(default_factory=list)
    s_term: list = field(default_factory=list)
    pairing: list = field(default_factory=list)


@dataclass
class ClassificationReport:
    harmonic: bool
    hs_tensional: bool
    hm_tensional: bool
    residuals: list = field(default_factory=list)
    tolerance: float = CLASSIFY_TOL
    seed: object = None

    @property
    def nonharmonic_hs(self):
        return self.hs_tensional and not self.harmonic

    @property
    def points(self):
        return [r.point for r in self.residuals]

    def max(self, name):
        return max(getattr(r, name) for r in self.residuals)

    def to_dict(self):
        return {
            "harmonic": self.harmonic,
            "hs_tensional": self.hs_tensional,
            "hm_tensional": self.hm_tensional,
            "nonharmonic_hs": self.nonharmonic_hs,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "max_tau_norm": self.max("tau_norm"),
            "max_bitension_norm": self.max("bitension_norm"),
            "max_pairing": self.max("pairing_max"),
            "points": [
                {"point": r.point, "tau_norm": r.tau_norm,
                 "bitension_norm": r.bitension_norm, "pairing_max": r.pairing_max}
                for r in self.residuals],
        }


def _residual_at(psi, point, order):
    ctx = PullbackFrame(psi, point, order)
    tau = ctx.tension
    lap = ctx.rough_laplacian(tau).value
    s = ctx.s_term(tau).value
    pair = np.einsum("a,ab,jb->j", s, ctx.h.value, ctx.push(ctx.frame).value)
    return PointResidual([float(x) for x in point], ctx.h_norm(tau.value), ctx.h_norm(lap),
                         float(np.max(np.abs(pair))), tau.value.tolist(), lap.tolist(),
                         s.tolist(), pair.tolist())


def classify_map(psi, points, tol=CLASSIFY_TOL, order=DEFAULT_ORDER, seed=None, parallel=1):
    """Harmonic / HS / HM verdicts from residuals at the sample points.

    HM is reported only together with HS, so the HM verdict always
    implies the HS verdict.
    """
    points = np.atleast_2d(np.asarray(points, float))
    if len(points) < 5:
        raise ValueError("need at least 5 points")
    work = lambda p: _residual_at(psi, p, order)   # noqa: E731
    if parallel > 1:
        with ThreadPoolExecutor(parallel) as pool:
            residuals = list(pool.map(work, points))
    else:
        residuals = [work(p) for p in points]
    harmonic = all(r.tau_norm <= tol for r in residuals)
    hs = harmonic or all(r.bitension_norm <= tol for r in residuals)
    hm = hs and (harmonic or all(r.pairing_max <= tol for r in residuals))
    return ClassificationReport(harmonic, hs, hm, residuals, tol, seed)
