"""Single-manifold calculus on one coordinate chart.

Conventions
-----------
* ``christoffel[k, i, j]`` is the Levi-Civita symbol with upper index ``k``.
* ``riemann[l, k, i, j]`` are the components of ``R(d_i, d_j) d_k``
  along ``d_l`` with ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
* The Laplacian has positive spectrum:
  ``lap f = sum_a ((nabla_{e_a} e_a) f - e_a(e_a f)) = -trace Hess f``.
* Frame arrays store frame vectors as rows: ``frame[a]`` holds the
  coordinate components of ``e_a``.
"""

from dataclasses import dataclass

import numpy as np

from . import jet as J
from .errors import DomainError, ModeUnsupported, NotPositiveDefinite
from .expr import ExprAst, evaluate, parse

EIG_THRESHOLD = 1e-10
IDENTITY_TOL = 1e-8
DEFAULT_SEED = 42
SAMPLE_MARGIN = 1e-3


def _as_ast(src, coords, params):
    if isinstance(src, ExprAst):
        return src
    return parse(str(src), coords, params)


def _jet_of(value, like):
    if isinstance(value, J.Jet):
        return value
    return J.Jet.constant(np.broadcast_to(value, like.shape), like.nvars, like.order, like.point)


class Chart:
    """A coordinate chart carrying a Riemannian metric.

    Subclasses provide :meth:`metric_jet`.  ``domain`` is a list of closed
    per-coordinate intervals (``None`` for an unbounded side); ``guard`` is an
    expression that must be strictly positive inside the chart.
    """

    def __init__(self, name, coords, domain=None, guard=None, params=None, sample_box=None):
        self.name = name
        self.coords = tuple(coords)
        self.params = dict(params or {})
        if domain is None:
            domain = [(None, None)] * len(self.coords)
        if len(domain) != len(self.coords):
            raise ValueError("domain needs one interval per coordinate")
        self.domain = [(-np.inf if lo is None else float(lo), np.inf if hi is None else float(hi))
                       for lo, hi in domain]
        self.guard = None if guard is None else _as_ast(guard, self.coords, self.params)
        self.sample_box = None if sample_box is None else [tuple(map(float, b)) for b in sample_box]

    @property
    def dim(self):
        return len(self.coords)

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"

    def contains(self, point, margin=0.0):
        point = np.asarray(point, dtype=float)
        for x, (lo, hi) in zip(point, self.domain):
            if not (lo + margin <= x <= hi - margin):
                return False
        if self.guard is not None:
            try:
                if not float(self.guard.evaluate(point)) > 0:
                    return False
            except DomainError:
                return False
        return True

    def check_point(self, point):
        if not self.contains(point):
            raise DomainError(f"point {tuple(np.asarray(point, float))} outside chart {self.name!r}")

    def metric_jet(self, point, order):
        raise NotImplementedError

    def metric_value(self, point):
        return self.metric_jet(point, 0).value

    def sampling_box(self):
        if self.sample_box is not None:
            return self.sample_box
        box = []
        for lo, hi in self.domain:
            if np.isfinite(lo) and np.isfinite(hi):
                box.append((lo, hi))
            elif np.isfinite(lo):
                box.append((lo, lo + 2.0))
            elif np.isfinite(hi):
                box.append((hi - 2.0, hi))
            else:
                box.append((-1.0, 1.0))
        return box


class RiemannianChart(Chart):
    """Chart whose metric components are expressions in the coordinates.

    Only the upper triangle of ``metric`` is read, so the stored metric is
    symmetric by construction.
    """

    def __init__(self, name, coords, metric, domain=None, guard=None, params=None,
                 sample_box=None):
        super().__init__(name, coords, domain, guard, params, sample_box)
        m = self.dim
        if len(metric) != m or any(len(row) != m for row in metric):
            raise ValueError(f"metric must be {m}x{m}")
        self.metric = [[None] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                ast = _as_ast(metric[i][j], self.coords, self.params)
                self.metric[i][j] = self.metric[j][i] = ast

    @classmethod
    def euclidean(cls, m, coords=None, name=None, **kw):
        coords = coords or [f"x{i + 1}" for i in range(m)]
        metric = [["1" if i == j else "0" for j in range(m)] for i in range(m)]
        return cls(name or f"R{m}", coords, metric, **kw)

    @classmethod
    def conformal(cls, name, coords, factor, **kw):
        """Metric ``factor * (dx_1^2 + ... + dx_m^2)``."""
        m = len(coords)
        metric = [[f"({factor})" if i == j else "0" for j in range(m)] for i in range(m)]
        return cls(name, coords, metric, **kw)

    def metric_jet(self, point, order):
        xs = J.Jet.variables(point, order)
        env = {c: xs[i] for i, c in enumerate(self.coords)}
        m = self.dim
        rows = []
        for i in range(m):
            rows.append(J.stack([_jet_of(evaluate(self.metric[i][j].root, env), xs[0])
                                 for j in range(m)]))
        return J.stack(rows)

    def metric_value(self, point):
        point = np.asarray(point, dtype=float)
        env = dict(zip(self.coords, point))
        m = self.dim
        return np.array([[float(evaluate(self.metric[i][j].root, env)) for j in range(m)]
                         for i in range(m)])


# -- field types ------------------------------------------------------------

class ScalarFieldExpr:
    def __init__(self, chart, expr):
        self.chart = chart
        self.expr = _as_ast(expr, chart.coords, chart.params)

    def jet(self, point, order):
        xs = J.Jet.variables(point, order)
        return _jet_of(self.expr.evaluate(list(xs)), xs[0])


class VectorFieldExpr:
    """Vector field ``sum_j xi^j d_j`` given by component expressions."""

    def __init__(self, chart, components):
        if len(components) != chart.dim:
            raise ValueError(f"need {chart.dim} components, got {len(components)}")
        self.chart = chart
        self.components = [_as_ast(c, chart.coords, chart.params) for c in components]

    def jets(self, point, order):
        xs = J.Jet.variables(point, order)
        vals = list(xs)
        return J.stack([_jet_of(c.evaluate(vals), xs[0]) for c in self.components])


# -- jet-level kernels ------------------------------------------------------

def inner(g, u, v):
    """``g(u, v)`` for vectors along the last axis."""
    return J.einsum("...i,...i->...", J.einsum("...ij,...j->...i", g, u), v)


def christoffel_from_metric(g):
    """Levi-Civita symbols ``[k, i, j]`` from a metric jet (order drops by one)."""
    if g.is_constant():
        m = g.shape[-1]
        return J.Jet.constant(np.zeros((m, m, m)), g.nvars, g.order - 1, g.point)
    ginv = J.inv(g)
    dg = g.grad()                       # dg[a, b, c] = d_c g_ab
    term = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
    return 0.5 * J.einsum("kl,lij->kij", ginv, term)


def riemann_from_christoffel(gamma):
    """``R[l, k, i, j]`` from Christoffel jets (order drops by one)."""
    if gamma.is_constant() and not np.any(gamma.value):
        m = gamma.shape[0]
        return J.Jet.constant(np.zeros((m,) * 4), gamma.nvars, gamma.order - 1, gamma.point)
    dG = gamma.grad()                   # dG[l, a, b, c] = d_c Gamma^l_ab
    quad = J.einsum("lip,pjk->lkij", gamma, gamma)
    return (dG.transpose(0, 2, 3, 1) - dG.transpose(0, 2, 1, 3)
            + quad - quad.transpose(0, 1, 3, 2))


def gram_schmidt(g, vectors=None):
    """Orthonormalise ``vectors`` (rows, default the coordinate frame) in ``g``."""
    m = g.shape[-1]
    if vectors is None and g.order > 0 and g.is_constant():
        flat = gram_schmidt(J.Jet.constant(g.value, g.nvars, 0))
        return J.Jet.constant(flat.value, g.nvars, g.order, g.point)
    if vectors is None:
        vectors = [J.Jet.constant(np.eye(m)[a], g.nvars, g.order, g.point) for a in range(m)]
    frame = []
    for v in vectors:
        for e in frame:
            v = v - inner(g, v, e) * e
        sq = inner(g, v, v)
        if not np.all(sq.value > 0):
            raise NotPositiveDefinite("metric is not positive definite on the frame",
                                      float(np.min(sq.value)))
        frame.append(v * J.power(sq, -0.5))
    return J.stack(frame)


def frame_jets(g, rotation=None):
    frame = gram_schmidt(g)
    if rotation is not None:
        frame = J.einsum("ab,bi->ai", np.asarray(rotation, float), frame)
    return frame


def self_covariant(frame, gamma):
    """``nabla_{e_a} e_a`` for every frame row, coordinate components."""
    dE = frame.grad()                   # dE[a, k, j] = d_j E_a^k
    t1 = J.einsum("aj,akj->ak", frame, dE)
    t2 = J.einsum("akj,aj->ak", J.einsum("kij,ai->akj", gamma, frame), frame)
    return t1 + t2


def frame_connection_jets(frame, gamma):
    """``nabla_{e_a} e_b`` in coordinates, ``[a, b, k]``."""
    dE = frame.grad()
    t1 = J.einsum("aj,bkj->abk", frame, dE)
    t2 = J.einsum("akj,bj->abk", J.einsum("kij,ai->akj", gamma, frame), frame)
    return t1 + t2


# -- pointwise operations ---------------------------------------------------

def _check_spd(g):
    w = np.linalg.eigvalsh(g)
    if w[0] <= EIG_THRESHOLD:
        raise NotPositiveDefinite(f"metric eigenvalue {w[0]:.3e} <= {EIG_THRESHOLD}", float(w[0]))


def metric_at(chart, point):
    chart.check_point(point)
    g = np.asarray(chart.metric_value(point), dtype=float)
    _check_spd(g)
    return g


def inverse_metric_at(chart, point):
    return np.linalg.inv(metric_at(chart, point))


def christoffel(chart, point, order=0):
    """Christoffel symbols at ``point``; with ``order > 0`` returns the jet."""
    chart.check_point(point)
    gamma = christoffel_from_metric(chart.metric_jet(point, order + 1))
    return gamma if order else gamma.value


def riemann_curvature(chart, point):
    chart.check_point(point)
    gamma = christoffel_from_metric(chart.metric_jet(point, 2))
    return riemann_from_christoffel(gamma).value


def lowered_riemann(chart, point):
    """``R_{lkij} = g_{lp} R^p_{kij}``."""
    return np.einsum("lp,pkij->lkij", metric_at(chart, point), riemann_curvature(chart, point))


def ricci_tensor(chart, point):
    return np.einsum("ikij->kj", riemann_curvature(chart, point))


def ricci_operator(chart, point):
    """Ricci operator ``g^{-1} Ric`` as a matrix acting on coordinate vectors."""
    return inverse_metric_at(chart, point) @ ricci_tensor(chart, point)


def scalar_curvature(chart, point):
    return float(np.trace(ricci_operator(chart, point)))


def sectional_curvature(chart, point, x, y):
    g = metric_at(chart, point)
    riem = riemann_curvature(chart, point)
    x, y = np.asarray(x, float), np.asarray(y, float)
    ryy = np.einsum("lkij,i,j,k->l", riem, x, y, y)
    num = x @ g @ ryy
    return float(num / ((x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2))


def _relative(residual, *terms):
    scale = max([1.0] + [float(np.max(np.abs(t))) for t in terms])
    return float(np.max(np.abs(residual))) / scale


def check_constant_curvature(chart, c, points, tol=IDENTITY_TOL, seed=DEFAULT_SEED, trials=3):
    """Whether ``R(U,V)W = c(g(V,W)U - g(U,W)V)`` holds at every point.

    ``trials`` random triples ``(U, V, W)`` are tested per point.  Returns
    ``(verdict, residuals)`` with one (relative) residual per point.
    """
    points = np.atleast_2d(np.asarray(points, float))
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    rng = np.random.default_rng(seed)
    residuals = []
    for p in points:
        g = metric_at(chart, p)
        riem = riemann_curvature(chart, p)
        worst = 0.0
        for _ in range(trials):
            u, v, w = rng.standard_normal((3, chart.dim))
            lhs = np.einsum("lkij,i,j,k->l", riem, u, v, w)
            rhs = c * ((v @ g @ w) * u - (u @ g @ w) * v)
            worst = max(worst, _relative(lhs - rhs, lhs, rhs))
        residuals.append(worst)
    return all(r <= tol for r in residuals), residuals


def orthonormal_frame(chart, point, rotation=None):
    """Gram-Schmidt frame of the coordinate frame; rows are the ``e_a``."""
    g = metric_at(chart, point)
    return frame_jets(J.Jet.constant(g, chart.dim, 0), rotation).value


def frame_connection(chart, point, rotation=None):
    """``C[a, b, c]`` with ``nabla_{e_a} e_b = sum_c C[a, b, c] e_c``."""
    chart.check_point(point)
    g = chart.metric_jet(point, 2)
    gamma = christoffel_from_metric(g)
    frame = frame_jets(g.truncate(1), rotation)
    coord = frame_connection_jets(frame, gamma).value
    return coord @ np.linalg.inv(frame.value)


# -- scalar calculus --------------------------------------------------------

def _scalar_data(f, point):
    chart = f.chart
    chart.check_point(point)
    g = chart.metric_jet(point, 1)
    gamma = christoffel_from_metric(g).value
    fj = f.jet(point, 2)
    return g.value, gamma, fj


def grad(f, point):
    g, _, fj = _scalar_data(f, point)
    return np.linalg.solve(g, fj.grad().value)


def hessian(f, point):
    """Coordinate components ``Hess_ij = d_i d_j f - Gamma^k_ij d_k f``."""
    _, gamma, fj = _scalar_data(f, point)
    df = fj.grad()
    return df.grad().value - np.einsum("kij,k->ij", gamma, df.value)


def laplacian(f, point):
    g, _, _ = _scalar_data(f, point)
    return float(-np.einsum("ij,ij->", np.linalg.inv(g), hessian(f, point)))


def laplacian_in_frame(f, point, rotation=None):
    """Laplacian evaluated with frame derivatives instead of ``g^{ij}``."""
    chart = f.chart
    chart.check_point(point)
    g = chart.metric_jet(point, 2)
    gamma = christoffel_from_metric(g)
    frame = frame_jets(g.truncate(1), rotation)
    fj = f.jet(point, 2)
    ef = J.einsum("ai,i->a", frame, fj.grad())          # e_a f, order 1
    e_ef = J.einsum("ai,ai->a", frame.truncate(0),
                    ef.grad().truncate(0)).value        # e_a(e_a f)
    de = self_covariant(frame, gamma).value
    return float(np.sum(de @ fj.grad().value) - np.sum(e_ef))


def hessian_in_frame(f, point, rotation=None):
    """``Hess(e_a, e_b) = e_a(e_b f) - (nabla_{e_a} e_b) f`` computed directly."""
    chart = f.chart
    chart.check_point(point)
    g = chart.metric_jet(point, 2)
    gamma = christoffel_from_metric(g)
    frame = frame_jets(g.truncate(1), rotation)
    fj = f.jet(point, 2)
    ebf = J.einsum("bi,i->b", frame, fj.grad())
    ea_ebf = np.einsum("ai,bi->ab", frame.value, ebf.grad().value)
    conn = frame_connection_jets(frame, gamma).value
    return ea_ebf - conn @ fj.grad().value


def is_strongly_convex_at(f, points, threshold=EIG_THRESHOLD):
    """True iff the Hessian is positive definite at every point.

    Returns ``(verdict, min_eigenvalues)``; eigenvalues are taken in the
    orthonormal frame so they do not depend on coordinate scaling.
    """
    points = np.atleast_2d(np.asarray(points, float))
    mins = []
    for p in points:
        e = orthonormal_frame(f.chart, p)
        h = e @ hessian(f, p) @ e.T
        mins.append(float(np.linalg.eigvalsh(0.5 * (h + h.T))[0]))
    return all(v > threshold for v in mins), mins


# -- rough-type vector fields -------------------------------------------------

@dataclass
class RoughTypeReport:
    verdict: bool
    mode: str
    tensorial_verdict: bool
    coordinate_verdict: object      # None when the chart is not flat
    tensorial_residuals: list
    coordinate_residuals: object
    tolerance: float

    @property
    def modes_disagree(self):
        return self.coordinate_verdict is not None and \
            self.coordinate_verdict != self.tensorial_verdict


def second_covariant(xi, point):
    """``(nabla^2 xi)(d_i, d_j)^k`` as an array ``[k, i, j]``."""
    chart = xi.chart
    chart.check_point(point)
    gamma = christoffel_from_metric(chart.metric_jet(point, 2))      # order 1
    xj = xi.jets(point, 2)
    cov = xj.grad() + J.einsum("kil,l->ki", gamma, xj)                # T[k, i] = nabla_i xi^k
    dcov = cov.grad().value                                          # [k, j, i] = d_i T^k_j
    g0, c0 = gamma.value, cov.value
    return (dcov.transpose(0, 2, 1) + np.einsum("kil,lj->kij", g0, c0)
            - np.einsum("lij,kl->kij", g0, c0))


def is_flat_coordinates(chart, points, tol=1e-12):
    for p in points:
        g = chart.metric_jet(p, 1)
        if np.max(np.abs(g.value - np.eye(chart.dim))) > tol or np.max(np.abs(g.grad().value)) > tol:
            return False
    return True


def rough_type_check(xi, points, mode="tensorial", tol=IDENTITY_TOL):
    """Test ``nabla_X nabla_X xi - nabla_{nabla_X X} xi = 0`` at ``points``.

    ``mode="tensorial"`` tests the symmetric part of the second covariant
    derivative, which is equivalent to the condition for every ``X``.
    ``mode="coordinate"`` (Euclidean coordinates only) tests only the pure
    second partials ``d^2 xi^j / dx_k^2``.  Both residual tables are filled
    whenever the chart is flat.
    """
    if mode not in ("tensorial", "coordinate"):
        raise ValueError(f"unknown mode {mode!r}")
    points = np.atleast_2d(np.asarray(points, float))
    if len(points) < 5:
        raise ValueError("need at least 5 points")
    flat = is_flat_coordinates(xi.chart, points)
    if mode == "coordinate" and not flat:
        raise ModeUnsupported("coordinate mode requires Euclidean coordinates")
    tens, coord = [], [] if flat else None
    for p in points:
        h = second_covariant(xi, p)
        tens.append(float(np.max(np.abs(0.5 * (h + h.transpose(0, 2, 1))))))
        if flat:
            d2 = xi.jets(p, 2).grad().grad().value       # [j, k, l]
            coord.append(float(np.max(np.abs(np.einsum("jkk->jk", d2)))))
    t_ok = all(r <= tol for r in tens)
    c_ok = None if coord is None else all(r <= tol for r in coord)
    verdict = t_ok if mode == "tensorial" else c_ok
    return RoughTypeReport(verdict, mode, t_ok, c_ok, tens, coord, tol)


# -- sampling ---------------------------------------------------------------

def sample_points(chart, n, seed=DEFAULT_SEED, margin=SAMPLE_MARGIN, box=None, max_tries=100000):
    """Deterministic rejection sample of ``n`` in-domain points."""
    rng = np.random.default_rng(seed)
    box = box or chart.sampling_box()
    lo = np.array([b[0] for b in box]) + margin
    hi = np.array([b[1] for b in box]) - margin
    out = []
    tries = 0
    while len(out) < n:
        if tries > max_tries:
            raise DomainError(f"could not sample {n} points in chart {chart.name!r}")
        tries += 1
        p = lo + (hi - lo) * rng.random(chart.dim)
        if chart.contains(p, margin=0.0) and _inside_margin(chart, p, margin):
            out.append(p)
    return np.array(out)


def _inside_margin(chart, p, margin):
    return all(lo + margin <= x <= hi - margin for x, (lo, hi) in zip(p, chart.domain))


class InducedChart(Chart):
    """Chart whose metric is pulled back by component expressions into ``target``.

    ``g = d iota^T h(iota) d iota``; the metric jets are built by jet
    composition, so no closed-form metric expressions are formed.
    """

    def __init__(self, name, coords, components, target, domain=None, guard=None,
                 params=None, sample_box=None):
        super().__init__(name, coords, domain, guard, params, sample_box)
        if len(components) != target.dim:
            raise ValueError(f"need {target.dim} components")
        self.target = target
        self.components = [_as_ast(c, self.coords, self.params) for c in components]

    def embedding_jets(self, point, order):
        xs = J.Jet.variables(point, order)
        vals = list(xs)
        return J.stack([_jet_of(c.evaluate(vals), xs[0]) for c in self.components])

    def metric_jet(self, point, order):
        emb = self.embedding_jets(point, order + 1)
        d = emb.grad()
        h = self.target.metric_jet(emb.value, order).compose(emb)
        return J.einsum("ai,aj->ij", d, J.einsum("ab,bj->aj", h, d))
