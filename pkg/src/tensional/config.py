"""Run configuration: loading, validation and construction of engine objects.

A configuration is a JSON document::

    {
      "parameters": {"p": "2+sqrt(2)"},
      "manifolds": {
        "H": {"coords": ["x", "y", "z"],
              "metric": [["z^(-2*p)", "0", "0"], [null, "z^(-2*p)", "0"], [null, null, "z^(-2*p)"]],
              "domain": [[null, null], [null, null], [0, null]],
              "sample_box": [[-1, 1], [-1, 1], [0.5, 1.5]]},
        "H1": {"coords": ["u", "v", "w"],
               "metric": [["w^(-2)", "0", "0"], [null, "w^(-2)", "0"], [null, null, "w^(-2)"]],
               "domain": [[null, null], [null, null], [0, null]]},
        "E2": {"coords": ["x1", "x2"], "metric": [["1", "0"], [null, "1"]]},
        "E3": {"coords": ["X", "Y", "Z"],
               "metric": [["1", "0", "0"], [null, "1", "0"], [null, null, "1"]]},
        "S": {"coords": ["u", "v"], "induced": {"target": "E3", "components": ["u", "v", "0"]}}
      },
      "maps": {"I": {"source": "H", "target": "H1", "components": ["x", "y", "z"]}},
      "fields": {"xi": {"chart": "E2", "components": ["x1*x2", "0"]}},
      "scalars": {"f": {"chart": "E2", "expr": "x1^2"}},
      "tasks": [{"type": "classify_map", "map": "I", "expect": {"hs_tensional": true}}],
      "sampling": {"seed": 42, "n_points": 10, "jet_order": 4},
      "tolerances": {"classify": 1e-7, "identity": 1e-8},
      "output": {"format": "json", "path": null}
    }

Only the upper triangle of a metric is read; entries below the diagonal
must be ``null`` or repeat the mirrored entry verbatim.
"""

from dataclasses import dataclass, field
import hashlib
import json

from . import maps as Mp
from . import riemann as Rm
from .casebook import parse_case_id
from .errors import ConfigParseError, ParseError, UnknownCase, ValidationError
from .expr import MAX_ORDER, parse, parse_constant

TASK_TYPES = ("classify_map", "classify_submanifold", "classify_curve", "check_rough_type",
              "check_convex", "energy", "casebook")
TOP_KEYS = ("schema_version", "parameters", "manifolds", "maps", "fields", "scalars", "tasks",
            "sampling", "tolerances", "output")
DEFAULT_SAMPLING = {"seed": 42, "n_points": 10, "jet_order": 4}
DEFAULT_TOLERANCES = {"classify": Mp.CLASSIFY_TOL, "identity": 1e-8}


@dataclass
class RunConfig:
    raw: dict
    charts: dict
    maps: dict
    fields: dict
    scalars: dict
    tasks: list
    sampling: dict
    tolerances: dict
    output: dict = field(default_factory=dict)

    @property
    def digest(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    return loads_config(text)


def loads_config(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: "
                               f"{exc.msg}") from exc
    return build_config(raw)


class _Problems:
    def __init__(self):
        self.items = []

    def add(self, path, msg):
        self.items.append((path, msg))


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _param_value(v, params, path, probs):
    if _is_num(v):
        return float(v)
    if isinstance(v, str):
        try:
            return parse_constant(v, params)
        except ParseError as exc:
            probs.add(path, f"bad parameter expression: {exc}")
            return None
    probs.add(path, "parameter must be a number or an expression string")
    return None


def _params(obj, base, path, probs):
    out = dict(base)
    if obj is None:
        return out
    if not isinstance(obj, dict):
        probs.add(path, "must be an object")
        return out
    for k, v in obj.items():
        val = _param_value(v, out, f"{path}/{k}", probs)
        if val is not None:
            out[k] = val
    return out


def _check_expr(src, names, params, path, probs):
    if not isinstance(src, (str, int, float)) or isinstance(src, bool):
        probs.add(path, "expression must be a string")
        return None
    try:
        return parse(str(src), names, params)
    except ParseError as exc:
        probs.add(path, str(exc))
        return None


def _box(obj, dim, path, probs, allow_null=True):
    if not isinstance(obj, list) or len(obj) != dim:
        probs.add(path, f"must be a list of {dim} intervals")
        return None
    out = []
    for i, iv in enumerate(obj):
        if not isinstance(iv, list) or len(iv) != 2:
            probs.add(f"{path}/{i}", "interval must be [lo, hi]")
            out.append((None, None))
            continue
        lo, hi = iv
        for j, b in enumerate(iv):
            if not (_is_num(b) or (allow_null and b is None)):
                probs.add(f"{path}/{i}/{j}", "bound must be a number" +
                          (" or null" if allow_null else ""))
        if _is_num(lo) and _is_num(hi) and lo >= hi:
            probs.add(f"{path}/{i}", "lower bound must be below upper bound")
        out.append((lo, hi))
    return out


def _build_manifolds(raw, gparams, probs):
    charts = {}
    mans = raw.get("manifolds", {})
    if not isinstance(mans, dict) or not mans:
        probs.add("manifolds", "must be a non-empty object")
        return charts
    pending = list(mans.items())
    # induced charts may reference other charts; resolve in dependency order
    for _ in range(len(pending) + 1):
        rest = []
        for name, entry in pending:
            path = f"manifolds/{name}"
            if not isinstance(entry, dict):
                probs.add(path, "must be an object")
                continue
            ind = entry.get("induced")
            if isinstance(ind, dict) and ind.get("target") in mans and \
                    ind.get("target") not in charts and ind.get("target") != name:
                rest.append((name, entry))
                continue
            chart = _build_chart(name, entry, charts, gparams, probs, path)
            if chart is not None:
                charts[name] = chart
        if len(rest) == len(pending):
            for name, _ in rest:
                probs.add(f"manifolds/{name}/induced/target", "cyclic chart reference")
            break
        pending = rest
        if not pending:
            break
    return charts


def _build_chart(name, entry, charts, gparams, probs, path):
    n0 = len(probs.items)
    coords = entry.get("coords")
    if not isinstance(coords, list) or not coords or not all(isinstance(c, str) for c in coords):
        probs.add(f"{path}/coords", "must be a non-empty list of names")
        return None
    dim = entry.get("dim", len(coords))
    if dim != len(coords):
        probs.add(f"{path}/dim", f"dim {dim} disagrees with {len(coords)} coordinates")
    params = _params(entry.get("parameters"), gparams, f"{path}/parameters", probs)
    domain = None
    if "domain" in entry:
        domain = _box(entry["domain"], len(coords), f"{path}/domain", probs)
    sample_box = None
    if entry.get("sample_box") is not None:
        sample_box = _box(entry["sample_box"], len(coords), f"{path}/sample_box", probs,
                          allow_null=False)
    guard = entry.get("guard")
    if guard is not None:
        _check_expr(guard, coords, params, f"{path}/guard", probs)
    has_metric, has_ind = "metric" in entry, "induced" in entry
    if has_metric == has_ind:
        probs.add(path, "exactly one of 'metric' or 'induced' is required")
        return None
    if has_metric:
        metric = _metric(entry["metric"], coords, params, f"{path}/metric", probs)
        if len(probs.items) > n0:
            return None
        return Rm.RiemannianChart(name, coords, metric, domain, guard, params, sample_box)
    ind = entry["induced"]
    if not isinstance(ind, dict):
        probs.add(f"{path}/induced", "must be an object")
        return None
    target = charts.get(ind.get("target"))
    if target is None:
        probs.add(f"{path}/induced/target", f"unknown chart {ind.get('target')!r}")
        return None
    comps = ind.get("components")
    if not isinstance(comps, list) or len(comps) != target.dim:
        probs.add(f"{path}/induced/components", f"must list {target.dim} expressions")
        return None
    for i, c in enumerate(comps):
        _check_expr(c, coords, params, f"{path}/induced/components/{i}", probs)
    if len(probs.items) > n0:
        return None
    return Rm.InducedChart(name, coords, [str(c) for c in comps], target, domain, guard, params,
                           sample_box)


def _metric(obj, coords, params, path, probs):
    m = len(coords)
    if not isinstance(obj, list) or len(obj) != m or \
            any(not isinstance(r, list) or len(r) != m for r in obj):
        probs.add(path, f"metric must be a {m}x{m} matrix")
        return None
    out = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            v = obj[i][j]
            if j >= i:
                _check_expr(v, coords, params, f"{path}/{i}/{j}", probs)
                out[i][j] = out[j][i] = str(v)
            elif v is not None and str(v) != str(obj[j][i]):
                probs.add(f"{path}/{i}/{j}",
                          "entries below the diagonal must be null or mirror the upper triangle")
    return out


def _build_maps(raw, charts, probs):
    out = {}
    for name, entry in (raw.get("maps") or {}).items():
        path = f"maps/{name}"
        if not isinstance(entry, dict):
            probs.add(path, "must be an object")
            continue
        src, tgt = charts.get(entry.get("source")), charts.get(entry.get("target"))
        if src is None:
            probs.add(f"{path}/source", f"unknown chart {entry.get('source')!r}")
        if tgt is None:
            probs.add(f"{path}/target", f"unknown chart {entry.get('target')!r}")
        comps = entry.get("components")
        if src is None or tgt is None:
            continue
        if not isinstance(comps, list) or len(comps) != tgt.dim:
            probs.add(f"{path}/components", f"must list {tgt.dim} expressions")
            continue
        params = _params(entry.get("parameters"), src.params, f"{path}/parameters", probs)
        bad = [_check_expr(c, src.coords, params, f"{path}/components/{i}", probs) is None
               for i, c in enumerate(comps)]
        if not any(bad):
            out[name] = Mp.SmoothMap(src, tgt, [str(c) for c in comps], params, name)
    return out


def _build_fields(raw, charts, probs):
    out = {}
    for name, entry in (raw.get("fields") or {}).items():
        path = f"fields/{name}"
        ref = entry.get("chart") if isinstance(entry, dict) else None
        chart = charts.get(ref)
        if chart is None:
            probs.add(f"{path}/chart", f"unknown chart {ref!r}")
            continue
        comps = entry.get("components")
        if not isinstance(comps, list) or len(comps) != chart.dim:
            probs.add(f"{path}/components", f"must list {chart.dim} expressions")
            continue
        if all(_check_expr(c, chart.coords, chart.params, f"{path}/components/{i}", probs)
               is not None for i, c in enumerate(comps)):
            out[name] = Rm.VectorFieldExpr(chart, [str(c) for c in comps])
    return out


def _build_scalars(raw, charts, probs):
    out = {}
    for name, entry in (raw.get("scalars") or {}).items():
        path = f"scalars/{name}"
        ref = entry.get("chart") if isinstance(entry, dict) else None
        chart = charts.get(ref)
        if chart is None:
            probs.add(f"{path}/chart", f"unknown chart {ref!r}")
            continue
        if _check_expr(entry.get("expr"), chart.coords, chart.params, f"{path}/expr", probs):
            out[name] = Rm.ScalarFieldExpr(chart, str(entry["expr"]))
    return out


def _check_tasks(raw, maps, fields, scalars, probs):
    tasks = raw.get("tasks")
    if not isinstance(tasks, list):
        probs.add("tasks", "must be a list")
        return []
    refs = {"classify_map": ("map", maps), "classify_submanifold": ("map", maps),
            "classify_curve": ("map", maps), "energy": ("map", maps),
            "check_rough_type": ("field", fields), "check_convex": ("scalar", scalars)}
    for i, t in enumerate(tasks):
        path = f"tasks/{i}"
        if not isinstance(t, dict):
            probs.add(path, "must be an object")
            continue
        kind = t.get("type")
        if kind not in TASK_TYPES:
            probs.add(f"{path}/type", f"unknown task type {kind!r}")
            continue
        if kind in refs:
            key, table = refs[kind]
            if t.get(key) not in table:
                probs.add(f"{path}/{key}", f"unknown {key} {t.get(key)!r}")
                continue
            target = table[t[key]]
            if kind == "classify_submanifold" and target.source.dim >= target.target.dim:
                probs.add(f"{path}/map", "an immersion needs dim(source) < dim(target)")
            if kind == "classify_curve" and target.source.dim != 1:
                probs.add(f"{path}/map", "a curve needs a one-dimensional source")
        if kind == "energy":
            _box(t.get("box"), maps[t["map"]].source.dim, f"{path}/box", probs, allow_null=False)
            res = t.get("resolution", 8)
            if not isinstance(res, int) or res < 2:
                probs.add(f"{path}/resolution", "must be an integer >= 2")
        if kind == "check_rough_type" and t.get("mode", "tensorial") not in ("tensorial",
                                                                              "coordinate"):
            probs.add(f"{path}/mode", "must be 'tensorial' or 'coordinate'")
        if kind == "casebook":
            if isinstance(t.get("case"), str):
                try:
                    parse_case_id(t["case"])
                except (UnknownCase, ParseError) as exc:
                    probs.add(f"{path}/case", str(exc))
            elif t.get("all") is not True:
                probs.add(path, "casebook task needs 'case' or 'all': true")
        n = t.get("n_points")
        if n is not None and not (isinstance(n, int) and not isinstance(n, bool) and n >= 5):
            probs.add(f"{path}/n_points", "must be an integer >= 5")
        if "expect" in t and not isinstance(t["expect"], dict):
            probs.add(f"{path}/expect", "must be an object")
    return tasks


def _merge(defaults, obj, path, probs, check):
    out = dict(defaults)
    if obj is None:
        return out
    if not isinstance(obj, dict):
        probs.add(path, "must be an object")
        return out
    for k, v in obj.items():
        if k not in defaults:
            probs.add(f"{path}/{k}", "unknown key")
        elif not check(k, v):
            probs.add(f"{path}/{k}", "invalid value")
        else:
            out[k] = v
    return out


def _sampling_ok(key, value):
    if not isinstance(value, int) or isinstance(value, bool):
        return False
    if key == "jet_order":
        return Mp.DEFAULT_ORDER <= value <= MAX_ORDER
    return key == "seed" or value >= 5


def build_config(raw):
    probs = _Problems()
    if not isinstance(raw, dict):
        raise ValidationError([("", "configuration must be an object")])
    for k in raw:
        if k not in TOP_KEYS:
            probs.add(k, "unknown key")
    if raw.get("schema_version", 1) != 1:
        probs.add("schema_version", "only schema_version 1 is supported")
    gparams = _params(raw.get("parameters"), {}, "parameters", probs)
    charts = _build_manifolds(raw, gparams, probs)
    maps = _build_maps(raw, charts, probs)
    fields = _build_fields(raw, charts, probs)
    scalars = _build_scalars(raw, charts, probs)
    tasks = _check_tasks(raw, maps, fields, scalars, probs)
    sampling = _merge(DEFAULT_SAMPLING, raw.get("sampling"), "sampling", probs,
                      _sampling_ok)
    tolerances = _merge(DEFAULT_TOLERANCES, raw.get("tolerances"), "tolerances", probs,
                        lambda k, v: _is_num(v) and v > 0)
    output = _merge({"format": "json", "path": None}, raw.get("output"), "output", probs,
                    lambda k, v: (v in ("json", "text")) if k == "format"
                    else (v is None or isinstance(v, str)))
    if probs.items:
        raise ValidationError(probs.items)
    return RunConfig(raw, charts, maps, fields, scalars, tasks, sampling, tolerances, output)
