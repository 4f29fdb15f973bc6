"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores, for every multi-index ``a`` of total degree at most
``order``, the Taylor coefficient ``d^a f / a!`` of a function at a base
point.  Coefficients live on the last axis of ``coeffs``; any leading axes
form an array of jets that share one variable space, so a metric is a jet of
shape ``(m, m)``.

Multi-indices are enumerated by degree first, so the coefficients of a lower
order jet are a prefix of the higher order layout and truncation is a slice.
"""

import functools
import itertools
import math

import numpy as np

from .errors import DomainError, IndexTooDeep

_COEFF = "Z"


def n_coeffs(nvars, order):
    return math.comb(nvars + order, order)


@functools.lru_cache(maxsize=None)
def multi_indices(nvars, order):
    """All exponent tuples of total degree <= order, graded layout."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _index_of(nvars, order):
    return {alpha: i for i, alpha in enumerate(multi_indices(nvars, order))}


@functools.lru_cache(maxsize=None)
def _basis_array(nvars, order):
    return np.array(multi_indices(nvars, order), dtype=np.int64).reshape(-1, nvars)


def _keys(alphas, order):
    base = order + 1
    weights = base ** np.arange(alphas.shape[-1], dtype=np.int64)
    return alphas @ weights


@functools.lru_cache(maxsize=None)
def _mul_table(nvars, order):
    basis = _basis_array(nvars, order)
    deg = basis.sum(axis=1)
    ii, jj = np.nonzero(deg[:, None] + deg[None, :] <= order)
    keys = _keys(basis[ii] + basis[jj], order)
    basis_keys = _keys(basis, order)
    sorter = np.argsort(basis_keys)
    kk = sorter[np.searchsorted(basis_keys, keys, sorter=sorter)]
    perm = np.argsort(kk, kind="stable")
    ii, jj, kk = ii[perm], jj[perm], kk[perm]
    starts = np.flatnonzero(np.r_[True, kk[1:] != kk[:-1]])
    return ii, jj, starts


@functools.lru_cache(maxsize=None)
def _grad_table(nvars, order):
    """Source indices and factors for the gradient, shape (nvars, N(order-1))."""
    index = _index_of(nvars, order)
    lower = multi_indices(nvars, order - 1)
    src = np.empty((nvars, len(lower)), dtype=np.int64)
    fac = np.empty((nvars, len(lower)))
    for v in range(nvars):
        for k, alpha in enumerate(lower):
            up = list(alpha)
            up[v] += 1
            src[v, k] = index[tuple(up)]
            fac[v, k] = up[v]
    return src, fac


@functools.lru_cache(maxsize=None)
def _factorials(nvars, order):
    return np.array([math.prod(math.factorial(a) for a in alpha)
                     for alpha in multi_indices(nvars, order)])


def _mul_coeffs(a, b, nvars, order):
    ii, jj, starts = _mul_table(nvars, order)
    return np.add.reduceat(a[..., ii] * b[..., jj], starts, axis=-1)


class Jet:
    """An array of truncated Taylor expansions in ``nvars`` variables.

    Parameters
    ----------
    coeffs : array_like
        Shape ``(*shape, n_coeffs(nvars, order))``.
    nvars : int
    order : int
    point : array_like, optional
        Base point, informational only.
    """

    __array_ufunc__ = None

    def __init__(self, coeffs, nvars, order, point=None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1:] != (n_coeffs(nvars, order),):
            raise ValueError(
                f"coefficient axis has length {coeffs.shape[-1:]}, "
                f"expected {n_coeffs(nvars, order)} for nvars={nvars}, order={order}")
        self.coeffs = coeffs
        self.nvars = nvars
        self.order = order
        self.point = point

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars, order, point=None):
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (n_coeffs(nvars, order),))
        coeffs[..., 0] = value
        return cls(coeffs, nvars, order, point)

    @classmethod
    def variables(cls, point, order):
        """Identity jets ``x_i`` at ``point``; shape ``(*batch, nvars)``."""
        point = np.asarray(point, dtype=float)
        nvars = point.shape[-1]
        coeffs = np.zeros(point.shape + (n_coeffs(nvars, order),))
        coeffs[..., 0] = point
        if order >= 1:
            for i in range(nvars):
                coeffs[..., i, 1 + i] = 1.0
        base = tuple(point) if point.ndim == 1 else None
        return cls(coeffs, nvars, order, base)

    def _new(self, coeffs, order=None):
        return Jet(coeffs, self.nvars, self.order if order is None else order, self.point)

    # -- array protocol -----------------------------------------------------

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        return self.coeffs[..., 0]

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("ellipsis indexing is not supported on jets")
        return self._new(self.coeffs[key + (slice(None),)])

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order})"

    def _axis(self, axis):
        return axis - 1 if axis < 0 else axis

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(self.ndim))
        elif isinstance(axis, tuple):
            axes = tuple(self._axis(a) for a in axis)
        else:
            axes = (self._axis(axis),)
        return self._new(self.coeffs.sum(axis=axes))

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return self._new(self.coeffs.transpose(tuple(axes) + (self.ndim,)))

    @property
    def T(self):
        return self.transpose()

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return self._new(self.coeffs.reshape(tuple(shape) + (self.coeffs.shape[-1],)))

    def truncate(self, order):
        if order > self.order:
            raise IndexTooDeep(f"cannot raise jet order {self.order} to {order}")
        return self._new(self.coeffs[..., :n_coeffs(self.nvars, order)], order)

    def is_constant(self):
        """True when every coefficient beyond the value is exactly zero."""
        return not np.any(self.coeffs[..., 1:])

    def constant_part(self):
        return self.value.copy()

    def perturbation(self):
        """The jet minus its value (no constant term)."""
        c = self.coeffs.copy()
        c[..., 0] = 0.0
        return self._new(c)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable spaces")
            order = min(self.order, other.order)
            n = n_coeffs(self.nvars, order)
            return self.coeffs[..., :n], other.coeffs[..., :n], order
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is not None:
            a, b, order = pair
            return self._new(a + b, order)
        other = np.asarray(other, dtype=float)
        c = np.array(np.broadcast_to(self.coeffs, np.broadcast_shapes(
            self.coeffs.shape, other.shape + (1,))))
        c[..., 0] = c[..., 0] + other
        return self._new(c)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is not None:
            a, b, order = pair
            return self._new(_mul_coeffs(a, b, self.nvars, order), order)
        other = np.asarray(other, dtype=float)
        return self._new(self.coeffs * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise DomainError("division by zero")
        return self._new(self.coeffs / other[..., None])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return einsum("...ij,...jk->...ik" if _ndim(other) >= 2 else "...ij,...j->...i",
                      self, other)

    # -- differentiation ----------------------------------------------------

    def grad(self):
        """Gradient; a new trailing axis of length ``nvars``, order drops by one."""
        if self.order == 0:
            raise IndexTooDeep("cannot differentiate an order-0 jet")
        src, fac = _grad_table(self.nvars, self.order)
        return self._new(self.coeffs[..., src] * fac, self.order - 1)

    def diff(self, var):
        if self.order == 0:
            raise IndexTooDeep("cannot differentiate an order-0 jet")
        src, fac = _grad_table(self.nvars, self.order)
        return self._new(self.coeffs[..., src[var]] * fac[var], self.order - 1)

    def partial(self, alpha):
        """Mixed partial derivative ``d^alpha`` at the base point."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"multi-index needs {self.nvars} entries")
        if sum(alpha) > self.order:
            raise IndexTooDeep(f"|index| = {sum(alpha)} exceeds jet order {self.order}")
        k = _index_of(self.nvars, self.order)[alpha]
        return self.coeffs[..., k] * _factorials(self.nvars, self.order)[k]

    def partials(self):
        """All Taylor coefficients converted to derivatives (same layout)."""
        return self.coeffs * _factorials(self.nvars, self.order)

    # -- change of variables ------------------------------------------------

    def compose(self, inner):
        """Substitute ``inner`` (jet of shape ``(nvars,)``) for the variables.

        ``self`` is read as a Taylor polynomial about ``inner.value``; the
        result lives in ``inner``'s variable space.
        """
        if inner.shape[-1:] != (self.nvars,) or inner.ndim != 1:
            raise ValueError("inner jet must have shape (nvars,)")
        order = min(self.order, inner.order)
        delta = inner.truncate(order).perturbation()
        basis = multi_indices(self.nvars, order)
        index = _index_of(self.nvars, order)
        m = n_coeffs(inner.nvars, order)
        mono = np.zeros((len(basis), m))
        mono[0, 0] = 1.0
        for k, alpha in enumerate(basis[1:], start=1):
            v = next(i for i, a in enumerate(alpha) if a)
            parent = list(alpha)
            parent[v] -= 1
            mono[k] = _mul_coeffs(mono[index[tuple(parent)]], delta.coeffs[v],
                                  inner.nvars, order)
        outer = self.coeffs[..., :len(basis)]
        return Jet(outer @ mono, inner.nvars, order, inner.point)

    def embed(self, nvars, positions):
        """Reinterpret as a jet in ``nvars`` variables; variable ``i`` maps to
        ``positions[i]``, the remaining variables do not appear."""
        index = _index_of(nvars, self.order)
        dest = []
        for alpha in multi_indices(self.nvars, self.order):
            big = [0] * nvars
            for i, a in enumerate(alpha):
                big[positions[i]] = a
            dest.append(index[tuple(big)])
        coeffs = np.zeros(self.shape + (n_coeffs(nvars, self.order),))
        coeffs[..., dest] = self.coeffs
        return Jet(coeffs, nvars, self.order)


def _ndim(x):
    return x.ndim if isinstance(x, Jet) else np.ndim(x)


def as_jet(x, like):
    if isinstance(x, Jet):
        return x
    return Jet.constant(x, like.nvars, like.order, like.point)


def stack(jets, axis=0):
    jets = list(jets)
    order = min(j.order for j in jets)
    n = n_coeffs(jets[0].nvars, order)
    ndim = jets[0].ndim
    if axis < 0:
        axis += ndim + 1
    return Jet(np.stack([j.coeffs[..., :n] for j in jets], axis=axis),
               jets[0].nvars, order, jets[0].point)


def concatenate(jets, axis=0):
    jets = list(jets)
    order = min(j.order for j in jets)
    n = n_coeffs(jets[0].nvars, order)
    if axis < 0:
        axis += jets[0].ndim
    return Jet(np.concatenate([j.coeffs[..., :n] for j in jets], axis=axis),
               jets[0].nvars, order, jets[0].point)


def einsum(subscripts, a, b):
    """Two-operand ``numpy.einsum`` where either operand may be a jet."""
    if _COEFF in subscripts:
        raise ValueError(f"subscript letter {_COEFF!r} is reserved")
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        # a constant operand known to at least the other's order acts as an array
        if a.order >= b.order and a.is_constant():
            a = a.value
        elif b.order >= a.order and b.is_constant():
            b = b.value
    if isinstance(a, Jet) and isinstance(b, Jet):
        ca, cb, order = a._coerce(b)
        ii, jj, starts = _mul_table(a.nvars, order)
        pairs = np.einsum(f"{sa}{_COEFF},{sb}{_COEFF}->{out}{_COEFF}", ca[..., ii], cb[..., jj])
        return Jet(np.add.reduceat(pairs, starts, axis=-1), a.nvars, order, a.point)
    if isinstance(a, Jet):
        c = np.einsum(f"{sa}{_COEFF},{sb}->{out}{_COEFF}", a.coeffs, np.asarray(b, float))
        return a._new(c)
    if isinstance(b, Jet):
        c = np.einsum(f"{sa},{sb}{_COEFF}->{out}{_COEFF}", np.asarray(a, float), b.coeffs)
        return b._new(c)
    return np.einsum(subscripts, a, b)


# -- elementary functions ----------------------------------------------------

def series(u, derivs):
    """Evaluate ``sum_k derivs[k] * (u - u0)^k`` (``derivs[k]`` = f^(k)(u0)/k!)."""
    delta = u.perturbation()
    result = Jet.constant(derivs[u.order], u.nvars, u.order, u.point)
    for k in range(u.order - 1, -1, -1):
        result = result * delta + derivs[k]
    return result


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} produced a non-finite value")


def exp(u):
    if not isinstance(u, Jet):
        return np.exp(u)
    e = np.exp(u.value)
    _check_finite(e, "exp")
    return series(u, [e / math.factorial(k) for k in range(u.order + 1)])


def log(u):
    if not isinstance(u, Jet):
        u = np.asarray(u, float)
        if np.any(u <= 0):
            raise DomainError("log of a non-positive value")
        return np.log(u)
    u0 = u.value
    if np.any(u0 <= 0):
        raise DomainError("log of a non-positive value")
    derivs = [np.log(u0)] + [(-1.0) ** (k + 1) / (k * u0 ** k) for k in range(1, u.order + 1)]
    return series(u, derivs)


def _trig(u, offset):
    u0 = u.value
    cyc = [np.sin(u0), np.cos(u0), -np.sin(u0), -np.cos(u0)]
    return series(u, [cyc[(k + offset) % 4] / math.factorial(k) for k in range(u.order + 1)])


def sin(u):
    return _trig(u, 0) if isinstance(u, Jet) else np.sin(u)


def cos(u):
    return _trig(u, 1) if isinstance(u, Jet) else np.cos(u)


def _is_nonneg_int(c):
    return float(c).is_integer() and c >= 0


def power(u, c):
    """``u ** c`` for a real constant exponent ``c``."""
    c = float(c)
    if not isinstance(u, Jet):
        u = np.asarray(u, float)
        if not c.is_integer() and np.any(u < 0):
            raise DomainError("non-integer power of a negative base")
        if c < 0 and np.any(u == 0):
            raise DomainError("negative power of zero")
        return np.power(u, c)
    if _is_nonneg_int(c):
        n = int(c)
        result = Jet.constant(np.ones(u.shape), u.nvars, u.order, u.point)
        base = u
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    u0 = u.value
    if not c.is_integer() and np.any(u0 <= 0):
        raise DomainError("non-integer power requires a positive base")
    if np.any(u0 == 0):
        raise DomainError("negative power of zero")
    derivs = []
    binom = 1.0
    for k in range(u.order + 1):
        derivs.append(binom * np.power(u0, c - k))
        binom *= (c - k) / (k + 1)
    return series(u, derivs)


def reciprocal(u):
    if not isinstance(u, Jet):
        u = np.asarray(u, float)
        if np.any(u == 0):
            raise DomainError("division by zero")
        return 1.0 / u
    if np.any(u.value == 0):
        raise DomainError("division by zero")
    return power(u, -1.0)


def sqrt(u):
    if not isinstance(u, Jet):
        u = np.asarray(u, float)
        if np.any(u < 0):
            raise DomainError("sqrt of a negative value")
        return np.sqrt(u)
    if u.order == 0:
        if np.any(u.value < 0):
            raise DomainError("sqrt of a negative value")
        return u._new(np.sqrt(u.coeffs))
    return power(u, 0.5)


def norm(*args):
    """Euclidean length of the argument list; singular at the origin."""
    sq = args[0] * args[0]
    for a in args[1:]:
        sq = sq + a * a
    value = sq.value if isinstance(sq, Jet) else np.asarray(sq)
    if np.any(value == 0):
        raise DomainError("norm evaluated at the origin")
    return sqrt(sq)


def inv(mat):
    """Inverse of a jet-valued square matrix (trailing two axes)."""
    g0 = mat.value
    try:
        g0inv = np.linalg.inv(g0)
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular matrix") from exc
    _check_finite(g0inv, "matrix inverse")
    step = einsum("...ij,...jk->...ik", -g0inv, mat.perturbation())
    term = Jet.constant(g0inv, mat.nvars, mat.order, mat.point)
    result = term
    for _ in range(mat.order):
        term = einsum("...ij,...jk->...ik", step, term)
        result = result + term
    return result
