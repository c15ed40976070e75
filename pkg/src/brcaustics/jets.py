"""Truncated multivariate Taylor jets, batched over arbitrary array shapes.

A :class:`Jet` stores normalized Taylor coefficients c_a = (d^a f)/a! for every
multi-index a of total degree <= order in a fixed tuple of directions.  The
coefficient array has shape ``(m, *shape)``: one leading axis for the
monomials, then the batch shape, which is how a whole sample grid (and a
trailing vector-component axis) is propagated in one pass.

Monomials are graded by degree, so truncating to a lower order is a prefix
slice and products of mixed orders just truncate to the smaller one.
"""

import functools
import itertools
import math

import numpy as np

from .errors import DomainError, ValidationError


class JetSpace:
    """Index tables for jets in ``names`` directions up to ``order``."""

    def __init__(self, names, order):
        if order < 0:
            raise ValidationError("jet order must be non-negative")
        self.names = tuple(names)
        self.order = order
        nv = len(self.names)
        monos = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nv), deg):
                alpha = [0] * nv
                for i in combo:
                    alpha[i] += 1
                monos.append(tuple(alpha))
        self.monomials = monos
        self.size = len(monos)
        self.index = {a: i for i, a in enumerate(monos)}
        self.degree = np.array([sum(a) for a in monos])
        self.factorial = np.array([math.prod(math.factorial(k) for k in a) for a in monos], dtype=float)

        I, J, K = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if sum(a) + sum(b) <= order:
                    I.append(i)
                    J.append(j)
                    K.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._mul_i = np.array(I, dtype=int)
        self._mul_j = np.array(J, dtype=int)
        S = np.zeros((self.size, len(I)))
        S[K, np.arange(len(I))] = 1.0
        self._mul_s = S

    @property
    def lower(self):
        return jet_space(self.names, self.order - 1)

    def deriv_table(self, var):
        """(source indices, target indices in the lower space, factors)."""
        return _deriv_table(self.names, self.order, var)

    def direction(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"{name!r} is not a jet direction of {self.names}") from None


@functools.lru_cache(maxsize=None)
def jet_space(names, order):
    return JetSpace(tuple(names), order)


@functools.lru_cache(maxsize=None)
def _deriv_table(names, order, var):
    space = jet_space(names, order)
    lower = jet_space(names, order - 1)
    src, dst, fac = [], [], []
    for i, a in enumerate(space.monomials):
        if a[var] >= 1:
            b = list(a)
            b[var] -= 1
            src.append(i)
            dst.append(lower.index[tuple(b)])
            fac.append(float(a[var]))
    return np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac)


def _pad(coeffs, ndim):
    """Insert unit batch axes after the monomial axis up to ``ndim`` batch dims."""
    extra = ndim - (coeffs.ndim - 1)
    if extra <= 0:
        return coeffs
    return coeffs.reshape((coeffs.shape[0],) + (1,) * extra + coeffs.shape[1:])


class Jet:
    __slots__ = ("space", "coeffs")
    __array_priority__ = 1000

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = coeffs

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, space, value):
        value = np.asarray(value, dtype=float)
        c = np.zeros((space.size,) + value.shape)
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space, name, value):
        jet = cls.constant(space, value)
        if space.order >= 1:
            alpha = [0] * len(space.names)
            alpha[space.direction(name)] = 1
            jet.coeffs[space.index[tuple(alpha)]] = 1.0
        return jet

    # inspection ---------------------------------------------------------------

    @property
    def order(self):
        return self.space.order

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    def partial(self, *names):
        """Mixed partial derivative, e.g. ``jet.partial('u1', 'u1', 't')``."""
        alpha = [0] * len(self.space.names)
        for name in names:
            alpha[self.space.direction(name)] += 1
        return self.derivative(tuple(alpha))

    def derivative(self, alpha):
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValidationError(f"derivative of order {sum(alpha)} exceeds jet order {self.order}")
        i = self.space.index[alpha]
        return self.space.factorial[i] * self.coeffs[i]

    def __repr__(self):
        return f"Jet(names={self.space.names}, order={self.order}, shape={self.shape})"

    # structural ---------------------------------------------------------------

    def truncate(self, order):
        if order >= self.order:
            return self
        space = jet_space(self.space.names, order)
        return Jet(space, self.coeffs[: space.size])

    def deriv(self, var):
        """Jet of the partial derivative along ``var`` (name or index); order drops by one."""
        if isinstance(var, str):
            var = self.space.direction(var)
        if self.order < 1:
            raise ValidationError("cannot differentiate an order-0 jet")
        src, dst, fac = self.space.deriv_table(var)
        lower = self.space.lower
        out = np.zeros((lower.size,) + self.shape)
        out[dst] = self.coeffs[src] * fac.reshape((-1,) + (1,) * len(self.shape))
        return Jet(lower, out)

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.space, self.coeffs[(slice(None),) + key])

    def sum(self, axis=-1):
        axis = axis + 1 if axis >= 0 else axis
        return Jet(self.space, self.coeffs.sum(axis=axis))

    # arithmetic ---------------------------------------------------------------

    def _common(self, other):
        if other.space.names != self.space.names:
            raise ValidationError("jets over different directions cannot be combined")
        order = min(self.order, other.order)
        a, b = self.truncate(order).coeffs, other.truncate(order).coeffs
        nd = max(a.ndim, b.ndim) - 1
        return jet_space(self.space.names, order), _pad(a, nd), _pad(b, nd)

    def __add__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._common(other)
            return Jet(space, a + b)
        other = np.asarray(other, dtype=float)
        c = _pad(self.coeffs, other.ndim)
        shape = np.broadcast_shapes(c.shape[1:], other.shape)
        c = np.broadcast_to(c, c.shape[:1] + shape).copy()
        c[0] += other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._common(other)
            prod = a[space._mul_i] * b[space._mul_j]
            bshape = prod.shape[1:]
            out = space._mul_s @ prod.reshape(prod.shape[0], -1)
            return Jet(space, out.reshape((space.size,) + bshape))
        other = np.asarray(other, dtype=float)
        return Jet(self.space, _pad(self.coeffs, other.ndim) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, (int, np.integer)):
            raise ValidationError("jets only support integer powers")
        n = int(n)
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Jet.constant(self.space, np.ones(self.shape))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # composition with scalar functions --------------------------------------

    def compose(self, derivs):
        """f(self) given the list [f(v), f'(v), ..., f^(order)(v)] at v = self.value."""
        h = Jet(self.space, self.coeffs.copy())
        h.coeffs[0] = 0.0
        out = Jet.constant(self.space, derivs[0])
        power = None
        for k in range(1, self.order + 1):
            power = h if power is None else power * h
            out = out + power * (derivs[k] / math.factorial(k))
        return out

    def reciprocal(self):
        v = self.value
        if np.any(v == 0):
            raise DomainError("division by zero")
        return self.compose([(-1) ** k * math.factorial(k) * v ** (-k - 1.0) for k in range(self.order + 1)])

    def sqrt(self):
        v = self.value
        if np.any(v < 0) or (self.order > 0 and np.any(v == 0)):
            raise DomainError("sqrt of a negative number (or of zero with derivatives)")
        derivs = []
        coef = 1.0
        for k in range(self.order + 1):
            derivs.append(coef * v ** (0.5 - k))
            coef *= 0.5 - k
        return self.compose(derivs)

    def exp(self):
        e = np.exp(self.value)
        return self.compose([e] * (self.order + 1))

    def log(self):
        v = self.value
        if np.any(v <= 0):
            raise DomainError("log of a non-positive number")
        derivs = [np.log(v)] + [(-1) ** (k - 1) * math.factorial(k - 1) * v ** (-float(k))
                                for k in range(1, self.order + 1)]
        return self.compose(derivs)

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cycle = [s, c, -s, -c]
        return self.compose([cycle[k % 4] for k in range(self.order + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cycle = [c, -s, -c, s]
        return self.compose([cycle[k % 4] for k in range(self.order + 1)])

    def sinh(self):
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([s if k % 2 == 0 else c for k in range(self.order + 1)])

    def cosh(self):
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([c if k % 2 == 0 else s for k in range(self.order + 1)])


def stack(jets, axis=-1):
    """Stack jets along a new batch axis (truncating to the lowest order)."""
    order = min(j.order for j in jets)
    space = jet_space(jets[0].space.names, order)
    arrays = [j.truncate(order).coeffs for j in jets]
    nd = max(a.ndim for a in arrays) - 1
    shape = np.broadcast_shapes(*[_pad(a, nd).shape for a in arrays])
    arrays = [np.broadcast_to(_pad(a, nd), shape) for a in arrays]
    axis = axis + 1 if axis >= 0 else axis
    return Jet(space, np.stack(arrays, axis=axis))


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(x)


def value(x):
    return x.value if isinstance(x, Jet) else np.asarray(x)
