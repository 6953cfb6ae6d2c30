"""Truncated Taylor jets of order at most three.

A :class:`Jet` carries the value of an array-valued function at a base point
together with its partial derivatives up to some order ``r <= 3``.  The value
may have any shape ``S``; the k-th derivative array has shape
``S + (n,) * k`` where ``n`` is the number of base variables.  Scalar jets are
the special case ``S == ()``.

All arithmetic follows the truncated Leibniz and chain rules.  Plain numbers
and numpy arrays act as constants of infinite order, so the same geometric
code runs on floats, on arrays and on jets.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_ORDER = 3

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class JetOrderError(ValueError):
    """Raised when a computation needs more derivatives than a jet carries."""


@lru_cache(maxsize=None)
def _canonical_gather(n: int, k: int) -> np.ndarray:
    """Flat indices mapping every multi-index to its sorted representative."""
    idx = np.empty((n,) * k, dtype=np.intp)
    for multi in itertools.product(range(n), repeat=k):
        canon = tuple(sorted(multi))
        idx[multi] = np.ravel_multi_index(canon, (n,) * k) if k else 0
    return idx.reshape(-1)


def _symmetrize(arr: np.ndarray, k: int) -> np.ndarray:
    """Average over permutations of the last k axes and enforce exact symmetry."""
    if k < 2:
        return arr
    nd = arr.ndim
    axes = list(range(nd - k, nd))
    perms = list(itertools.permutations(axes))
    acc = np.zeros_like(arr)
    for p in perms:
        acc = acc + np.transpose(arr, list(range(nd - k)) + list(p))
    acc = acc / len(perms)
    n = arr.shape[-1]
    lead = arr.shape[: nd - k]
    flat = acc.reshape(lead + (n**k,))
    return flat[..., _canonical_gather(n, k)].reshape(arr.shape)


class Jet:
    """Array-valued jet: value plus partial derivatives up to ``order``."""

    __slots__ = ("value", "derivs")
    __array_ufunc__ = None

    def __init__(self, value, derivs: Sequence[np.ndarray] = ()):
        self.value = np.asarray(value, dtype=float)
        self.derivs = tuple(np.asarray(d, dtype=float) for d in derivs)
        if len(self.derivs) > MAX_ORDER:
            raise ValueError(f"jet order {len(self.derivs)} exceeds {MAX_ORDER}")

    # ------------------------------------------------------------------ basics
    @property
    def order(self) -> int:
        return len(self.derivs)

    @property
    def dim(self) -> int | None:
        return self.derivs[0].shape[-1] if self.derivs else None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def grad(self) -> np.ndarray:
        return self._deriv(1)

    @property
    def hess(self) -> np.ndarray:
        return self._deriv(2)

    @property
    def third(self) -> np.ndarray:
        return self._deriv(3)

    def _deriv(self, k: int) -> np.ndarray:
        if k > self.order:
            raise JetOrderError(f"derivative of order {k} requested from a jet of order {self.order}")
        return self.derivs[k - 1]

    def component(self, k: int) -> np.ndarray:
        """The k-th Taylor component (k = 0 is the value)."""
        return self.value if k == 0 else self._deriv(k)

    @classmethod
    def variable(cls, point: Sequence[float], i: int, order: int = MAX_ORDER) -> "Jet":
        """The coordinate function x^i as a jet at ``point``."""
        n = len(point)
        grad = np.zeros(n)
        grad[i] = 1.0
        derivs = [grad] + [np.zeros((n,) * k) for k in range(2, order + 1)]
        return cls(float(point[i]), derivs[:order])

    @classmethod
    def constant(cls, value, dim: int, order: int = MAX_ORDER) -> "Jet":
        value = np.asarray(value, dtype=float)
        return cls(value, [np.zeros(value.shape + (dim,) * k) for k in range(1, order + 1)])

    @classmethod
    def stack(cls, items: Sequence, shape: tuple[int, ...] | None = None) -> "Jet":
        """Stack scalar (or equally shaped) jets along a new leading axis."""
        jets = [x for x in items if isinstance(x, Jet)]
        if not jets:
            out = np.stack([np.asarray(x, dtype=float) for x in items])
            return out.reshape(shape) if shape is not None else out
        order = min(j.order for j in jets)
        dim = jets[0].dim
        full = [x if isinstance(x, Jet) else Jet.constant(x, dim, order) for x in items]
        value = np.stack([j.value for j in full])
        derivs = [np.stack([j.derivs[k] for j in full]) for k in range(order)]
        jet = cls(value, derivs)
        return jet.reshape(shape) if shape is not None else jet

    def truncate(self, order: int) -> "Jet":
        return Jet(self.value, self.derivs[:order])

    def reshape(self, shape: tuple[int, ...]) -> "Jet":
        n = self.dim
        return Jet(
            self.value.reshape(shape),
            [d.reshape(tuple(shape) + (n,) * (k + 1)) for k, d in enumerate(self.derivs)],
        )

    def transpose(self, *axes: int) -> "Jet":
        nd = self.value.ndim
        axes = tuple(axes) if axes else tuple(reversed(range(nd)))
        return Jet(
            self.value.transpose(axes),
            [d.transpose(axes + tuple(range(nd, nd + k + 1))) for k, d in enumerate(self.derivs)],
        )

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis or k is None for k in key):
            raise IndexError("jets support only explicit basic indexing")
        return Jet(self.value[key], [d[key] for d in self.derivs])

    def __len__(self) -> int:
        return len(self.value)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, dim={self.dim}, value={self.value!r})"

    def __float__(self) -> float:
        return float(self.value)

    def partial(self) -> "Jet":
        """The jet of the gradient; the new derivative index is appended last."""
        if self.order == 0:
            raise JetOrderError("cannot differentiate a jet of order 0")
        return Jet(self.derivs[0], self.derivs[1:])

    # -------------------------------------------------------------- arithmetic
    def __neg__(self) -> "Jet":
        return Jet(-self.value, [-d for d in self.derivs])

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            if self.value.ndim == other.value.ndim:
                derivs = [a + b for a, b in zip(self.derivs[:order], other.derivs[:order])]
            else:
                derivs = _add_broadcast(self, other, order)
            return Jet(self.value + other.value, derivs)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.value.shape, other.shape)
        if shape == self.value.shape:
            return Jet(self.value + other, self.derivs)
        return Jet.lift(self, shape) + other

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return multilinear(_elementwise_product, [self, other])
        other = np.asarray(other, dtype=float)
        if other.ndim == 0:
            return Jet(self.value * other, [d * other for d in self.derivs])
        return multilinear(_elementwise_product, [self, other])

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise ZeroDivisionError("division of a jet by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * other

    def __pow__(self, p) -> "Jet":
        return power(self, p)

    @staticmethod
    def lift(jet: "Jet", shape: tuple[int, ...]) -> "Jet":
        """Broadcast a jet's value to ``shape``."""
        value = np.broadcast_to(jet.value, shape)
        derivs = []
        for k, d in enumerate(jet.derivs):
            lead = (1,) * (len(shape) - jet.value.ndim) + jet.value.shape
            d = d.reshape(lead + d.shape[jet.value.ndim :])
            derivs.append(np.broadcast_to(d, tuple(shape) + d.shape[len(shape) :]).copy())
        return Jet(value.copy(), derivs)


def _add_broadcast(a: Jet, b: Jet, order: int) -> list[np.ndarray]:
    shape = np.broadcast_shapes(a.value.shape, b.value.shape)
    la, lb = Jet.lift(a, shape), Jet.lift(b, shape)
    return [x + y for x, y in zip(la.derivs[:order], lb.derivs[:order])]


# --------------------------------------------------------------- multilinear
def _elementwise_product(arrays: Sequence[np.ndarray], ks: Sequence[int], nvals: Sequence[int]) -> np.ndarray:
    """Broadcast product; derivative axes are concatenated in operand order."""
    K = sum(ks)
    vnd = max(nvals)
    out = None
    off = 0
    for arr, k, nv in zip(arrays, ks, nvals):
        vshape = arr.shape[:nv]
        dshape = arr.shape[nv:]
        shaped = arr.reshape((1,) * (vnd - nv) + vshape + (1,) * off + dshape + (1,) * (K - off - k))
        out = shaped if out is None else out * shaped
        off += k
    return out


def make_einsum(subscripts: str) -> Callable:
    """Contraction rule for :func:`multilinear` from an explicit einsum spec."""
    lhs, rhs = subscripts.replace(" ", "").split("->")
    ins = lhs.split(",")
    used = set(subscripts)
    free = [c for c in _LETTERS.lower() + _LETTERS if c not in used]

    def rule(arrays, ks, nvals):
        letters = iter(free)
        parts, extra = [], ""
        for sub, k in zip(ins, ks):
            ds = "".join(next(letters) for _ in range(k))
            parts.append(sub + ds)
            extra += ds
        return np.einsum(",".join(parts) + "->" + rhs + extra, *arrays, optimize=len(arrays) > 2)

    return rule


def multilinear(rule: Callable, operands: Sequence) -> Jet | np.ndarray:
    """Apply a multilinear map to jets and constants with the Leibniz rule.

    ``rule(arrays, ks, nvals)`` evaluates the map on Taylor components, where
    ``ks[p]`` is the number of trailing derivative axes carried by operand p
    and ``nvals[p]`` its value rank.  Derivative axes of the result appear in
    operand order; the sum over all distributions of derivative slots is
    formed from sorted distributions with multinomial weights and then
    symmetrised.
    """
    ops = [op if isinstance(op, Jet) else np.asarray(op, dtype=float) for op in operands]
    jet_pos = [i for i, op in enumerate(ops) if isinstance(op, Jet)]
    nvals = [op.value.ndim if isinstance(op, Jet) else op.ndim for op in ops]
    base = [op.value if isinstance(op, Jet) else op for op in ops]
    value = rule(base, [0] * len(ops), nvals)
    if not jet_pos:
        return value
    order = min(ops[i].order for i in jet_pos)
    derivs = []
    for r in range(1, order + 1):
        total = None
        for dist in itertools.combinations_with_replacement(jet_pos, r):
            counts = [dist.count(i) for i in range(len(ops))]
            weight = math.factorial(r)
            for c in counts:
                weight //= math.factorial(c)
            arrays = [ops[i].component(counts[i]) if isinstance(ops[i], Jet) else ops[i] for i in range(len(ops))]
            term = rule(arrays, counts, nvals)
            term = term * weight if weight != 1 else term
            total = term if total is None else total + term
        derivs.append(_symmetrize(total, r))
    return Jet(value, derivs)


def einsum(subscripts: str, *operands) -> Jet | np.ndarray:
    """``np.einsum`` over jets and arrays (explicit subscripts, no ellipsis)."""
    return multilinear(make_einsum(subscripts), operands)


# ------------------------------------------------------------ scalar functions
def apply_chain(u: Jet, f0: np.ndarray, f1: np.ndarray, f2: np.ndarray, f3: np.ndarray) -> Jet:
    """Compose an elementwise function (given its derivatives at u) with u."""
    r = u.order
    derivs = []
    if r >= 1:
        u1 = u.derivs[0]
        derivs.append(f1[..., None] * u1)
    if r >= 2:
        u2 = u.derivs[1]
        outer = u1[..., :, None] * u1[..., None, :]
        derivs.append(f2[..., None, None] * outer + f1[..., None, None] * u2)
    if r >= 3:
        u3 = u.derivs[2]
        cube = u1[..., :, None, None] * u1[..., None, :, None] * u1[..., None, None, :]
        mixed = u2[..., :, :, None] * u1[..., None, None, :]
        mixed = 3.0 * mixed
        third = f3[..., None, None, None] * cube + f2[..., None, None, None] * mixed + f1[..., None, None, None] * u3
        derivs.append(_symmetrize(third, 3))
    return Jet(f0, derivs)


def _unary(name: str, fn: Callable[[np.ndarray], tuple]) -> Callable:
    def wrapper(x):
        if isinstance(x, Jet):
            return apply_chain(x, *fn(x.value))
        return fn(np.asarray(x, dtype=float))[0]

    wrapper.__name__ = name
    return wrapper


def _sin(v):
    s, c = np.sin(v), np.cos(v)
    return s, c, -s, -c


def _cos(v):
    s, c = np.sin(v), np.cos(v)
    return c, -s, -c, s


def _tan(v):
    t = np.tan(v)
    s2 = 1.0 + t * t
    return t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t)


def _sinh(v):
    s, c = np.sinh(v), np.cosh(v)
    return s, c, s, c


def _cosh(v):
    s, c = np.sinh(v), np.cosh(v)
    return c, s, c, s


def _tanh(v):
    t = np.tanh(v)
    s2 = 1.0 - t * t
    return t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0)


def _exp(v):
    e = np.exp(v)
    return e, e, e, e


def _log(v):
    return np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3


def _sqrt(v):
    s = np.sqrt(v)
    return s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)


def _abs(v):
    sg = np.sign(v)
    z = np.zeros_like(v)
    return np.abs(v), sg, z, z


def _recip(v):
    return 1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4


sin = _unary("sin", _sin)
cos = _unary("cos", _cos)
tan = _unary("tan", _tan)
sinh = _unary("sinh", _sinh)
cosh = _unary("cosh", _cosh)
tanh = _unary("tanh", _tanh)
exp = _unary("exp", _exp)
log = _unary("log", _log)
sqrt = _unary("sqrt", _sqrt)
absolute = _unary("abs", _abs)
reciprocal = _unary("reciprocal", _recip)


def power(x, p):
    """x**p: integer exponents by repeated multiplication, otherwise exp(p log x)."""
    if isinstance(p, Jet):
        return exp(p * log(x))
    p = float(p)
    if p.is_integer():
        n = int(p)
        if n < 0:
            return reciprocal(power(x, -n))
        result = None
        base = x
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            return x * 0.0 + 1.0
        return result
    return exp(p * log(x))


# ------------------------------------------------------------------ utilities
def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Jet) else np.asarray(x, dtype=float)


def order_of(x) -> float:
    return x.order if isinstance(x, Jet) else math.inf


def partial(x) -> Jet | np.ndarray:
    """Gradient jet; constants have zero gradient of unknown dimension."""
    if isinstance(x, Jet):
        return x.partial()
    raise JetOrderError("partial derivative of a constant needs a jet")


def compose_jets(outer: Jet, inner: Jet | Sequence[Jet]) -> Jet:
    """Truncated composition ``outer(inner(y))``.

    ``outer`` is a jet in m variables (any value shape); ``inner`` is an
    m-vector of jets in n variables whose values equal outer's base point.
    """
    if not isinstance(inner, Jet):
        inner = Jet.stack(list(inner))
    m = outer.dim
    if inner.value.shape != (m,):
        raise ValueError(f"dimension mismatch: outer has {m} variables, inner has shape {inner.value.shape}")
    order = min(outer.order, inner.order)
    u = inner.derivs
    derivs = []
    if order >= 1:
        derivs.append(np.tensordot(outer.derivs[0], u[0], axes=([-1], [0])))
    if order >= 2:
        o2 = outer.derivs[1]
        t = np.tensordot(np.tensordot(o2, u[0], axes=([-2], [0])), u[0], axes=([-2], [0]))
        t = t + np.tensordot(outer.derivs[0], u[1], axes=([-1], [0]))
        derivs.append(_symmetrize(t, 2))
    if order >= 3:
        o3 = outer.derivs[2]
        t = np.tensordot(o3, u[0], axes=([-3], [0]))
        t = np.tensordot(t, u[0], axes=([-3], [0]))
        t = np.tensordot(t, u[0], axes=([-3], [0]))
        m2 = np.tensordot(np.tensordot(outer.derivs[1], u[1], axes=([-2], [0])), u[0], axes=([-3], [0]))
        t = t + 3.0 * m2
        t = t + np.tensordot(outer.derivs[0], u[2], axes=([-1], [0]))
        derivs.append(_symmetrize(t, 3))
    return Jet(outer.value, derivs)


def matrix_inverse(m) -> Jet | np.ndarray:
    """Inverse of a (d, d) matrix jet via the truncated Neumann series."""
    if not isinstance(m, Jet):
        return np.linalg.inv(m)
    a0 = np.linalg.inv(m.value)
    if m.order == 0:
        return Jet(a0)
    nil = Jet(np.zeros_like(m.value), m.derivs)
    x = -einsum("ij,jk->ik", a0, nil)
    total = np.eye(len(a0)) + x
    power_k = x
    for _ in range(m.order - 1):
        power_k = einsum("ij,jk->ik", power_k, x)
        total = total + power_k
    return einsum("ij,jk->ik", total, a0)


def stack_scalars(items: Iterable, shape: tuple[int, ...]) -> Jet | np.ndarray:
    return Jet.stack(list(items), shape)
