"""Truncated Taylor series arithmetic (forward-mode jets of arbitrary order).

A :class:`Taylor` holds the normalized coefficients ``c[k] = F^(k)(t0)/k!`` of a
function around a base point.  Coefficient arrays have shape
``(order + 1, *batch)`` so a single object carries jets at many base points at
once.  Object dtype is allowed for the ring operations, which is how exact
``Fraction`` series are handled; the transcendental functions are float only.

    >>> t = Taylor.variable(0.0, 4)
    >>> exp(t).c
    array([1.        , 1.        , 0.5       , 0.16666667, 0.04166667])
"""
from __future__ import annotations

import numpy as np


class Taylor:
    __array_priority__ = 1000

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        if c.ndim == 0:
            c = c[None]
        self.c = c

    # -- constructors --------------------------------------------------------

    @classmethod
    def variable(cls, x0, order: int) -> "Taylor":
        x0 = np.asarray(x0, dtype=float)
        c = np.zeros((order + 1,) + x0.shape)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, like=None) -> "Taylor":
        value = np.asarray(value)
        dtype = value.dtype if like is None else np.result_type(value, like.c)
        shape = value.shape if like is None else np.broadcast_shapes(value.shape, like.c.shape[1:])
        c = np.zeros((order + 1,) + shape, dtype=dtype)
        c[0] = value
        return cls(c)

    # -- basic properties ----------------------------------------------------

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    def __len__(self):
        return self.c.shape[0]

    def __getitem__(self, k):
        return self.c[k]

    def __repr__(self):
        return f"Taylor(order={self.order}, c0={self.c[0]!r})"

    def truncate(self, order: int) -> "Taylor":
        return Taylor(self.c[: order + 1])

    def derivatives(self) -> np.ndarray:
        """Unnormalized derivatives ``F^(k)(t0)``."""
        fact = np.ones(len(self), dtype=float)
        for k in range(2, len(self)):
            fact[k] = fact[k - 1] * k
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def deriv(self) -> "Taylor":
        """Series of ``dF/dt``; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 series")
        k = np.arange(1, len(self)).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Taylor(self.c[1:] * k)

    def integ(self) -> "Taylor":
        k = np.arange(1, len(self) + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        head = np.zeros((1,) + self.c.shape[1:], dtype=self.c.dtype)
        return Taylor(np.concatenate([head, self.c / k]))

    def __call__(self, dx):
        """Evaluate the truncated polynomial at offset ``dx`` from the base point."""
        out = self.c[-1]
        for ck in self.c[-2::-1]:
            out = out * dx + ck
        return out

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Taylor):
            n = min(self.order, other.order)
            return self.truncate(n), other.truncate(n)
        return self, Taylor.constant(other, self.order, like=self)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Taylor(a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Taylor(a.c - b.c)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Taylor(b.c - a.c)

    def __neg__(self):
        return Taylor(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * np.asarray(other))
        a, b = self._coerce(other)
        out = np.zeros(np.broadcast_shapes(a.c.shape, b.c.shape), dtype=np.result_type(a.c, b.c))
        for k in range(len(a)):
            out[k] = np.sum(a.c[: k + 1] * b.c[k::-1], axis=0)
        return Taylor(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / np.asarray(other))
        a, b = self._coerce(other)
        q = np.zeros(np.broadcast_shapes(a.c.shape, b.c.shape), dtype=np.result_type(a.c, b.c, float)
                     if a.c.dtype != object and b.c.dtype != object else object)
        for k in range(len(a)):
            acc = a.c[k] - np.sum(b.c[1 : k + 1] * q[k - 1 :: -1][:k], axis=0) if k else a.c[0]
            q[k] = acc / b.c[0]
        return Taylor(q)

    def __rtruediv__(self, other):
        return Taylor.constant(other, self.order, like=self) / self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Taylor.constant(1, self.order, like=self)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out


# -- elementary functions (float jets) ---------------------------------------


def _k_shape(u: Taylor):
    return (-1,) + (1,) * (u.c.ndim - 1)


def sqrt(u: Taylor) -> Taylor:
    c = np.zeros_like(u.c, dtype=float)
    c[0] = np.sqrt(u.c[0])
    for k in range(1, len(u)):
        acc = u.c[k] - np.sum(c[1:k] * c[k - 1 : 0 : -1], axis=0)
        c[k] = acc / (2.0 * c[0])
    return Taylor(c)


def exp(u: Taylor) -> Taylor:
    c = np.zeros_like(u.c, dtype=float)
    c[0] = np.exp(u.c[0])
    j = np.arange(len(u)).reshape(_k_shape(u))
    for k in range(1, len(u)):
        c[k] = np.sum(j[1 : k + 1] * u.c[1 : k + 1] * c[k - 1 :: -1][:k], axis=0) / k
    return Taylor(c)


def log(u: Taylor) -> Taylor:
    c = np.zeros_like(u.c, dtype=float)
    c[0] = np.log(u.c[0])
    j = np.arange(len(u)).reshape(_k_shape(u))
    for k in range(1, len(u)):
        acc = np.sum(j[1:k] * c[1:k] * u.c[k - 1 : 0 : -1], axis=0) / k
        c[k] = (u.c[k] - acc) / u.c[0]
    return Taylor(c)


def sincos(u: Taylor):
    s = np.zeros_like(u.c, dtype=float)
    co = np.zeros_like(u.c, dtype=float)
    s[0] = np.sin(u.c[0])
    co[0] = np.cos(u.c[0])
    j = np.arange(len(u)).reshape(_k_shape(u))
    for k in range(1, len(u)):
        ju = j[1 : k + 1] * u.c[1 : k + 1]
        s[k] = np.sum(ju * co[k - 1 :: -1][:k], axis=0) / k
        co[k] = -np.sum(ju * s[k - 1 :: -1][:k], axis=0) / k
    return Taylor(s), Taylor(co)


def sin(u: Taylor) -> Taylor:
    return sincos(u)[0]


def cos(u: Taylor) -> Taylor:
    return sincos(u)[1]
