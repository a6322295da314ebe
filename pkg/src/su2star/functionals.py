"""Functionals of the Laplacian and the representation families built from them.

Every functional ``F(Delta)`` is handled through its argument ``t``, the
eigenvalue of the Laplacian on a plane wave (``t = -p**2``).  Two realizations
exist:

* :class:`SeriesFunctional` -- a truncated power series around ``t = 0`` whose
  coefficients may be exact ``Fraction`` objects;
* :class:`ClosedFormFunctional` -- a closed-form jet evaluator, backed by a
  truncated series near ``t = 0`` where the closed form is 0/0.

Both expose ``taylor(t, n)``, the normalized Taylor coefficients
``F^(k)(t)/k!`` for ``k <= n``, vectorized over ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import taylor as tl
from .errors import (
    ConstraintViolation,
    DomainError,
    InsufficientDerivatives,
    InsufficientOrder,
    OrderTooLarge,
    SeriesMismatch,
    SingularPhi,
)
from .taylor import Taylor

MAX_BERNOULLI = 64
DEFAULT_ORDER = 16
_DOMAIN_SLACK = 1e-14

EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[_i, _j, _k] = 1.0
    EPS[_j, _i, _k] = -1.0


# ---------------------------------------------------------------------------
# Bernoulli numbers and the Riccati series


@lru_cache(maxsize=1)
def _bernoulli_table() -> tuple:
    # Akiyama-Tanigawa; produces B_1 = +1/2, flipped below.
    a = [Fraction(0)] * (MAX_BERNOULLI + 1)
    table = []
    for m in range(MAX_BERNOULLI + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        table.append(a[0])
    table[1] = -table[1]
    return tuple(table)


def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number ``B_n`` with the ``B_1 = -1/2`` convention."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_BERNOULLI:
        raise OrderTooLarge(f"Bernoulli numbers are tabulated up to n = {MAX_BERNOULLI}")
    return _bernoulli_table()[n]


# ---------------------------------------------------------------------------
# functionals


def _as_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t > _DOMAIN_SLACK):
        raise DomainError("functionals are evaluated at t = -p**2 <= 0")
    return np.minimum(t, 0.0)


class AnalyticFunctional:
    """One-variable real-analytic function with derivative access."""

    kind = "abstract"
    name = "F"

    def taylor(self, t, n: int) -> np.ndarray:
        raise NotImplementedError

    def derivatives(self, t, n: int) -> np.ndarray:
        c = self.taylor(t, n)
        fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=float)
        return c * fact.reshape((-1,) + (1,) * (c.ndim - 1))

    def __call__(self, t):
        v = self.taylor(t, 0)[0]
        return float(v) if np.ndim(v) == 0 else v

    def derivative(self, t, k: int = 1):
        v = self.derivatives(t, k)[k]
        return float(v) if np.ndim(v) == 0 else v


class SeriesFunctional(AnalyticFunctional):
    kind = "truncated-series"

    def __init__(self, coeffs: Sequence, *, radius: float | None = None, name: str = "F"):
        if len(coeffs) == 0:
            raise ValueError("a series needs at least one coefficient")
        self.coeffs = tuple(coeffs)
        self.radius = radius
        self.name = name
        self._float = np.array([float(c) for c in self.coeffs])
        K = len(self._float)
        self._shift = np.zeros((K, K))
        for j in range(K):
            for m in range(K - j):
                self._shift[j, m] = math.comb(j + m, j) * self._float[j + m]

    def __repr__(self):
        return f"SeriesFunctional({self.name}, order={self.order})"

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def as_taylor(self) -> Taylor:
        """Coefficients at ``t = 0`` as a Taylor object (object dtype if exact)."""
        if self.exact:
            return Taylor(np.array([Fraction(c) for c in self.coeffs], dtype=object))
        return Taylor(self._float.copy())

    def diff(self, k: int = 1) -> "SeriesFunctional":
        if k > self.order:
            raise InsufficientOrder(f"derivative {k} of an order-{self.order} series")
        out = list(self.coeffs)
        for _ in range(k):
            out = [m * c for m, c in enumerate(out)][1:]
        return SeriesFunctional(out, radius=self.radius, name=self.name + "'" * k)

    def check_domain(self, t):
        t = _as_t(t)
        if self.radius is not None and np.any(np.abs(t) >= self.radius):
            raise DomainError(f"|t| beyond the convergence radius {self.radius:.6g} of {self.name}")
        return t

    def taylor(self, t, n: int) -> np.ndarray:
        if n > self.order:
            raise InsufficientDerivatives(
                f"{self.name} is truncated at order {self.order}; {n} derivatives requested"
            )
        t = self.check_domain(t)
        # c_j(t) = sum_m A[j, m] t^m with A[j, m] = binom(j+m, j) c_{j+m}; Horner in m.
        A = self._shift[: n + 1]
        out = np.broadcast_to(A[:, -1].reshape((-1,) + (1,) * t.ndim), (n + 1,) + t.shape).copy()
        for m in range(A.shape[1] - 2, -1, -1):
            out = out * t + A[:, m].reshape((-1,) + (1,) * t.ndim)
        return out


class ClosedFormFunctional(AnalyticFunctional):
    """Closed-form jets away from ``t = 0``, a truncated series inside ``|t| < switch``."""

    kind = "closed-form"

    def __init__(
        self,
        jet: Callable[[Taylor], Taylor],
        series: SeriesFunctional,
        switch: float,
        *,
        valid: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "F",
    ):
        self.jet = jet
        self.series = series
        self.switch = switch
        self.valid = valid
        self.name = name

    def __repr__(self):
        return f"ClosedFormFunctional({self.name}, series order={self.series.order})"

    @property
    def order(self) -> int:
        return self.series.order

    def closed(self, t, n: int = 0) -> np.ndarray:
        """Closed-form Taylor coefficients, bypassing the series branch."""
        t = _as_t(t)
        return self.jet(Taylor.variable(t, n)).c

    def taylor(self, t, n: int) -> np.ndarray:
        t = _as_t(t)
        if self.valid is not None and not np.all(self.valid(t)):
            raise DomainError(f"{self.name} is singular at some of t = {t}")
        near = np.abs(t) < self.switch
        out = np.empty((n + 1,) + t.shape)
        if np.any(near):
            out[:, near] = self.series.taylor(t[near], n)
        if not np.all(near):
            out[:, ~near] = self.jet(Taylor.variable(t[~near], n)).c
        return out


# ---------------------------------------------------------------------------
# the Riccati series


def G_series(order: int) -> SeriesFunctional:
    """Bernoulli-number series solving the reduced Riccati equation, exact rationals."""
    if not 1 <= order <= 30:
        raise OrderTooLarge("G_series supports 1 <= order <= 30")
    coeffs = [
        -6 * Fraction(2**n) * bernoulli(2 * n) / math.factorial(2 * n)
        for n in range(1, order + 2)
    ]
    return SeriesFunctional(coeffs, radius=2 * math.pi**2, name="G")


def riccati_residual(G: SeriesFunctional, order: int) -> list:
    """Coefficients of ``2t G' + 3(G + 1) - (t/6) G^2`` through ``t**order``."""
    if G.order < order + 1:
        raise InsufficientOrder(f"G has order {G.order}; residual through {order} needs {order + 1}")
    g = G.as_taylor()
    one = Fraction(1) if G.exact else 1.0
    t = Taylor(np.array([0 * one, one] + [0 * one] * (G.order - 1), dtype=g.c.dtype))
    res = 2 * t * g.deriv() + 3 * (g + one) - (t * g * g) * (one / 6)
    return list(res.c[: order + 1])


# ---------------------------------------------------------------------------
# representation families


@dataclass(frozen=True)
class ReprFunctionals:
    """The functionals ``(f, g, ell)`` and ``theta`` of one differential representation.

    ``h`` is pinned to ``theta`` and ``ell`` is real.
    """

    f: AnalyticFunctional
    g: AnalyticFunctional
    ell: AnalyticFunctional
    theta: float
    is_star_rep: bool = True
    family: str = "custom"
    order: int = DEFAULT_ORDER
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def h(self) -> float:
        return self.theta


def _pad(coeffs, n):
    coeffs = list(coeffs)
    zero = Fraction(0) if all(isinstance(c, (int, Fraction)) for c in coeffs) else 0.0
    return coeffs + [zero] * (n + 1 - len(coeffs))


def _series_residuals(f: Taylor, g: Taylor, ell: Taylor, theta):
    """Series coefficients of both constraint residuals at ``t = 0``."""
    n = min(f.order, g.order, ell.order)
    dtype = f.c.dtype
    one = Fraction(1) if dtype == object else 1.0
    t = Taylor(np.array([0 * one, one] + [0 * one] * (n - 1), dtype=dtype))
    f, g, ell = f.truncate(n), g.truncate(n), ell.truncate(n)
    fg = f + t * g
    r1 = 2 * (fg.deriv() + g.truncate(n - 1)) - 2 * ell.truncate(n - 1)
    r2 = 2 * fg.truncate(n - 1) * f.deriv() - (g * f).truncate(n - 1) - theta**2
    return list(r1.c), list(r2.c)


def custom_functionals(
    theta: float, f, g, ell, *, is_star_rep: bool = True, tol: float = 1e-10
) -> ReprFunctionals:
    """Representation from user series; a claimed *-representation is checked."""
    fs, gs, ls = (SeriesFunctional(c, name=nm) for c, nm in ((f, "f"), (g, "g"), (ell, "ell")))
    order = min(fs.order, gs.order, ls.order)
    rep = ReprFunctionals(fs, gs, ls, float(theta), is_star_rep, "custom", order)
    if is_star_rep and order >= 1:
        exact = fs.exact and gs.exact and ls.exact
        th = Fraction(theta) if exact else float(theta)
        r1, r2 = _series_residuals(fs.as_taylor(), gs.as_taylor(), ls.as_taylor(), th)
        worst = max(abs(float(c)) for c in r1 + r2)
        if worst > tol:
            raise ConstraintViolation(
                f"series constraint residual {worst:.3g} exceeds {tol:g} through order {order - 1}"
            )
    return rep


def family_from_f(theta: float, f_coeffs: Sequence, order: int | None = None) -> ReprFunctionals:
    """Solve both constraints for ``g`` and ``ell`` given a series for ``f``.

    ``g = (theta^2 - 2 f f') / (2 t f' - f)`` and ``ell = (f + t g)' + g``; the
    returned series are truncated to a common order so that both constraints
    hold exactly through ``order - 1``.
    """
    exact = all(isinstance(c, (int, Fraction)) for c in f_coeffs)
    if order is None:
        order = max(len(f_coeffs) - 1, 2)
    coeffs = _pad(f_coeffs, order + 2)[: order + 3]
    if exact:
        th = Fraction(theta)
        F = Taylor(np.array([Fraction(c) for c in coeffs], dtype=object))
        one = Fraction(1)
    else:
        th = float(theta)
        F = Taylor(np.array(coeffs, dtype=float))
        one = 1.0
    t = Taylor(np.array([0 * one, one] + [0 * one] * (order + 1), dtype=F.c.dtype))
    dF = F.deriv()
    G = (th**2 - 2 * F.truncate(order + 1) * dF) / (2 * t.truncate(order + 1) * dF - F.truncate(order + 1))
    L = (F.truncate(order + 1) + t.truncate(order + 1) * G).deriv() + G.truncate(order)
    to_list = (lambda c: list(c[: order + 1]))
    return custom_functionals(theta, to_list(F.c), to_list(G.c), to_list(L.c))


def commutative_rep(order: int = DEFAULT_ORDER) -> ReprFunctionals:
    """``f = 1, g = 0, ell = 0, theta = 0``: plain multiplication by ``x``."""
    one = [Fraction(1)] + [Fraction(0)] * order
    zero = [Fraction(0)] * (order + 1)
    return ReprFunctionals(
        SeriesFunctional(one, name="f"), SeriesFunctional(zero, name="g"),
        SeriesFunctional(zero, name="ell"), 0.0, True, "commutative", order,
    )


def _kv_closed_forms(theta: float):
    def f_jet(T: Taylor) -> Taylor:
        y = theta * tl.sqrt(-T)
        s, c = tl.sincos(y)
        return y * c / s

    def g_jet(T: Taylor) -> Taylor:
        return (f_jet(T) - 1.0) / (-T)

    def valid(t):
        y = theta * np.sqrt(-t)
        return (y < 1.0) | (np.abs(np.sin(y)) > 1e-12)

    return f_jet, g_jet, valid


def kv_functionals(theta: float, order: int = DEFAULT_ORDER) -> ReprFunctionals:
    """The subfamily with ``f + g*Delta = 1`` and ``g = (theta^2/3) G(2 theta^2 Delta)``.

    Closed forms at ``t = -p^2``: ``f = theta|p| cot(theta|p|)`` and
    ``g = (theta|p| cot(theta|p|) - 1)/p^2``; ``ell = g``.  The closed forms are
    checked against the truncated Bernoulli series before the object is built.
    """
    if order < 4:
        raise ValueError("kv_functionals needs order >= 4")
    theta = float(theta)
    if not theta > 0:
        raise ValueError("theta must be positive")
    th = Fraction(theta)
    G = G_series(order)
    g_co = [th**2 / 3 * c * (2 * th**2) ** n for n, c in enumerate(G.coeffs[: order + 1])]
    f_co = [Fraction(1)] + [-c for c in g_co[:order]]
    radius = math.pi**2 / theta**2
    g_ser = SeriesFunctional(g_co, radius=radius, name="g")
    f_ser = SeriesFunctional(f_co, radius=radius, name="f")

    f_jet, g_jet, valid = _kv_closed_forms(theta)
    switch = 0.05 / theta**2
    f = ClosedFormFunctional(f_jet, f_ser, switch, valid=valid, name="f")
    g = ClosedFormFunctional(g_jet, g_ser, switch, valid=valid, name="g")

    # Compare where an order-K truncation is expected to reach 1e-12.
    reach = min(0.5, math.pi**2 * (1e-12 / 12.0) ** (1.0 / (order + 1)))
    t = -np.linspace(reach / 20, reach, 20) / theta**2
    for fn in (f, g):
        ser = fn.series.taylor(t, 0)[0]
        cf = fn.closed(t)[0]
        rel = np.max(np.abs(ser - cf) / np.abs(cf))
        if rel >= 1e-10:
            raise SeriesMismatch(f"{fn.name}: closed form vs series relative error {rel:.3g}")
    return ReprFunctionals(f, g, g, theta, True, "kv", order)


def weyl_candidate(theta: float, order: int = DEFAULT_ORDER) -> ReprFunctionals:
    """Same ``f, g`` as the KV subfamily but ``chi = 0``; not a *-representation."""
    kv = kv_functionals(theta, order)
    zero = SeriesFunctional([Fraction(0)] * (order + 1), name="ell")
    return ReprFunctionals(kv.f, kv.g, zero, kv.theta, False, "weyl", order)


# ---------------------------------------------------------------------------
# constraints and the phi matrix


def constraint_residuals(rep: ReprFunctionals, t):
    """``(r1, r2)`` of both admissibility conditions at ``t``; vectorized."""
    fc = rep.f.taylor(t, 1)
    gc = rep.g.taylor(t, 1)
    lc = rep.ell.taylor(t, 0)
    t = np.asarray(t, dtype=float)
    f, df = fc[0], fc[1]
    g, dg = gc[0], gc[1]
    ell = lc[0]
    fg = f + t * g
    dfg = df + g + t * dg
    r1 = 2 * (dfg + g) - 2 * ell
    r2 = 2 * fg * df - g * f - rep.theta**2
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


@dataclass(frozen=True)
class PhiMatrix:
    entries: np.ndarray
    momentum: tuple

    def __matmul__(self, other: "PhiMatrix") -> np.ndarray:
        return self.entries @ other.entries


def _vec(p) -> np.ndarray:
    v = getattr(p, "vec", None)
    return np.asarray(p if v is None else v, dtype=float).reshape(3)


def _check_theta(rep: ReprFunctionals, p):
    th = getattr(p, "theta", None)
    if th is not None and rep.theta and abs(th - rep.theta) > 1e-15 * rep.theta:
        raise ValueError(f"momentum theta {th} differs from representation theta {rep.theta}")


def levi_civita_of(p: np.ndarray) -> np.ndarray:
    """``E[a, m] = eps[a, m, r] p[r]`` (with ``eps[0, 1, 2] = +1``)."""
    return np.einsum("amr,r->am", EPS, p)


def phi_matrix(rep: ReprFunctionals, p) -> PhiMatrix:
    """``phi[a, m](ip) = f delta - g p_a p_m - theta eps[a, m, r] p_r`` at ``t = -p^2``."""
    _check_theta(rep, p)
    v = _vec(p)
    t = -float(v @ v)
    f = rep.f(t)
    g = rep.g(t)
    phi = f * np.eye(3) - g * np.outer(v, v) - rep.theta * levi_civita_of(v)
    return PhiMatrix(phi.astype(complex), tuple(v))


def phi_inverse(rep: ReprFunctionals, p) -> PhiMatrix:
    """``(f delta + 2 f' p p + theta eps p) / (f^2 + theta^2 p^2)``."""
    _check_theta(rep, p)
    v = _vec(p)
    p2 = float(v @ v)
    f, df = rep.f.taylor(-p2, 1)
    den = f * f + rep.theta**2 * p2
    if den <= 1e-14:
        raise SingularPhi(f"f^2 + theta^2 p^2 = {den:.3g} at |p| = {math.sqrt(p2):.6g}")
    inv = (f * np.eye(3) + 2 * df * np.outer(v, v) + rep.theta * levi_civita_of(v)) / den
    return PhiMatrix(inv.astype(complex), tuple(v))


# ---------------------------------------------------------------------------
# JSON documents


def _coeff_to_json(c):
    return float(c)


def _coeff_from_json(c):
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, int):
        return Fraction(c)
    return float(c)


def _series_of(fn: AnalyticFunctional) -> SeriesFunctional:
    return fn.series if isinstance(fn, ClosedFormFunctional) else fn


def rep_to_json(rep: ReprFunctionals) -> dict:
    family = "kv" if rep.family == "kv" else "custom"
    return {
        "family": family,
        "theta": rep.theta,
        "order": rep.order,
        "f": [_coeff_to_json(c) for c in _series_of(rep.f).coeffs],
        "g": [_coeff_to_json(c) for c in _series_of(rep.g).coeffs],
        "ell": [_coeff_to_json(c) for c in _series_of(rep.ell).coeffs],
    }


def rep_from_json(doc: dict) -> ReprFunctionals:
    family = doc.get("family", "custom")
    theta = float(doc["theta"])
    order = int(doc.get("order", DEFAULT_ORDER))
    if family == "kv":
        return kv_functionals(theta, order)
    if family != "custom":
        raise ValueError(f"unknown family {family!r}")
    conv = (lambda key: [_coeff_from_json(c) for c in doc[key]])
    return custom_functionals(theta, conv("f"), conv("g"), conv("ell"),
                              is_star_rep=bool(doc.get("is_star_rep", True)))
