"""Quantized plane waves, star-product kernels and the Kontsevich map.

For a family member the quantized plane wave is ``E_p = omega(p) exp(i xi(p).xhat)``
with ``xi`` and ``omega`` given by one-dimensional Volterra integrals.  After
the substitution ``t = -s**2`` both become smooth integrals over ``[0, |p|]``::

    xi(p)      = sigma(|p|) p,   sigma(r) = (1/r) int_0^r R(-s^2) ds
    log omega  = int_0^r 2 s R(-s^2) ell(-s^2) ds
    R(t)       = (f - 2 t f') / (f^2 - theta^2 t)

The Kontsevich map ``K = Q o H`` is not of this form and is addressed through
the tag :data:`KONTSEVICH`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .bch import Momentum, bch, compose, inv_sinc, sinc
from .errors import (
    ChartError,
    IntegrandSingular,
    KernelSingular,
    OutOfRange,
    QuadratureFailure,
)
from .functionals import ReprFunctionals, _vec
from .operators import JetFunction

KERNEL_MARGIN = 1e-6
_SAMPLE_POINTS = 65


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuantizedWave:
    p: Momentum
    xi: Momentum
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class StarKernel:
    factor: float
    composed: Momentum


class KontsevichTag:
    """Marker for the Kontsevich map ``K = Q o H`` of the KV subfamily."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "KONTSEVICH"


KONTSEVICH = KontsevichTag()


# ---------------------------------------------------------------------------
# Volterra integrals


def _R(rep: ReprFunctionals, s):
    """``R(-s^2)``; raises if the denominator ``f^2 - theta^2 t`` is not positive."""
    s = np.asarray(s, dtype=float)
    t = -s * s
    f, df = rep.f.taylor(t, 1)
    den = f * f - rep.theta**2 * t
    if np.any(den <= 1e-14):
        raise IntegrandSingular(f"f^2 - theta^2 t vanishes on the integration path near s = {s}")
    return (f - 2 * t * df) / den


def _den(rep: ReprFunctionals, s):
    t = -np.asarray(s, dtype=float) ** 2
    return rep.f(t) ** 2 - rep.theta**2 * t


def _check_path(rep: ReprFunctionals, r: float):
    """Reject paths on which ``f^2 - theta^2 t`` touches zero, including between samples."""
    s = np.linspace(0.0, r, _SAMPLE_POINTS)
    den = _den(rep, s)
    i = int(np.argmin(den))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
    best = den[i]
    if hi > lo:
        opt = optimize.minimize_scalar(lambda x: float(_den(rep, x)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12})
        best = min(best, opt.fun)
    if best <= 1e-12 * max(1.0, float(np.max(den))):
        raise IntegrandSingular(f"f^2 - theta^2 t vanishes on the integration path near s = {s[i]:.6g}")


def _quad(fun, a, b, quad: QuadratureSpec) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                fun, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not math.isfinite(val):
        raise QuadratureFailure("non-finite quadrature result")
    return val


def _scalar_R(rep):
    return lambda s: float(_R(rep, s))


def sigma(rep: ReprFunctionals, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Radial scalar of ``xi``: ``xi(p) = sigma(|p|) p``."""
    if r == 0.0:
        return float(_R(rep, 0.0))
    _check_path(rep, r)
    return _quad(_scalar_R(rep), 0.0, r, quad) / r


def xi(rep: ReprFunctionals, p, quad: QuadratureSpec = DEFAULT_QUAD) -> Momentum:
    v = _vec(p)
    return Momentum(sigma(rep, float(np.linalg.norm(v)), quad) * v, rep.theta)


def log_omega(rep: ReprFunctionals, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if r == 0.0:
        return 0.0
    _check_path(rep, r)

    def integrand(s):
        return 2.0 * s * float(_R(rep, s)) * float(rep.ell(-s * s))

    return _quad(integrand, 0.0, r, quad)


def omega(rep: ReprFunctionals, p, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return math.exp(log_omega(rep, float(np.linalg.norm(_vec(p))), quad))


def quantized_wave(rep: ReprFunctionals, p: Momentum, quad: QuadratureSpec = DEFAULT_QUAD) -> QuantizedWave:
    return QuantizedWave(p, xi(rep, p, quad), omega(rep, p, quad))


def xi_inverse(rep: ReprFunctionals, k, quad: QuadratureSpec = DEFAULT_QUAD) -> Momentum:
    """Momentum label ``p`` with ``xi(p) = k``.

    Solves ``sigma(r) r = |k|`` by Newton steps on ``H(r) = int_0^r R``, using
    ``H' = R(-r^2)`` and updating ``H`` by short incremental integrals.  If
    Newton leaves the chart or stalls, Brent's method on a bracket grown
    towards the chart boundary takes over.
    """
    kv = _vec(k)
    kappa = float(np.linalg.norm(kv))
    if kappa == 0.0:
        return Momentum.zero(rep.theta)
    r_cap = (math.pi / rep.theta) * (1.0 - 1e-9)
    r = _newton_radius(rep, kappa, r_cap, quad)
    if r is None:
        r = _bracketed_radius(rep, kappa, r_cap, quad)
    return Momentum(r / kappa * kv, rep.theta)


def _newton_radius(rep, kappa, r_cap, quad, max_iter: int = 30):
    R = _scalar_R(rep)
    try:
        r = min(kappa, 0.5 * r_cap)
        _check_path(rep, r)
        H = _quad(R, 0.0, r, quad)
        for _ in range(max_iter):
            d = R(r)
            if d <= 0:
                return None
            step = (H - kappa) / d
            r_new = r - step
            if not 0.0 < r_new < r_cap:
                return None
            H += _quad(R, r, r_new, quad)
            r = r_new
            if abs(step) <= 1e-15 * r:
                return r
    except (IntegrandSingular, QuadratureFailure):
        return None
    return None


def _bracketed_radius(rep, kappa, r_cap, quad):
    def h(r):
        return sigma(rep, r, quad) * r - kappa

    lo, hi = 0.0, min(kappa, r_cap)
    while h(hi) < 0.0:
        if hi >= r_cap:
            raise OutOfRange(f"|k| = {kappa:.6g} is beyond the range of xi on the chart")
        lo, hi = hi, min(2.0 * hi, r_cap)
    return optimize.brentq(h, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


# ---------------------------------------------------------------------------
# Kontsevich multipliers and kernels


def kontsevich_multiplier(p: Momentum) -> float:
    """``sin(theta|p|)/(theta|p|)``: the Kontsevich plane-wave multiplier."""
    return float(sinc(p.angle))


def harish_chandra_pair(p: Momentum):
    """``(j_half, H)`` on ``e^{ipx}``: ``j_half = sinc(theta|p|)`` and ``H = 1/j_half``.

    ``H`` is nudged by at most one ulp when that makes the float product
    exactly 1.
    """
    j = kontsevich_multiplier(p)
    H = 1.0 / j
    if j * H != 1.0:
        for cand in (np.nextafter(H, np.inf), np.nextafter(H, 0.0)):
            if j * cand == 1.0:
                H = float(cand)
                break
    return j, H


def W_arrays(P, Q, theta: float):
    """Kontsevich kernel and composed momenta for stacked pairs."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    B = compose(P, Q, theta)
    aB = theta * np.linalg.norm(B, axis=-1)
    if np.any(aB >= math.pi - KERNEL_MARGIN):
        raise KernelSingular("theta*|B| too close to pi; sin(theta*|B|) vanishes")
    aP = theta * np.linalg.norm(P, axis=-1)
    aQ = theta * np.linalg.norm(Q, axis=-1)
    return sinc(aP) * sinc(aQ) * inv_sinc(aB), B


def W(p: Momentum, q: Momentum) -> float:
    """``|B|/(theta|p||q|) * sin(theta|p|) sin(theta|q|)/sin(theta|B|)`` in sinc form."""
    if p.theta != q.theta:
        raise ValueError("momenta carry different theta")
    try:
        factor, _ = W_arrays(p.vec[None], q.vec[None], p.theta)
    except KernelSingular as exc:
        raise KernelSingular(str(exc), pair=(p, q)) from None
    return float(factor[0])


def star_kernel(map_kind, p: Momentum, q: Momentum, quad: QuadratureSpec = DEFAULT_QUAD) -> StarKernel:
    """Plane-wave product ``e_p * e_q = factor * e_B``."""
    if isinstance(map_kind, KontsevichTag):
        B = bch(p, q)
        return StarKernel(W(p, q), B)
    rep = map_kind
    Bxi = bch(xi(rep, p, quad), xi(rep, q, quad))
    label = xi_inverse(rep, Bxi, quad)
    factor = omega(rep, p, quad) * omega(rep, q, quad) / omega(rep, label, quad)
    return StarKernel(factor, label)


def cocycle_residual(map_kind, p: Momentum, q: Momentum, r: Momentum, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Relative defect of ``Omega(p,q) Omega(pq,r) = Omega(p,qr) Omega(q,r)``."""
    pq = star_kernel(map_kind, p, q, quad)
    qr = star_kernel(map_kind, q, r, quad)
    left = pq.factor * star_kernel(map_kind, pq.composed, r, quad).factor
    right = star_kernel(map_kind, p, qr.composed, quad).factor * qr.factor
    return abs(left - right) / max(abs(left), abs(right))


def associativity_residual(map_kind, p: Momentum, q: Momentum, r: Momentum, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``|(e_p * e_q) * e_r - e_p * (e_q * e_r)|`` as factor and momentum defects."""
    pq = star_kernel(map_kind, p, q, quad)
    left = star_kernel(map_kind, pq.composed, r, quad)
    qr = star_kernel(map_kind, q, r, quad)
    right = star_kernel(map_kind, p, qr.composed, quad)
    lf, rf = pq.factor * left.factor, qr.factor * right.factor
    df = abs(lf - rf) / max(abs(lf), abs(rf))
    dB = float(np.max(np.abs(left.composed.vec - right.composed.vec)))
    return max(df, dB)


def star_planewaves(map_kind, f: JetFunction, g: JetFunction, theta: float | None = None,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> JetFunction:
    """Bilinear star product of two plane-wave sums (degree-0 jets)."""
    if f.degree > 0 or g.degree > 0:
        raise ValueError("star_planewaves takes plane-wave sums (polynomial degree 0)")
    if theta is None:
        theta = getattr(map_kind, "theta", None)
        if theta is None:
            raise ValueError("theta is required for the Kontsevich map")
    terms = []
    for (p, C) in f.terms:
        for (q, D) in g.terms:
            try:
                k = star_kernel(map_kind, Momentum(p, theta), Momentum(q, theta), quad)
            except (KernelSingular, ChartError) as exc:
                raise KernelSingular(f"pair {p}, {q}: {exc}", pair=(p, q)) from exc
            terms.append((k.composed.vec, k.factor * C * D))
    return JetFunction(terms)
