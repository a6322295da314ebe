"""Traciality audits, the one-loop tadpole and the limit scans for the Kontsevich product."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bch import Momentum, bch, compose, translation_jacobian
from .errors import QuadratureFailure
from .operators import JetFunction
from .quantization import DEFAULT_QUAD, QuadratureSpec, W, W_arrays


@dataclass(frozen=True)
class LoopConfig:
    """Loop parameters.  ``theta = 0`` selects the commutative surrogate integrand."""

    theta: float
    m: float = 1.0
    cutoff: float = 1e3
    quad: QuadratureSpec = DEFAULT_QUAD

    def __post_init__(self):
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ValueError("theta must be finite and non-negative")
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        if not self.cutoff > self.m:
            raise ValueError("cutoff must exceed the mass")


# ---------------------------------------------------------------------------
# traciality


def traciality_jacobian_residual(p: Momentum) -> float:
    """``W(p, -p) - |det dB(p, q)/dq|_{q=-p}``; zero iff the trace identity holds."""
    return W(p, -p) - translation_jacobian(p)


@dataclass(frozen=True)
class PlaneWaveSum:
    """``sum_i c_i exp(i p_i.x)`` held as arrays (no canonicalization)."""

    momenta: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.momenta, dtype=float).reshape(-1, 3)
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(P) != len(c):
            raise ValueError("momenta and coefficients differ in length")
        object.__setattr__(self, "momenta", P)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_jet(cls, j: JetFunction) -> "PlaneWaveSum":
        if j.degree > 0:
            raise ValueError("plane-wave sums have polynomial degree 0")
        return cls(j.momenta, j.wave_coefficients())

    def __len__(self):
        return len(self.coeffs)


def box_integral(k, L: float):
    """``int_{[-L/2, L/2]^3} exp(i k.x) d^3x = prod_i L sinc(k_i L/2)``."""
    k = np.asarray(k, dtype=float)
    return np.prod(L * np.sinc(k * L / (2 * np.pi)), axis=-1)


@dataclass(frozen=True)
class BoxAudit:
    L: float
    lhs: complex
    rhs: complex

    @property
    def ratio(self) -> complex:
        return self.lhs / self.rhs


def _as_sum(x) -> PlaneWaveSum:
    return x if isinstance(x, PlaneWaveSum) else PlaneWaveSum.from_jet(x)


def box_trace_audit(f, g, L: float, theta: float, chunk: int = 200_000) -> BoxAudit:
    """Box integrals of ``f *_K g`` (lhs) and of ``f g`` (rhs) in closed form.

    A single pair ``e^{ipx}, e^{-ipx}`` gives ``lhs/rhs = W(p, -p)``: the trace
    identity only holds after integrating over momenta, which is why the
    audit is meant for smooth wave packets.
    """
    f, g = _as_sum(f), _as_sum(g)
    lhs = 0j
    rhs = 0j
    Q, d = g.momenta, g.coeffs
    step = max(1, chunk // max(1, len(Q)))
    for i0 in range(0, len(f), step):
        P = f.momenta[i0 : i0 + step]
        c = f.coeffs[i0 : i0 + step]
        Pb = np.broadcast_to(P[:, None, :], (len(P), len(Q), 3))
        Qb = np.broadcast_to(Q[None, :, :], (len(P), len(Q), 3))
        factor, B = W_arrays(Pb, Qb, theta)
        cd = c[:, None] * d[None, :]
        lhs += np.sum(cd * factor * box_integral(B, L))
        rhs += np.sum(cd * box_integral(Pb + Qb, L))
    return BoxAudit(float(L), complex(lhs), complex(rhs))


def gaussian_packets(centers, amplitudes, width: float, spacing: float, extent: float = 5.0) -> PlaneWaveSum:
    """Lattice-discretized Gaussian momentum packets.

    Each packet is ``a * sum_q exp(-|q - c|^2 / (2 width^2)) spacing^3 e^{iqx}``
    over lattice points within ``extent * width`` of its centre.
    """
    r = extent * width
    n = int(math.ceil(r / spacing))
    ax = np.arange(-n, n + 1) * spacing
    grid = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid[np.linalg.norm(grid, axis=1) <= r]
    weights = np.exp(-np.sum(grid**2, axis=1) / (2 * width**2)) * spacing**3
    P = np.concatenate([grid + c for c in np.asarray(centers, dtype=float)])
    C = np.concatenate([a * weights for a in amplitudes])
    return PlaneWaveSum(P, C)


@dataclass
class TraceScan:
    rows: list = field(default_factory=list)  # (L, lhs, rhs, |ratio - 1|)

    @property
    def final_error(self) -> float:
        return self.rows[-1][3]


def trace_convergence_scan(theta: float = 1.0, n_waves: int = 5, p_max: float = 1.0,
                           L_factors=(20.0, 40.0, 80.0), width: float = 0.15,
                           seed: int = 0) -> TraceScan:
    """Box audit of ``f *_K g`` for random waves ``f`` against packets centred at ``-p_i``.

    The lattice spacing is chosen so the lattice's period in x-space,
    ``2 pi / spacing``, covers the largest box plus the packets' spatial tails.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_waves, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    P = dirs * rng.uniform(0.2, 1.0, size=(n_waves, 1)) * p_max
    c = rng.normal(size=n_waves) + 1j * rng.normal(size=n_waves)
    a = rng.normal(size=n_waves) + 1j * rng.normal(size=n_waves)
    f = PlaneWaveSum(P, c)
    Ls = [Lf / p_max for Lf in L_factors]
    period = 1.3 * (max(Ls) / 2 * 1.2 + 8.0 / width)
    g = gaussian_packets(-P, a, width, 2 * np.pi / period)
    scan = TraceScan()
    for L in Ls:
        audit = box_trace_audit(f, g, L, theta)
        scan.rows.append((L, audit.lhs, audit.rhs, abs(audit.ratio - 1.0)))
    return scan


# ---------------------------------------------------------------------------
# the tadpole


def _quad(fun, a, b, quad: QuadratureSpec, **kw) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(fun, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                                    limit=quad.max_subdivisions, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    return val


def _inv_prop_integral(m: float, a: float, b: float) -> float:
    """``int_a^b dp / (p^2 + m^2)``, ``b`` may be infinite."""
    if m == 0.0:
        return 1.0 / a - (0.0 if math.isinf(b) else 1.0 / b)
    hi = math.pi / 2 if math.isinf(b) else math.atan(b / m)
    return (hi - math.atan(a / m)) / m


def tadpole_parts(cfg: LoopConfig):
    """``(truncated, tail)``: the radial integral up to the cutoff and beyond it.

    For ``theta > 0`` the integrand is ``sin^2(theta p/2)/(p^2 + m^2)``;
    past the first period it is split as ``(1 - cos(theta p)) / 2`` so the
    oscillatory half goes to QUADPACK's Fourier-weighted rules.  ``theta = 0``
    gives the commutative surrogate ``p^2/(p^2+m^2)`` whose tail is infinite.
    """
    th, m, lam, quad = cfg.theta, cfg.m, cfg.cutoff, cfg.quad
    if th == 0.0:
        pref = 1.0 / (2 * math.pi**2)
        trunc = lam - (m * math.atan(lam / m) if m else 0.0)
        return pref * trunc, math.inf
    pref = (4.0 / th**2) / (2 * math.pi**2)

    def direct(p):
        if m == 0.0:
            return (th / 2) ** 2 * np.sinc(th * p / (2 * np.pi)) ** 2
        return math.sin(th * p / 2) ** 2 / (p * p + m * m)

    def prop(p):
        return 1.0 / (p * p + m * m)

    a = min(lam, 2 * math.pi / th)
    trunc = _quad(direct, 0.0, a, quad)
    if lam > a:
        trunc += 0.5 * _inv_prop_integral(m, a, lam)
        trunc -= 0.5 * _quad(prop, a, lam, quad, weight="cos", wvar=th)
    tail = 0.5 * _inv_prop_integral(m, lam, math.inf)
    tail -= 0.5 * _quad(prop, lam, math.inf, quad, weight="cos", wvar=th)
    return pref * trunc, pref * tail


def tadpole_omega_I(cfg: LoopConfig) -> float:
    """``(4/theta^2) int d^3p/(2 pi)^3 sin^2(theta|p|/2) / (p^2 (p^2 + m^2))``."""
    trunc, tail = tadpole_parts(cfg)
    return trunc + tail


def tadpole_closed_form(cfg: LoopConfig) -> float:
    th, m = cfg.theta, cfg.m
    if th == 0.0:
        return math.inf
    if m == 0.0:
        return 1.0 / (2 * math.pi * th)
    return -math.expm1(-th * m) / (2 * math.pi * m * th**2)


def tadpole_factors(p: Momentum):
    """The two candidate loop weights at momentum ``p``.

    Returns ``(half_angle, wave_pair)`` with ``half_angle =
    sin^2(theta|p|/2) / (theta|p|/2)^2`` (the tadpole integrand over the
    commutative one) and ``wave_pair = W(p, -p) = sin^2(theta|p|)/(theta|p|)^2``.
    They differ; which one the loop contraction produces is left open.
    """
    y = p.angle
    half = float(np.sinc(y / (2 * np.pi)) ** 2)
    return half, W(p, -p)


def two_point_kernel_II(p: Momentum, k1: Momentum, k2: Momentum, cfg: LoopConfig):
    """Integrand of the second two-point term, stars associated left to right.

    Returns ``(amplitude, total)``; the x-integral would give ``delta(total)``.
    """
    b1 = bch(p, k1)
    b2 = bch(b1, -p)
    total = bch(b2, k2)
    amp = W(p, k1) * W(b1, -p) * W(b2, k2) / (p.norm**2 + cfg.m**2)
    return amp, total


# ---------------------------------------------------------------------------
# scans


@dataclass
class UVScan:
    rows: list  # (cutoff, truncated, tail, value)
    converged: bool
    reason: str


def uv_convergence_scan(cfg: LoopConfig, cutoffs, tol: float = 1e-5) -> UVScan:
    """Tadpole values over increasing cutoffs, with a convergence verdict.

    Converged means the raw truncated increments shrink and the tail-corrected
    values agree within ``tol``.  Divergence is a verdict, not an exception.
    """
    cutoffs = [float(c) for c in cutoffs]
    if len(cutoffs) < 2 or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("need at least two strictly increasing cutoffs")
    rows = []
    for lam in cutoffs:
        trunc, tail = tadpole_parts(LoopConfig(cfg.theta, cfg.m, lam, cfg.quad))
        rows.append((lam, trunc, tail, trunc + tail))
    incr = np.diff([r[1] for r in rows])
    vals = [r[3] for r in rows]
    if not all(math.isfinite(v) for v in vals):
        return UVScan(rows, False, "tail beyond the cutoff is infinite")
    if not all(abs(b) < abs(a) for a, b in zip(incr, incr[1:])):
        return UVScan(rows, False, "truncated increments do not decrease")
    spread = max(abs(b - a) for a, b in zip(vals, vals[1:]))
    if spread > tol:
        return UVScan(rows, False, f"values spread {spread:.3g} exceeds {tol:.3g}")
    return UVScan(rows, True, "converged")


@dataclass
class LimitScan:
    rows: list  # (theta, |B - (p+q)|, |W - 1|)
    slope_B: float
    slope_W: float


def _slope(x, y) -> float:
    x, y = np.asarray(x), np.asarray(y)
    keep = y > 0
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def commutative_limit_scan(p, q, thetas) -> LimitScan:
    """Deviations of ``B`` and ``W`` from the commutative values, with log-log slopes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    rows = []
    for th in thetas:
        P, Q = Momentum(p, th), Momentum(q, th)
        B = bch(P, Q)
        rows.append((float(th), float(np.linalg.norm(B.vec - (p + q))), abs(W(P, Q) - 1.0)))
    th = [r[0] for r in rows]
    return LimitScan(rows, _slope(th, [r[1] for r in rows]), _slope(th, [r[2] for r in rows]))
