"""Closed-form SU(2) composition in momentum coordinates.

A momentum ``p`` labels the group element ``exp(i theta p.sigma)``; in the
principal chart ``theta*|p| < pi`` this labelling is one-to-one away from the
antipode ``-1``.  Group elements are stored as unit quaternions ``(w, v)``
standing for the matrix ``w*1 + i v.sigma``.  With this convention the product
reads::

    (w1, v1)(w2, v2) = (w1 w2 - v1.v2,  w1 v2 + w2 v1 - v1 x v2)

(note the minus sign on the cross product, inherited from ``i sigma``), so the
composed momentum is ``B(p, q) = p + q - theta p x q + O(theta^2)``.

Array helpers (``exp_arrays``, ``compose`` ...) work on stacks of momenta of
shape ``(N, 3)`` and are what the rest of the package uses in bulk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import logm

from .errors import AntipodalElement, AntipodalProduct, ChartError, NearChartBoundary

ANTIPODE_TOL = 1e-9
SMALL_ANGLE = 1e-6
BOUNDARY_MARGIN = 0.1

_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


@dataclass(frozen=True)
class Momentum:
    """A real 3-vector inside the principal chart ``theta*|p| < pi``."""

    components: tuple
    theta: float

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float).reshape(-1)
        if comps.shape != (3,) or not np.all(np.isfinite(comps)):
            raise ValueError(f"momentum needs three finite components, got {self.components!r}")
        theta = float(self.theta)
        if not theta > 0 or not math.isfinite(theta):
            raise ValueError(f"theta must be positive and finite, got {self.theta!r}")
        if theta * float(np.linalg.norm(comps)) >= math.pi:
            raise ChartError(
                f"theta*|p| = {theta * np.linalg.norm(comps):.6g} is outside the chart [0, pi)"
            )
        object.__setattr__(self, "components", tuple(float(c) for c in comps))
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zero(cls, theta: float) -> "Momentum":
        return cls((0.0, 0.0, 0.0), theta)

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.components)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    @property
    def angle(self) -> float:
        """``theta*|p|``, the rotation half-angle of the group element."""
        return self.theta * self.norm

    def is_zero(self) -> bool:
        return not any(self.components)

    def __neg__(self) -> "Momentum":
        return Momentum(tuple(-c for c in self.components), self.theta)

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True)
class GroupElement:
    """Unit quaternion ``(w, v)`` representing ``w + i v.sigma`` in SU(2)."""

    scalar: float
    vector: tuple

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float).reshape(3)
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "vector", tuple(float(c) for c in v))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1.0, (0.0, 0.0, 0.0))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        w, v = quat_mul(
            np.array([self.scalar]), np.array([self.vector]),
            np.array([other.scalar]), np.array([other.vector]),
        )
        return GroupElement(w[0], v[0])

    def inverse(self) -> "GroupElement":
        return GroupElement(self.scalar, tuple(-c for c in self.vector))

    def norm_defect(self) -> float:
        return abs(self.scalar**2 + sum(c * c for c in self.vector) - 1.0)

    def distance_to_antipode(self) -> float:
        return math.sqrt((self.scalar + 1.0) ** 2 + sum(c * c for c in self.vector))

    def matrix(self) -> np.ndarray:
        """The 2x2 SU(2) matrix ``w*1 + i v.sigma``."""
        return self.scalar * np.eye(2) + 1j * np.einsum("k,kij->ij", self.vector, _PAULI)


# ---------------------------------------------------------------------------
# scalar guards


def sinc(x):
    """``sin(x)/x`` with a Taylor branch for ``|x| < 1e-6``; works on arrays."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SMALL_ANGLE
    safe = np.where(small, 1.0, x)
    x2 = x * x
    series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    out = np.where(small, series, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def inv_sinc(x):
    """``x/sin(x)`` with a Taylor branch for ``|x| < 1e-6``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SMALL_ANGLE
    safe = np.where(small, 1.0, x)
    x2 = x * x
    series = 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0 + 31.0 * x2 * x2 * x2 / 15120.0
    out = np.where(small, series, safe / np.sin(safe))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# array kernels


def quat_mul(w1, v1, w2, v2):
    """Stacked product of ``w + i v.sigma`` elements (shapes ``(N,)``, ``(N, 3)``)."""
    w = w1 * w2 - np.einsum("...i,...i->...", v1, v2)
    v = w1[..., None] * v2 + w2[..., None] * v1 - np.cross(v1, v2)
    return w, v


def exp_arrays(P, theta: float):
    P = np.asarray(P, dtype=float)
    a = theta * np.linalg.norm(P, axis=-1)
    return np.cos(a), (theta * sinc(a))[..., None] * P


def log_arrays(w, v, theta: float, *, error=AntipodalElement):
    """Principal logarithm of stacked unit quaternions, returned as momenta."""
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1)
    dist = np.sqrt((w + 1.0) ** 2 + n * n)
    if np.any(dist < ANTIPODE_TOL):
        raise error("group element within 1e-9 of the antipode; logarithm direction undefined")
    phi = np.arctan2(n, w)
    scale = np.where(phi < SMALL_ANGLE, inv_sinc(phi), phi / np.where(n > 0, n, 1.0))
    return (scale / theta)[..., None] * v


def compose(P, Q, theta: float):
    """Stacked BCH map: momenta of ``exp(i p.x) exp(i q.x)`` for rows of P, Q."""
    P, Q = np.broadcast_arrays(np.asarray(P, dtype=float), np.asarray(Q, dtype=float))
    w1, v1 = exp_arrays(P, theta)
    w2, v2 = exp_arrays(Q, theta)
    w, v = quat_mul(w1, v1, w2, v2)
    B = log_arrays(w, v, theta, error=AntipodalProduct)
    # B(p, 0) = p and B(0, q) = q hold exactly.
    pz = ~np.any(P, axis=-1)
    qz = ~np.any(Q, axis=-1)
    B = np.where(qz[..., None], P, B)
    B = np.where(pz[..., None], Q, B)
    return B


# ---------------------------------------------------------------------------
# public operations


MomentumLike = Union[Momentum, "np.ndarray", tuple, list]


def _theta_of(p: Momentum, q: Momentum) -> float:
    if p.theta != q.theta:
        raise ValueError(f"momenta carry different theta ({p.theta} vs {q.theta})")
    return p.theta


def exp_map(p: Momentum) -> GroupElement:
    w, v = exp_arrays(p.vec[None, :], p.theta)
    return GroupElement(w[0], v[0])


def log_map(g: GroupElement, theta: float) -> Momentum:
    """Principal logarithm; ``theta*|result|`` lies in ``[0, pi)``."""
    P = log_arrays(np.array([g.scalar]), np.array([g.vector]), theta)
    return Momentum(P[0], theta)


def bch(p: Momentum, q: Momentum) -> Momentum:
    """Momentum of ``exp(i p.x) exp(i q.x)``, resummed exactly via quaternions."""
    theta = _theta_of(p, q)
    if q.is_zero():
        return p
    if p.is_zero():
        return q
    B = compose(p.vec[None, :], q.vec[None, :], theta)[0]
    return Momentum(B, theta)


def _expm_series(A: np.ndarray, terms: int = 40) -> np.ndarray:
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for n in range(1, terms + 1):
        term = term @ A / n
        out = out + term
    return out


def bch_oracle(p: Momentum, q: Momentum) -> Momentum:
    """Independent BCH via 2x2 matrices: series exponentials, principal ``logm``."""
    theta = _theta_of(p, q)
    sig_p = np.einsum("k,kij->ij", p.vec, _PAULI)
    sig_q = np.einsum("k,kij->ij", q.vec, _PAULI)
    U = _expm_series(1j * theta * sig_p) @ _expm_series(1j * theta * sig_q)
    if np.linalg.norm(U + np.eye(2)) < ANTIPODE_TOL:
        raise AntipodalProduct("matrix product equals -1")
    L = logm(U)
    B = np.array([np.trace(s @ L) for s in _PAULI]) / (2j * theta)
    return Momentum(B.real, theta)


def translation_jacobian(p: Momentum) -> float:
    """``|det dB(p, q)/dq|`` at ``q = -p`` by Richardson-extrapolated central differences."""
    if p.angle >= math.pi - BOUNDARY_MARGIN:
        raise NearChartBoundary(
            f"theta*|p| = {p.angle:.6g} too close to pi for the difference stencil"
        )
    theta = p.theta
    base = -p.vec
    h = 1e-5 * max(1.0, p.norm)
    E = np.eye(3)
    shifts = np.concatenate([h * E, -h * E, 0.5 * h * E, -0.5 * h * E])
    Bs = compose(np.broadcast_to(p.vec, shifts.shape), base + shifts, theta)
    D_h = (Bs[0:3] - Bs[3:6]).T / (2 * h)
    D_h2 = (Bs[6:9] - Bs[9:12]).T / h
    D = (4.0 * D_h2 - D_h) / 3.0
    return float(abs(np.linalg.det(D)))
