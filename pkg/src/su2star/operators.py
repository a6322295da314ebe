"""Exact action of the coordinate operators on polynomial-times-plane-wave jets.

The operators

    xhat_mu = x_a [f(Delta) delta_{a mu} + g(Delta) d_a d_mu + i theta eps_{a mu r} d_r]
              + ell(Delta) d_mu

act on the class of jets ``sum_p P_p(x) exp(i p.x)`` without truncation error:
a functional of the Laplacian hits ``P exp(i p.x)`` through the finite sum

    F(Delta)[P e^{ipx}] = e^{ipx} sum_k F^(k)(-p^2)/k! D^k P,   D = Delta + 2i p.grad

since ``D`` strictly lowers the polynomial degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConvergenceFailure
from .functionals import EPS, AnalyticFunctional, ReprFunctionals, _check_theta, _vec

MERGE_TOL = 1e-12
PRUNE_TOL = 1e-14


# ---------------------------------------------------------------------------
# dense polynomial helpers; C[a, b, c] is the coefficient of x^a y^b z^c


def _pad(C: np.ndarray, n: int) -> np.ndarray:
    if C.shape[0] == n:
        return C
    out = np.zeros((n, n, n), dtype=complex)
    m = C.shape[0]
    out[:m, :m, :m] = C
    return out


def _poly_diff(C: np.ndarray, mu: int) -> np.ndarray:
    n = C.shape[0]
    out = np.zeros_like(C)
    k = np.arange(1, n).reshape([-1 if i == mu else 1 for i in range(3)])
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    src[mu] = slice(1, n)
    dst[mu] = slice(0, n - 1)
    out[tuple(dst)] = C[tuple(src)] * k
    return out


def _poly_mulx(C: np.ndarray, mu: int) -> np.ndarray:
    n = C.shape[0]
    out = np.zeros((n + 1,) * 3, dtype=complex)
    dst = [slice(0, n)] * 3
    dst[mu] = slice(1, n + 1)
    out[tuple(dst)] = C
    return out


def _poly_lap(C: np.ndarray) -> np.ndarray:
    return sum(_poly_diff(_poly_diff(C, m), m) for m in range(3))


def _poly_degree(C: np.ndarray) -> int:
    nz = np.argwhere(C != 0)
    return int(nz.sum(axis=1).max()) if len(nz) else -1


def _trim(C: np.ndarray) -> np.ndarray:
    C = np.where(np.abs(C) < PRUNE_TOL, 0, C)
    d = _poly_degree(C)
    if d < 0:
        return np.zeros((1, 1, 1), dtype=complex)
    return np.ascontiguousarray(C[: d + 1, : d + 1, : d + 1])


# ---------------------------------------------------------------------------


class JetFunction:
    """Finite sum of ``polynomial(x) * exp(i p.x)`` terms.

    Terms are kept in canonical form: momenta sorted lexicographically and
    merged within ``MERGE_TOL``, coefficients pruned below ``PRUNE_TOL``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable = ()):
        self.terms = self._canonical(terms)

    @staticmethod
    def _canonical(terms):
        items = []
        for p, C in terms:
            p = tuple(float(x) for x in np.asarray(p, dtype=float).reshape(3))
            C = np.asarray(C, dtype=complex)
            if C.ndim == 0:
                C = C.reshape(1, 1, 1)
            items.append((p, C))
        items.sort(key=lambda it: it[0])
        merged = []
        for p, C in items:
            if merged and max(abs(a - b) for a, b in zip(p, merged[-1][0])) <= MERGE_TOL:
                q, D = merged[-1]
                n = max(C.shape[0], D.shape[0])
                merged[-1] = (q, _pad(D, n) + _pad(C, n))
            else:
                merged.append((p, C))
        out = []
        for p, C in merged:
            C = _trim(C)
            if np.any(C != 0):
                out.append((p, C))
        return tuple(out)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> "JetFunction":
        return cls()

    @classmethod
    def constant(cls, value: complex = 1.0) -> "JetFunction":
        return cls([((0.0, 0.0, 0.0), np.full((1, 1, 1), value, dtype=complex))])

    @classmethod
    def plane_wave(cls, p, coeff: complex = 1.0) -> "JetFunction":
        return cls([(_vec(p), np.full((1, 1, 1), coeff, dtype=complex))])

    @classmethod
    def monomial(cls, exponents, p=(0.0, 0.0, 0.0), coeff: complex = 1.0) -> "JetFunction":
        a, b, c = exponents
        n = max(exponents) + 1
        C = np.zeros((n, n, n), dtype=complex)
        C[a, b, c] = coeff
        return cls([(_vec(p), C)])

    @classmethod
    def plane_wave_sum(cls, momenta, coeffs) -> "JetFunction":
        return cls((m, np.full((1, 1, 1), c, dtype=complex)) for m, c in zip(momenta, coeffs))

    # -- inspection ----------------------------------------------------------

    def __repr__(self):
        return f"JetFunction({len(self.terms)} terms, degree {self.degree})"

    def __len__(self):
        return len(self.terms)

    @property
    def momenta(self) -> np.ndarray:
        return np.array([p for p, _ in self.terms]).reshape(-1, 3)

    @property
    def degree(self) -> int:
        return max((_poly_degree(C) for _, C in self.terms), default=-1)

    def polynomial(self, p) -> np.ndarray:
        p = _vec(p)
        for q, C in self.terms:
            if np.max(np.abs(np.array(q) - p)) <= MERGE_TOL:
                return C
        return np.zeros((1, 1, 1), dtype=complex)

    def wave_coefficients(self) -> np.ndarray:
        """Constant coefficient of each term (for plane-wave sums)."""
        return np.array([C[0, 0, 0] for _, C in self.terms], dtype=complex)

    def coeff_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(np.abs(C) ** 2)) for _, C in self.terms))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.coeff_norm() <= tol

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=float)
        total = 0j
        for p, C in self.terms:
            n = C.shape[0]
            pw = [x[m] ** np.arange(n) for m in range(3)]
            total += np.einsum("abc,a,b,c->", C, *pw) * np.exp(1j * np.dot(p, x))
        return complex(total)

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "JetFunction") -> "JetFunction":
        return JetFunction(self.terms + other.terms)

    def __neg__(self) -> "JetFunction":
        return JetFunction((p, -C) for p, C in self.terms)

    def __sub__(self, other: "JetFunction") -> "JetFunction":
        return self + (-other)

    def __mul__(self, s) -> "JetFunction":
        return JetFunction((p, s * C) for p, C in self.terms)

    __rmul__ = __mul__

    def conj(self) -> "JetFunction":
        return JetFunction((tuple(-x for x in p), np.conj(C)) for p, C in self.terms)

    # -- differential structure ----------------------------------------------

    def mul_x(self, mu: int) -> "JetFunction":
        return JetFunction((p, _poly_mulx(C, mu)) for p, C in self.terms)

    def d(self, mu: int) -> "JetFunction":
        return JetFunction((p, _poly_diff(C, mu) + 1j * p[mu] * C) for p, C in self.terms)

    def laplacian(self) -> "JetFunction":
        out = JetFunction()
        for m in range(3):
            out = out + self.d(m).d(m)
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self) -> list:
        doc = []
        for p, C in self.terms:
            poly = {
                f"{a},{b},{c}": [float(C[a, b, c].real), float(C[a, b, c].imag)]
                for a, b, c in np.argwhere(C != 0)
            }
            doc.append({"p": list(p), "poly": poly})
        return doc

    @classmethod
    def from_json(cls, doc: list) -> "JetFunction":
        terms = []
        for item in doc:
            keys = [tuple(int(s) for s in k.split(",")) for k in item["poly"]]
            n = max((max(k) for k in keys), default=0) + 1
            C = np.zeros((n, n, n), dtype=complex)
            for k, (re, im) in zip(keys, item["poly"].values()):
                C[k] = complex(re, im)
            terms.append((item["p"], C))
        return cls(terms)


# ---------------------------------------------------------------------------
# operator actions


def apply_functional(F: AnalyticFunctional, j: JetFunction) -> JetFunction:
    """``F(Delta) j`` by the finite shift identity, term by term."""
    out = []
    for p, C in j.terms:
        pv = np.array(p)
        powers = [C]
        deg = _poly_degree(C)
        max_k = deg if np.any(pv) else deg // 2
        for _ in range(max_k):
            P = powers[-1]
            P = _poly_lap(P) + 2j * sum(pv[m] * _poly_diff(P, m) for m in range(3) if pv[m])
            if not np.any(P):
                break
            powers.append(P)
        coeffs = F.taylor(-float(pv @ pv), len(powers) - 1)
        acc = sum(c * P for c, P in zip(coeffs, powers))
        out.append((p, acc))
    return JetFunction(out)


def apply_xhat(rep: ReprFunctionals, mu: int, j: JetFunction) -> JetFunction:
    """``xhat_mu j`` for the representation ``rep``; degree grows by at most one."""
    dj = j.d(mu)
    out = apply_functional(rep.f, j).mul_x(mu)
    gj = apply_functional(rep.g, dj)
    for a in range(3):
        out = out + gj.d(a).mul_x(a)
    if rep.theta:
        for a in range(3):
            for r in range(3):
                e = EPS[a, mu, r]
                if e:
                    out = out + (1j * rep.theta * e) * j.d(r).mul_x(a)
    return out + apply_functional(rep.ell, dj)


def commutator_residual(rep: ReprFunctionals, mu: int, nu: int, j: JetFunction) -> JetFunction:
    """``([xhat_mu, xhat_nu] - 2i theta eps_{mu nu r} xhat_r) j``."""
    out = apply_xhat(rep, mu, apply_xhat(rep, nu, j)) - apply_xhat(rep, nu, apply_xhat(rep, mu, j))
    for r in range(3):
        e = EPS[mu, nu, r]
        if e:
            out = out - (2j * rep.theta * e) * apply_xhat(rep, r, j)
    return out


def jacobi_residual(rep: ReprFunctionals, j: JetFunction) -> JetFunction:
    """Cyclic sum of ``[xhat_a, [xhat_b, xhat_c]]`` on ``j``; zero for any operators."""

    def X(m, v):
        return apply_xhat(rep, m, v)

    def comm(a, b, v):
        return X(a, X(b, v)) - X(b, X(a, v))

    out = JetFunction()
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        inner_bc = comm(b, c, j)
        out = out + X(a, inner_bc) - comm(b, c, X(a, j))
    return out


@dataclass(frozen=True)
class MasterResiduals:
    phi: np.ndarray          # (3, 3): 2i theta phi - eps dphi phi
    hermiticity: np.ndarray  # (3, 3): phi^dagger - phi
    chi: np.ndarray          # (3,):   2i theta chi - eps dchi phi
    divergence: np.ndarray   # (3,):   d phi^dagger / dk - (chi - chi^dagger)

    def norms(self) -> tuple:
        return tuple(float(np.linalg.norm(a)) for a in (self.phi, self.hermiticity, self.chi, self.divergence))


def master_residuals(rep: ReprFunctionals, p) -> MasterResiduals:
    """The four functional master equations evaluated at ``d -> k = ip``.

    The functionals are treated as functions of a commuting vector variable
    ``k``; ``d Delta / d k_b = 2 k_b``.  The involution acts as
    ``F^dagger(k) = conj-coefficients F(-k)``, which at ``k = ip`` is the
    elementwise complex conjugate.
    """
    _check_theta(rep, p)
    v = _vec(p)
    k = 1j * v
    t = -float(v @ v)
    f, df = rep.f.taylor(t, 1)
    g, dg = rep.g.taylor(t, 1)
    ell, dell = rep.ell.taylor(t, 1)
    th = rep.theta
    I = np.eye(3)
    kk = np.outer(k, k)
    phi = f * I + g * kk + 1j * th * np.einsum("amr,r->am", EPS, k)
    dphi = (
        2 * np.einsum("b,am->amb", k, df * I + dg * kk)
        + g * (np.einsum("ab,m->amb", I, k) + np.einsum("a,mb->amb", k, I))
        + 1j * th * EPS
    )
    chi = ell * k
    dchi = 2 * dell * np.outer(k, k) + ell * I  # [m, a] = d chi_m / d k_a
    m1 = 2j * th * phi - np.einsum("rmn,amb,bn->ar", EPS, dphi, phi)
    m2 = np.conj(phi) - phi
    m3 = 2j * th * chi - np.einsum("rmn,ma,an->r", EPS, dchi, phi)
    div_dag = -np.conj(np.einsum("ara->r", dphi))
    m4 = div_dag - (chi - np.conj(chi))
    return MasterResiduals(m1, m2, m3, m4)


def wave_action(rep: ReprFunctionals, p, N: int = 30, xi=None) -> JetFunction:
    """Partial sum ``sum_{n<=N} (i xi(p).xhat)^n / n!`` applied to the constant 1.

    The result approximates ``exp(i p.x)/omega(p)`` by its Taylor polynomial in
    ``x``.  ``xi`` defaults to ``p`` for the KV subfamily and to the Volterra
    value otherwise.
    """
    if N > 60:
        raise ValueError("N <= 60")
    _check_theta(rep, p)
    if xi is None:
        if rep.family == "kv":
            xi = _vec(p)
        else:
            from .quantization import xi as volterra_xi
            from .bch import Momentum

            xi = volterra_xi(rep, Momentum(_vec(p), rep.theta)).vec
    xi = _vec(xi)
    if rep.theta * np.linalg.norm(xi) > 0.5 + 1e-12:
        raise ValueError("wave_action needs theta*|xi(p)| <= 0.5")
    term = JetFunction.constant(1.0)
    total = term
    norms = [term.coeff_norm()]
    for n in range(1, N + 1):
        nxt = JetFunction()
        for m in range(3):
            if xi[m]:
                nxt = nxt + xi[m] * apply_xhat(rep, m, term)
        term = (1j / n) * nxt
        total = total + term
        norms.append(term.coeff_norm())
        if norms[-1] == 0.0:
            break
    tail = norms[-4:]
    if len(tail) > 1 and tail[-1] != 0.0 and not all(b < a for a, b in zip(tail, tail[1:])):
        raise ConvergenceFailure(f"partial sums do not contract; last term norms {tail}")
    return total


def plane_wave_defect(jet: JetFunction, p, omega: float, max_degree: int = 3):
    """Compare a polynomial jet with ``exp(i p.x)/omega`` coefficient by coefficient.

    Returns ``(scalar_rel_err, coeff_rel_err)``: the relative error of the
    constant term against ``1/omega`` and the largest error of the monomial
    coefficients up to ``max_degree`` relative to ``1/omega``.
    """
    v = _vec(p)
    C = jet.polynomial((0.0, 0.0, 0.0))
    c0 = C[0, 0, 0]
    scalar = abs(c0 - 1.0 / omega) * omega
    worst = 0.0
    n = C.shape[0]
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            for c in range(max_degree + 1 - a - b):
                want = (1j * v[0]) ** a * (1j * v[1]) ** b * (1j * v[2]) ** c / (
                    math.factorial(a) * math.factorial(b) * math.factorial(c) * omega
                )
                have = C[a, b, c] if max(a, b, c) < n else 0.0
                worst = max(worst, abs(have - want) * omega)
    return float(scalar), float(worst)
