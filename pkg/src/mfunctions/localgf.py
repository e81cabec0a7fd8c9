"""Local g-functions: the m-th s-derivative of one Euler factor of L'/L.

For a site of norm ``N`` write ``u = N^{-s} t`` with ``|t| = 1``.  The local
factor of L'/L is ``-log N * u / (1 - u)`` and its m-th derivative is

    (-log N)^(m+1) * sum_{n>=1} n^m u^n
        = (-log N)^(m+1) * sum_{k=1}^m c_k u^k / (1 - u)^(k+1).

With ``c_k = k! S(m, k)`` (``Convention.DERIVED``) the two sides agree.  The
coefficient ``(k!)^2 S(m, k)`` (``Convention.PAPER``) is also supported so
that both can be compared against the series; they coincide at ``m = 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DomainError
from .primesys import PrimeSite

UNIT_TOL = 1e-12
MAX_MAP_ORDER = 12


class Convention(str, enum.Enum):
    PAPER = "paper"        # c_k = (k!)^2 S(m, k)
    DERIVED = "derived"    # c_k = k! S(m, k)

    @classmethod
    def parse(cls, value) -> "Convention":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {"paper": cls.PAPER, "papersquared": cls.PAPER,
                   "derived": cls.DERIVED, "derivedsingle": cls.DERIVED}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown convention {value!r}") from None


@dataclass(frozen=True)
class GParams:
    sigma: float
    order_m: int = 1
    imag_t: float = 0.0
    convention: Convention = Convention.DERIVED

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if int(self.order_m) != self.order_m or self.order_m < 1:
            raise DomainError(f"order_m must be an integer >= 1, got {self.order_m}")
        object.__setattr__(self, "order_m", int(self.order_m))
        object.__setattr__(self, "convention", Convention.parse(self.convention))


@lru_cache(maxsize=None)
def stirling2(r: int, k: int) -> int:
    """Stirling number of the second kind S(r, k); zero when ``k > r``."""
    if r < 0 or k < 0:
        raise ValueError("stirling2 needs r, k >= 0")
    if k > r:
        return 0
    if r == 0:
        return 1
    if k == 0:
        return 0
    return k * stirling2(r - 1, k) + stirling2(r - 1, k - 1)


def coefficients(m: int, convention) -> list[int]:
    """``[c_1, ..., c_m]`` for the given convention."""
    convention = Convention.parse(convention)
    power = 2 if convention is Convention.PAPER else 1
    return [math.factorial(k) ** power * stirling2(m, k) for k in range(1, m + 1)]


def _as_unit(t, tol=UNIT_TOL) -> np.ndarray:
    t = np.asarray(t, dtype=complex)
    if np.any(np.abs(np.abs(t) - 1.0) > tol):
        raise DomainError("torus coordinate off the unit circle")
    return t


def _u(site: PrimeSite, params: GParams, t) -> np.ndarray:
    rot = np.exp(-1j * params.imag_t * site.log_norm) if params.imag_t else 1.0
    return site.norm ** (-params.sigma) * t * rot


def g_local(site: PrimeSite, params: GParams, t):
    """Value of the local g-function at unit-modulus ``t`` (scalar or array)."""
    t = _as_unit(t)
    u = _u(site, params, t)
    c = coefficients(params.order_m, params.convention)
    x = u / (1.0 - u)
    # sum_k c_k x^k / (1 - u), Horner in x
    acc = np.zeros_like(u)
    for ck in reversed(c):
        acc = (acc + ck) * x
    out = (-site.log_norm) ** (params.order_m + 1) * acc / (1.0 - u)
    return out[()] if out.ndim == 0 else out


def g_first_derivative_form(site: PrimeSite, sigma: float, t):
    """The m = 1 function in its original shape ``t N^s (log N)^2 / (t - N^s)^2``."""
    t = _as_unit(t)
    ns = site.norm ** sigma
    out = t * ns * site.log_norm ** 2 / (t - ns) ** 2
    return out[()] if np.ndim(out) == 0 else out


def series_oracle(site: PrimeSite, sigma: float, order_m: int, t, rel_tol: float = 1e-15,
                  imag_t: float = 0.0, max_terms: int = 100_000):
    """Term-by-term differentiated Dirichlet series ``(-log N)^(m+1) sum n^m u^n``.

    ``order_m = 0`` gives the local L'/L itself.  Summation stops once a
    geometric bound on the remaining tail falls below ``rel_tol`` times the
    smallest partial-sum modulus.
    """
    if not sigma > 0:
        raise DomainError("series diverges for sigma <= 0")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    m = int(order_m)
    t = _as_unit(t)
    q = site.norm ** (-sigma)
    rot = np.exp(-1j * imag_t * site.log_norm) if imag_t else 1.0
    u = q * t * rot
    total = np.zeros_like(u)
    un = np.ones_like(u)
    for n in range(1, max_terms):
        un = un * u
        total = total + n ** m * un
        # term ratio for k > n is at most ((n+2)/(n+1))^m q
        ratio = ((n + 2) / (n + 1)) ** m * q
        if ratio < 1:
            tail = (n + 1) ** m * q ** (n + 1) / (1 - ratio)
            scale = np.min(np.abs(total)) if total.size else 0.0
            if tail < rel_tol * scale:
                break
    else:
        raise RuntimeError("series_oracle: term budget exhausted")
    out = (-site.log_norm) ** (m + 1) * total
    return out[()] if out.ndim == 0 else out


# -- exact polynomial arithmetic (ascending integer coefficient lists) -------

def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pscale(a, c):
    return [c * x for x in a]


def _pderiv(a):
    return [i * a[i] for i in range(1, len(a))] or [0]


def _ptrim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _ppow(a, k):
    out = [1]
    for _ in range(k):
        out = _pmul(out, a)
    return out


@dataclass(frozen=True)
class RationalMap:
    """``w_m(z) = numerator(z) / (1 - z)^(m+1)`` with the ``(-log N)^(m+1)``
    prefactor stripped; ``w_m'(z) = deriv_numerator(z) / (1 - z)^(m+2)``."""

    order_m: int
    convention: Convention
    numerator_coeffs: tuple[int, ...]
    deriv_numerator_coeffs: tuple[int, ...]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.polynomial.polynomial.polyval(z, [float(c) for c in self.numerator_coeffs])
        return num / (1 - z) ** (self.order_m + 1)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.polynomial.polynomial.polyval(z, [float(c) for c in self.deriv_numerator_coeffs])
        return num / (1 - z) ** (self.order_m + 2)


def build_rational_map(m: int, convention=Convention.DERIVED) -> RationalMap:
    m = int(m)
    if m < 1:
        raise DomainError("order must be >= 1")
    if m > MAX_MAP_ORDER:
        raise CapabilityError(f"rational maps are built for 1 <= m <= {MAX_MAP_ORDER}")
    convention = Convention.parse(convention)
    one_minus_z = [1, -1]
    num = [0]
    for k, ck in enumerate(coefficients(m, convention), start=1):
        term = _pmul([0] * k + [1], _ppow(one_minus_z, m - k))
        num = _padd(num, _pscale(term, ck))
    num = _ptrim(num)
    # (N / (1-z)^(m+1))' = (N' (1-z) + (m+1) N) / (1-z)^(m+2)
    dnum = _ptrim(_padd(_pmul(_pderiv(num), one_minus_z), _pscale(num, m + 1)))
    return RationalMap(m, convention, tuple(num), tuple(dnum))


@dataclass(frozen=True)
class OracleRow:
    order_m: int
    convention: Convention
    max_rel_err: float
    points: int

    def passed(self, tol: float) -> bool:
        return self.max_rel_err < tol


def verify_against_series(max_order: int = 5, norms=(2, 3, 5, 7), sigmas=(1.2, 2.0, 3.0),
                          n_angles: int = 16, conventions=(Convention.DERIVED, Convention.PAPER)) -> list[OracleRow]:
    """Largest relative error of ``g_local`` against ``series_oracle`` per order and convention."""
    t = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    rows = []
    for conv in map(Convention.parse, conventions):
        for m in range(1, max_order + 1):
            worst = 0.0
            for n in norms:
                site = PrimeSite(n, n)
                for s in sigmas:
                    got = g_local(site, GParams(s, m, convention=conv), t)
                    ref = series_oracle(site, s, m, t)
                    worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
            rows.append(OracleRow(m, conv, worst, len(norms) * len(sigmas) * n_angles))
    return rows
