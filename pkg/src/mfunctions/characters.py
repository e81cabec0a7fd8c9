"""Dirichlet characters of odd prime conductor and the nested family average.

Characters mod a prime ``f`` are ``chi_j(g^k) = exp(2 pi i j k / (f - 1))``
for a primitive root ``g``; ``chi_j`` is even exactly when ``j`` is even and
principal when ``j = 0``.  The average over a family first averages over the
admissible characters of each conductor, then over conductors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DomainError
from .functionals import Moment
from .localgf import GParams
from .primesys import PrimeSystem, is_prime, prime_sieve
from .torus import AverageEstimate, g_values

DLOG_TABLE_MAX = 100_000


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _check_odd_prime(f: int):
    if f < 3 or not is_prime(f):
        raise DomainError(f"conductor must be an odd prime, got {f}")


@lru_cache(maxsize=None)
def primitive_root(f: int) -> int:
    """Smallest primitive root modulo the odd prime ``f``."""
    _check_odd_prime(f)
    cofactors = [(f - 1) // q for q in _prime_factors(f - 1)]
    for g in range(2, f):
        if all(pow(g, c, f) != 1 for c in cofactors):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


@lru_cache(maxsize=64)
def dlog_table(f: int) -> np.ndarray:
    """``table[n] = k`` with ``g^k = n mod f``; ``table[0] = -1``."""
    if f > DLOG_TABLE_MAX:
        raise CapabilityError(f"discrete-log tables are built for f <= {DLOG_TABLE_MAX}")
    g = primitive_root(f)
    table = np.full(f, -1, dtype=np.int64)
    x = 1
    for k in range(f - 1):
        table[x] = k
        x = x * g % f
    table.setflags(write=False)
    return table


def dlog(f: int, n: int) -> int:
    n %= f
    if n == 0:
        raise DomainError("no discrete log of 0")
    if f <= DLOG_TABLE_MAX:
        return int(dlog_table(f)[n])
    return _bsgs(primitive_root(f), n, f)


def _bsgs(g: int, h: int, f: int) -> int:
    m = math.isqrt(f - 1) + 1
    baby = {}
    x = 1
    for j in range(m):
        baby.setdefault(x, j)
        x = x * g % f
    step = pow(g, -m, f)
    y = h
    for i in range(m):
        if y in baby:
            return i * m + baby[y]
        y = y * step % f
    raise AssertionError("discrete log not found")


@dataclass(frozen=True)
class DirichletCharacter:
    conductor_f: int
    index_j: int
    generator: int = 0

    def __post_init__(self):
        _check_odd_prime(self.conductor_f)
        if not 1 <= self.index_j <= self.conductor_f - 2:
            raise DomainError("index_j must lie in [1, f-2]; j = 0 is principal")
        if not self.generator:
            object.__setattr__(self, "generator", primitive_root(self.conductor_f))

    @property
    def is_even(self) -> bool:
        return self.index_j % 2 == 0

    def __call__(self, n) -> complex:
        return char_value(self, n)


def char_value(chi: DirichletCharacter, n: int) -> complex:
    f = chi.conductor_f
    if n % f == 0:
        return 0j
    k = chi.index_j * dlog(f, n) % (f - 1)
    return _root_of_unity(k, f - 1)


def _root_of_unity(k, order):
    """``exp(2 pi i k / order)`` with exact values at the quarter turns."""
    k = np.asarray(k) % order
    out = np.exp(2j * np.pi * k / order)
    exact = {0: 1, order // 2: -1} if order % 2 == 0 else {0: 1}
    if order % 4 == 0:
        exact.update({order // 4: 1j, 3 * order // 4: -1j})
    for key, val in exact.items():
        out = np.where(k == key, val, out)
    return out[()] if out.ndim == 0 else out


def family_indices(f: int, even_only: bool = True) -> np.ndarray:
    step = 2 if even_only else 1
    return np.arange(step, f - 1, step, dtype=np.int64)


def enumerate_family(f: int, even_only: bool = True) -> list[DirichletCharacter]:
    _check_odd_prime(f)
    g = primitive_root(f)
    return [DirichletCharacter(f, int(j), g) for j in family_indices(f, even_only)]


@dataclass(frozen=True)
class FamilySpec:
    conductor_max: int
    even_only: bool = True
    exclude_principal: bool = True

    def __post_init__(self):
        if not self.exclude_principal:
            raise ValueError("principal characters are always excluded")

    def conductors(self, system: PrimeSystem | None = None) -> list[int]:
        """Odd primes ``<= conductor_max`` with a non-empty family, coprime to the sites."""
        banned = {s.residue_prime for s in system.sites} if system is not None else set()
        out = []
        for f in prime_sieve(self.conductor_max):
            f = int(f)
            if f == 2 or f in banned or len(family_indices(f, self.even_only)) == 0:
                continue
            out.append(f)
        return out


@dataclass(frozen=True)
class FamilyAverage(AverageEstimate):
    n_conductors: int = 0
    trace: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["n_conductors"] = self.n_conductors
        if self.trace:
            d["trace"] = [{"conductor": f, "count": c, "re": v.real, "im": v.imag} for f, c, v in self.trace]
        return d


def _check_rational(system: PrimeSystem):
    if system.field.discriminant is not None:
        raise CapabilityError("character families are implemented over Q only")


def _nested(spec: FamilySpec, system: PrimeSystem, inner, keep_trace: bool) -> FamilyAverage:
    conductors = spec.conductors(system)
    if not conductors:
        raise DomainError(f"no admissible conductor <= {spec.conductor_max}")
    inner_means, trace, n_chars = [], [], 0
    for f in conductors:
        js = family_indices(f, spec.even_only)
        v = complex(np.mean(inner(f, js)))
        inner_means.append(v)
        n_chars += len(js)
        if keep_trace:
            trace.append((f, len(js), v))
    vals = np.array(inner_means)
    k = len(vals)
    mean = complex(math.fsum(vals.real) / k, math.fsum(vals.imag) / k)
    spread = float(np.sqrt(np.sum(np.abs(vals - mean) ** 2) / (k - 1) / k)) if k > 1 else 0.0
    return FamilyAverage(mean, spread, n_chars, None, k, tuple(trace))


def _phase_exponents(f: int, system: PrimeSystem) -> np.ndarray:
    return np.array([dlog(f, s.residue_prime) for s in system.sites], dtype=np.int64)


def family_average(spec: FamilySpec, system: PrimeSystem, params: GParams, functional,
                   trace: bool = False) -> FamilyAverage:
    """Nested average of ``functional(L_P^(m)(chi, s))`` over the family.

    ``stderr`` is the spread of the per-conductor averages divided by the
    square root of their number: an empirical fluctuation scale, not a
    sampling error.
    """
    _check_rational(system)
    if isinstance(functional, Moment) and functional.a == functional.b == 0:
        conductors = spec.conductors(system)
        if not conductors:
            raise DomainError(f"no admissible conductor <= {spec.conductor_max}")
        n = sum(len(family_indices(f, spec.even_only)) for f in conductors)
        return FamilyAverage(1.0 + 0j, 0.0, n, None, len(conductors), ())

    def inner(f, js):
        d = _phase_exponents(f, system)
        phases = _root_of_unity(np.outer(js, d), f - 1)
        return functional(g_values(system, params, phases))

    return _nested(spec, system, inner, trace)


def weyl_discrepancy(spec: FamilySpec, system: PrimeSystem, exponents, trace: bool = False) -> FamilyAverage:
    """Family average of ``prod_i chi(p_i)^{k_i}``."""
    _check_rational(system)
    k = np.asarray(exponents, dtype=np.int64)
    if k.shape != (len(system),):
        raise DomainError(f"need {len(system)} exponents, got {k.size}")

    def inner(f, js):
        total = int(np.dot(k, _phase_exponents(f, system))) % (f - 1)
        return _root_of_unity(js * total, f - 1)

    return _nested(spec, system, inner, trace)


def _series_coefficients(system: PrimeSystem, params: GParams, rel_tol: float = 1e-18):
    """``(p, n, a_{p,n})`` with ``g_p(t) = sum_n a_{p,n} t^n`` (derived convention)."""
    m = params.order_m
    out = []
    for s in system.sites:
        q = s.norm ** (-params.sigma)
        lead = (-s.log_norm) ** (m + 1)
        n = 1
        while True:
            a = lead * n ** m * q ** n
            if params.imag_t:
                a *= np.exp(-1j * n * params.imag_t * s.log_norm)
            out.append((s.residue_prime, n, complex(a)))
            ratio = ((n + 2) / (n + 1)) ** m * q
            if n > 2 and ratio < 1 and abs(a) * ratio / (1 - ratio) < rel_tol * abs(lead * q):
                break
            n += 1
    return out


def conductor_second_moment(f: int, system: PrimeSystem, params: GParams, even_only: bool = True):
    """Exact inner average of ``|L_P^(m)(chi, s)|^2`` over one conductor, and a bound on
    its distance from the torus value.

    Over the even non-principal characters mod ``f`` the average of
    ``chi(x)`` is 1 when ``x = +-1 mod f`` and ``-2/(f-3)`` otherwise.
    Expanding ``|g|^2`` in the local power series, pairs of prime powers
    congruent up to sign contribute their product in full, the rest with
    weight ``-2/(f-3)``.  Returns ``(value, bound)``.
    """
    if not even_only:
        raise CapabilityError("the closed form is derived for even families")
    _check_odd_prime(f)
    if f == 3:
        raise DomainError("conductor 3 has no even non-principal character")
    coeffs = _series_coefficients(system, params)
    lam = 2.0 / (f - 3)
    total = sum(a for _, _, a in coeffs)
    abs_total = sum(abs(a) for _, _, a in coeffs)
    classes: dict[int, complex] = {}
    class_abs: dict[int, float] = {}
    diag = 0.0
    for p, n, a in coeffs:
        r = pow(p, n, f)
        key = min(r, f - r)
        classes[key] = classes.get(key, 0j) + a
        class_abs[key] = class_abs.get(key, 0.0) + abs(a)
        diag += abs(a) ** 2
    same = sum(abs(v) ** 2 for v in classes.values())
    value = (1 + lam) * same - lam * abs(total) ** 2
    off_diag = sum(v * v for v in class_abs.values()) - diag
    bound = (1 + lam) * off_diag + lam * abs_total ** 2 + lam * diag
    return float(value), float(bound)


def family_second_moment(spec: FamilySpec, system: PrimeSystem, params: GParams):
    """Nested average of the closed-form conductor values; ``(value, bias_bound)``."""
    conductors = spec.conductors(system)
    if not conductors:
        raise DomainError(f"no admissible conductor <= {spec.conductor_max}")
    vals, bounds = zip(*(conductor_second_moment(f, system, params, spec.even_only) for f in conductors))
    return math.fsum(vals) / len(vals), math.fsum(bounds) / len(bounds)
