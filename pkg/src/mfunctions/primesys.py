"""Prime sites of Q or of an imaginary quadratic field, indexed by norm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def prime_sieve(n: int) -> np.ndarray:
    """Primes ``<= n`` by the sieve of Eratosthenes."""
    n = int(n)
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol ``(D|p)`` for a prime ``p``.

    For odd ``p`` this is the Legendre symbol via Euler's criterion; for
    ``p = 2`` it is 0 if ``D`` is even and ``+1``/``-1`` according to
    ``D mod 8``.
    """
    D, p = int(D), int(p)
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    a = D % p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@dataclass(frozen=True)
class NumberField:
    """Q (``discriminant=None``) or the imaginary quadratic field of a
    negative fundamental discriminant."""

    discriminant: int | None = None

    def __post_init__(self):
        d = self.discriminant
        if d is None:
            return
        if d >= 0:
            raise DomainError(f"discriminant must be negative, got {d}")
        if not is_fundamental_discriminant(d):
            raise DomainError(f"{d} is not a fundamental discriminant")

    @classmethod
    def rationals(cls) -> "NumberField":
        return cls(None)

    @property
    def kind(self) -> str:
        return "Rationals" if self.discriminant is None else "ImaginaryQuadratic"

    @property
    def max_sites_per_norm(self) -> int:
        return 1 if self.discriminant is None else 2

    def __str__(self):
        return "Q" if self.discriminant is None else f"Q(sqrt({self.discriminant}))"


@dataclass(frozen=True, order=True)
class PrimeSite:
    norm: int
    residue_prime: int

    @property
    def log_norm(self) -> float:
        return math.log(self.norm)


@dataclass(frozen=True)
class PrimeSystem:
    field: NumberField
    cutoff_y: float
    sites: tuple[PrimeSite, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    @property
    def norms(self) -> np.ndarray:
        return np.array([s.norm for s in self.sites], dtype=np.int64)

    @property
    def log_norms(self) -> np.ndarray:
        return np.array([s.log_norm for s in self.sites], dtype=float)

    def prefix(self, k: int) -> "PrimeSystem":
        """The first ``k`` sites, with the cutoff lowered to the last norm kept."""
        sites = self.sites[:k]
        y = float(sites[-1].norm) if sites else 0.0
        return PrimeSystem(self.field, y, sites)

    def to_records(self) -> list[dict]:
        return [{"residue_prime": s.residue_prime, "norm": s.norm} for s in self.sites]


def site_norms(field: NumberField, p: int) -> list[int]:
    """Norms of the sites above the rational prime ``p``."""
    if field.discriminant is None:
        return [p]
    k = kronecker(field.discriminant, p)
    if k == 1:
        return [p, p]
    if k == 0:
        return [p]
    return [p * p]


def enumerate_sites(field: NumberField, y: float) -> PrimeSystem:
    """All sites of norm ``<= y``, sorted by norm then residue prime."""
    sites = []
    for p in prime_sieve(int(math.floor(y)) if y >= 2 else 0):
        p = int(p)
        for n in site_norms(field, p):
            if n <= y:
                sites.append(PrimeSite(n, p))
    sites.sort()
    return PrimeSystem(field, float(y), tuple(sites))


def rational_system(y: float) -> PrimeSystem:
    return enumerate_sites(NumberField.rationals(), y)
