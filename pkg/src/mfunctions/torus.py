"""Uniform sampling of the torus T_P and averages of Phi(g_P) over it."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import rng
from .errors import CapabilityError, ContractError, DomainError
from .functionals import Moment
from .localgf import GParams, coefficients, g_local
from .primesys import NumberField, PrimeSystem, enumerate_sites

BLOCK = 1 << 15
MAX_QUAD_SITES = 3


@dataclass(frozen=True)
class TorusPoint:
    phases: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=complex)
        if ph.ndim != 1:
            raise ValueError("phases must be one-dimensional")
        if np.any(np.abs(np.abs(ph) - 1.0) > 1e-12):
            raise DomainError("torus coordinates must have unit modulus")
        object.__setattr__(self, "phases", ph)

    def __len__(self):
        return len(self.phases)


@dataclass(frozen=True)
class AverageEstimate:
    value: complex
    stderr: float
    n_samples: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {"value_re": self.value.real, "value_im": self.value.imag,
                "stderr": self.stderr, "n": self.n_samples, "seed": self.seed}


def sample_phases(n_sites: int, seed: int, start: int, count: int) -> np.ndarray:
    """``(count, n_sites)`` array of phases for sample indices ``start .. start+count-1``."""
    idx = np.arange(start, start + count, dtype=np.uint64)[:, None]
    coord = np.arange(n_sites, dtype=np.uint32)[None, :]
    theta = 2 * np.pi * rng.uniforms(seed, idx, coord)
    return np.exp(1j * theta)


def sample_torus(system: PrimeSystem, seed: int, index: int) -> TorusPoint:
    return TorusPoint(sample_phases(len(system), seed, int(index), 1)[0])


def g_values(system: PrimeSystem, params: GParams, phases) -> np.ndarray:
    """Global g for a batch of phase vectors ``(..., |P|)``."""
    phases = np.asarray(phases, dtype=complex)
    if phases.shape[-1] != len(system):
        raise ContractError(f"{phases.shape[-1]} phases for {len(system)} sites")
    out = np.zeros(phases.shape[:-1], dtype=complex)
    for j, site in enumerate(system.sites):
        out += g_local(site, params, phases[..., j])
    return out


def g_global(system: PrimeSystem, params: GParams, point: TorusPoint) -> complex:
    phases = point.phases if isinstance(point, TorusPoint) else np.asarray(point)
    if phases.ndim != 1:
        raise ContractError("g_global takes a single torus point; use g_values for batches")
    return complex(g_values(system, params, phases))


def sample_g(system: PrimeSystem, params: GParams, n: int, seed: int, start: int = 0) -> np.ndarray:
    return g_values(system, params, sample_phases(len(system), seed, start, n))


def _block_sums(system, params, functional, seed, start, count):
    vals = np.asarray(functional(sample_g(system, params, count, seed, start)), dtype=complex)
    return vals.sum(), (vals.real ** 2).sum() + (vals.imag ** 2).sum()


def _fsum_complex(zs):
    zs = list(zs)
    return complex(math.fsum(z.real for z in zs), math.fsum(z.imag for z in zs))


def mc_average(system: PrimeSystem, params: GParams, functional, n: int, seed: int,
               workers: int = 1) -> AverageEstimate:
    """Monte Carlo mean and standard error of ``functional(g_P)``.

    Samples are processed in fixed blocks whose partial sums are combined
    with ``math.fsum``; the result does not depend on ``workers``.
    """
    n = int(n)
    if n < 2:
        raise ValueError("need at least two samples")
    if isinstance(functional, Moment) and functional.a == functional.b == 0:
        return AverageEstimate(1.0 + 0j, 0.0, n, seed)
    starts = range(0, n, BLOCK)
    job = lambda s: _block_sums(system, params, functional, seed, s, min(BLOCK, n - s))
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    total = _fsum_complex(p[0] for p in parts)
    sq = math.fsum(p[1] for p in parts)
    mean = total / n
    var = max(sq / n - abs(mean) ** 2, 0.0) * n / (n - 1)
    return AverageEstimate(mean, math.sqrt(var / n), n, seed)


def quad_average(system: PrimeSystem, params: GParams, functional, nodes: int = 128) -> complex:
    """Tensor-product periodic trapezoid rule over T_P (``|P| <= 3``)."""
    k = len(system)
    if k > MAX_QUAD_SITES:
        raise CapabilityError(f"quadrature supports at most {MAX_QUAD_SITES} sites, got {k}")
    if nodes < 64:
        raise ValueError("need at least 64 nodes per axis")
    if k == 0:
        return complex(np.mean(functional(np.zeros(1, dtype=complex))))
    t = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    g = np.zeros((nodes,) * k, dtype=complex)
    for j, site in enumerate(system.sites):
        shape = [1] * k
        shape[j] = nodes
        g = g + g_local(site, params, t).reshape(shape)
    return complex(np.mean(functional(g)))


def second_moment_exact(system: PrimeSystem, params: GParams) -> float:
    """``E|g_P|^2`` from Parseval on the local power series.

    The local Fourier coefficients are ``(-log N)^(m+1) n^m q^n``; sites are
    independent with mean zero, so the variances add.  Only valid for the
    derived convention, which is the one matching the series.
    """
    total = 0.0
    m = params.order_m
    for site in system.sites:
        q2 = site.norm ** (-2 * params.sigma)
        total += site.log_norm ** (2 * m + 2) * float(_polylog_neg(2 * m, q2))
    return total


def _polylog_neg(k: int, x: float) -> float:
    """``sum_{n>=1} n^k x^n`` for ``0 <= x < 1``."""
    c = coefficients(k, "derived") if k >= 1 else []
    if k == 0:
        return x / (1 - x)
    return sum(ck * x ** j / (1 - x) ** (j + 1) for j, ck in enumerate(c, start=1))


def _site_bound_terms(norms: np.ndarray, params: GParams) -> np.ndarray:
    """Per-site ``sup_t |g_local|`` majorant ``(log N)^(m+1) sum_k c_k N^s/(N^s-1)^(k+1)``."""
    norms = np.asarray(norms, dtype=float)
    ns = norms ** params.sigma
    total = np.zeros_like(norms)
    for k, ck in enumerate(coefficients(params.order_m, params.convention), start=1):
        total += float(ck) * ns / (ns - 1.0) ** (k + 1)
    return np.log(norms) ** (params.order_m + 1) * total


def _norms_in_range(field: NumberField, lo: float, hi: float) -> np.ndarray:
    sites = enumerate_sites(field, hi)
    n = sites.norms
    return n[n > lo]


def tail_bound(field: NumberField, params: GParams, y: float) -> float:
    """Upper bound on ``sup_chi |L^(m) - L_P^(m)|`` for ``P = {N <= y}``.

    Sites with norm in ``(y, Y*]`` are summed directly, ``Y* = max(1e5, 100 y)``.
    Beyond ``Y*`` each integer carries at most ``field.max_sites_per_norm``
    sites and the per-site term is majorized by
    ``(log x)^(m+1) sum_k c_k x^(-sigma k) (1 - Y*^-sigma)^-(k+1)``, which is
    decreasing there, so the remainder is at most that majorant at ``Y*``
    plus its integral, evaluated with the incomplete gamma function.
    """
    if not params.sigma > 1:
        raise DomainError("the tail bound is finite only for sigma > 1")
    if y < 2:
        raise DomainError("cutoff must be >= 2")
    ystar = max(1e5, 100.0 * y)
    direct = math.fsum(_site_bound_terms(_norms_in_range(field, y, ystar), params))

    m, s = params.order_m, params.sigma
    L = math.log(ystar)
    shrink = 1.0 - ystar ** (-s)
    if (m + 1) / s > L:
        raise CapabilityError("majorant not monotone at Y*; cutoff too small for this order")
    rem = 0.0
    for k, ck in enumerate(coefficients(m, params.convention), start=1):
        a = s * k - 1.0
        # int_{Y*}^inf (log x)^(m+1) x^(-sk) dx = Gamma(m+2, a L) / a^(m+2)
        integral = special.gammaincc(m + 2, a * L) * special.gamma(m + 2) / a ** (m + 2)
        at_ystar = L ** (m + 1) * ystar ** (-s * k)
        rem += float(ck) * (integral + at_ystar) / shrink ** (k + 1)
    return direct + field.max_sites_per_norm * rem


def brute_tail(field: NumberField, params: GParams, y: float, upto: float) -> float:
    """Direct sum of the per-site majorant over ``y < N <= upto`` (test oracle)."""
    return math.fsum(_site_bound_terms(_norms_in_range(field, y, upto), params))
