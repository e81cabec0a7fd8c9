"""Critical points of the local map w_m and the resulting sigma thresholds.

The change of variables ``t -> g_{sigma,m}(t)`` produces a density only
while the disc ``|z| <= N^-sigma`` contains no zero of ``w_m'``.  The
smallest such zero modulus is the injectivity radius; a site of norm ``N``
stays inside it once ``sigma > -log(radius) / log N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError
from .localgf import Convention, build_rational_map

MAX_SWEEPS = 500
REFINE_DPS = 50


def aberth(coeffs, tol: float = 1e-13, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """All roots of ``sum coeffs[i] z^i`` by Aberth-Ehrlich iteration.

    ``coeffs`` are ascending and may be Python integers of any size; they
    are scaled by the largest magnitude before conversion to float.
    """
    c = [int(x) if isinstance(x, (int, np.integer)) else x for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    deg = len(c) - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    big = max(abs(x) for x in c)
    a = np.array([float(mpmath.mpf(x) / big) for x in c])[::-1]  # descending
    da = np.polyder(a)
    # initial guesses on a circle inside the Fujiwara bound, rotated off the axes
    lead = abs(a[0])
    radius = 2 * max(abs(a[k] / lead) ** (1.0 / k) for k in range(1, deg + 1))
    radius = max(radius / 2, 1e-3)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(deg) / deg + 0.4))
    for sweep in range(max_sweeps):
        p = np.polyval(a, z)
        dp = np.polyval(da, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        ratio = np.divide(p, dp, out=np.zeros_like(p), where=dp != 0)
        step = ratio / (1 - ratio * inv.sum(axis=1))
        step[~np.isfinite(step)] = 0.0
        z = z - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            return z
    raise ConvergenceError(f"Aberth iteration did not converge in {max_sweeps} sweeps "
                           f"(degree {deg}, last max step {np.max(np.abs(step)):.3e})")


def refine(coeffs, roots, dps: int = REFINE_DPS, steps: int = 8) -> np.ndarray:
    """Newton polish in extended precision against the exact coefficients."""
    out = []
    with mpmath.workdps(dps):
        c = [mpmath.mpf(int(x)) for x in coeffs][::-1]
        dc = [ci * (len(c) - 1 - i) for i, ci in enumerate(c[:-1])]
        for r in roots:
            z = mpmath.mpc(r)
            for _ in range(steps):
                p, dp = mpmath.polyval(c, z), mpmath.polyval(dc, z)
                if dp == 0:
                    break
                z = z - p / dp
            out.append(complex(z))
    return np.array(out, dtype=complex)


def residual(coeffs, root: complex) -> float:
    """``|p(root)|`` evaluated exactly (extended precision) at the double root."""
    with mpmath.workdps(REFINE_DPS):
        c = [mpmath.mpf(int(x)) for x in coeffs][::-1]
        return float(abs(mpmath.polyval(c, mpmath.mpc(root))))


def critical_points(m: int, convention=Convention.DERIVED) -> np.ndarray:
    """Zeros of the numerator of ``w_m'``, sorted by modulus."""
    rmap = build_rational_map(m, convention)
    coeffs = rmap.deriv_numerator_coeffs
    roots = refine(coeffs, aberth(coeffs))
    return roots[np.lexsort((roots.imag, roots.real, np.round(np.abs(roots), 12)))]


def injectivity_radius(m: int, convention=Convention.DERIVED) -> float:
    """Smallest critical-point modulus, capped at 1 (the unit disc is the domain)."""
    roots = critical_points(m, convention)
    return float(min(1.0, np.min(np.abs(roots)))) if len(roots) else 1.0


def sigma_threshold(m: int, convention=Convention.DERIVED, norm: int = 2) -> float:
    if norm < 2:
        raise DomainError("norm must be >= 2")
    return -math.log(injectivity_radius(m, convention)) / math.log(norm) + 0.0


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def curve_simplicity(m: int, convention=Convention.DERIVED, rho: float = 0.5, n_nodes: int = 8192,
                     rel_tol: float = 1e-9) -> bool:
    """Whether ``theta -> w_m(rho e^{i theta})`` is a simple closed curve.

    Every pair of non-adjacent chords of the ``n_nodes``-gon is tested for a
    proper crossing; orientation values smaller than ``rel_tol`` times the
    product of the chord lengths count as collinear, not crossing.
    """
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    rmap = build_rational_map(m, convention)
    w = rmap(rho * np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes))
    return not _has_crossing(w, rel_tol)


def _has_crossing(w: np.ndarray, rel_tol: float) -> bool:
    x, y = w.real, w.imag
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    n = len(w)
    length = np.hypot(x2 - x, y2 - y)
    xmin, xmax = np.minimum(x, x2), np.maximum(x, x2)
    ymin, ymax = np.minimum(y, y2), np.maximum(y, y2)
    # sweep along x: after sorting by xmin, segment k can only meet the
    # segments that start before its own xmax
    order = np.argsort(xmin, kind="stable")
    xs = xmin[order]
    lo = np.arange(1, n)
    hi = np.searchsorted(xs, xmax[order][:-1], side="right")
    counts = np.maximum(hi - lo, 0)
    if counts.sum() == 0:
        return False
    first = np.repeat(np.arange(n - 1), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    ii = order[first]
    jj = order[np.repeat(lo, counts) + offs]
    sep = (jj - ii) % n
    keep = (sep >= 2) & (sep <= n - 2) & (ymin[ii] <= ymax[jj]) & (ymin[jj] <= ymax[ii])
    ii, jj = ii[keep], jj[keep]
    tol = rel_tol * length[ii] * length[jj]
    o1 = _orient(x[ii], y[ii], x2[ii], y2[ii], x[jj], y[jj])
    o2 = _orient(x[ii], y[ii], x2[ii], y2[ii], x2[jj], y2[jj])
    o3 = _orient(x[jj], y[jj], x2[jj], y2[jj], x[ii], y[ii])
    o4 = _orient(x[jj], y[jj], x2[jj], y2[jj], x2[ii], y2[ii])
    cross = ((o1 > tol) & (o2 < -tol) | (o1 < -tol) & (o2 > tol)) & \
            ((o3 > tol) & (o4 < -tol) | (o3 < -tol) & (o4 > tol))
    return bool(cross.any())


@dataclass
class RadiusReport:
    order_m: int
    convention: Convention
    roots: np.ndarray
    rho_max: float
    sigma_min: dict = field(default_factory=dict)
    curve_simple: bool | None = None
    max_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "order_m": self.order_m,
            "convention": self.convention.value,
            "roots": [[r.real, r.imag] for r in self.roots],
            "root_moduli": [abs(r) for r in self.roots],
            "rho_max": self.rho_max,
            "sigma_min": {str(k): v for k, v in self.sigma_min.items()},
            "curve_simple": self.curve_simple,
            "max_residual": self.max_residual,
        }


def radius_report(m: int, convention=Convention.DERIVED, norms=(2,), n_nodes: int = 8192,
                  check_curve: bool = True) -> RadiusReport:
    convention = Convention.parse(convention)
    roots = critical_points(m, convention)
    rho = float(min(1.0, np.min(np.abs(roots)))) if len(roots) else 1.0
    coeffs = build_rational_map(m, convention).deriv_numerator_coeffs
    res = max((residual(coeffs, r) for r in roots), default=0.0)
    simple = curve_simplicity(m, convention, 0.99 * rho, n_nodes) if check_curve else None
    sig = {int(N): -math.log(rho) / math.log(N) + 0.0 for N in norms}
    return RadiusReport(m, convention, roots, rho, sig, simple, res)


def threshold_table(max_m: int = 8, convention=Convention.DERIVED, norm: int = 2) -> list[tuple[int, float, float]]:
    """``(m, radius, sigma threshold)`` rows for ``m = 1 .. max_m``."""
    return [(m, injectivity_radius(m, convention), sigma_threshold(m, convention, norm))
            for m in range(1, max_m + 1)]
