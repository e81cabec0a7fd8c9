"""Densities M_{sigma,P} on C, built three ways.

* ``curve_measure``: the exact one-site law for m = 1, a pushforward of
  d theta / 2 pi onto the closed curve ``w(N^-sigma e^{i theta})``.
* ``reconstruct_density``: inversion of the characteristic function, which
  for a finite set of sites is the product of one-dimensional circle
  integrals.
* ``histogram``: binned torus samples of ``g_P``.

All densities are taken with respect to ``|dw| = dx dy / (2 pi)``, so with
``psi_z(w) = exp(i Re(conj(z) w))`` the transform pair is self-dual::

    Mt(z) = int M(w) psi_z(w) |dw|,    M(w) = int Mt(z) psi_z(w)^* |dz|.

Grids are square, ``grid_n`` points per axis at ``x_k = (k - grid_n/2) h``
with ``h = 2 R / grid_n``; ``values[i, j]`` is the density at
``x_i + i x_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .localgf import GParams, g_local
from .primesys import NumberField, PrimeSite, PrimeSystem, enumerate_sites
from .torus import BLOCK, sample_g

TWO_PI = 2 * math.pi
BOUNDARY_TOL = 1e-4
MAX_DOUBLINGS = 4
RINGING_TOL = 1e-3
_CHUNK_ELEMS = 1 << 22


@dataclass
class GridDensity:
    values: np.ndarray
    extent: float
    raw_mass: float = float("nan")
    raw_min: float = float("nan")
    smoothing: float = 0.0
    out_of_support_fraction: float = 0.0
    warnings: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.values.shape
        if len(n) != 2 or n[0] != n[1]:
            raise ValueError("density grid must be square")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 2 * self.extent / self.grid_n

    @property
    def axis(self) -> np.ndarray:
        return grid_axis(self.grid_n, self.extent)

    @property
    def cell(self) -> float:
        """Area element ``h^2 / (2 pi)`` of the ``|dw|`` measure."""
        return self.spacing ** 2 / TWO_PI

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell)

    def points(self) -> np.ndarray:
        x = self.axis
        return x[:, None] + 1j * x[None, :]

    def integrate(self, phi) -> complex:
        return complex(np.sum(self.values * phi(self.points())) * self.cell)

    def moment(self, a: int, b: int) -> complex:
        w = self.points()
        return complex(np.sum(self.values * w ** a * np.conj(w) ** b) * self.cell)

    def same_geometry(self, other: "GridDensity") -> bool:
        return self.grid_n == other.grid_n and math.isclose(self.extent, other.extent, rel_tol=1e-12)

    def reflection_asymmetry(self) -> float:
        """``max |M(w) - M(conj w)| / max M`` over grid points whose mirror is on the grid."""
        v = self.values[:, 1:]
        return float(np.max(np.abs(v - v[:, ::-1])) / np.max(self.values))


def grid_axis(grid_n: int, extent: float) -> np.ndarray:
    return (np.arange(grid_n) - grid_n // 2) * (2 * extent / grid_n)


def _check_geometry(a: GridDensity, b: GridDensity):
    if not a.same_geometry(b):
        raise ContractError(f"grid geometry mismatch: ({a.grid_n}, {a.extent}) vs ({b.grid_n}, {b.extent})")


def l1_distance(a: GridDensity, b: GridDensity) -> float:
    _check_geometry(a, b)
    return float(np.abs(a.values - b.values).sum() * a.cell)


def sup_distance(a: GridDensity, b: GridDensity) -> float:
    _check_geometry(a, b)
    return float(np.abs(a.values - b.values).max())


def _finalize(values, extent, **kw) -> GridDensity:
    """Clip ringing below zero; keep the pre-clip mass and minimum."""
    values = np.asarray(values, dtype=float)
    h = 2 * extent / values.shape[0]
    raw_mass = float(values.sum() * h * h / TWO_PI)
    raw_min = float(values.min())
    warnings = list(kw.pop("warnings", []))
    peak = float(values.max())
    if peak > 0 and raw_min < -RINGING_TOL * peak:
        warnings.append(f"ringing: min {raw_min:.3e} below -{RINGING_TOL:g} x peak")
    return GridDensity(np.clip(values, 0.0, None), extent, raw_mass=raw_mass, raw_min=raw_min,
                       warnings=warnings, **kw)


# -- exact one-site geometry (m = 1) -----------------------------------------

def w_polar(site: PrimeSite, r, theta):
    """``A z / (1 - z)^2`` at ``z = r e^{i theta}``, ``A = (log N)^2``, as ``U + iV``."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    A = site.log_norm ** 2
    c, s = np.cos(theta), np.sin(theta)
    d4 = (1 - 2 * r * c + r * r) ** 2
    U = A * (r * c - 2 * r * r + r ** 3 * c) / d4
    V = A * (r * s - r ** 3 * s) / d4
    return U + 1j * V


def jacobian(site: PrimeSite, r, theta):
    """``det d(U, V) / d(r, theta) = A^2 r |1 + z|^2 / |1 - z|^6``."""
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise DomainError("jacobian needs 0 < r < 1")
    z = r * np.exp(1j * np.asarray(theta, dtype=float))
    A = site.log_norm ** 2
    out = A * A * r * np.abs(1 + z) ** 2 / np.abs(1 - z) ** 6
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CurveMeasure:
    site: PrimeSite
    sigma: float
    theta: np.ndarray
    w: np.ndarray

    @property
    def rho(self) -> float:
        return self.site.norm ** (-self.sigma)

    @property
    def n_nodes(self) -> int:
        return len(self.theta)

    def integrate_test(self, phi) -> complex:
        return complex(np.mean(phi(self.w)))

    def density_weight(self):
        """``1 / J`` at the nodes: the singular density's radial weight on the curve."""
        return 1.0 / jacobian(self.site, self.rho, self.theta)

    def angular_weights(self, bins: int) -> np.ndarray:
        """Mass of each ``arg w`` sector ``[2 pi k / bins, 2 pi (k+1) / bins)``."""
        return angular_histogram(self.w, bins) / self.n_nodes


def angular_histogram(w, bins: int) -> np.ndarray:
    ang = np.mod(np.angle(w), TWO_PI)
    k = np.minimum((ang * (bins / TWO_PI)).astype(np.int64), bins - 1)
    return np.bincount(k, minlength=bins).astype(float)


def curve_measure(site: PrimeSite, sigma: float, n_nodes: int = 4096) -> CurveMeasure:
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    theta = TWO_PI * np.arange(n_nodes) / n_nodes
    return CurveMeasure(site, float(sigma), theta, w_polar(site, site.norm ** (-sigma), theta))


def rasterize(curve: CurveMeasure, grid_n: int, extent: float, bandwidth: float | None = None) -> GridDensity:
    """Curve measure convolved with an isotropic Gaussian (default 2 cells)."""
    x = grid_axis(grid_n, extent)
    b = 2 * (2 * extent / grid_n) if bandwidth is None else float(bandwidth)
    gx = np.exp(-(x[None, :] - curve.w.real[:, None]) ** 2 / (2 * b * b))
    gy = np.exp(-(x[None, :] - curve.w.imag[:, None]) ** 2 / (2 * b * b))
    # Gaussian normalized to unit |dw|-mass: exp(-|w|^2 / 2b^2) / b^2
    vals = (gx.T @ gy) / (curve.n_nodes * b * b)
    return GridDensity(vals, extent, raw_mass=float(vals.sum() * (2 * extent / grid_n) ** 2 / TWO_PI),
                       raw_min=float(vals.min()), smoothing=b)


# -- characteristic functions -------------------------------------------------

def site_curve(site: PrimeSite, params: GParams, n_nodes: int) -> np.ndarray:
    """``g_local`` at ``n_nodes`` equispaced points of the unit circle."""
    return g_local(site, params, np.exp(TWO_PI * 1j * np.arange(n_nodes) / n_nodes))


def _max_speed(site: PrimeSite, params: GParams) -> float:
    g = site_curve(site, params, 4096)
    return float(np.max(np.abs(np.diff(np.append(g, g[0]))))) * 4096 / TWO_PI


def nodes_for(site: PrimeSite, params: GParams, zmax: float) -> int:
    """Trapezoid node count resolving ``theta -> Re(conj(z) g(e^{i theta}))`` for ``|z| <= zmax``."""
    need = 1.5 * zmax * _max_speed(site, params) + 64
    return max(64, 1 << int(math.ceil(math.log2(need))))


def _check_nodes(n_nodes):
    if n_nodes < 64 or n_nodes & (n_nodes - 1):
        raise ValueError("n_nodes must be a power of two >= 64")


def local_charfn(site: PrimeSite, params: GParams, z, n_nodes: int | None = None):
    """``(1/2pi) int_0^{2pi} psi_z(g_local(e^{i theta})) d theta`` by the periodic trapezoid rule."""
    z = np.asarray(z, dtype=complex)
    if n_nodes is None:
        n_nodes = nodes_for(site, params, float(np.max(np.abs(z), initial=0.0)))
    _check_nodes(n_nodes)
    g = site_curve(site, params, n_nodes)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, _CHUNK_ELEMS // n_nodes)
    for i in range(0, flat.size, step):
        zz = flat[i:i + step, None]
        out[i:i + step] = np.exp(1j * (zz.real * g.real + zz.imag * g.imag)).mean(axis=1)
    out = out.reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def global_charfn(system: PrimeSystem, params: GParams, z, n_nodes: int | None = None):
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for site in system.sites:
        out = out * local_charfn(site, params, z, n_nodes)
    return out[()] if out.ndim == 0 else out


def local_charfn_grid(site: PrimeSite, params: GParams, xi: np.ndarray, n_nodes: int | None = None) -> np.ndarray:
    """Local characteristic function on the tensor grid ``xi[i] + 1j xi[j]``.

    ``psi`` factorizes as ``exp(i xi_x g_x) exp(i xi_y g_y)``, so the
    quadrature over the circle is a single matrix product.
    """
    xi = np.asarray(xi, dtype=float)
    if n_nodes is None:
        n_nodes = nodes_for(site, params, float(np.max(np.abs(xi))) * math.sqrt(2))
    _check_nodes(n_nodes)
    g = site_curve(site, params, n_nodes)
    ey = np.exp(1j * np.outer(g.imag, xi))
    out = np.empty((len(xi), len(xi)), dtype=complex)
    step = max(1, _CHUNK_ELEMS // n_nodes)
    for i in range(0, len(xi), step):
        ex = np.exp(1j * np.outer(xi[i:i + step], g.real))
        out[i:i + step] = ex @ ey
    return out / n_nodes


@dataclass(frozen=True)
class CharFnGrid:
    xi: np.ndarray
    values: np.ndarray

    @property
    def freq_n(self) -> int:
        return len(self.xi)

    @property
    def freq_extent(self) -> float:
        return float(np.max(np.abs(self.xi)))

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def hermitian_defect(self) -> float:
        """``max |Mt(-z) - conj Mt(z)|`` over points whose negation is on the grid."""
        v = self.values[1:, 1:]
        return float(np.max(np.abs(v[::-1, ::-1] - np.conj(v))))


def charfn_grid(system: PrimeSystem, params: GParams, xi: np.ndarray) -> CharFnGrid:
    vals = np.ones((len(xi), len(xi)), dtype=complex)
    for site in system.sites:
        vals *= local_charfn_grid(site, params, xi)
    return CharFnGrid(np.asarray(xi, dtype=float), vals)


def support_radius(system: PrimeSystem, params: GParams) -> float:
    """Sum over sites of ``max |g_local|`` on 1024 angles."""
    return float(sum(np.max(np.abs(site_curve(s, params, 1024))) for s in system.sites))


def _density_from_charfn(cf: CharFnGrid, decimate: int) -> np.ndarray:
    dxi = cf.xi[1] - cf.xi[0]
    m = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(cf.values))).real * (dxi * dxi / TWO_PI)
    return m[::decimate, ::decimate]


def reconstruct_density(system: PrimeSystem, params: GParams, grid_n: int = 256, extent="auto",
                        freq_extent="auto", smoothing: float = 0.0) -> GridDensity:
    """Invert the characteristic function of ``g_P`` onto a space grid.

    The frequency spacing is ``pi / extent`` so the periodic images of the
    support stay off the grid.  The frequency half-width starts at the
    Nyquist value ``pi grid_n / (2 extent)`` and is doubled (the space grid
    is refined and then decimated back to ``grid_n``) until the boundary of
    the frequency box carries ``|Mt| < 1e-4``, at most four times.  A
    positive ``smoothing`` multiplies the transform by the Fourier
    transform of an isotropic Gaussian of that standard deviation.
    """
    if grid_n < 8 or grid_n % 2:
        raise ValueError("grid_n must be an even integer >= 8")
    warnings = []
    if params.sigma <= 1:
        warnings.append("sigma <= 1: finite-P density only, no infinite-family limit")
    R = 1.1 * support_radius(system, params) if extent == "auto" else float(extent)
    if not R > 0:
        R = 1.0
    nyquist = math.pi * grid_n / (2 * R)
    if freq_extent == "auto":
        factors = [2 ** k for k in range(MAX_DOUBLINGS + 1)]
    else:
        need = max(1.0, float(freq_extent) / nyquist)
        factors = [1 << int(math.ceil(math.log2(need) - 1e-12))]
    for s in factors:
        nf = grid_n * s
        xi = (np.arange(nf) - nf // 2) * (math.pi / R)
        cf = charfn_grid(system, params, xi)
        if smoothing > 0:
            cf = CharFnGrid(xi, cf.values * np.exp(-0.5 * smoothing ** 2 * (xi[:, None] ** 2 + xi[None, :] ** 2)))
        boundary = cf.boundary_max()
        if boundary < BOUNDARY_TOL:
            break
    if boundary >= BOUNDARY_TOL:
        warnings.append(f"frequency grid too coarse: boundary |Mt| = {boundary:.2e} at half-width "
                        f"{cf.freq_extent:.4g}; refine grid_n or extent")
    dens = _finalize(_density_from_charfn(cf, s), R, smoothing=smoothing, warnings=warnings)
    dens.meta.update(method="charfn", freq_extent=cf.freq_extent, freq_n=cf.freq_n,
                     boundary_charfn=boundary, oversampling=s)
    return dens


def convolve(a: GridDensity, b: GridDensity) -> GridDensity:
    """Linear convolution ``int a(w') b(w - w') |dw'|`` on the common grid."""
    _check_geometry(a, b)
    n = a.grid_n
    fa = np.fft.rfft2(a.values, (2 * n, 2 * n))
    fb = np.fft.rfft2(b.values, (2 * n, 2 * n))
    full = np.fft.irfft2(fa * fb, (2 * n, 2 * n)) * a.cell
    lo = n // 2
    vals = full[lo:lo + n, lo:lo + n]
    return GridDensity(vals, a.extent, raw_mass=float(vals.sum() * a.cell), raw_min=float(vals.min()),
                       smoothing=math.hypot(a.smoothing, b.smoothing),
                       warnings=a.warnings + b.warnings, meta={"method": "convolve"})


def histogram(system: PrimeSystem, params: GParams, n_samples: int, seed: int, grid_n: int = 256,
              extent="auto") -> GridDensity:
    """Normalized 2D histogram of ``g_P`` over torus samples; cells centred on grid points."""
    if n_samples < 10_000:
        raise ValueError("histogram needs at least 1e4 samples")
    R = 1.1 * support_radius(system, params) if extent == "auto" else float(extent)
    h = 2 * R / grid_n
    edges = (np.arange(grid_n + 1) - grid_n // 2 - 0.5) * h
    counts = np.zeros((grid_n, grid_n))
    for start in range(0, n_samples, BLOCK):
        g = sample_g(system, params, min(BLOCK, n_samples - start), seed, start)
        c, _, _ = np.histogram2d(g.real, g.imag, bins=[edges, edges])
        counts += c
    inside = counts.sum()
    vals = counts / (n_samples * h * h / TWO_PI)
    dens = GridDensity(vals, R, raw_mass=float(inside / n_samples), raw_min=0.0,
                       out_of_support_fraction=float(1 - inside / n_samples),
                       meta={"method": "histogram", "seed": seed, "n_samples": n_samples})
    return dens


@dataclass(frozen=True)
class ProbeStep:
    y: float
    added_norms: tuple[int, ...]
    sup_diff: float
    bound: float
    mass: float

    @property
    def ratio(self) -> float:
        return self.sup_diff / self.bound


def increment_bound(norms, sigma: float) -> float:
    """``sum N^{-4 sigma} / (log N)^2`` over the appended sites."""
    return float(sum(n ** (-4 * sigma) / math.log(n) ** 2 for n in norms))


def uniform_convergence_probe(field: NumberField, params: GParams, y_sequence, grid_n: int = 256,
                              extent="auto") -> tuple[list[ProbeStep], list[GridDensity]]:
    """Sup-norm increments of ``M_{sigma,P_y}`` along ``y_sequence``.

    All densities share the grid of the largest system.  Returns one step per
    consecutive pair plus the densities themselves.
    """
    if not params.sigma > 0.5:
        raise DomainError("the probe is meaningful for sigma > 1/2")
    ys = sorted(float(y) for y in y_sequence)
    systems = [enumerate_sites(field, y) for y in ys]
    R = 1.1 * support_radius(systems[-1], params) if extent == "auto" else float(extent)
    dens = [reconstruct_density(s, params, grid_n, extent=R) for s in systems]
    steps = []
    for i in range(1, len(ys)):
        added = tuple(x.norm for x in systems[i].sites[len(systems[i - 1]):])
        steps.append(ProbeStep(ys[i], added, sup_distance(dens[i], dens[i - 1]),
                               increment_bound(added, params.sigma), dens[i].mass))
    return steps, dens

