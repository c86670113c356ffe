"""Square periodic grid approximating R^2, spectral transforms and norms.

A function on R^2 is truncated to the torus [-l/2, l/2)^2 sampled on an
n x n lattice.  All derivatives are spectral (Fourier multipliers), the
free Schrodinger propagator is exact on the grid, and every integral is
midpoint quadrature h^2 * sum.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import XnlsError

__all__ = [
    "GridSpec",
    "Field2D",
    "NormReport",
    "workers",
    "free_propagate",
    "gradient",
    "laplacian",
    "norms",
    "radial_sample",
    "boundary_mass_fraction",
    "mass",
    "grad_l2",
    "lp_norm",
]


def workers():
    """Worker count for the FFT backend, capped by XNLS_THREADS."""
    env = os.environ.get("XNLS_THREADS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    """n cells per side on a square of physical side length l."""

    n: int
    l: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2 != 0:
            raise XnlsError(f"grid n must be even and >= 16, got {self.n}")
        if self.l <= 0:
            raise XnlsError(f"grid side l must be positive, got {self.l}")
        if self.h >= 1:
            raise XnlsError(
                f"cell size h = {self.h} does not resolve unit-scale structure"
            )

    @property
    def h(self):
        return self.l / self.n

    def axes(self):
        """1-D coordinate axis x_j = -l/2 + j*h (same for both directions)."""
        return -self.l / 2 + self.h * np.arange(self.n)

    def meshgrid(self):
        x = self.axes()
        return np.meshgrid(x, x, indexing="ij")

    def radius(self):
        """|x| at every cell center."""
        xx, yy = self.meshgrid()
        return np.hypot(xx, yy)

    def frequencies(self):
        """1-D frequency axis xi_k = 2*pi*k/l in FFT ordering."""
        return 2 * np.pi * sfft.fftfreq(self.n, d=self.h)

    def freq_meshgrid(self):
        xi = self.frequencies()
        return np.meshgrid(xi, xi, indexing="ij")

    def xi_squared(self):
        kx, ky = self.freq_meshgrid()
        return kx**2 + ky**2


@dataclass(frozen=True)
class Field2D:
    """Complex samples of a function at the cell centers of ``grid``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n, self.grid.n):
            raise XnlsError(
                f"field shape {v.shape} inconsistent with grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise XnlsError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, fn):
        xx, yy = grid.meshgrid()
        return cls(grid, np.asarray(fn(xx, yy), dtype=np.complex128))

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))

    def __add__(self, other):
        self._check_same_grid(other)
        return Field2D(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_same_grid(other)
        return Field2D(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Field2D(self.grid, self.values * c)

    __rmul__ = __mul__

    def conj(self):
        return Field2D(self.grid, np.conj(self.values))

    def _check_same_grid(self, other):
        if other.grid != self.grid:
            raise XnlsError("fields live on different grids")


@dataclass(frozen=True)
class NormReport:
    mass: float
    grad_l2: float
    h1: float
    lp: dict
    linf: float
    h_mu: float
    holder_half: float
    w14: float


def _fft2(a):
    return sfft.fft2(a, workers=workers())


def _ifft2(a):
    return sfft.ifft2(a, workers=workers())


def free_propagate(u, t):
    """Exact free Schrodinger flow e^{i t Laplacian} on the torus."""
    if not np.isfinite(t):
        raise XnlsError("propagation time must be finite")
    if t == 0:
        return u
    phase = np.exp(-1j * t * u.grid.xi_squared())
    return Field2D(u.grid, _ifft2(phase * _fft2(u.values)))


def gradient(u):
    """Spectral gradient; returns the pair of component arrays."""
    uh = _fft2(u.values)
    kx, ky = u.grid.freq_meshgrid()
    ux = _ifft2(1j * kx * uh)
    uy = _ifft2(1j * ky * uh)
    return ux, uy


def laplacian(u):
    uh = _fft2(u.values)
    return Field2D(u.grid, _ifft2(-u.grid.xi_squared() * uh))


def integrate(grid, values):
    """Midpoint quadrature of a sampled integrand."""
    return grid.h**2 * float(np.sum(values))


def mass(u):
    return integrate(u.grid, np.abs(u.values) ** 2)


def grad_l2(u):
    """L^2 norm of the gradient, computed in Fourier space (Plancherel)."""
    uh = _fft2(u.values)
    n2 = u.grid.n**2
    return float(
        np.sqrt(u.grid.h**2 * np.sum(u.grid.xi_squared() * np.abs(uh) ** 2) / n2)
    )


def lp_norm(u, p):
    if p < 1:
        raise XnlsError(f"exponent p must be >= 1, got {p}")
    a = np.abs(u.values)
    with np.errstate(over="raise"):
        try:
            val = integrate(u.grid, a**p)
        except FloatingPointError as exc:
            raise XnlsError(f"overflow evaluating L^{p} norm") from exc
    return float(val ** (1.0 / p))


def holder_half_seminorm(u, window=8):
    """Grid C^{1/2} seminorm: max |u(x)-u(y)| / |x-y|^{1/2} over cell
    pairs separated by at most ``window`` cells in each direction."""
    v = u.values
    h = u.grid.h
    best = 0.0
    for dx in range(0, window + 1):
        for dy in range(-window, window + 1):
            if dx == 0 and dy <= 0:
                continue  # each unordered pair once
            a = v[: v.shape[0] - dx, :]
            b = v[dx:, :]
            if dy >= 0:
                a = a[:, : v.shape[1] - dy]
                b = b[:, dy:]
            else:
                a = a[:, -dy:]
                b = b[:, : v.shape[1] + dy]
            dist = h * np.hypot(dx, dy)
            m = float(np.max(np.abs(a - b)))
            best = max(best, m / np.sqrt(dist))
    return best


def w14_norm(u):
    """W^{1,4} norm in the form ||u||_{L^4} + || |grad u| ||_{L^4}."""
    ux, uy = gradient(u)
    gmag = np.sqrt(np.abs(ux) ** 2 + np.abs(uy) ** 2)
    g4 = integrate(u.grid, gmag**4) ** 0.25
    return lp_norm(u, 4) + float(g4)


def norms(u, mu=1.0, p_list=(2, 4)):
    """All norms used by the diagnostics, in one report."""
    if mu <= 0:
        raise XnlsError(f"mu must be positive, got {mu}")
    m = mass(u)
    g = grad_l2(u)
    h1 = np.sqrt(g**2 + m)
    return NormReport(
        mass=m,
        grad_l2=g,
        h1=float(h1),
        lp={p: lp_norm(u, p) for p in p_list},
        linf=float(np.max(np.abs(u.values))),
        h_mu=float(np.sqrt(g**2 + mu**2 * m)),
        holder_half=holder_half_seminorm(u),
        w14=w14_norm(u),
    )


def radial_sample(u, radii):
    """Bilinear interpolation of u along the positive x-axis."""
    out = []
    g = u.grid
    for r in np.atleast_1d(radii):
        if not 0 < r < g.l / 2:
            raise XnlsError(f"radius {r} outside the grid (0, {g.l / 2})")
        # fractional index along the +x axis at y = 0
        fx = (r + g.l / 2) / g.h
        fy = (0.0 + g.l / 2) / g.h
        i0, j0 = int(np.floor(fx)), int(np.floor(fy))
        tx, ty = fx - i0, fy - j0
        v = u.values
        val = (
            (1 - tx) * (1 - ty) * v[i0, j0]
            + tx * (1 - ty) * v[(i0 + 1) % g.n, j0]
            + (1 - tx) * ty * v[i0, (j0 + 1) % g.n]
            + tx * ty * v[(i0 + 1) % g.n, (j0 + 1) % g.n]
        )
        out.append((float(r), complex(val)))
    return out


def boundary_mass_fraction(u):
    """Fraction of mass in the shell |x|_inf > 0.4 * l.

    Monitors the torus-approximates-plane assumption; runs where this
    exceeds the configured threshold are invalidated.
    """
    g = u.grid
    xx, yy = g.meshgrid()
    shell = np.maximum(np.abs(xx), np.abs(yy)) > 0.4 * g.l
    total = mass(u)
    if total == 0:
        return 0.0
    return integrate(g, np.abs(u.values) ** 2 * shell) / total
