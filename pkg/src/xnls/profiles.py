"""Log-profile synthesis: Moser fields, Lions ramp, clipped profiles,
their scaled realizations, and the radial log-coordinate transform.

A profile is a piecewise-linear function psi on [0, infinity) with
psi(0) = 0, constant after its last knot.  Its scaled realization at
scale alpha is the radial function

    g(x) = sqrt(alpha / 2 pi) * psi(-log|x| / alpha),

supported in the unit disk whenever psi vanishes on (-inf, 0].  For
such fields every integral reduces to a 1-D integral in s = -log r /
alpha with weight e^{-2 alpha s}; quadrature in s is exact to machine
precision at any concentration scale, which is how the inner plateau
(radius e^{-alpha}, far below any affordable grid cell) is handled
honestly.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j0, j1, jn

from .errors import OverflowGuardError, XnlsError
from .grid import Field2D

SQRT_4PI = np.sqrt(4 * np.pi)


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-linear profile: knots s_0 = 0 < ... < s_m, values at
    knots, constant after s_m, zero for s <= 0."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if k.ndim != 1 or k.shape != v.shape or len(k) < 2:
            raise XnlsError("profile needs matching knot/value sequences")
        if k[0] != 0 or v[0] != 0:
            raise XnlsError("profile must start at (0, 0)")
        if np.any(np.diff(k) <= 0):
            raise XnlsError("profile knots must be strictly increasing")
        object.__setattr__(self, "knots", tuple(float(s) for s in k))
        object.__setattr__(self, "values", tuple(float(s) for s in v))

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.interp(s, self.knots, self.values)
        return np.where(s <= 0, 0.0, out)

    def __mul__(self, c):
        return RadialProfile(self.knots, tuple(c * v for v in self.values))

    __rmul__ = __mul__

    def __add__(self, other):
        merged = sorted(set(self.knots) | set(other.knots))
        return RadialProfile(
            tuple(merged), tuple(float(self(s) + other(s)) for s in merged)
        )

    def dirichlet_sq(self):
        """integral |psi'|^2 ds (sum of squared slopes times lengths)."""
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        dk = np.diff(k)
        return float(np.sum((np.diff(v) / dk) ** 2 * dk))

    def max_over_sqrt_s(self):
        """max_{s > 0} |psi(s)| / sqrt(s), in closed form per segment.

        On a segment psi = a + b s, the only interior stationary point
        of (a + b s)/sqrt(s) is at s = a/b; the plateau tail is
        decreasing so its sup sits at the last knot.
        """
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        best = 0.0
        for i in range(len(k) - 1):
            s0, s1 = k[i], k[i + 1]
            b = (v[i + 1] - v[i]) / (s1 - s0)
            a = v[i] - b * s0
            cands = [s1] if s0 == 0 else [s0, s1]
            if b != 0:
                sc = a / b
                if max(s0, 0.0) < sc < s1:
                    cands.append(sc)
            for s in cands:
                # sqrt(val^2 / s) rather than val / sqrt(s): one fewer
                # rounding, so knot candidates hit closed forms exactly
                if s == s1:
                    val = v[i + 1]
                elif s == s0:
                    val = v[i]
                else:
                    val = a + b * s
                best = max(best, np.sqrt(val * val / s))
        return best


def lions_profile():
    """The ramp-then-plateau profile: 0, then s on [0, 1], then 1."""
    return RadialProfile((0.0, 1.0), (0.0, 1.0))


def clipped_profiles(delta):
    """Split the ramp at 1 - delta: the pair sums back to the full ramp."""
    if not 0 < delta < 0.5:
        raise XnlsError(f"delta must lie in (0, 1/2), got {delta}")
    psi1 = RadialProfile((0.0, 1.0 - delta), (0.0, 1.0 - delta))
    psi2 = RadialProfile((0.0, 1.0 - delta, 1.0), (0.0, 0.0, delta))
    return psi1, psi2


def profile_orlicz_limit(psi):
    """Limiting Orlicz norm of the scaled family as the scale grows."""
    return psi.max_over_sqrt_s() / SQRT_4PI


_GL_NODES, _GL_WEIGHTS = leggauss(10)


def _panel_quad(fn, a, b, panels):
    """Composite 10-point Gauss-Legendre on [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    pts = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return float(np.sum(wts * fn(pts)))


@dataclass(frozen=True)
class ScaledProfileField:
    """Radial field g(x) = sqrt(alpha/2pi) psi(-log|x| / alpha)."""

    profile: RadialProfile
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 700:
            raise XnlsError(f"scale alpha must lie in (0, 700], got {self.alpha}")

    @property
    def amplitude(self):
        return np.sqrt(self.alpha / (2 * np.pi))

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            s = np.where(r > 0, -np.log(np.maximum(r, 1e-300)) / self.alpha, np.inf)
        plateau = self.amplitude * self.profile.values[-1]
        return np.where(
            r == 0, plateau, self.amplitude * self.profile(np.minimum(s, 1e300))
        )

    def __mul__(self, c):
        return ScaledProfileField(c * self.profile, self.alpha)

    __rmul__ = __mul__

    def to_field(self, grid):
        """Sample onto a grid; warns when the inner plateau is below
        the cell size (grid norms then miss the concentration; use the
        radial quadrature methods for anything quantitative)."""
        plateau_radius = np.exp(-self.alpha * self.profile.knots[-1])
        if plateau_radius < grid.h:
            warnings.warn(
                f"inner plateau radius {plateau_radius:.3g} unresolved by "
                f"cell size {grid.h:.3g}; grid norms will degrade",
                stacklevel=2,
            )
        return Field2D(grid, self(grid.radius()).astype(np.complex128))

    # -- exact radial integrals ------------------------------------------

    def grad_l2_sq(self):
        """||grad g||_{L^2}^2 equals the profile Dirichlet integral."""
        return self.profile.dirichlet_sq()

    def radial_integral(self, fn, panels_per_unit=None):
        """integral fn(g(x)) dx for fn with fn(0) = 0.

        In s-coordinates: 2 pi alpha * int_0^{s_m} fn(A psi(s)) e^{-2
        alpha s} ds plus the exact plateau disk term.
        """
        a = self.alpha
        amp = self.amplitude
        k = self.profile.knots
        if panels_per_unit is None:
            panels_per_unit = max(32, int(8 * a))
        total = 0.0
        for i in range(len(k) - 1):
            s0, s1 = k[i], k[i + 1]
            panels = max(4, int(np.ceil(panels_per_unit * (s1 - s0))))
            total += _panel_quad(
                lambda s: fn(amp * self.profile(s)) * np.exp(-2 * a * s),
                s0,
                s1,
                panels,
            )
        total *= 2 * np.pi * a
        # plateau: constant value on the disk of radius e^{-alpha s_m}
        total += np.pi * np.exp(-2 * a * k[-1]) * float(fn(amp * self.profile.values[-1]))
        return total

    def lp_pow(self, p):
        """integral |g|^p dx."""
        return self.radial_integral(lambda v: np.abs(v) ** p)

    def l2(self):
        return np.sqrt(self.lp_pow(2))

    def lp(self, p):
        return self.lp_pow(p) ** (1 / p)

    def linf(self):
        return self.amplitude * float(np.max(np.abs(np.asarray(self.profile.values))))

    def h1(self):
        return float(np.sqrt(self.grad_l2_sq() + self.lp_pow(2)))

    def exp_p_integral(self, coef, p):
        """integral e^{coef |g|^2} |g|^p dx, with the overflow guard."""
        if coef * self.linf() ** 2 > 700:
            raise OverflowGuardError(
                f"exponent {coef * self.linf() ** 2:.3g} exceeds cap in radial integral"
            )
        return self.radial_integral(
            lambda v: np.exp(coef * np.abs(v) ** 2) * np.abs(v) ** p
        )


def moser_profile_field(alpha):
    """The concentration family: ramp profile at scale alpha.

    Plateau height sqrt(alpha/2pi) on the disk of radius e^{-alpha};
    vanishes outside the unit disk; ||grad||_{L^2} = 1 exactly.
    """
    return ScaledProfileField(lions_profile(), alpha)


def moser_field(alpha, grid):
    return moser_profile_field(alpha).to_field(grid)


def profile_field(psi, alpha, grid=None):
    spf = ScaledProfileField(psi, alpha)
    return spf.to_field(grid) if grid is not None else spf


def scales_orthogonal(alpha_seq, beta_seq, threshold=5.0):
    """Predicate for scale orthogonality: |log(beta_n / alpha_n)| grows
    without bound along the sampled indices."""
    a = np.asarray(alpha_seq, dtype=np.float64)
    b = np.asarray(beta_seq, dtype=np.float64)
    gap = np.abs(np.log(b / a))
    tail = gap[len(gap) // 2 :]
    return bool(np.all(np.diff(tail) > 0) and gap[-1] > threshold)


# -- Fourier-Bessel form of the Moser family -----------------------------

_U_CUT = 1000.0  # switch from panel quadrature to the asymptotic tail


def _bessel_log_integral(r, alpha):
    """integral_1^{e^alpha} J_0(r * rho) / rho d rho.

    Panel quadrature with panel length pi / max(r, 1) (capped by the
    local smoothness scale of 1/rho) up to u = r*rho = _U_CUT, then two
    integrations by parts for the oscillatory remainder:

        int J0(u)/u du = [J1(u)/u] + 2 [J2(u)/u^2] + 8 int J2(u)/u^3 du,

    whose last term is below 1e-9 at the cut.
    """
    upper = np.exp(alpha)
    if r <= 0:
        return alpha
    rho_cut = upper if r * upper <= _U_CUT else _U_CUT / r
    total = 0.0
    rho = 1.0
    osc = np.pi / max(r, 1e-12)
    while rho < rho_cut:
        step = min(osc, rho)
        nxt = min(rho_cut, rho + step)
        total += _panel_quad(lambda p: j0(r * p) / p, rho, nxt, 2)
        rho = nxt
    if rho_cut < upper:
        u1, u2 = r * rho_cut, r * upper
        total += (j1(u2) / u2 - j1(u1) / u1) + 2 * (
            jn(2, u2) / u2**2 - jn(2, u1) / u1**2
        )
    return total


def fourier_moser(alpha, grid, samples=1200):
    """Band-limited form of the Moser field: radial inverse Fourier
    integral of 1/|xi|^2 over the annulus 1 <= |xi| <= e^alpha,
    assembled onto the grid by interpolation over sampled radii."""
    if alpha > 12:
        raise XnlsError("fourier_moser is capped at alpha = 12 (quadrature budget)")
    rr = grid.radius()
    rmax = float(np.max(rr))
    # log-spaced radii resolve the near-origin logarithm, linear the rest
    radii = np.unique(
        np.concatenate(
            [
                np.geomspace(max(grid.h / 8, 1e-8), 1.0, samples // 2),
                np.linspace(grid.h / 8, rmax, samples // 2),
            ]
        )
    )
    vals = np.array([_bessel_log_integral(r, alpha) for r in radii])
    prefac = np.sqrt(2 * np.pi / alpha) / (2 * np.pi)
    at_zero = prefac * alpha  # J0(0) = 1 makes the integral exactly alpha
    flat = np.interp(rr.ravel(), radii, prefac * vals, left=at_zero)
    return Field2D(grid, flat.reshape(rr.shape).astype(np.complex128))


# -- log-coordinate transform (radial data on (0, 1]) --------------------

def log_transform(radii, u_values):
    """w(t) = sqrt(4 pi) u(r) with r = e^{-t/2}, on the log-spaced t-grid.

    Returns (t, w) with t increasing; input radii must be log-spaced.
    """
    r = np.asarray(radii, dtype=np.float64)
    u = np.asarray(u_values, dtype=np.float64)
    if np.any(r <= 0) or np.any(r > 1):
        raise XnlsError("radii must lie in (0, 1]")
    logs = np.log(r)
    steps = np.diff(logs)
    if len(steps) and not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
        raise XnlsError("radii must be log-spaced")
    t = -2 * logs
    order = np.argsort(t)
    return t[order], SQRT_4PI * u[order]


def transformed_integrals(t, w, p=2, beta=0.0):
    """The three 1-D integrals matching their 2-D radial counterparts:

        int |w'|^2 dt                  = int |grad u|^2 dx
        int |w|^p e^{-t} dt            = (sqrt(4pi)^p / pi) int |u|^p dx
        int e^{beta w^2} |w|^p e^{-t}  (reduced-inequality integrand)
    """
    t = np.asarray(t, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    wprime = np.gradient(w, t)
    dirichlet = float(np.trapezoid(wprime**2, t))
    weight = np.exp(-t)
    lp = float(np.trapezoid(np.abs(w) ** p * weight, t))
    exp_arg = beta * w**2
    if np.max(exp_arg) > 700:
        raise OverflowGuardError("exponent cap exceeded in reduced integrand")
    reduced = float(np.trapezoid(np.exp(exp_arg) * np.abs(w) ** p * weight, t))
    return dirichlet, lp, reduced
