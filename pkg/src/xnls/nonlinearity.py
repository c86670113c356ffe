"""Numerically stable evaluation of the exponential nonlinearity family.

All expressions are built from x = 4*pi*s with s = |z|^2:

    ftilde(s) = e^x - 1 - x                  (real, >= 0)
    f(z)      = ftilde(|z|^2) * z
    F(z)      = (e^x - 1 - x - x^2/2) / (4*pi)   (Hamiltonian density)
    g(s)      = (e^x - 1 - x - x^2/2) / (4*pi)   (antiderivative of ftilde)
    G(z)      = ftilde(|z|^2) * |z|^2
    G2(z)     = (e^x - 1 - x - x^2/2) * z
    G1(z, x)  = (1 - chi(x)) f(z) + 8*pi^2 chi(x) |z|^4 z

The "exp minus leading terms" combinations cancel catastrophically for
small arguments, so below x = 1e-4 they switch to truncated Taylor
series; expm1 is used elsewhere.
"""

import numpy as np

from .errors import OverflowGuardError
from .grid import Field2D, gradient, integrate

EXP_CAP = 700.0  # double precision e^x limit; exceeding it is an error
FOUR_PI = 4 * np.pi
SERIES_CUTOFF = 1e-4

KINDS = ("f", "F", "f_tilde", "g_int", "G", "G1", "G2")


def _guard(x, where_from=None):
    """x = 4*pi*|z|^2 must stay under the exponent cap."""
    xmax = np.max(x) if np.ndim(x) else x
    if xmax > EXP_CAP:
        where = None
        if np.ndim(x):
            where = tuple(int(i) for i in np.unravel_index(np.argmax(x), np.shape(x)))
        raise OverflowGuardError(
            f"4*pi*|u|^2 = {float(xmax):.3g} exceeds the exponent cap {EXP_CAP}",
            where=where,
        )


def expm1_minus_x(x):
    """e^x - 1 - x, series below the cutoff.

    Taylor terms x^2/2 + x^3/6 + x^4/24 + x^5/120 (4 retained terms).
    """
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < SERIES_CUTOFF
    out = np.empty_like(x)
    xs = x[small]
    out[small] = xs * xs * (1 / 2 + xs * (1 / 6 + xs * (1 / 24 + xs / 120)))
    xl = x[~small]
    out[~small] = np.expm1(xl) - xl
    return out


def expm1_minus_x_half_x2(x):
    """e^x - 1 - x - x^2/2, series below the cutoff."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < SERIES_CUTOFF
    out = np.empty_like(x)
    xs = x[small]
    out[small] = xs**3 * (1 / 6 + xs * (1 / 24 + xs * (1 / 120 + xs / 720)))
    xl = x[~small]
    out[~small] = np.expm1(xl) - xl - xl * xl / 2
    return out


def f_tilde(s):
    """ftilde(s) = e^{4 pi s} - 1 - 4 pi s for s = |z|^2 >= 0."""
    x = FOUR_PI * np.asarray(s, dtype=np.float64)
    _guard(x)
    return expm1_minus_x(x)


def f(z):
    z = np.asarray(z, dtype=np.complex128)
    return f_tilde(np.abs(z) ** 2) * z


def F(z):
    """Nonlinear Hamiltonian density; real and nonnegative."""
    s = np.abs(np.asarray(z)) ** 2
    x = FOUR_PI * s
    _guard(x)
    return expm1_minus_x_half_x2(x) / FOUR_PI


def g_int(s):
    """Closed-form antiderivative of ftilde: integral_0^s ftilde."""
    x = FOUR_PI * np.asarray(s, dtype=np.float64)
    _guard(x)
    return expm1_minus_x_half_x2(x) / FOUR_PI


def G(z):
    s = np.abs(np.asarray(z)) ** 2
    return f_tilde(s) * s


def G2(z):
    z = np.asarray(z, dtype=np.complex128)
    x = FOUR_PI * np.abs(z) ** 2
    _guard(x)
    return expm1_minus_x_half_x2(x) * z


def chi(r):
    """Radial cutoff: 1 for r <= 1/2, 0 for r >= 1, quintic smoothstep
    in r^2 in between (vanishing first and second derivatives at the
    ends, so the cutoff is C^2 and reproducible bit-for-bit)."""
    r = np.asarray(r, dtype=np.float64)
    tau = np.clip((r * r - 0.25) / 0.75, 0.0, 1.0)
    step = tau**3 * (10 - 15 * tau + 6 * tau * tau)
    return 1.0 - step


def G1(z, r):
    """Exterior/quintic splitting of f: (1-chi) f(z) + 8 pi^2 chi |z|^4 z."""
    z = np.asarray(z, dtype=np.complex128)
    c = chi(r)
    return (1 - c) * f(z) + 8 * np.pi**2 * c * np.abs(z) ** 4 * z


def eval_pointwise(kind, z, x=None):
    """Scalar dispatch over the nonlinearity family.

    ``x`` is the spatial radius, needed only for kind "G1".
    """
    if kind == "f":
        return complex(f(z))
    if kind == "F":
        return float(F(z))
    if kind == "f_tilde":
        return float(f_tilde(np.abs(z) ** 2))
    if kind == "g_int":
        return float(g_int(np.real(z)))
    if kind == "G":
        return float(G(z))
    if kind == "G2":
        return complex(G2(z))
    if kind == "G1":
        if x is None:
            raise ValueError("kind G1 needs the spatial position radius")
        return complex(G1(z, np.hypot(*x) if np.ndim(x) else x))
    raise ValueError(f"unknown nonlinearity kind {kind!r}")


def apply_field(kind, u):
    """Pointwise application of a family member to a grid field."""
    if kind == "G1":
        vals = G1(u.values, u.grid.radius())
    elif kind in ("f", "G2"):
        vals = {"f": f, "G2": G2}[kind](u.values)
    elif kind in ("F", "G"):
        return {"F": F, "G": G}[kind](u.values)
    elif kind == "f_tilde":
        return f_tilde(np.abs(u.values) ** 2)
    elif kind == "g_int":
        return g_int(np.abs(u.values) ** 2)
    else:
        raise ValueError(f"unknown nonlinearity kind {kind!r}")
    return Field2D(u.grid, vals)


def hamiltonian(u):
    """H(u) = integral |grad u|^2 + F(u); both terms nonnegative."""
    ux, uy = gradient(u)
    kinetic = integrate(u.grid, np.abs(ux) ** 2 + np.abs(uy) ** 2)
    density = F(u.values)
    return kinetic + integrate(u.grid, density)
