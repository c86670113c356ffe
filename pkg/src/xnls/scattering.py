"""Space-time norms, dispersive ratios, and the scattering test.

Everything here is post-processing over a stored snapshot set
{(t_i, u(t_i))}: time integrals are trapezoidal on the snapshot
cadence, sup-in-time is a max over samples.  The cadence is a config
knob, so the discretization error of each norm is surfaced by the
cadence-halving comparison in the report rather than assumed small.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import XnlsError
from .grid import (
    Field2D,
    free_propagate,
    grad_l2,
    gradient,
    integrate,
    lp_norm,
    mass,
    w14_norm,
)
from .nonlinearity import f
from .orlicz import OrliczSpec, luxemburg_norm


@dataclass(frozen=True)
class AdmissiblePair:
    """Strichartz exponent pair with 1/q + 1/r = 1/2; q may be inf."""

    q: float
    r: float

    def __post_init__(self):
        if not 2 <= self.r or math.isinf(self.r):
            raise XnlsError(f"admissible pairs need 2 <= r < inf, got r={self.r}")
        lhs = (0.0 if math.isinf(self.q) else 1.0 / self.q) + 1.0 / self.r
        if abs(lhs - 0.5) > 1e-12:
            raise XnlsError(f"pair ({self.q}, {self.r}) is not admissible")


@dataclass(frozen=True)
class SpaceTimeNorms:
    st: float
    st_star_of_f: float
    l4w14: float
    l4l8: float
    linf_l4: float
    linf_ltilde: float


def _select(snapshots, interval):
    t0, t1 = interval
    chosen = [(t, u) for t, u in snapshots if t0 - 1e-12 <= t <= t1 + 1e-12]
    if len(chosen) < 4:
        raise XnlsError(
            f"interval [{t0}, {t1}] holds {len(chosen)} snapshots; need >= 4"
        )
    return chosen


def _l4_time(times, fourth_powers):
    return float(np.trapezoid(fourth_powers, times)) ** 0.25


def _grad_field(u):
    ux, uy = gradient(u)
    return np.sqrt(np.abs(ux) ** 2 + np.abs(uy) ** 2)


def space_time_norms(snapshots, interval, orlicz=OrliczSpec("Ltilde")):
    """All working space-time norms from one pass over the snapshots.

    st = sup over derivative order j in {0,1} of (L4L4 + LinfL2);
    st_star_of_f is evaluated on f(u) as the smaller of its L^{4/3}
    space-time norm and its L^1-in-time L^2 norm (each alone bounds
    the dual-norm infimum from above).
    """
    chosen = _select(snapshots, interval)
    times = np.array([t for t, _ in chosen])

    l4_4 = np.empty(len(chosen))
    g4_4 = np.empty(len(chosen))
    l2 = np.empty(len(chosen))
    g2 = np.empty(len(chosen))
    w14_4 = np.empty(len(chosen))
    l8_4 = np.empty(len(chosen))
    l4 = np.empty(len(chosen))
    ltilde = np.empty(len(chosen))
    f43 = np.empty(len(chosen))
    f2 = np.empty(len(chosen))

    for i, (_, u) in enumerate(chosen):
        gmag = _grad_field(u)
        absu = np.abs(u.values)
        l4[i] = lp_norm(u, 4)
        l4_4[i] = l4[i] ** 4
        g4_4[i] = integrate(u.grid, gmag**4)
        l2[i] = np.sqrt(mass(u))
        g2[i] = grad_l2(u)
        w14_4[i] = (l4[i] + g4_4[i] ** 0.25) ** 4
        l8_4[i] = lp_norm(u, 8) ** 4
        ltilde[i] = luxemburg_norm(u, orlicz)
        fu = np.abs(f(u.values))
        f43[i] = integrate(u.grid, fu ** (4 / 3))
        f2[i] = np.sqrt(integrate(u.grid, fu**2))

    st0 = _l4_time(times, l4_4) + float(np.max(l2))
    st1 = _l4_time(times, g4_4) + float(np.max(g2))
    f_l43 = float(np.trapezoid(f43, times)) ** (3 / 4)
    f_l1l2 = float(np.trapezoid(f2, times))
    return SpaceTimeNorms(
        st=max(st0, st1),
        st_star_of_f=min(f_l43, f_l1l2),
        l4w14=_l4_time(times, w14_4),
        l4l8=_l4_time(times, l8_4),
        linf_l4=float(np.max(l4)),
        linf_ltilde=float(np.max(ltilde)),
    )


def apriori_ratio(norms, mass_sup, grad_sup):
    """l4l8 over the interpolation bound ||u||^{3/4} ||grad u||^{1/4}.

    ``mass_sup`` and ``grad_sup`` are the squared sup-in-time L^2
    quantities (mass and gradient energy), hence the 3/8 and 1/8.
    """
    denom = mass_sup ** (3 / 8) * grad_sup ** (1 / 8)
    if denom == 0:
        raise XnlsError("a priori ratio undefined for the zero solution")
    return norms.l4l8 / denom


def strichartz_ratio(u0, pair, T, samples=65):
    """||e^{it Lap} u0||_{L^q([0,T], L^r)} / ||u0||_{L^2}."""
    m = mass(u0)
    if m == 0:
        raise XnlsError("Strichartz ratio undefined for zero data")
    times = np.linspace(0.0, T, samples)
    lr = np.array([lp_norm(free_propagate(u0, t), pair.r) for t in times])
    if math.isinf(pair.q):
        num = float(np.max(lr))
    else:
        num = float(np.trapezoid(lr**pair.q, times)) ** (1.0 / pair.q)
    return num / np.sqrt(m)


def _h1_distance(a, b):
    d = a - b
    return float(np.sqrt(mass(d) + grad_l2(d) ** 2))


def scattering_test(snapshots):
    """Cauchy-in-H^1 test of v(t) = e^{-it Lap} u(t).

    Reports the max pairwise H^1 distance over the last third of the
    snapshot times and the final transported state as the scattering
    candidate.
    """
    if len(snapshots) < 3:
        raise XnlsError("scattering test needs at least 3 snapshots")
    transported = [(t, free_propagate(u, -t)) for t, u in snapshots]
    tail = transported[-max(2, len(transported) // 3):]
    dmax = 0.0
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            dmax = max(dmax, _h1_distance(tail[i][1], tail[j][1]))
    return {
        "window": (tail[0][0], tail[-1][0]),
        "max_pairwise_h1": dmax,
        "v_plus": tail[-1][1],
    }


def st_deviation(snapshots, interval):
    """||u - e^{it Lap} u(t_0)||_{ST} over the interval.

    The free reference is launched from the earliest snapshot, so the
    deviation isolates the nonlinear interaction.
    """
    chosen = _select(snapshots, interval)
    t0, u0 = chosen[0]
    diff = [(t, u - free_propagate(u0, t - t0)) for t, u in chosen]
    return space_time_norms(diff, interval).st


def bootstrap_ratios(snapshots, interval):
    """Measured-over-bound ratios for the two nonlinear estimates.

    r1: ||f(u)||_{L^{4/3}L^{4/3}} vs ||u||^2_{LinfL4} ||u||^3_{L4W14};
    r2: ||f(u)||_{ST*} vs ||u||^3_{L4W14} ||u||^{3/2}_{LinfL4}.
    The zero solution has no ratio; reported as skipped.
    """
    chosen = _select(snapshots, interval)
    if all(np.max(np.abs(u.values)) == 0 for _, u in chosen):
        return {"r1": None, "r2": None, "skipped": "zero solution"}
    times = np.array([t for t, _ in chosen])
    f43 = np.empty(len(chosen))
    for i, (_, u) in enumerate(chosen):
        f43[i] = integrate(u.grid, np.abs(f(u.values)) ** (4 / 3))
    lhs1 = float(np.trapezoid(f43, times)) ** (3 / 4)
    norms = space_time_norms(snapshots, interval)
    rhs1 = norms.linf_l4**2 * norms.l4w14**3
    rhs2 = norms.l4w14**3 * norms.linf_l4 ** (3 / 2)
    return {
        "r1": lhs1 / rhs1 if rhs1 else None,
        "r2": norms.st_star_of_f / rhs2 if rhs2 else None,
        "skipped": None,
    }


def build_report(snapshots, interval, run_id="", thresholds=None):
    """Assemble the per-run diagnostic report (report.json payload)."""
    thresholds = thresholds or {}
    norms = space_time_norms(snapshots, interval)
    mass_sup = max(mass(u) for _, u in snapshots)
    grad_sup = max(grad_l2(u) ** 2 for _, u in snapshots)
    scat = scattering_test(snapshots)
    boot = bootstrap_ratios(snapshots, interval)
    cauchy_tol = thresholds.get("cauchy_h1", 1e-3)
    report = {
        "run_id": run_id,
        "interval": list(interval),
        "norms": asdict(norms),
        "apriori_ratio": apriori_ratio(norms, mass_sup, grad_sup),
        "bootstrap": {k: boot[k] for k in ("r1", "r2", "skipped")},
        "scattering": {
            "window": list(scat["window"]),
            "max_pairwise_h1": scat["max_pairwise_h1"],
        },
        "pass": {
            "cauchy_h1": scat["max_pairwise_h1"] < cauchy_tol,
        },
    }
    return report, scat["v_plus"]
