"""The acceptance battery: ten end-to-end checks, one pass/fail each.

Heavy runs (the small-Gaussian preset and its dt-halved twin) are
computed once and shared across checks.  ``fast=True`` shrinks grids
and horizons for smoke-testing the plumbing; the stated tolerances are
only claimed at the full resolutions.
"""

from functools import cached_property

import numpy as np

from .evolution import SimConfig, evolve, local_G_budget
from .grid import Field2D, GridSpec, boundary_mass_fraction, free_propagate, lp_norm
from .inequalities import (
    band_limited_bank,
    check_1d_reduced,
    check_moser_trudinger,
    moser_sharpness,
    moser_w,
    normalize,
    _grad,
)
from .orlicz import OrliczSpec, luxemburg_norm
from .profiles import (
    clipped_profiles,
    lions_profile,
    moser_profile_field,
    profile_orlicz_limit,
    ScaledProfileField,
)
from .rearrange import rearrangement_invariants
from .scattering import scattering_test, st_deviation

SQRT_4PI = np.sqrt(4 * np.pi)
# Gaussian c e^{-|x|^2} has ||u||_{H1} = c sqrt(3 pi / 2)
H1_UNIT = np.sqrt(3 * np.pi / 2)


def gaussian(grid, c, w=1.0):
    return Field2D.from_function(
        grid, lambda x, y: c * np.exp(-(x**2 + y**2) / w**2)
    )


class Lab:
    """Shared runs and banks for the acceptance checks."""

    def __init__(self, fast=False):
        self.fast = fast
        self.n = 128 if fast else 512
        self.t_end = 2.5 if fast else 20.0
        self.l = 40.0
        self.dt = 1e-3
        self.amp = 0.1 / H1_UNIT  # ||u0||_{H1} = 0.1

    def _preset(self, dt, series_every, t_end=None):
        return SimConfig(
            grid=GridSpec(self.n, self.l),
            dt=dt,
            t_end=t_end or self.t_end,
            virial_r=(2.0, 4.0),
            output_every=int(round(0.5 / dt)),
            series_every=series_every,
            boundary_threshold=1.0,  # linear tails wrap long before T
        )

    @cached_property
    def main_run(self):
        """Small-Gaussian preset; keeps snapshots for the scattering
        checks."""
        cfg = self._preset(self.dt, series_every=20)
        u0 = gaussian(cfg.grid, self.amp)
        snapshots = []
        series = evolve(
            u0, cfg, snapshot_sink=lambda i, t, u: snapshots.append((t, u))
        )
        return u0, cfg, series, snapshots

    @cached_property
    def halved_run(self):
        cfg = self._preset(self.dt / 2, series_every=200)
        u0 = gaussian(cfg.grid, self.amp)
        return evolve(u0, cfg)


def _drift(values):
    v = np.asarray(values)
    return float(np.max(np.abs(v - v[0])) / np.abs(v[0]))


# -- the ten criteria -----------------------------------------------------

def _windowed_drift(series, t_max):
    t = np.asarray(series.columns["t"])
    h = np.asarray(series.columns["hamiltonian"])
    return _drift(h[t <= t_max + 1e-9])


def criterion_conservation(lab):
    _, _, series, _ = lab.main_run
    mass_drift = _drift(series.columns["mass"])
    h_drift = _drift(series.columns["hamiltonian"])
    # convergence order is judged on the initial window: over the full
    # horizon the halved run's truncation drift (~2e-11) sinks toward
    # the roundoff accumulation floor, which would contaminate the pure
    # dt^2 ratio without saying anything about the integrator
    window = lab.t_end / 8
    factor = _windowed_drift(series, window) / _windowed_drift(
        lab.halved_run, window
    )
    ok = mass_drift < 1e-10 and h_drift < 1e-6 and 3.2 <= factor <= 4.8
    return ok, (
        f"mass drift {mass_drift:.2e}, H drift {h_drift:.2e}, "
        f"dt-halving factor {factor:.2f} over t <= {window:g}"
    )


def moser_l2_sq_reference(alpha):
    """Closed-form ||f_alpha||_{L^2}^2: plateau disk plus the ramp
    integral (1/(4 alpha)) (1 - e^{-2 alpha}(1 + 2 alpha + 2 alpha^2))."""
    e = np.exp(-2 * alpha)
    return (alpha / 2) * e + (1 - e * (1 + 2 * alpha + 2 * alpha**2)) / (4 * alpha)


def criterion_moser_limits(lab):
    alphas = (4.0, 8.0, 16.0)
    limit = 1 / SQRT_4PI
    grads, l2_errs, lux_l, lux_lt = [], [], [], []
    for a in alphas:
        u = moser_profile_field(a)
        grads.append(abs(np.sqrt(u.grad_l2_sq()) - 1))
        l2_errs.append(
            abs(u.lp_pow(2) - moser_l2_sq_reference(a)) / moser_l2_sq_reference(a)
        )
        lux_l.append(luxemburg_norm(u, OrliczSpec("L")))
        lux_lt.append(luxemburg_norm(u, OrliczSpec("Ltilde")))
    monotone = all(np.diff(lux_l) < 0) and all(np.diff(lux_lt) < 0)
    near = (
        abs(lux_l[-1] - limit) / limit < 0.05
        and abs(lux_lt[-1] - limit) / limit < 0.05
    )
    ok = max(grads) < 1e-3 and max(l2_errs) < 0.05 and monotone and near
    return ok, (
        f"grad dev {max(grads):.1e}, L2^2 err {max(l2_errs):.1e}, "
        f"L norms {[f'{v:.4f}' for v in lux_l]}, "
        f"Ltilde norms {[f'{v:.4f}' for v in lux_lt]} vs {limit:.5f}"
    )


def criterion_profile_formula(lab):
    limit = 1 / SQRT_4PI
    lions = lions_profile()
    psi1, _ = clipped_profiles(0.25)
    exact_full = profile_orlicz_limit(lions)
    exact_clip = profile_orlicz_limit(psi1)
    ok_exact = exact_full == limit and exact_clip == np.sqrt(0.75) / SQRT_4PI
    spec = OrliczSpec("L")
    meas_full = luxemburg_norm(ScaledProfileField(lions, 16.0), spec)
    meas_clip = luxemburg_norm(ScaledProfileField(psi1, 16.0), spec)
    e1 = abs(meas_full - exact_full) / exact_full
    e2 = abs(meas_clip - exact_clip) / exact_clip
    ok = ok_exact and e1 < 0.07 and e2 < 0.07
    return ok, (
        f"exact formulas {'match' if ok_exact else 'MISMATCH'}, "
        f"measured errors {e1:.3f}, {e2:.3f} at alpha=16"
    )


def _rearrange_bank(grid, count):
    members = band_limited_bank(grid, seed=7, count=count)
    return [m.field for m in members]


def _polya_szego_slack(grid, count=10):
    worst = 0.0
    for u in _rearrange_bank(grid, count):
        inv = rearrangement_invariants(u, p_list=(2,))
        worst = max(worst, inv["grad_ratio"] - 1)
    return max(0.0, worst)


def criterion_rearrangement(lab):
    n = 64 if lab.fast else 256
    grid = GridSpec(n, 40.0)
    count = 10 if lab.fast else 100
    lp_dev, orl_dev, grad_max = 0.0, 0.0, 0.0
    for u in _rearrange_bank(grid, count):
        inv = rearrangement_invariants(u)
        lp_dev = max(lp_dev, max(inv["lp"].values()))
        orl_dev = max(orl_dev, inv["orlicz"])
        grad_max = max(grad_max, inv["grad_ratio"])
    coarse = _polya_szego_slack(GridSpec(2 * n, 40.0))
    fine = _polya_szego_slack(GridSpec(4 * n, 40.0))
    ok = (
        lp_dev < 1e-12
        and orl_dev < 1e-5
        and grad_max <= 1.02
        and fine <= coarse + 1e-12
    )
    return ok, (
        f"Lp dev {lp_dev:.1e}, Orlicz dev {orl_dev:.1e}, grad ratio "
        f"{grad_max:.4f}, slack {coarse:.2e} -> {fine:.2e} under refinement"
    )


def criterion_virial(lab):
    cfg = SimConfig(
        grid=GridSpec(max(lab.n, 256), lab.l),
        dt=lab.dt,
        t_end=0.2,
        virial_r=(2.0, 4.0),
        series_every=1,
        boundary_threshold=1.0,
    )
    series = evolve(gaussian(cfg.grid, lab.amp), cfg)
    t = series.columns["t"]
    worst_dv, worst_d2v = 0.0, 0.0
    for r in (2.0, 4.0):
        v, dv, d2v = series.virial[r]
        sl = slice(2, -2)
        fdv = np.gradient(v, t)
        fd2 = np.gradient(dv, t)
        worst_dv = max(
            worst_dv, np.max(np.abs(fdv[sl] - dv[sl])) / np.max(np.abs(dv))
        )
        worst_d2v = max(
            worst_d2v, np.max(np.abs(fd2[sl] - d2v[sl])) / np.max(np.abs(d2v))
        )
    ok = worst_dv < 1e-3 and worst_d2v < 1e-2
    return ok, f"dV rel err {worst_dv:.2e}, d2V rel err {worst_d2v:.2e}"


def criterion_dispersive(lab):
    n = 256 if lab.fast else 1024
    grid = GridSpec(n, 80.0)
    u0 = gaussian(grid, 1.0)
    l1 = grid.h**2 * float(np.sum(np.abs(u0.values)))
    times = np.linspace(1.0, 2.5, 16)
    sup_ratio, l4s = [], []
    for t in times:
        v = free_propagate(u0, t)
        if boundary_mass_fraction(v) > 1e-6:
            break
        sup_ratio.append(float(np.max(np.abs(v.values))) * t / l1)
        l4s.append(lp_norm(v, 4))
    times = times[: len(l4s)]
    slope = np.polyfit(np.log(times), np.log(l4s), 1)[0]
    bound = (1 / (4 * np.pi)) * 1.05
    ok = max(sup_ratio) <= bound and abs(slope + 0.5) < 0.05
    return ok, (
        f"sup |v| t / ||u0||_L1 = {max(sup_ratio):.5f} vs {bound:.5f}, "
        f"L4 decay slope {slope:.3f}"
    )


def criterion_mt_dichotomy(lab):
    n = 64 if lab.fast else 256
    alpha = 0.9 * 4 * np.pi
    maxima = []
    for nn in (n, 2 * n):
        grid = GridSpec(nn, 40.0)
        bank = [
            normalize(m, "grad")
            for m in band_limited_bank(grid, seed=11, count=8)
            if _grad(m.field) > 0
        ]
        maxima.append(check_moser_trudinger(bank, alpha, 4).max_ratio)
    stable = abs(maxima[1] - maxima[0]) / maxima[0] < 0.05
    sharp = moser_sharpness()
    w_bank = [(f"a{a}",) + moser_w(a) for a in (4.0, 8.0, 16.0)]
    low = [e["ratio"] for e in check_1d_reduced(w_bank, 0.9, 2).entries]
    crit = [e["ratio"] for e in check_1d_reduced(w_bank, 1.0, 2).entries]
    ok = (
        stable
        and sharp["growth"] > 10
        and max(low) / min(low) < 3
        and crit[-1] / crit[0] > 10
    )
    return ok, (
        f"C(0.9*4pi, 4) = {maxima[1]:.3f} ({abs(maxima[1]-maxima[0])/maxima[0]:.1%} "
        f"under refinement), 4pi sharpness growth {sharp['growth']:.0f}x, "
        f"1-D growth {crit[-1]/crit[0]:.1f}x at beta=1 vs "
        f"{max(low)/min(low):.2f}x spread at beta=0.9"
    )


def criterion_scattering(lab):
    _, _, _, snapshots = lab.main_run
    t_lo = lab.t_end / 1.5
    window = [(t, u) for t, u in snapshots if t >= t_lo - 1e-9]
    if len(window) < 3:
        window = snapshots[-3:]
    scat = scattering_test(window)
    cauchy = scat["max_pairwise_h1"]

    n = 64 if lab.fast else 256
    grid = GridSpec(n, 40.0)
    T = 2.0 if lab.fast else 5.0
    devs = []
    for k in range(4):
        amp = (0.4 / H1_UNIT) / 2**k
        cfg = SimConfig(
            grid=grid,
            dt=lab.dt,
            t_end=T,
            virial_r=(),
            output_every=int(round(0.25 / lab.dt)),
            series_every=int(round(0.25 / lab.dt)),
            boundary_threshold=1.0,
        )
        snaps = []
        evolve(
            gaussian(grid, amp), cfg,
            snapshot_sink=lambda i, t, u: snaps.append((t, u)),
        )
        devs.append(st_deviation(snaps, (0.0, T)))
    factors = [devs[i] / devs[i + 1] for i in range(3)]
    ok = cauchy < 1e-3 and all(f >= 2**1.5 for f in factors)
    return ok, (
        f"Cauchy H1 distance {cauchy:.2e} over [{t_lo:.1f}, {lab.t_end}], "
        f"ST-deviation halving factors {[f'{f:.1f}' for f in factors]} "
        f"(floor {2**1.5:.2f})"
    )


def criterion_ratio_matrix(lab):
    from .scattering import apriori_ratio, bootstrap_ratios, space_time_norms
    from .grid import grad_l2, mass

    n = 64 if lab.fast else 128
    grid = GridSpec(n, 40.0)
    T = 1.0 if lab.fast else 2.0
    # the (secterm) bound is 1/2-homogeneity short of the quintic lhs,
    # so its ratio drifts like amp^{1/2}; a 3.5x amplitude window keeps
    # that intrinsic drift inside the 2x stability budget
    amps = (0.08, 0.11, 0.15, 0.21, 0.28)
    seeds = (1, 2, 3, 4)
    # amplitude stability is judged per seed: different seeds are
    # different shapes and carry different (finite) constants
    spreads = {"apriori": 0.0, "r1": 0.0, "r2": 0.0}
    for seed in seeds:
        base = band_limited_bank(grid, seed=seed, count=1)[0]
        unit = normalize(base, "h1").field
        per_seed = {k: [] for k in spreads}
        for amp in amps:
            cfg = SimConfig(
                grid=grid, dt=2e-3, t_end=T, virial_r=(),
                output_every=50, series_every=50, boundary_threshold=1.0,
            )
            snaps = []
            evolve(amp * unit, cfg,
                   snapshot_sink=lambda i, t, u: snaps.append((t, u)))
            norms = space_time_norms(snaps, (0.0, T))
            mass_sup = max(mass(u) for _, u in snaps)
            grad_sup = max(grad_l2(u) ** 2 for _, u in snaps)
            per_seed["apriori"].append(apriori_ratio(norms, mass_sup, grad_sup))
            boot = bootstrap_ratios(snaps, (0.0, T))
            per_seed["r1"].append(boot["r1"])
            per_seed["r2"].append(boot["r2"])
        for k, vals in per_seed.items():
            spreads[k] = max(spreads[k], max(vals) / min(vals))
    ok = all(s < 2 for s in spreads.values())
    detail = ", ".join(f"{k} spread {s:.2f}x" for k, s in spreads.items())
    return ok, detail + f" over {len(amps)} amplitudes x {len(seeds)} seeds"


def criterion_local_g(lab):
    _, _, series, _ = lab.main_run
    t = series.columns["t"]
    half = _truncated(series, t <= lab.t_end / 2 + 1e-9)
    _, ratio_half = local_G_budget(half)
    _, ratio_full = local_G_budget(series)
    change = ratio_full / ratio_half
    ok = 0.5 < change < 2.0
    return ok, (
        f"max window ratio {ratio_half:.3e} (T={lab.t_end/2}) vs "
        f"{ratio_full:.3e} (T={lab.t_end}), change {change:.3f}x"
    )


def _truncated(series, mask):
    from .evolution import DiagnosticsSeries

    return DiagnosticsSeries(
        columns={k: np.asarray(v)[mask] for k, v in series.columns.items()},
        virial={},
        criticality=series.criticality,
    )


CRITERIA = (
    ("conservation", criterion_conservation),
    ("moser_limits", criterion_moser_limits),
    ("profile_formula", criterion_profile_formula),
    ("rearrangement", criterion_rearrangement),
    ("virial_cross_check", criterion_virial),
    ("dispersive_constant", criterion_dispersive),
    ("moser_trudinger_dichotomy", criterion_mt_dichotomy),
    ("small_data_scattering", criterion_scattering),
    ("ratio_matrix", criterion_ratio_matrix),
    ("local_g_budget", criterion_local_g),
)


def run_all(fast=False, lab=None):
    lab = lab or Lab(fast=fast)
    results = []
    for name, fn in CRITERIA:
        passed, detail = fn(lab)
        results.append((name, passed, detail))
    return results
