"""Downstream figure renderer for emitted run artifacts.

The main CLI writes only CSV and JSON; this separate entry point reads
a run directory and renders summary figures next to those files.
Requires matplotlib (the ``plots`` extra).
"""

import argparse
import json
import os
import sys

import numpy as np


def _load_series(rundir):
    from .rundir import read_series

    return read_series(os.path.join(rundir, "series.csv"))


def render_series(rundir, fmt="png"):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols = _load_series(rundir)
    t = cols["t"]
    written = []

    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for key, ax in (("mass", axes[0]), ("hamiltonian", axes[1])):
        ref = cols[key][0]
        drift = np.abs(cols[key] - ref) / np.abs(ref) if ref else cols[key]
        ax.semilogy(t, np.maximum(drift, 1e-18))
        ax.set_ylabel(f"{key} rel drift")
    axes[1].set_xlabel("t")
    path = os.path.join(rundir, f"conservation.{fmt}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    for key in ("grad_l2", "l4", "l8", "linf", "orlicz_tilde"):
        ax.semilogy(t, np.maximum(cols[key], 1e-18), label=key)
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    path = os.path.join(rundir, f"norms.{fmt}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, cols["v_r"], label="V_R")
    ax.plot(t, cols["dv_r"], label="dV_R")
    ax.plot(t, cols["d2v_r"], label="d2V_R")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    path = os.path.join(rundir, f"virial.{fmt}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def render_report(rundir, fmt="png"):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = os.path.join(rundir, "report.json")
    if not os.path.exists(path):
        return []
    with open(path) as fh:
        report = json.load(fh)
    norms = report["norms"]
    fig, ax = plt.subplots(figsize=(7, 4))
    keys = list(norms)
    ax.bar(range(len(keys)), [norms[k] for k in keys])
    ax.set_xticks(range(len(keys)), keys, rotation=30, ha="right", fontsize=8)
    ax.set_title("space-time norms")
    out = os.path.join(rundir, f"report.{fmt}")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return [out]


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="xnls-plot", description="Render figures from a run directory"
    )
    parser.add_argument("rundir")
    parser.add_argument("--format", default="png", choices=("png", "pdf", "svg"))
    args = parser.parse_args(argv)
    try:
        written = render_series(args.rundir, args.format)
        written += render_report(args.rundir, args.format)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
