"""Vector-graphics rendering of performance curves and their fitted scaling laws."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .scaling import ScalingFit, evaluate_law  # noqa: E402


def _asymptote(fit: ScalingFit):
    vals = fit.param_dict()
    for key in ("a_inf", "r_inf"):
        if key in vals:
            return float(vals[key])
    return 0.0  # pure decay laws approach zero


def _linearized_points(fit: ScalingFit, t: np.ndarray, y: np.ndarray):
    """Transform (T, value) to the coordinates where the fitted law is a straight line."""
    vals = fit.param_dict()
    law = fit.law
    if law in ("acc_stretched", "acc_power"):
        gap = vals["a_inf"] - y
        ok = gap > 0
        xs = t[ok] ** vals["p"] if law == "acc_stretched" else np.log(t[ok])
        return xs, np.log(gap[ok]), ("T^p" if law == "acc_stretched" else "ln T"), "ln(A_inf - A)"
    if law == "rmse_expfloor":
        gap = y - vals["r_inf"]
        ok = gap > 0
        return t[ok] ** vals["p"], np.log(gap[ok]), "T^p", "ln(r - r_inf)"
    ok = y > 0
    xs = np.log(t[ok]) if law == "rmse_power" else np.log(np.log(t[ok]))
    return xs, np.log(y[ok]), ("ln T" if law == "rmse_power" else "ln ln T"), "ln r"


def plot_scaling_curve(path, label: str, metric: str, data, fit: ScalingFit,
                       description: str = "") -> str:
    """Write an SVG with the measured curve, the fit, and its linearized view.

    Left panel: means with error bars on linear axes, fitted curve, dashed
    asymptote. Right panel: the same data in the law's linearizing coordinates.
    """
    t = np.array([d.t for d in data], dtype=float)
    y = np.array([d.value for d in data], dtype=float)
    sig = np.array([d.sigma for d in data], dtype=float)

    fig, (ax_lin, ax_log) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax_lin.errorbar(t, y, yerr=sig, fmt="o", capsize=3, label="measured")
    t_fine = np.linspace(max(t.min(), 2.0 if fit.law == "rmse_logpower" else 1.0),
                         t.max(), 240)
    ax_lin.plot(t_fine, evaluate_law(fit.law, fit.params, t_fine), "-", label=fit.law)
    ax_lin.axhline(_asymptote(fit), linestyle="--", linewidth=1.0, color="gray")
    ax_lin.set_xlabel("T")
    ax_lin.set_ylabel(metric)
    ax_lin.set_title(label)
    ax_lin.legend(fontsize=8)

    xs, zs, xname, zname = _linearized_points(fit, t, y)
    ax_log.plot(xs, zs, "o")
    if xs.size >= 2:
        grid = np.linspace(xs.min(), xs.max(), 100)
        vals = fit.param_dict()
        slope = vals.get("k", vals.get("p"))
        ax_log.plot(grid, np.log(vals["c"]) - slope * grid, "-")
    ax_log.set_xlabel(xname)
    ax_log.set_ylabel(zname)
    ax_log.set_title("linearized")

    fig.tight_layout()
    # no date and a fixed hashsalt keep reruns byte-identical; provenance goes
    # in the Description metadata instead
    with matplotlib.rc_context({"svg.hashsalt": "bhqrc"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})
    plt.close(fig)
    return str(path)


def render_all(out_dir, fits: dict, description: str = "") -> list:
    """One SVG per fitted (task, method, metric) curve; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for (task, method, metric), (fit, data) in sorted(fits.items()):
        fname = f"scaling_{task}_{method}.svg"
        paths.append(plot_scaling_curve(os.path.join(out_dir, fname),
                                        f"{task} / {method}", metric, data, fit,
                                        description=description))
    return paths
