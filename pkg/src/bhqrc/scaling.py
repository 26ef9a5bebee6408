"""Scaling-law fits of performance versus sequence length T.

Five candidate forms (stretched-exponential and power-law accuracy growth,
power, log-power and exponential-floor RMSE decay) are fitted by weighted
nonlinear least squares, cross-checked by linearized grid scans, and selected
by reduced chi-squared closest to unity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LAW_PARAMS = {
    "acc_stretched": ("a_inf", "c", "k", "p"),
    "acc_power": ("a_inf", "c", "p"),
    "rmse_power": ("c", "p"),
    "rmse_logpower": ("c", "p"),
    "rmse_expfloor": ("r_inf", "c", "k", "p"),
}

ACCURACY_LAWS = ("acc_stretched", "acc_power")
RMSE_LAWS = ("rmse_power", "rmse_logpower", "rmse_expfloor")


@dataclass
class ScalingDatum:
    t: int
    value: float
    sigma: float

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("T must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass
class ScalingFit:
    law: str
    params: np.ndarray
    param_sigmas: np.ndarray
    chi2_red: float
    dof: int
    converged: bool = True
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def param_dict(self) -> dict:
        return dict(zip(LAW_PARAMS[self.law], self.params))

    def sigma_dict(self) -> dict:
        return dict(zip(LAW_PARAMS[self.law], self.param_sigmas))


# ---- law evaluation and derivatives ---- #

def _check_t(law: str, t: np.ndarray) -> None:
    if np.any(t < 1):
        raise ValueError("T must be >= 1")
    if law == "rmse_logpower" and np.any(t <= 1):
        raise ValueError("log-power form is singular at T = 1")


def evaluate_law(law: str, params, t):
    """Closed-form value of a candidate law at sequence length(s) t."""
    if law not in LAW_PARAMS:
        raise ValueError(f"unknown law {law!r}")
    params = np.asarray(params, dtype=float)
    if params.shape != (len(LAW_PARAMS[law]),):
        raise ValueError(f"{law} takes {len(LAW_PARAMS[law])} parameters")
    t = np.asarray(t, dtype=float)
    _check_t(law, t)
    if law == "acc_stretched":
        a, c, k, p = params
        return a - c * np.exp(-k * t ** p)
    if law == "acc_power":
        a, c, p = params
        return a - c * t ** -p
    if law == "rmse_power":
        c, p = params
        return c * t ** -p
    if law == "rmse_logpower":
        c, p = params
        return c * np.log(t) ** -p
    r, c, k, p = params
    return r + c * np.exp(-k * t ** p)


def _law_jacobian(law: str, params: np.ndarray, t: np.ndarray) -> np.ndarray:
    """d f / d theta, one column per parameter."""
    if law == "acc_stretched":
        a, c, k, p = params
        tp = t ** p
        e = np.exp(-k * tp)
        return np.column_stack([np.ones_like(t), -e, c * tp * e, c * k * tp * np.log(t) * e])
    if law == "acc_power":
        a, c, p = params
        tp = t ** -p
        return np.column_stack([np.ones_like(t), -tp, c * np.log(t) * tp])
    if law == "rmse_power":
        c, p = params
        tp = t ** -p
        return np.column_stack([tp, -c * np.log(t) * tp])
    if law == "rmse_logpower":
        c, p = params
        lt = np.log(t)
        ltp = lt ** -p
        return np.column_stack([ltp, -c * np.log(lt) * ltp])
    r, c, k, p = params
    tp = t ** p
    e = np.exp(-k * tp)
    return np.column_stack([np.ones_like(t), e, -c * tp * e, -c * k * tp * np.log(t) * e])


def _unpack(data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.array([d.t for d in data], dtype=float)
    y = np.array([d.value for d in data], dtype=float)
    sig = np.array([d.sigma for d in data], dtype=float)
    return t, y, sig


# ---- weighted nonlinear least squares ---- #

def wls_fit(data, law: str, init, bounds: dict | None = None) -> ScalingFit:
    """Damped Gauss-Newton minimization of chi^2 = sum[(y - f(T))/sigma]^2.

    Parameter covariance is chi2_red * (J^T J)^-1 with J the Jacobian of the
    normalized residuals at the optimum. A singular J^T J is reported through
    the degenerate flag (pseudoinverse covariance); bounds, if given, clamp
    named parameters after every step.
    """
    t, y, sig = _unpack(data)
    names = LAW_PARAMS[law]
    n_par = len(names)
    if t.size <= n_par:
        raise ValueError(f"need more than {n_par} points for {law}")
    theta = np.array(init, dtype=float)
    if theta.shape != (n_par,):
        raise ValueError(f"{law} takes {n_par} parameters")
    lo = np.full(n_par, -np.inf)
    hi = np.full(n_par, np.inf)
    for name, (b_lo, b_hi) in (bounds or {}).items():
        idx = names.index(name)
        lo[idx] = -np.inf if b_lo is None else b_lo
        hi[idx] = np.inf if b_hi is None else b_hi
    theta = np.clip(theta, lo, hi)

    def residuals(th):
        with np.errstate(all="ignore"):
            return (y - evaluate_law(law, th, t)) / sig

    r = residuals(theta)
    if not np.all(np.isfinite(r)):
        raise ValueError("initial point gives non-finite residuals")
    chi2 = float(r @ r)
    lam = 1e-3
    converged = False
    for _ in range(500):
        with np.errstate(all="ignore"):
            jac = -_law_jacobian(law, theta, t) / sig[:, None]
        if not np.all(np.isfinite(jac)):
            break
        jtj = jac.T @ jac
        grad = jac.T @ r
        stepped = False
        for _ in range(60):
            damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-30))
            delta = np.linalg.lstsq(damped, -grad, rcond=None)[0]
            th_new = np.clip(theta + delta, lo, hi)
            r_new = residuals(th_new)
            chi2_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if chi2_new <= chi2:
                stepped = True
                break
            lam = min(lam * 10.0, 1e12)
        if not stepped:
            converged = True  # damping exhausted: no descent direction left
            break
        drop = chi2 - chi2_new
        theta, r, chi2 = th_new, r_new, chi2_new
        lam = max(lam * 0.1, 1e-14)
        if drop <= 1e-10 * max(chi2, 1e-300):
            converged = True
            break

    dof = t.size - n_par
    chi2_red = chi2 / dof
    with np.errstate(all="ignore"):
        jac = -_law_jacobian(law, theta, t) / sig[:, None]
    jtj = jac.T @ jac
    sv = np.linalg.svd(jtj, compute_uv=False)
    degenerate = bool(sv[0] <= 0 or sv[-1] < 1e-12 * sv[0])
    cov = chi2_red * np.linalg.pinv(jtj, rcond=1e-12, hermitian=True)
    sigmas = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return ScalingFit(law, theta, sigmas, chi2_red, dof,
                      converged=converged, degenerate=degenerate)


# ---- linearized grid scans ---- #

_SCANNED = {
    "acc_stretched": ("a_inf", "p"),
    "acc_power": ("a_inf",),
    "rmse_power": (),
    "rmse_logpower": (),
    "rmse_expfloor": ("r_inf", "p"),
}


def _linearized_design(law: str, scanned: dict, t: np.ndarray, y: np.ndarray, sig: np.ndarray):
    """Transformed response z, design matrix, propagated uncertainties, or None if infeasible."""
    if law in ("acc_stretched", "acc_power"):
        gap = scanned["a_inf"] - y
        if np.any(gap <= 0):
            return None
        z = np.log(gap)
        zs = sig / gap
        x = t ** scanned["p"] if law == "acc_stretched" else np.log(t)
        design = np.column_stack([np.ones_like(t), -x])  # ln c, then k or p
        return z, design, zs
    if law == "rmse_expfloor":
        gap = y - scanned["r_inf"]
        if np.any(gap <= 0):
            return None
        z = np.log(gap)
        zs = sig / gap
        design = np.column_stack([np.ones_like(t), -(t ** scanned["p"])])
        return z, design, zs
    if np.any(y <= 0):
        return None
    z = np.log(y)
    zs = sig / y
    x = np.log(t) if law == "rmse_power" else np.log(np.log(t))
    design = np.column_stack([np.ones_like(t), -x])
    return z, design, zs


def _assemble_scan_fit(law, scanned, spacings, coeffs, coeff_sig, chi2_red, dof, boundary):
    values = {}
    sigmas = {}
    values["c"] = float(np.exp(coeffs[0]))
    sigmas["c"] = values["c"] * float(coeff_sig[0])
    slope_name = "k" if law in ("acc_stretched", "rmse_expfloor") else "p"
    values[slope_name] = float(coeffs[1])
    sigmas[slope_name] = float(coeff_sig[1])
    for name, val in scanned.items():
        values[name] = float(val)
        sigmas[name] = float(spacings[name])
    names = LAW_PARAMS[law]
    fit = ScalingFit(law,
                     np.array([values[n] for n in names]),
                     np.array([sigmas[n] for n in names]),
                     chi2_red, dof,
                     meta={"boundary": boundary, "method": "linearized_scan"})
    return fit


def linearized_scan_fit(data, law: str, grid: dict | None = None, n_nodes: int = 201) -> ScalingFit:
    """Grid scan over the nonlinear parameters with a weighted linear fit at each node.

    The response is log-transformed (uncertainties propagated to first order as
    sigma/(A_inf - A) or the analogues), the remaining parameters fall out of a
    weighted linear regression, and the node whose reduced chi-squared is
    closest to one wins. Scanned-parameter uncertainty equals the node spacing;
    a winning node on the grid edge sets meta['boundary'].
    """
    if law not in LAW_PARAMS:
        raise ValueError(f"unknown law {law!r}")
    t, y, sig = _unpack(data)
    _check_t(law, t)
    n_par = len(LAW_PARAMS[law])
    dof = t.size - n_par
    if dof < 1:
        raise ValueError(f"need more than {n_par} points for {law}")

    scan_names = _SCANNED[law]
    grid = dict(grid or {})
    axes = {}
    spacings = {}
    for name in scan_names:
        if name in grid:
            g_lo, g_hi = grid[name]
        elif name == "a_inf":
            top = float(np.max(y))
            g_lo, g_hi = top + 1e-3, max(1.1, top + 0.25)
        elif name == "r_inf":
            g_lo, g_hi = 0.0, max(float(np.min(y)) - 1e-3, 1e-6)
        else:  # p
            g_lo, g_hi = 0.05, 1.5
        axes[name] = np.linspace(g_lo, g_hi, n_nodes)
        spacings[name] = (g_hi - g_lo) / (n_nodes - 1)

    if scan_names:
        mesh = np.meshgrid(*[axes[n] for n in scan_names], indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        node_index = np.stack([m.ravel() for m in np.meshgrid(
            *[np.arange(n_nodes)] * len(scan_names), indexing="ij")], axis=-1)
    else:
        nodes = np.zeros((1, 0))
        node_index = np.zeros((1, 0), dtype=int)

    best = None
    best_score = np.inf
    for node, idx in zip(nodes, node_index):
        scanned = dict(zip(scan_names, node))
        lin = _linearized_design(law, scanned, t, y, sig)
        if lin is None:
            continue
        z, design, zs = lin
        dw = design / zs[:, None]
        zw = z / zs
        coeffs, _, rank, _ = np.linalg.lstsq(dw, zw, rcond=None)
        if rank < design.shape[1]:
            continue
        resid = zw - dw @ coeffs
        chi2_red = float(resid @ resid) / dof
        score = abs(chi2_red - 1.0)
        if score < best_score:
            cov = np.linalg.inv(dw.T @ dw)
            coeff_sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
            boundary = bool(np.any((idx == 0) | (idx == n_nodes - 1))) if scan_names else False
            best = _assemble_scan_fit(law, scanned, spacings, coeffs, coeff_sig,
                                      chi2_red, dof, boundary)
            best_score = score
    if best is None:
        raise ValueError("no feasible grid node (log arguments must stay positive)")
    return best


# ---- candidate selection ---- #

def _prefit_inits(law: str, t: np.ndarray, y: np.ndarray, sig: np.ndarray) -> list[np.ndarray]:
    """Multi-start initial vectors: asymptote and exponent grids, linearized (c, k) pre-fits."""
    inits = []
    top = float(np.max(y))
    bottom = float(np.min(y))

    def lin_coeffs(z, x, zs):
        dw = np.column_stack([np.ones_like(x), -x]) / zs[:, None]
        coeffs = np.linalg.lstsq(dw, z / zs, rcond=None)[0]
        return coeffs  # (ln c, slope)

    if law in ("acc_stretched", "acc_power"):
        for a0 in (top + 0.01, 1.0):
            gap = np.maximum(a0 - y, 1e-8)
            z, zs = np.log(gap), sig / gap
            if law == "acc_power":
                lnc, p0 = lin_coeffs(z, np.log(t), zs)
                inits.append(np.array([a0, np.exp(lnc), max(p0, 0.05)]))
                for p_alt in (0.2, 0.5, 1.0):
                    inits.append(np.array([a0, np.exp(lnc), p_alt]))
            else:
                for p0 in (0.2, 0.5, 1.0):
                    lnc, k0 = lin_coeffs(z, t ** p0, zs)
                    inits.append(np.array([a0, np.exp(lnc), max(k0, 1e-3), p0]))
    elif law == "rmse_expfloor":
        for r0 in (0.0, 0.5 * bottom):
            gap = np.maximum(y - r0, 1e-8)
            z, zs = np.log(gap), sig / gap
            for p0 in (0.2, 0.5, 1.0):
                lnc, k0 = lin_coeffs(z, t ** p0, zs)
                inits.append(np.array([r0, np.exp(lnc), max(k0, 1e-3), p0]))
    else:
        if np.any(y <= 0):
            raise ValueError("RMSE laws need positive values")
        z, zs = np.log(y), sig / y
        x = np.log(t) if law == "rmse_power" else np.log(np.log(t))
        lnc, p0 = lin_coeffs(z, x, zs)
        inits.append(np.array([np.exp(lnc), p0]))
        for p_alt in (0.2, 0.5, 1.0):
            inits.append(np.array([np.exp(lnc), p_alt]))
    return inits


def fit_law(data, law: str, constrain_asymptote: bool = False) -> ScalingFit:
    """Best multi-start wls_fit for one candidate law (lowest chi^2 wins)."""
    t, y, sig = _unpack(data)
    _check_t(law, t)
    # the laws describe monotone approaches to an asymptote, so the amplitude,
    # rate, and exponent are all positive; without this the stretched family
    # degenerates into an exact power law (k -> 0 with signed c) and model
    # selection by chi^2_red loses all power
    bounds = {name: (1e-12, None) for name in LAW_PARAMS[law] if name in ("c", "k", "p")}
    if "r_inf" in LAW_PARAMS[law]:
        bounds["r_inf"] = (0.0, None)
    if constrain_asymptote and law in ("acc_stretched", "acc_power"):
        bounds["a_inf"] = (None, 1.0)
    best = None
    for init in _prefit_inits(law, t, y, sig):
        try:
            fit = wls_fit(data, law, init, bounds=bounds)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if best is None or fit.chi2_red * fit.dof < best.chi2_red * best.dof:
            best = fit
    if best is None:
        raise ValueError(f"no feasible fit for {law}")
    return best


def select_law(data, candidates, constrain_asymptote: bool = False) -> ScalingFit:
    """Fit every candidate and return the one with reduced chi-squared closest to 1.

    Candidates whose best fit failed to converge or came back degenerate are
    not eligible winners (they usually sit on a reparameterization ridge that
    mimics a simpler law); if every candidate is in that state the comparison
    falls back to all of them rather than erroring out. Exact ties keep the
    earlier candidate in the list. All candidate chi2_red values are recorded
    in the winner's meta.
    """
    candidates = list(candidates)
    if len(candidates) < 2:
        raise ValueError("need at least two candidate laws")
    scores = {}
    fits = []
    for law in candidates:
        try:
            fit = fit_law(data, law, constrain_asymptote=constrain_asymptote)
        except (ValueError, np.linalg.LinAlgError):
            scores[law] = None
            continue
        scores[law] = fit.chi2_red
        fits.append(fit)
    if not fits:
        raise ValueError("all candidate fits failed")
    eligible = [f for f in fits if f.converged and not f.degenerate]
    pool = eligible if eligible else fits
    best = min(pool, key=lambda f: abs(f.chi2_red - 1.0))
    best.meta["candidate_chi2_red"] = scores
    best.meta["excluded_laws"] = [f.law for f in fits if not any(f is p for p in pool)]
    return best


def fit_report_row(task: str, fit: ScalingFit) -> str:
    """One report line: task, law, asymptote, c, k, p (each +/- sigma), chi2_red."""
    vals = fit.param_dict()
    sigs = fit.sigma_dict()

    def cell(name):
        if name == "asym":
            for key in ("a_inf", "r_inf"):
                if key in vals:
                    return f"{vals[key]:.4g} +/- {sigs[key]:.2g}"
            return "-"
        if name in vals:
            return f"{vals[name]:.4g} +/- {sigs[name]:.2g}"
        return "-"

    parts = [task, fit.law, cell("asym"), cell("c"), cell("k"), cell("p"),
             f"{fit.chi2_red:.3g}"]
    return " | ".join(parts)
