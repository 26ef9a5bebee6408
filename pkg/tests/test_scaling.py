import numpy as np
import pytest

from bhqrc.scaling import (LAW_PARAMS, ScalingDatum, ScalingFit, evaluate_law,
                           fit_law, fit_report_row, linearized_scan_fit,
                           select_law, wls_fit)


def _data(t, y, sigma):
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), np.shape(t))
    return [ScalingDatum(float(ti), float(yi), float(si)) for ti, yi, si in zip(t, y, sig)]


def _noisy(law, params, t_grid, sigma, seed):
    rng = np.random.default_rng(seed)
    y = evaluate_law(law, params, t_grid) + rng.normal(0.0, sigma, t_grid.size)
    return _data(t_grid, y, sigma)


# ---- law evaluation ---- #

# frozen by direct evaluation of the closed forms
EVAL_FIXTURES = [
    ("acc_stretched", (1.0000, 2.47, 0.926, 0.136), 10.0, 0.3039256097818276),
    ("acc_stretched", (1.0000, 2.47, 0.926, 0.136), 80.0, 0.5398734108991274),
    ("acc_stretched", (1.0000, 2.47, 0.926, 0.136), 320.0, 0.6753212066236047),
    ("acc_stretched", (1.000, 0.58, 0.086, 0.72), 10.0, 0.6306688423709623),
    ("acc_stretched", (1.000, 0.58, 0.086, 0.72), 80.0, 0.9228348791478796),
    ("acc_stretched", (1.000, 0.58, 0.086, 0.72), 320.0, 0.9975642183897937),
    ("acc_stretched", (0.943, 0.37, 0.016, 1.14), 10.0, 0.6463237362357973),
    ("acc_stretched", (0.943, 0.37, 0.016, 1.14), 80.0, 0.9082030513116337),
    ("acc_stretched", (0.943, 0.37, 0.016, 1.14), 320.0, 0.9429961811049989),
    ("acc_power", (1.00, 1.01, 0.21), 10.0, 0.37723904811990294),
    ("acc_power", (1.00, 1.01, 0.21), 80.0, 0.5975865605136288),
    ("acc_power", (1.00, 1.01, 0.21), 320.0, 0.6992262861715983),
    ("rmse_power", (0.93, 0.483), 10.0, 0.30583201671466426),
    ("rmse_power", (0.93, 0.483), 100.0, 0.10057335747070824),
    ("rmse_power", (0.93, 0.483), 320.0, 0.05734499365548855),
    ("rmse_power", (0.76, 0.451), 10.0, 0.26903797922341033),
    ("rmse_power", (0.76, 0.451), 100.0, 0.09523872929554761),
    ("rmse_power", (0.76, 0.451), 320.0, 0.05636259133157018),
    ("rmse_logpower", (0.9, 1.3), 20.0, 0.2161666099794492),
    ("rmse_expfloor", (0.05, 0.6, 0.4, 0.7), 40.0, 0.05302335003233986),
]


@pytest.mark.parametrize("law,params,t,expected", EVAL_FIXTURES)
def test_evaluate_law_fixtures(law, params, t, expected):
    got = evaluate_law(law, params, np.array([t]))[0]
    assert got == pytest.approx(expected, abs=1e-12)


def test_acc_power_zero_amplitude_is_constant():
    t = np.array([1.0, 10.0, 1000.0])
    assert np.allclose(evaluate_law("acc_power", (0.87, 0.0, 0.5), t), 0.87)


def test_evaluate_law_validation():
    t = np.array([10.0])
    with pytest.raises(ValueError):
        evaluate_law("no_such_law", (1.0,), t)
    with pytest.raises(ValueError):
        evaluate_law("rmse_power", (1.0, 2.0, 3.0), t)
    with pytest.raises(ValueError):
        evaluate_law("rmse_logpower", (0.9, 1.3), np.array([1.0]))


def test_datum_validation():
    with pytest.raises(ValueError):
        ScalingDatum(0.5, 0.3, 0.01)
    with pytest.raises(ValueError):
        ScalingDatum(10.0, 0.3, 0.0)
    with pytest.raises(ValueError):
        ScalingDatum(10.0, 0.3, -0.1)


# ---- weighted nonlinear least squares ---- #

def test_wls_noiseless_power_recovery():
    t = np.geomspace(10.0, 1280.0, 8).round()
    truth = (0.95, 0.4, 0.3)
    data = _data(t, evaluate_law("acc_power", truth, t), 0.01)
    fit = wls_fit(data, "acc_power", np.array([0.9, 0.5, 0.5]))
    assert fit.converged
    assert np.allclose(fit.params, truth, atol=1e-6)
    assert fit.chi2_red < 1e-10


@pytest.mark.parametrize("law,params", [
    ("acc_stretched", (0.95, 0.6, 0.3, 0.5)),
    ("acc_power", (0.95, 0.5, 0.4)),
    ("rmse_power", (0.9, 0.5)),
    ("rmse_logpower", (0.9, 1.3)),
    ("rmse_expfloor", (0.05, 0.6, 0.25, 0.6)),
])
def test_noiseless_fit_chi2_vanishes(law, params):
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    data = _data(t, evaluate_law(law, params, t), 0.01)
    fit = fit_law(data, law)
    assert fit.chi2_red < 1e-9
    assert np.allclose(fit.params, params, rtol=1e-4)


def test_constant_data_returns_weighted_mean():
    t = np.array([10.0, 20.0, 40.0, 80.0])
    y = np.full(4, 0.712)
    sig = np.array([0.01, 0.02, 0.01, 0.05])
    data = _data(t, y, sig)
    fit = wls_fit(data, "acc_power", np.array([0.712, 0.0, 0.3]))
    w = 1.0 / sig ** 2
    assert abs(fit.param_dict()["a_inf"] - np.sum(w * y) / np.sum(w)) < 1e-10
    assert fit.degenerate


def test_wls_requires_more_points_than_params():
    t = np.array([10.0, 20.0])
    data = _data(t, [0.5, 0.6], 0.01)
    with pytest.raises(ValueError):
        wls_fit(data, "acc_power", np.array([0.9, 0.4, 0.3]))


def test_sigma_rescaling_leaves_optimum_invariant():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    data = _noisy("rmse_power", (0.9, 0.5), t, 0.004, seed=3)
    scaled = [ScalingDatum(d.t, d.value, 2.5 * d.sigma) for d in data]
    base = wls_fit(data, "rmse_power", np.array([0.8, 0.4]))
    resc = wls_fit(scaled, "rmse_power", np.array([0.8, 0.4]))
    assert np.allclose(base.params, resc.params, atol=1e-9)
    assert resc.chi2_red == pytest.approx(base.chi2_red / 2.5 ** 2, rel=1e-6)


def test_power_coverage_monte_carlo():
    # 3 sigma intervals from the Gauss-Newton covariance should cover the truth
    # in at least 95 of 100 synthetic repetitions, per parameter
    t = np.geomspace(10.0, 1e4, 8).round()
    truth = (0.95, 0.4, 0.3)
    hits = np.zeros(3)
    n_conv = 0
    for rep in range(100):
        fit = fit_law(_noisy("acc_power", truth, t, 0.01, seed=rep), "acc_power")
        if not fit.converged or fit.degenerate:
            continue
        n_conv += 1
        err = np.abs(np.array(fit.params) - np.array(truth))
        hits += err <= 3.0 * np.array(fit.param_sigmas)
    assert n_conv >= 95
    assert np.all(hits / n_conv >= 0.95)


def test_one_sigma_coverage_near_gaussian():
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    truth = (0.95, 0.5, 0.4)
    hits = np.zeros(3)
    n_conv = 0
    for rep in range(100):
        fit = fit_law(_noisy("acc_power", truth, t, 0.002, seed=rep), "acc_power")
        if not fit.converged or fit.degenerate:
            continue
        n_conv += 1
        err = np.abs(np.array(fit.params) - np.array(truth))
        hits += err <= np.array(fit.param_sigmas)
    cov = hits / n_conv
    assert np.all(cov >= 0.60) and np.all(cov <= 0.75)


def test_constrained_asymptote_respects_bound():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    # data heading well above 1.0
    data = _noisy("acc_power", (1.08, 0.5, 0.4), t, 0.003, seed=5)
    free = fit_law(data, "acc_power")
    capped = fit_law(data, "acc_power", constrain_asymptote=True)
    assert free.param_dict()["a_inf"] > 1.0
    assert capped.param_dict()["a_inf"] <= 1.0 + 1e-12


# ---- linearized grid scans ---- #

def test_scan_recovers_power_law_noiselessly():
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    truth = (0.95, 0.4, 0.3)
    # tiny sigma so that off-grid asymptote nodes produce chi2_red far from 1
    data = _data(t, evaluate_law("acc_power", truth, t), 1e-6)
    fit = linearized_scan_fit(data, "acc_power")
    d = fit.param_dict()
    grid_step = fit.sigma_dict()["a_inf"]
    assert abs(d["a_inf"] - truth[0]) <= grid_step + 1e-12
    assert abs(d["c"] - truth[1]) < 5e-3
    assert abs(d["p"] - truth[2]) < 5e-3


def test_scan_flags_boundary_when_grid_excludes_truth():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    truth = (0.95, 0.4, 0.3)
    data = _data(t, evaluate_law("acc_power", truth, t), 1e-6)
    fit = linearized_scan_fit(data, "acc_power", grid={"a_inf": (1.05, 1.2)}, n_nodes=31)
    assert fit.meta.get("boundary", False)


def test_scan_agrees_with_wls_on_noisy_data():
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    agree = 0
    for rep in range(20):
        data = _noisy("rmse_power", (0.9, 0.5), t, 0.002, seed=777 + rep)
        w = fit_law(data, "rmse_power")
        s = linearized_scan_fit(data, "rmse_power")
        gap = np.abs(np.array(w.params) - np.array(s.params))
        tol = 2.0 * np.sqrt(np.array(w.param_sigmas) ** 2 + np.array(s.param_sigmas) ** 2)
        agree += bool(np.all(gap <= tol))
    assert agree >= 18


# ---- model selection ---- #

def test_select_law_prefers_generating_power_law():
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    wins = 0
    for rep in range(20):
        data = _noisy("acc_power", (0.95, 0.5, 0.4), t, 0.002, seed=10_000 + rep)
        wins += select_law(data, ("acc_stretched", "acc_power")).law == "acc_power"
    assert wins >= 17


def test_select_law_keeps_stretched_when_generating():
    t = np.unique(np.geomspace(10.0, 640.0, 16).round())
    wins = 0
    for rep in range(10):
        data = _noisy("acc_stretched", (0.95, 0.6, 0.3, 0.5), t, 0.002, seed=20_000 + rep)
        wins += select_law(data, ("acc_stretched", "acc_power")).law == "acc_stretched"
    assert wins >= 9


def test_select_law_near_saturation_prefers_stretched():
    # saturating accuracy curve on the default experiment T grid
    t_grid = np.array([10.0, 20.0, 40.0, 80.0, 160.0, 320.0])
    data = _noisy("acc_stretched", (1.0000, 2.47, 0.926, 0.136), t_grid, 2e-4, seed=55_000)
    fit = select_law(data, ("acc_stretched", "acc_power"))
    assert fit.law == "acc_stretched"
    assert set(fit.meta["candidate_chi2_red"]) == {"acc_stretched", "acc_power"}


def test_select_law_tie_keeps_first_candidate():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    data = _noisy("rmse_power", (0.9, 0.5), t, 0.002, seed=4)
    fit = select_law(data, ("rmse_power", "rmse_power"))
    assert fit.law == "rmse_power"


def test_select_law_needs_two_candidates():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    data = _noisy("rmse_power", (0.9, 0.5), t, 0.002, seed=4)
    with pytest.raises(ValueError):
        select_law(data, ("rmse_power",))


# ---- reporting ---- #

def test_fit_report_row_layout():
    t = np.unique(np.geomspace(10.0, 640.0, 12).round())
    fit = fit_law(_noisy("rmse_power", (0.9, 0.5), t, 0.004, seed=6), "rmse_power")
    row = fit_report_row("student_t", fit)
    cells = [c.strip() for c in row.split("|")]
    assert len(cells) == 7
    assert cells[0] == "student_t"
    assert cells[1] == "rmse_power"
    assert cells[2] == "-"  # no asymptote in a pure power law
    assert "+/-" in cells[3] and "+/-" in cells[5]
    assert cells[4] == "-"  # no exponential rate either
    float(cells[6])
