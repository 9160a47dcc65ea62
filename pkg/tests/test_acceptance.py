"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (lines are printed to the
terminal even under capture) or ``python3 tests/test_acceptance.py``.
"""

import sys
import warnings

import numpy as np
import pytest

from hybridyn.dynamics import (
    ConservationViolation,
    IntegratorConfig,
    SCState,
    evolve_qq,
    evolve_sc,
    exact_propagator,
    heff,
    sc_force,
)
from hybridyn.model import ModelParams, build_h_qq, build_h_spin_sc
from hybridyn.observables import expect_xp
from hybridyn.scenarios import match_initial_state, oscillator_amplitudes, preset, run_scenario
from hybridyn.statics import (
    NoStaticCircle,
    circle_guesses,
    eigenbranch_energy,
    find_static_solutions,
    lambda0_circle,
    static_residual,
)

LN2 = np.log(2)
FIG3 = ("fig3_g_small", "fig3_g_mid", "fig3_g_large")

_reports: dict[int, str] = {}


@pytest.fixture
def report(request):
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(number: int, ok: bool, text: str):
        line = f"[{'PASS' if ok else 'FAIL'}] AC{number}: {text}"
        _reports[number] = line
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print("\n" + line, flush=True)
        else:
            print(line, flush=True)
        assert ok, line

    return emit


def test_ac01_state_matching_golden(report):
    c0, c1 = oscillator_amplitudes(0.1, 0.0)
    xbar, pbar = expect_xp(match_initial_state(0.1, 0.0, "++"))
    err_amp = max(abs(c0 - 0.99748420879), abs(c1 - 0.07088902028))
    err_xp = max(abs(xbar - 0.1), abs(pbar))
    report(
        1, err_amp <= 1e-9 and err_xp <= 1e-9,
        f"matched amplitudes ({c0.real:.11f}, {c1.real:.11f}) err {err_amp:.1e}; <x>,<p> err {err_xp:.1e} (tol 1e-9)",
    )


def test_ac02_conservation_fig3(report):
    parts = []
    ok = True
    for name in FIG3:
        rep = run_scenario(preset(name).with_integrator(t_final=100.0))
        for regime, c in rep.conservation.items():
            drift = max(c.norm_drift, 0.0 if np.isnan(c.energy_drift) else c.energy_drift)
            ok &= c.norm_drift <= 1e-8 and (np.isnan(c.energy_drift) or c.energy_drift <= 1e-8)
            parts.append(f"{name}/{regime} {drift:.1e}")
    report(2, ok, "max(norm, energy) drift over t<=100: " + ", ".join(parts) + " (tol 1e-8)")


def test_ac03_exact_propagator(report):
    cfg = preset("fig2_tl").with_integrator(t_final=10.0)
    psi0 = np.asarray(cfg.state)
    traj = evolve_qq(psi0, cfg.params, cfg.integrator)
    exact = exact_propagator(build_h_qq(cfg.params).total, 10.0) @ psi0
    err = float(np.max(np.abs(traj.states[-1] - exact)))
    report(3, abs(traj.times[-1] - 10.0) < 1e-12 and err <= 1e-6, f"fig2_tl state at t=10 vs eigendecomposition: {err:.1e} (tol 1e-6)")


def test_ac04_ghz_plateau(report):
    lo, hi = LN2 - 0.05, LN2 + 1e-10
    out = {}
    for name in ("fig2_bl", "fig2_br", "fig2_tl"):
        cfg = preset(name)
        out[name] = evolve_qq(np.asarray(cfg.state), cfg.params, cfg.integrator).s_ent
    bl, br, tl = out["fig2_bl"], out["fig2_br"], out["fig2_tl"]
    ok = bool(np.all((bl >= lo) & (bl <= hi)) and np.all((br >= lo) & (br <= hi)) and np.ptp(tl) >= 0.1)
    report(
        4, ok,
        f"fig2_bl s_ent in [{bl.min():.6f}, {bl.max():.6f}], fig2_br in [{br.min():.6f}, {br.max():.6f}] "
        f"(band [{lo:.6f}, ln2+1e-10]); fig2_tl range {np.ptp(tl):.3f} (>= 0.1)",
    )


def test_ac05_weak_coupling(report):
    rep = run_scenario(preset("fig3_g_small").with_integrator(t_final=50.0))
    dev = max(rep.phase_deviation.values())
    s_max = max(t.s_ent.max() for t in rep.trajectories.values())
    report(5, dev <= 1e-2 and s_max <= 1e-3, f"fig3_g_small t<=50: max pairwise phase deviation {dev:.1e} (tol 1e-2), max s_ent {s_max:.1e} (tol 1e-3)")


def test_ac06_intermediate_entanglement(report):
    rep = run_scenario(preset("fig3_g_mid"))
    sc = rep.trajectories["SC"].s_ent.max()
    cb = rep.trajectories["CB"].s_ent.max()
    t_end = rep.trajectories["SC"].times[-1]
    report(6, min(sc, cb) >= LN2 - 0.01, f"fig3_g_mid t<={t_end:g}: max s_ent SC {sc:.6f}, CB {cb:.6f} (>= ln2 - 0.01 = {LN2 - 0.01:.6f})")


def test_ac07_sc_expansiveness(report):
    rep = run_scenario(preset("fig3_g_large"))
    ratio = rep.radius_ratio("SC", "QQ")
    t_end = rep.trajectories["SC"].times[-1]
    report(
        7, ratio >= 3.0,
        f"fig3_g_large t<={t_end:g}: max radius SC {rep.trajectories['SC'].max_radius():.3f}, "
        f"QQ {rep.trajectories['QQ'].max_radius():.3f}, ratio {ratio:.2f} (>= 3)",
    )


def test_ac08_static_circle(report):
    params = ModelParams(omega_s=1, g1=2, g2=2, lam=0)
    r2 = lambda0_circle(1, 2)
    worst_circle = worst_dyn = 0.0
    for guess in circle_guesses(1.0, 8):
        sol = find_static_solutions(params, 0, guess)
        worst_circle = max(worst_circle, abs(sol.x**2 + sol.p**2 - 1.5))
        traj = evolve_sc(SCState(sol.x, sol.p, sol.eigenstate), params, IntegratorConfig(t_final=10.0))
        worst_dyn = max(worst_dyn, float(np.max(np.hypot(traj.x - sol.x, traj.p - sol.p))))
    refused = []
    for omega_s, g in ((1.0, 1.0), (2.0, 2.0), (0.5, 1.0)):
        try:
            lambda0_circle(omega_s, g)
            refused.append(False)
        except NoStaticCircle:
            refused.append(True)
    ok = r2 == 1.5 and worst_circle <= 1e-8 and worst_dyn <= 1e-6 and all(refused)
    report(
        8, ok,
        f"radius^2 {r2}; 8 guesses: max |x^2+p^2-1.5| {worst_circle:.1e} (tol 1e-8), max drift from fixed point over t<=10 "
        f"{worst_dyn:.1e} (tol 1e-6); g^2<=2 omega_s refused: {all(refused)}",
    )


def test_ac09_gradient_suite(report):
    rng = np.random.default_rng(20240917)
    h = 1e-6
    worst_force = worst_hf = 0.0
    checked = 0
    for _ in range(100):
        params = ModelParams(
            m=rng.uniform(0.5, 2), omega=rng.uniform(0.5, 2), omega_s=rng.uniform(-3, 3),
            g1=rng.uniform(-3, 3), g2=rng.uniform(-3, 3), lam=rng.uniform(-5, 5),
        )
        x, p = rng.normal(size=2)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        xdot, pdot = sc_force(x, p, psi, params)
        fd_xdot = (heff(x, p + h, psi, params) - heff(x, p - h, psi, params)) / (2 * h)
        fd_pdot = -(heff(x + h, p, psi, params) - heff(x - h, p, psi, params)) / (2 * h)
        worst_force = max(worst_force, abs(xdot - fd_xdot), abs(pdot - fd_pdot))
        evals = np.linalg.eigvalsh(build_h_spin_sc(x, p, params).spin_generator)
        for b in range(4):
            gaps = [np.diff(evals)[i] for i in (b - 1, b) if 0 <= i < 3]
            if min(gaps) < 1e-6:
                continue
            e = lambda xx, pp: eigenbranch_energy(xx, pp, b, params)[0]  # noqa: E731
            fd = (p / params.m + (e(x, p + h) - e(x, p - h)) / (2 * h),
                  -params.m * params.omega**2 * x - (e(x + h, p) - e(x - h, p)) / (2 * h))
            hf = static_residual(x, p, b, params)
            worst_hf = max(worst_hf, abs(hf[0] - fd[0]), abs(hf[1] - fd[1]))
            checked += 1
    report(
        9, worst_force <= 1e-6 and worst_hf <= 1e-6 and checked > 0,
        f"100 draws: sc_force vs FD {worst_force:.1e}, Hellmann-Feynman vs FD {worst_hf:.1e} over {checked} branches (tol 1e-6)",
    )


def test_ac10_rk4_order(report):
    cfg = preset("fig2_tr")
    psi0 = np.asarray(cfg.state)
    t_final = 1.0
    exact = exact_propagator(build_h_qq(cfg.params).total, t_final) @ psi0
    dts = np.array([4e-3, 2e-3, 1e-3, 5e-4])
    errs = []
    for dt in dts:
        icfg = IntegratorConfig(dt=dt, t_final=t_final, sample_every=int(round(t_final / dt)), auto_dt=False)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConservationViolation)
            errs.append(np.max(np.abs(evolve_qq(psi0, cfg.params, icfg).states[-1] - exact)))
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    steps = ", ".join(f"{d:g}" for d in dts)
    report(10, abs(slope - 4) <= 0.3, f"end-state error {', '.join(f'{e:.2e}' for e in errs)} at dt {steps}: slope {slope:.3f} (4 +/- 0.3)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
