"""Time evolution in the three regimes plus conservation monitoring.

QQ  i d|Phi>/dt = H |Phi>                       (4 * levels complex ODEs)
SC  i d|Psi>/dt = H_spin(x, p) |Psi>,
    dx/dt = dH_eff/dp, dp/dt = -dH_eff/dx       (4 complex + 2 real ODEs)
CB  i d|Psi>/dt = H_spin(x_c(t), p_c(t)) |Psi>  (4 complex ODEs)

The default integrator is fixed-step RK4. Samples are taken every
``dt * sample_every`` time units; when the generator is stiff relative to
``dt`` the internal step is refined so that ``h * |H| <= DT_SAFETY`` while the
sample grid stays fixed, which keeps grids of different regimes aligned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels
from .model import ModelParams, _spin_terms, build_h_qq, build_h_spin_sc, classical_a, spin_generator_gradients
from .observables import ObservableRecord, observable_series
from .quantum_core import eig_hermitian

CONSERVATION_TARGET = 1e-8
VIOLATION_LEVEL = 1e-6
DT_SAFETY = 0.01
METHODS = ("fixed-rk4", "adaptive-rk45")


class ConservationViolation(RuntimeWarning):
    """Norm or energy drifted by more than ``VIOLATION_LEVEL`` during a run."""


class NonFinite(FloatingPointError):
    pass


@dataclass(frozen=True)
class OscillatorBackground:
    x0: float
    p0: float
    m: float = 1.0
    omega: float = 1.0

    def energy(self) -> float:
        return self.p0**2 / (2 * self.m) + 0.5 * self.m * self.omega**2 * self.x0**2


def oscillator_background_eval(bg: OscillatorBackground, t):
    """Free-oscillator phase point (x(t), p(t)) through (x0, p0) at t = 0."""
    wt = bg.omega * np.asarray(t, dtype=float)
    c, s = np.cos(wt), np.sin(wt)
    x = bg.x0 * c + bg.p0 / (bg.m * bg.omega) * s
    p = bg.p0 * c - bg.m * bg.omega * bg.x0 * s
    if np.ndim(x) == 0:
        return float(x), float(p)
    return x, p


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_final: float = 10.0
    sample_every: int = 10
    method: str = "fixed-rk4"
    adaptive_tol: float = 1e-10
    auto_dt: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not self.adaptive_tol > 0:
            raise ValueError("adaptive_tol must be positive")

    @property
    def sample_spacing(self) -> float:
        return self.dt * self.sample_every

    def sample_times(self, t0: float = 0.0) -> np.ndarray:
        n = int(math.floor(self.t_final / self.sample_spacing + 1e-9))
        return t0 + self.sample_spacing * np.arange(n + 1)

    def substeps(self, generator_norm: float) -> tuple[int, float]:
        """(steps per sample, step size) for a generator of the given norm."""
        nsub = int(self.sample_every)
        if self.auto_dt and generator_norm * self.dt > DT_SAFETY:
            nsub = int(math.ceil(self.sample_spacing * generator_norm / DT_SAFETY))
        return nsub, self.sample_spacing / nsub


@dataclass(frozen=True)
class SCState:
    x: float
    p: float
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (4,):
            raise ValueError("SC spin state must have 4 amplitudes")
        _check_normalized(psi)
        object.__setattr__(self, "psi", psi)


@dataclass
class ConservationReport:
    norm_drift: float
    energy_drift: float  # nan when no conserved energy (CB)
    step: float
    target: float = CONSERVATION_TARGET
    violation_level: float = VIOLATION_LEVEL

    @property
    def within_target(self) -> bool:
        drifts = [self.norm_drift] + ([] if math.isnan(self.energy_drift) else [self.energy_drift])
        return all(d <= self.target for d in drifts)

    @property
    def violation(self) -> bool:
        drifts = [self.norm_drift] + ([] if math.isnan(self.energy_drift) else [self.energy_drift])
        return any(not d <= self.violation_level for d in drifts)

    def as_dict(self) -> dict:
        return {
            "norm_drift": self.norm_drift,
            "energy_drift": None if math.isnan(self.energy_drift) else self.energy_drift,
            "step": self.step,
            "within_target": self.within_target,
            "violation": self.violation,
        }


@dataclass
class Trajectory:
    regime: str
    times: np.ndarray
    states: np.ndarray
    x: np.ndarray
    p: np.ndarray
    s_ent: np.ndarray
    e_osc: np.ndarray
    e_ss: np.ndarray
    norm: np.ndarray
    total_energy: np.ndarray
    conservation: ConservationReport = field(default=None)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def records(self) -> list[ObservableRecord]:
        return [
            ObservableRecord(*(float(v) for v in row))
            for row in zip(self.times, self.x, self.p, self.s_ent, self.e_osc, self.e_ss, self.norm, self.total_energy)
        ]

    def max_radius(self) -> float:
        return float(np.max(np.hypot(self.x, self.p))) if len(self) else 0.0


def _check_normalized(psi: np.ndarray, tol: float = CONSERVATION_TARGET) -> None:
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > tol:
        raise ValueError(f"state must be normalized, |psi| = {n:.12g}")


def _spectral_norm(h: np.ndarray) -> float:
    evals, _ = eig_hermitian(h)
    return float(np.max(np.abs(evals)))


def rk4_step(deriv, y: np.ndarray, t: float, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of dy/dt = deriv(t, y).

    ``h`` may be negative (backward integration).

    Raises:
        NonFinite: if any stage derivative contains inf or nan.
    """
    if h == 0:
        raise ValueError("step must be nonzero")
    stages = []
    k = deriv(t, y)
    for c, w in ((0.5, 0.5), (0.5, 0.5), (1.0, 1.0)):
        if not np.all(np.isfinite(k)):
            raise NonFinite(f"derivative not finite at t={t}")
        stages.append(k)
        k = deriv(t + c * h, y + w * h * k)
    if not np.all(np.isfinite(k)):
        raise NonFinite(f"derivative not finite at t={t}")
    k1, k2, k3 = stages
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k)


def rk4_propagator(h_mat: np.ndarray, h: float) -> np.ndarray:
    """Matrix of one RK4 step for the linear system dpsi/dt = -i H psi.

    For a constant linear generator the RK4 update is exactly the degree-4
    Taylor polynomial of exp(-i h H).
    """
    a = -1j * h * np.asarray(h_mat, dtype=complex)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ a / k
        out = out + term
    return out


def exact_propagator(h_mat: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) from the Hermitian eigendecomposition."""
    evals, vecs = eig_hermitian(h_mat)
    return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T


# --- real-vector derivatives (interleaved Re/Im) for generic integrators -----


def qq_derivative(h_mat: np.ndarray):
    h_mat = np.asarray(h_mat, dtype=complex)

    def f(t, y):
        return (-1j * (h_mat @ y.view(complex))).view(float)

    return f


def _sc_fields(params: ModelParams):
    h_s, h_ss, g = _spin_terms(params)
    return h_s + h_ss, g


def sc_derivative(params: ModelParams):
    """Derivative of y = [x, p, Re psi0, Im psi0, ...] for the SC system."""
    h0, g = _sc_fields(params)
    gd = g.conj().T

    def f(t, y):
        x, p = y[0], y[1]
        psi = y[2:].view(complex)
        a = classical_a(x, p, params.m, params.omega)
        hpsi = h0 @ psi + a * (g @ psi) + np.conj(a) * (gd @ psi)
        xdot, pdot = sc_force(x, p, psi, params)
        out = np.empty_like(y)
        out[0] = xdot
        out[1] = pdot
        out[2:] = (-1j * hpsi).view(float)
        return out

    return f


def cb_derivative(bg: OscillatorBackground, params: ModelParams):
    def f(t, y):
        x, p = oscillator_background_eval(bg, t)
        h = build_h_spin_sc(x, p, params).spin_generator
        return (-1j * (h @ y.view(complex))).view(float)

    return f


# --- H_eff and its phase-space gradient -------------------------------------


def heff(x: float, p: float, psi: np.ndarray, params: ModelParams) -> float:
    """<Psi|H|Psi> including the classical oscillator energy."""
    parts = build_h_spin_sc(x, p, params)
    psi = np.asarray(psi, dtype=complex)
    spin = np.vdot(psi, parts.spin_generator @ psi)
    e_osc = p * p / (2 * params.m) + 0.5 * params.m * params.omega**2 * x * x
    return float(e_osc + spin.real)


def sc_force(x: float, p: float, psi: np.ndarray, params: ModelParams) -> tuple[float, float]:
    """Hamilton's equations for H_eff: (dH_eff/dp, -dH_eff/dx).

    H_spin is linear in (x, p), so the coupling gradient is the expectation of
    the constant matrices dH/dx and dH/dp.
    """
    psi = np.asarray(psi, dtype=complex)
    dh_dx, dh_dp = spin_generator_gradients(params)
    dex = np.vdot(psi, dh_dx @ psi).real
    dep = np.vdot(psi, dh_dp @ psi).real
    xdot = p / params.m + dep
    pdot = -params.m * params.omega**2 * x - dex
    return float(xdot), float(pdot)


# --- evolvers ----------------------------------------------------------------


def _report(norm: np.ndarray, energy: np.ndarray | None, step: float, regime: str) -> ConservationReport:
    norm_drift = float(np.max(np.abs(norm - norm[0]))) if len(norm) else 0.0
    energy_drift = float(np.max(np.abs(energy - energy[0]))) if energy is not None and len(energy) else math.nan
    rep = ConservationReport(norm_drift=norm_drift, energy_drift=energy_drift, step=step)
    if rep.violation:
        warnings.warn(
            f"{regime}: norm drift {norm_drift:.2e}, energy drift {energy_drift:.2e} "
            f"exceed {VIOLATION_LEVEL:.0e} (step {step:.3g})",
            ConservationViolation,
            stacklevel=3,
        )
    return rep


def _trajectory(regime, times, states, params, x=None, p=None, entropy_mode="single", step=math.nan):
    obs = observable_series(regime, states, params, x, p, entropy_mode)
    energy = obs["total_energy"] if regime in ("QQ", "SC") else None
    rep = _report(obs["norm"], energy, step, regime)
    return Trajectory(regime=regime, times=np.asarray(times, dtype=float), states=states, conservation=rep, **obs)


def _solve_adaptive(f, y0, times, cfg: IntegratorConfig):
    sol = solve_ivp(
        f,
        (times[0], times[-1]),
        y0,
        method="RK45",
        t_eval=times,
        rtol=cfg.adaptive_tol,
        atol=cfg.adaptive_tol,
    )
    if not sol.success:
        raise NonFinite(sol.message)
    return sol.y.T


def evolve_qq(psi0: np.ndarray, params: ModelParams, cfg: IntegratorConfig, entropy_mode: str = "single") -> Trajectory:
    """Integrate the full quantum TDSE from ``psi0``.

    The Hamiltonian is constant, so the fixed-step path precomputes the RK4
    step matrix (identical to calling ``rk4_step`` with ``qq_derivative``) and
    raises it to the number of steps per sample.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (params.dim_qq,):
        raise ValueError(f"QQ state must have {params.dim_qq} amplitudes")
    _check_normalized(psi0)
    h_mat = build_h_qq(params).total
    times = cfg.sample_times()

    if cfg.method == "adaptive-rk45":
        ys = _solve_adaptive(qq_derivative(h_mat), psi0.view(float).copy(), times, cfg)
        states = np.ascontiguousarray(ys).view(complex)
        return _trajectory("QQ", times, states, params, entropy_mode=entropy_mode)

    nsub, h = cfg.substeps(_spectral_norm(h_mat))
    step_mat = np.linalg.matrix_power(rk4_propagator(h_mat, h), nsub)
    states = np.empty((len(times), psi0.size), dtype=complex)
    states[0] = psi0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, len(times)):
            states[k] = step_mat @ states[k - 1]
    if not np.all(np.isfinite(states)):
        raise NonFinite("QQ evolution produced non-finite amplitudes")
    return _trajectory("QQ", times, states, params, entropy_mode=entropy_mode, step=h)


def _spin_norm_bound(params: ModelParams, x: float, p: float) -> float:
    h = build_h_spin_sc(x, p, params).spin_generator
    return max(_spectral_norm(h), params.omega)


def evolve_sc(init: SCState, params: ModelParams, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the coupled spin TDSE and Hamilton equations for H_eff."""
    times = cfg.sample_times()
    if cfg.method == "adaptive-rk45":
        y0 = np.concatenate([[init.x, init.p], init.psi.view(float)])
        ys = _solve_adaptive(sc_derivative(params), y0, times, cfg)
        states = np.ascontiguousarray(ys[:, 2:]).view(complex)
        return _trajectory("SC", times, states, params, ys[:, 0], ys[:, 1])

    nsub, h = cfg.substeps(_spin_norm_bound(params, init.x, init.p))
    h0, g = _sc_fields(params)
    xs, ps, states, ok = _kernels.sc_loop(
        float(init.x), float(init.p), init.psi.copy(), h0, g, params.m, params.omega, h, nsub, len(times)
    )
    if not ok:
        raise NonFinite(f"SC evolution diverged before t={times[len(xs)]}")
    return _trajectory("SC", times, states, params, xs, ps, step=h)


def evolve_cb(bg: OscillatorBackground, psi0: np.ndarray, params: ModelParams, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the spin TDSE on the fixed oscillator background ``bg``."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (4,):
        raise ValueError("CB spin state must have 4 amplitudes")
    _check_normalized(psi0)
    if (bg.m, bg.omega) != (params.m, params.omega):
        raise ValueError("background and model disagree on m, omega")
    times = cfg.sample_times()
    if cfg.method == "adaptive-rk45":
        ys = _solve_adaptive(cb_derivative(bg, params), psi0.view(float).copy(), times, cfg)
        states = np.ascontiguousarray(ys).view(complex)
        step = math.nan
    else:
        nsub, step = cfg.substeps(_spin_norm_bound(params, bg.x0, bg.p0))
        h0, g = _sc_fields(params)
        states = _kernels.cb_loop(
            float(bg.x0), float(bg.p0), psi0.copy(), h0, g, params.m, params.omega, 0.0, step, nsub, len(times)
        )
        if not np.all(np.isfinite(states)):
            raise NonFinite("CB evolution produced non-finite amplitudes")
    xs, ps = oscillator_background_eval(bg, times)
    return _trajectory("CB", times, states, params, np.atleast_1d(xs), np.atleast_1d(ps), step=step)
