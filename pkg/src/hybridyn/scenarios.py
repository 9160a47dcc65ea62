"""Matched initial data, preset experiments and cross-regime comparison."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    ConservationReport,
    IntegratorConfig,
    NonFinite,
    OscillatorBackground,
    SCState,
    Trajectory,
    evolve_cb,
    evolve_qq,
    evolve_sc,
)
from .model import ModelParams
from .observables import ENTROPY_MODES, REGIMES, expect_xp

OBSERVABLES = ("x", "p", "s_ent", "e_osc", "e_ss", "norm", "total_energy")
OUTPUT_KINDS = ("trajectory", "states")
MATCH_TOL = 1e-9


class Unrepresentable(ValueError):
    pass


class UnknownPreset(ValueError):
    pass


class GridMismatch(ValueError):
    pass


_R2 = 1.0 / np.sqrt(2.0)
SPIN_STATES = {
    "++": (1.0, 0.0, 0.0, 0.0),
    "+-": (0.0, 1.0, 0.0, 0.0),
    "-+": (0.0, 0.0, 1.0, 0.0),
    "--": (0.0, 0.0, 0.0, 1.0),
    "triplet0": (0.0, _R2, _R2, 0.0),
    "singlet": (0.0, _R2, -_R2, 0.0),
}


def spin_state(spec) -> np.ndarray:
    """Two-spin amplitudes from a name in ``SPIN_STATES`` or 4 amplitudes."""
    if isinstance(spec, str):
        if spec not in SPIN_STATES:
            raise ValueError(f"unknown spin state {spec!r}; known: {', '.join(SPIN_STATES)}")
        spec = SPIN_STATES[spec]
    psi = np.asarray(spec, dtype=complex)
    if psi.shape != (4,):
        raise ValueError("spin state needs 4 amplitudes")
    n = np.linalg.norm(psi)
    if n == 0:
        raise ValueError("spin state is zero")
    return psi / n


def build_ghz(levels: int = 4) -> np.ndarray:
    """(|0,+,+> + |1,-,->)/sqrt(2)."""
    psi = np.zeros(4 * levels, dtype=complex)
    psi[0] = _R2
    psi[4 + 3] = _R2
    return psi


def oscillator_amplitudes(x0: float, p0: float, m: float = 1.0, omega: float = 1.0) -> tuple[complex, complex]:
    """Amplitudes (cos(theta/2), sin(theta/2) e^{i phi}) on |0>, |1> with <x> = x0, <p> = p0.

    With p = -i sqrt(m omega/2)(a - a^dagger) the state gives
    <x> = sin(theta) cos(phi)/sqrt(2 m omega) and <p> = +sqrt(m omega/2) sin(theta) sin(phi),
    so phi is taken with that sign. theta is chosen in [0, pi/2].
    """
    u = np.sqrt(2.0 * m * omega) * x0
    v = np.sqrt(2.0 / (m * omega)) * p0
    s = np.hypot(u, v)
    if s > 1.0 + 1e-12:
        raise Unrepresentable(f"(x0, p0) = ({x0}, {p0}) needs sin(theta) = {s:.6g} > 1")
    theta = np.arcsin(min(s, 1.0))
    phi = np.arctan2(v, u)
    return complex(np.cos(theta / 2)), complex(np.sin(theta / 2) * np.exp(1j * phi))


def match_initial_state(x0, p0, spin, m: float = 1.0, omega: float = 1.0, levels: int = 4) -> np.ndarray:
    """QQ product state whose <x>, <p> reproduce the classical (x0, p0)."""
    c0, c1 = oscillator_amplitudes(x0, p0, m, omega)
    osc = np.zeros(levels, dtype=complex)
    osc[0], osc[1] = c0, c1
    psi = np.kron(osc, spin_state(spin))
    xbar, pbar = expect_xp(psi, m, omega)
    if abs(xbar - x0) > MATCH_TOL or abs(pbar - p0) > MATCH_TOL:
        raise RuntimeError(f"state matching failed: <x>, <p> = {xbar}, {pbar}")
    return psi


@dataclass(frozen=True)
class ScenarioConfig:
    label: str = "scenario"
    regimes: tuple[str, ...] = REGIMES
    params: ModelParams = field(default_factory=ModelParams)
    x0: float = 0.0
    p0: float = 0.0
    spin: tuple[complex, ...] = SPIN_STATES["++"]
    state: tuple[complex, ...] | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    outputs: tuple[str, ...] = ("trajectory",)
    entropy_mode: str = "single"

    def __post_init__(self):
        regimes = tuple(r.upper() for r in self.regimes)
        object.__setattr__(self, "regimes", regimes)
        if not regimes:
            raise ValueError("at least one regime is required")
        if len(set(regimes)) != len(regimes) or not set(regimes) <= set(REGIMES):
            raise ValueError(f"regimes must be distinct members of {REGIMES}")
        object.__setattr__(self, "spin", tuple(complex(c) for c in self.spin))
        if len(self.spin) != 4:
            raise ValueError("spin state needs 4 amplitudes")
        if self.state is not None:
            object.__setattr__(self, "state", tuple(complex(c) for c in self.state))
            if regimes != ("QQ",):
                raise ValueError("an explicit oscillator-spin state only applies to the QQ regime")
            if len(self.state) != self.params.dim_qq:
                raise ValueError(f"explicit state needs {self.params.dim_qq} amplitudes")
        object.__setattr__(self, "outputs", tuple(self.outputs))
        unknown = set(self.outputs) - set(OUTPUT_KINDS)
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}; known: {OUTPUT_KINDS}")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ValueError(f"entropy_mode must be one of {ENTROPY_MODES}")

    def with_integrator(self, **changes) -> ScenarioConfig:
        return replace(self, integrator=replace(self.integrator, **changes))


@dataclass
class ComparisonReport:
    label: str
    config: ScenarioConfig
    trajectories: dict[str, Trajectory]
    phase_deviation: dict[tuple[str, str], float]
    series_deviation: dict[tuple[str, str], dict[str, float]]

    @property
    def conservation(self) -> dict[str, ConservationReport]:
        return {r: t.conservation for r, t in self.trajectories.items()}

    @property
    def violation(self) -> bool:
        return any(c.violation for c in self.conservation.values())

    def radius_ratio(self, num: str = "SC", den: str = "QQ") -> float:
        return self.trajectories[num].max_radius() / self.trajectories[den].max_radius()


@dataclass
class ScenarioFailure:
    label: str
    error: str
    diverged: bool = False


def trajectory_deviation(a: Trajectory, b: Trajectory) -> float:
    """Largest Euclidean distance between the two phase-space curves on a shared grid."""
    _check_grid(a, b)
    if not len(a):
        return 0.0
    return float(np.max(np.hypot(a.x - b.x, a.p - b.p)))


def series_deviation(a: Trajectory, b: Trajectory, name: str) -> float:
    _check_grid(a, b)
    if not len(a):
        return 0.0
    return float(np.max(np.abs(getattr(a, name) - getattr(b, name))))


def _check_grid(a: Trajectory, b: Trajectory) -> None:
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise GridMismatch("trajectories are sampled on different time grids")


def initial_states(cfg: ScenarioConfig) -> dict[str, object]:
    """Regime-specific initial data built from the shared (x0, p0, spin)."""
    p = cfg.params
    out = {}
    for regime in cfg.regimes:
        if regime == "QQ":
            if cfg.state is not None:
                out["QQ"] = np.asarray(cfg.state, dtype=complex)
            else:
                out["QQ"] = match_initial_state(cfg.x0, cfg.p0, cfg.spin, p.m, p.omega, p.levels)
        elif regime == "SC":
            out["SC"] = SCState(cfg.x0, cfg.p0, spin_state(cfg.spin))
        else:
            out["CB"] = (OscillatorBackground(cfg.x0, cfg.p0, p.m, p.omega), spin_state(cfg.spin))
    return out


def run_scenario(cfg: ScenarioConfig) -> ComparisonReport:
    init = initial_states(cfg)
    trajs: dict[str, Trajectory] = {}
    for regime in cfg.regimes:
        if regime == "QQ":
            trajs["QQ"] = evolve_qq(init["QQ"], cfg.params, cfg.integrator, cfg.entropy_mode)
        elif regime == "SC":
            trajs["SC"] = evolve_sc(init["SC"], cfg.params, cfg.integrator)
        else:
            bg, psi = init["CB"]
            trajs["CB"] = evolve_cb(bg, psi, cfg.params, cfg.integrator)
    phase = {}
    series = {}
    for a, b in itertools.combinations(cfg.regimes, 2):
        phase[(a, b)] = trajectory_deviation(trajs[a], trajs[b])
        series[(a, b)] = {n: series_deviation(trajs[a], trajs[b], n) for n in ("s_ent", "e_osc", "e_ss")}
    return ComparisonReport(cfg.label, cfg, trajs, phase, series)


def _run_safely(cfg: ScenarioConfig):
    try:
        return run_scenario(cfg)
    except Exception as exc:  # collected per item
        return ScenarioFailure(cfg.label, f"{type(exc).__name__}: {exc}", isinstance(exc, NonFinite))


def sweep_workers() -> int:
    raw = os.environ.get("HYBRIDYN_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def sweep(grid: list[ScenarioConfig], workers: int | None = None) -> list:
    """Run every config; results keep the order of ``grid``.

    Failures come back as ``ScenarioFailure`` entries instead of raising.
    Worker count defaults to ``HYBRIDYN_THREADS`` (0 means one per CPU).
    """
    grid = list(grid)
    workers = sweep_workers() if workers is None else workers
    if workers <= 1 or len(grid) <= 1:
        return [_run_safely(c) for c in grid]
    with ProcessPoolExecutor(max_workers=min(workers, len(grid))) as pool:
        return list(pool.map(_run_safely, grid))


# --- presets -------------------------------------------------------------------

_FIG2 = {
    "fig2_tl": dict(omega_s=1.0, g=1.0, lam=1.0),
    "fig2_tr": dict(omega_s=1.0, g=1.0, lam=100.0),
    "fig2_bl": dict(omega_s=0.5, g=1.0, lam=100.0),
    "fig2_br": dict(omega_s=4.0, g=0.1, lam=2000.0),
}
_FIG3 = {"fig3_g_small": 1e-4, "fig3_g_mid": 0.1, "fig3_g_large": 1.5}
PRESETS = tuple(_FIG2) + tuple(_FIG3)


def preset(name: str) -> ScenarioConfig:
    """Built-in parameter sets for the GHZ phase portraits and the three-regime comparison.

    GHZ presets run QQ only; the lambda = 2000 case samples ten times more
    finely to resolve its fast structure. Comparison presets start from
    x0 = 0.1, p0 = 0, |++> and run to t = 400, long enough for the
    fixed-background spins at g = 0.1 to reach maximal entanglement.
    """
    if name in _FIG2:
        v = _FIG2[name]
        params = ModelParams(omega_s=v["omega_s"], g1=v["g"], g2=v["g"], lam=v["lam"])
        integ = IntegratorConfig(dt=1e-4, t_final=20.0, sample_every=10) if name == "fig2_br" else IntegratorConfig(
            dt=1e-3, t_final=100.0, sample_every=10
        )
        return ScenarioConfig(
            label=name, regimes=("QQ",), params=params, state=tuple(build_ghz(params.levels)), integrator=integ
        )
    if name in _FIG3:
        g = _FIG3[name]
        return ScenarioConfig(
            label=name,
            regimes=REGIMES,
            params=ModelParams(omega_s=2.0, g1=g, g2=g, lam=2.0),
            x0=0.1,
            p0=0.0,
            spin=SPIN_STATES["++"],
            integrator=IntegratorConfig(dt=1e-3, t_final=400.0, sample_every=50),
        )
    raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
