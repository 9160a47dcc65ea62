"""Phase-space expectations, spin entanglement entropy and subsystem energies.

All functions accept a single state or a stack of states along leading axes,
so a whole trajectory can be processed at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, _spin_terms, build_h_qq, classical_a, position_momentum_ops
from .quantum_core import reduce_pure, von_neumann_entropy

REGIMES = ("QQ", "SC", "CB")
ENTROPY_MODES = ("single", "pair")


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    x_like: float
    p_like: float
    s_ent: float
    e_osc: float
    e_ss: float
    norm: float
    total_energy: float


def _expect(op: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.einsum("...i,ij,...j->...", np.conj(psi), op, psi)


def expect_xp(psi: np.ndarray, m: float = 1.0, omega: float = 1.0):
    """(<x>, <p>) of oscillator-spin states with layout (levels, 2, 2)."""
    psi = np.asarray(psi, dtype=complex)
    levels = psi.shape[-1] // 4
    x, p = position_momentum_ops(levels, m, omega)
    eye = np.eye(4)
    xbar = _expect(np.kron(x, eye), psi).real
    pbar = _expect(np.kron(p, eye), psi).real
    if xbar.ndim == 0:
        return float(xbar), float(pbar)
    return xbar, pbar


def spin_entropy(state: np.ndarray, regime: str, mode: str = "single"):
    """Spin entanglement entropy in nats.

    ``mode="single"`` (default): entropy of spin 1 after tracing out everything
    else. ``mode="pair"`` is QQ-only: entropy of the two-spin block after
    tracing out the oscillator. SC/CB two-spin states are pure, so they always
    use the single-spin reduction.
    """
    regime = regime.upper()
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if mode not in ENTROPY_MODES:
        raise ValueError(f"unknown entropy mode {mode!r}")
    psi = np.asarray(state, dtype=complex)
    dim = psi.shape[-1]
    if regime == "QQ" and (dim % 4 or dim < 8):
        raise ValueError(f"QQ state must have dimension 4*levels with levels >= 2, got {dim}")
    if regime != "QQ" and dim != 4:
        raise ValueError(f"{regime} spin state must have dimension 4, got {dim}")
    if regime == "QQ":
        levels = dim // 4
        if mode == "pair":
            # pure global state: S(spins) == S(oscillator), and the latter is smaller
            return von_neumann_entropy(reduce_pure(psi, "oscillator", (levels, 2, 2)))
        rho = reduce_pure(psi, "spin1", (levels, 2, 2))
    else:
        rho = reduce_pure(psi, "spin1", (2, 2))
    return von_neumann_entropy(rho)


def classical_energy(x, p, params: ModelParams):
    return np.asarray(p) ** 2 / (2.0 * params.m) + 0.5 * params.m * params.omega**2 * np.asarray(x) ** 2


def spin_energy(psi: np.ndarray, x, p, params: ModelParams):
    """<psi| h_s + h_os(x, p) + h_ss |psi> for two-spin states, vectorised over samples."""
    psi = np.asarray(psi, dtype=complex)
    h_s, h_ss, g = _spin_terms(params)
    a = classical_a(np.asarray(x), np.asarray(p), params.m, params.omega)
    static = _expect(h_s + h_ss, psi).real
    gexp = _expect(g, psi)
    # <h_os> = a <G> + conj(a) <G^dagger> = 2 Re(a <G>)
    return static + 2.0 * np.real(a * gexp)


def subsystem_energies(snapshot, params: ModelParams, regime: str):
    """(E_osc, E_ss) for a QQ state or an object with ``x``, ``p``, ``psi``.

    QQ: E_ss = <h_s + h_os + h_ss>, E_osc = <H> - E_ss.
    SC/CB: E_ss as above with the classical amplitude; E_osc is the classical
    oscillator energy.
    """
    regime = regime.upper()
    if regime == "QQ":
        psi = np.asarray(snapshot, dtype=complex)
        parts = build_h_qq(params)
        total = _expect(parts.total, psi).real
        e_ss = _expect(parts.spin_generator, psi).real
        e_osc = total - e_ss
    elif regime in ("SC", "CB"):
        x, p, psi = snapshot.x, snapshot.p, snapshot.psi
        e_osc = classical_energy(x, p, params)
        e_ss = spin_energy(psi, x, p, params)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    if np.ndim(e_osc) == 0:
        return float(e_osc), float(e_ss)
    return e_osc, e_ss


def observable_series(regime: str, states: np.ndarray, params: ModelParams, x=None, p=None, entropy_mode="single"):
    """Observable columns for a stack of sampled states.

    For SC/CB the classical phase points ``x``, ``p`` must be given.
    """
    regime = regime.upper()
    states = np.asarray(states, dtype=complex)
    norm = np.linalg.norm(states, axis=-1)
    s_ent = np.asarray(spin_entropy(states, regime, entropy_mode), dtype=float)
    if regime == "QQ":
        x_like, p_like = expect_xp(states, params.m, params.omega)
        parts = build_h_qq(params)
        total = _expect(parts.total, states).real
        e_ss = _expect(parts.spin_generator, states).real
        e_osc = total - e_ss
    else:
        x_like = np.asarray(x, dtype=float)
        p_like = np.asarray(p, dtype=float)
        e_osc = classical_energy(x_like, p_like, params)
        e_ss = spin_energy(states, x_like, p_like, params)
        total = e_osc + e_ss
    return {
        "x": np.atleast_1d(x_like),
        "p": np.atleast_1d(p_like),
        "s_ent": np.atleast_1d(s_ent),
        "e_osc": np.atleast_1d(e_osc),
        "e_ss": np.atleast_1d(e_ss),
        "norm": np.atleast_1d(norm),
        "total_energy": np.atleast_1d(total),
    }

