"""Operators and Hamiltonians for the oscillator + two spin-1/2 system.

Units: hbar = 1. Basis conventions:

* oscillator: number states |0>..|levels-1>, hard truncation;
* spin: (|+>, |->) with sigma_z |+> = +|+>;
* composite QQ index ``i = 4 n + 2 s1 + s2`` (kron order oscillator, spin1, spin2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quantum_core import check_hermitian, dagger, kron

OSCILLATOR_FORMS = ("number", "quadrature")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters shared by all three regimes.

    ``oscillator_form`` picks the truncated free-oscillator term: ``"number"``
    is omega (a^dagger a + 1/2) with an exactly equispaced spectrum;
    ``"quadrature"`` assembles p^2/2m + m omega^2 x^2/2 from truncated x and p
    matrices, which differs only in the top level.
    """

    m: float = 1.0
    omega: float = 1.0
    omega_s: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    lam: float = 0.0
    levels: int = 4
    oscillator_form: str = "number"

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"levels must be an integer >= 2, got {self.levels}")
        if self.oscillator_form not in OSCILLATOR_FORMS:
            raise ValueError(f"oscillator_form must be one of {OSCILLATOR_FORMS}")
        for name in ("omega_s", "g1", "g2", "lam"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def dim_qq(self) -> int:
        return 4 * self.levels


@dataclass
class HamiltonianParts:
    h_o: np.ndarray
    h_s: np.ndarray
    h_os: np.ndarray
    h_ss: np.ndarray
    total: np.ndarray = field(init=False)

    def __post_init__(self):
        self.total = self.h_o + self.h_s + self.h_os + self.h_ss

    @property
    def spin_generator(self) -> np.ndarray:
        """h_s + h_os + h_ss, the part driving the spins."""
        return self.h_s + self.h_os + self.h_ss


def annihilation_op(levels: int) -> np.ndarray:
    if levels < 2:
        raise ValueError("levels must be >= 2")
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def pauli_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sigma_z, sigma_plus, sigma_minus) in the (|+>, |->) basis."""
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    sp = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    return sz, sp, dagger(sp)


def classical_a(x: float, p: float, m: float = 1.0, omega: float = 1.0) -> complex:
    return x * np.sqrt(m * omega / 2.0) + 1j * p / np.sqrt(2.0 * m * omega)


def position_momentum_ops(levels: int, m: float = 1.0, omega: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Truncated x = (a + a^dagger)/sqrt(2 m omega), p = -i sqrt(m omega/2)(a - a^dagger)."""
    a = annihilation_op(levels)
    ad = dagger(a)
    x = (a + ad) / np.sqrt(2.0 * m * omega)
    p = -1j * np.sqrt(m * omega / 2.0) * (a - ad)
    return x, p


def oscillator_hamiltonian(params: ModelParams) -> np.ndarray:
    n = params.levels
    if params.oscillator_form == "number":
        return params.omega * np.diag(np.arange(n) + 0.5).astype(complex)
    x, p = position_momentum_ops(n, params.m, params.omega)
    return p @ p / (2.0 * params.m) + 0.5 * params.m * params.omega**2 * (x @ x)


def _spin_terms(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two-spin pieces: h_s, h_ss and G = g1/2 sp(x)I + g2/2 I(x)sp.

    The oscillator-spin coupling in any regime is  A (x) G + A^dagger (x) G^dagger
    with A the (quantum or classical) annihilation amplitude.
    """
    sz, sp, sm = pauli_ops()
    i2 = np.eye(2, dtype=complex)
    h_s = 0.5 * params.omega_s * (kron(sz, i2) + kron(i2, sz))
    h_ss = 0.5 * params.lam * (kron(sp, sm) + kron(sm, sp))
    g = 0.5 * params.g1 * kron(sp, i2) + 0.5 * params.g2 * kron(i2, sp)
    return h_s, h_ss, g


def spin_coupling(params: ModelParams) -> np.ndarray:
    return _spin_terms(params)[2]


def build_h_qq(params: ModelParams) -> HamiltonianParts:
    """Full quantum Hamiltonian on the (levels * 4)-dimensional space."""
    n = params.levels
    a = annihilation_op(n)
    i_osc = np.eye(n, dtype=complex)
    i_spins = np.eye(4, dtype=complex)
    h_s2, h_ss2, g = _spin_terms(params)
    parts = HamiltonianParts(
        h_o=kron(oscillator_hamiltonian(params), i_spins),
        h_s=kron(i_osc, h_s2),
        h_os=kron(a, g) + kron(dagger(a), dagger(g)),
        h_ss=kron(i_osc, h_ss2),
    )
    return parts


def build_h_spin_sc(x: float, p: float, params: ModelParams) -> HamiltonianParts:
    """Semiclassical two-spin Hamiltonian at the phase point (x, p).

    ``h_o`` holds the classical oscillator energy times the identity, kept for
    energy bookkeeping only; the spin equation of motion uses
    ``spin_generator`` (h_s + h_os + h_ss).
    """
    if not (np.isfinite(x) and np.isfinite(p)):
        raise ValueError("phase point must be finite")
    h_s, h_ss, g = _spin_terms(params)
    a = classical_a(x, p, params.m, params.omega)
    e_osc = p * p / (2.0 * params.m) + 0.5 * params.m * params.omega**2 * x * x
    return HamiltonianParts(
        h_o=e_osc * np.eye(4, dtype=complex),
        h_s=h_s,
        h_os=a * g + np.conj(a) * dagger(g),
        h_ss=h_ss,
    )


def build_h_cb(t: float, background, params: ModelParams) -> np.ndarray:
    """Spin Hamiltonian driven by a fixed oscillator background at time t."""
    from .dynamics import oscillator_background_eval

    x, p = oscillator_background_eval(background, t)
    h = build_h_spin_sc(x, p, params).spin_generator
    return h


def spin_generator_gradients(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """dH_spin/dx and dH_spin/dp. H_spin is linear in (x, p) through a."""
    g = spin_coupling(params)
    cx = np.sqrt(params.m * params.omega / 2.0)
    cp = 1.0 / np.sqrt(2.0 * params.m * params.omega)
    return cx * (g + dagger(g)), 1j * cp * (g - dagger(g))


def assert_parts_hermitian(parts: HamiltonianParts) -> None:
    for name in ("h_o", "h_s", "h_os", "h_ss", "total"):
        check_hermitian(getattr(parts, name))
