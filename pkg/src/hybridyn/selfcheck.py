"""Fast invariant checks runnable from the command line (``--seed-check``)."""

from __future__ import annotations

import numpy as np

from .dynamics import IntegratorConfig, evolve_qq, heff, sc_force
from .model import ModelParams, build_h_qq, build_h_spin_sc
from .observables import expect_xp
from .quantum_core import eig_hermitian, hermitian_defect, kron, partial_trace, von_neumann_entropy
from .scenarios import match_initial_state, oscillator_amplitudes


def _random_params(rng) -> ModelParams:
    return ModelParams(
        omega_s=rng.uniform(-3, 3), g1=rng.uniform(-3, 3), g2=rng.uniform(-3, 3), lam=rng.uniform(-5, 5)
    )


def _random_state(rng, n):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


def check_hermitian(rng):
    worst = 0.0
    for _ in range(20):
        params = _random_params(rng)
        x, p = rng.normal(size=2)
        for parts in (build_h_qq(params), build_h_spin_sc(x, p, params)):
            worst = max(worst, *(hermitian_defect(getattr(parts, n)) for n in ("h_o", "h_s", "h_os", "h_ss", "total")))
    return worst <= 1e-12, f"max Hermitian defect {worst:.1e}"


def check_eig(rng):
    worst = 0.0
    for n in (2, 4, 16):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = a + a.conj().T
        w, v = eig_hermitian(a)
        worst = max(worst, np.max(np.abs((v * w) @ v.conj().T - a)) / np.max(np.abs(a)))
    return worst <= 1e-10, f"relative reconstruction error {worst:.1e}"


def check_partial_trace(rng):
    factors = []
    for n in (4, 2, 2):
        psi = _random_state(rng, n)
        factors.append(np.outer(psi, psi.conj()))
    rho = kron(*factors)
    err = max(
        np.max(np.abs(partial_trace(rho, "spin1") - factors[1])),
        np.max(np.abs(partial_trace(rho, "spin2") - factors[2])),
    )
    return err <= 1e-12, f"product-state reduction error {err:.1e}"


def check_entropy(rng):
    s = von_neumann_entropy(np.eye(2) / 2)
    return abs(s - np.log(2)) <= 1e-12, f"S(I/2) = {s:.12f}"


def check_force(rng):
    worst = 0.0
    h = 1e-6
    for _ in range(20):
        params = _random_params(rng)
        x, p = rng.normal(size=2)
        psi = _random_state(rng, 4)
        xdot, pdot = sc_force(x, p, psi, params)
        fd_p = (heff(x, p + h, psi, params) - heff(x, p - h, psi, params)) / (2 * h)
        fd_x = (heff(x + h, p, psi, params) - heff(x - h, p, psi, params)) / (2 * h)
        worst = max(worst, abs(xdot - fd_p), abs(pdot + fd_x))
    return worst <= 1e-6, f"force vs finite differences {worst:.1e}"


def check_matching(rng):
    c0, c1 = oscillator_amplitudes(0.1, 0.0)
    psi = match_initial_state(0.1, 0.0, "++")
    xbar, pbar = expect_xp(psi)
    err = max(abs(c0 - 0.99748420879), abs(c1 - 0.07088902028), abs(xbar - 0.1), abs(pbar))
    return err <= 1e-9, f"matching error {err:.1e}"


def check_norm(rng):
    params = ModelParams(omega_s=1, g1=1, g2=1, lam=1)
    psi0 = _random_state(rng, 16)
    traj = evolve_qq(psi0, params, IntegratorConfig(t_final=10.0, sample_every=100))
    rep = traj.conservation
    return rep.within_target, f"norm drift {rep.norm_drift:.1e}, energy drift {rep.energy_drift:.1e}"


CHECKS = {
    "hamiltonians hermitian": check_hermitian,
    "eigensolver reconstruction": check_eig,
    "partial trace of product states": check_partial_trace,
    "entropy of maximally mixed spin": check_entropy,
    "SC force equals -grad H_eff": check_force,
    "initial-state matching": check_matching,
    "QQ norm/energy conservation": check_norm,
}


def run_checks(seed: int = 2024) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    return [(name, *fn(rng)) for name, fn in CHECKS.items()]
