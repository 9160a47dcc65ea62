"""Static solutions of the semiclassical system.

A static solution is a phase point (x*, p*) together with an eigenvector of
the spin generator h_s + h_os(x*, p*) + h_ss such that Hamilton's equations
for H_eff = E_osc(x, p) + E_branch(x, p) vanish. The spin state then only
accumulates a phase. Eigenvalue gradients use Hellmann-Feynman, which is
only valid away from level crossings, so degenerate branches are refused.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, build_h_spin_sc, spin_generator_gradients
from .quantum_core import eig_hermitian

DEGENERACY_GAP = 1e-9
RESIDUAL_TOL = 1e-10
FD_STEP = 1e-6


class DegenerateBranch(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


class NoStaticCircle(ValueError):
    pass


@dataclass
class StaticSolution:
    x: float
    p: float
    branch: int
    eigenstate: np.ndarray
    eigenvalue: float
    residual: float
    iterations: int = 0


def eigenbranch_energy(x: float, p: float, branch: int, params: ModelParams) -> tuple[float, np.ndarray]:
    if branch not in (0, 1, 2, 3):
        raise ValueError(f"branch must be 0..3, got {branch}")
    evals, vecs = eig_hermitian(build_h_spin_sc(x, p, params).spin_generator)
    gaps = np.diff(evals)
    near = [gaps[i] for i in (branch - 1, branch) if 0 <= i < len(gaps)]
    if min(near) < DEGENERACY_GAP:
        raise DegenerateBranch(f"branch {branch} is degenerate at ({x}, {p}): gap {min(near):.2e}")
    return float(evals[branch]), vecs[:, branch]


def static_residual(x: float, p: float, branch: int, params: ModelParams) -> tuple[float, float]:
    """(dx/dt, dp/dt) with the spin frozen in eigenbranch ``branch``."""
    _, v = eigenbranch_energy(x, p, branch, params)
    dh_dx, dh_dp = spin_generator_gradients(params)
    de_dx = np.vdot(v, dh_dx @ v).real
    de_dp = np.vdot(v, dh_dp @ v).real
    return p / params.m + de_dp, -params.m * params.omega**2 * x - de_dx


def lambda0_circle(omega_s: float, g: float, m: float = 1.0, omega: float = 1.0) -> float:
    """Squared radius of the lambda = 0 static circle (equal couplings, m omega = 1).

    Raises:
        NoStaticCircle: when g^2 <= 2 |omega_s| (no circle of positive radius).
    """
    if abs(m * omega - 1.0) > 1e-12:
        raise ValueError("the closed-form circle is only available for m * omega = 1")
    if g == 0 or g * g <= 2.0 * abs(omega_s):
        raise NoStaticCircle(f"g^2 = {g * g} must exceed 2|omega_s| = {2 * abs(omega_s)}")
    return g * g / 2.0 - 2.0 * omega_s**2 / (g * g)


def _jacobian(z: np.ndarray, branch: int, params: ModelParams) -> np.ndarray:
    jac = np.empty((2, 2))
    for j in range(2):
        dz = np.zeros(2)
        dz[j] = FD_STEP
        fp = np.array(static_residual(*(z + dz), branch, params))
        fm = np.array(static_residual(*(z - dz), branch, params))
        jac[:, j] = (fp - fm) / (2 * FD_STEP)
    return jac


def find_static_solutions(
    params: ModelParams, branch: int, guess: tuple[float, float], max_iter: int = 100
) -> StaticSolution:
    """Newton search for a static point of ``branch`` starting at ``guess``.

    The Jacobian is a central finite difference of the residual. Steps use a
    least-squares solve, so on a continuous family of solutions (the lambda = 0
    circle) the iteration moves perpendicular to the family. A step is halved
    up to 20 times until the residual norm decreases. Once the tolerance is
    met, one extra full step is kept if it lowers the residual further.
    """
    z = np.array(guess, dtype=float)
    f = np.array(static_residual(*z, branch, params))
    for it in range(max_iter + 1):
        if np.max(np.abs(f)) <= RESIDUAL_TOL:
            z, f = _polish(z, f, branch, params)
            e, v = eigenbranch_energy(*z, branch, params)
            return StaticSolution(float(z[0]), float(z[1]), branch, v, e, float(np.max(np.abs(f))), it)
        if it == max_iter:
            break
        step = np.linalg.lstsq(_jacobian(z, branch, params), -f, rcond=1e-8)[0]
        fnorm = np.linalg.norm(f)
        for _ in range(21):
            trial = z + step
            f_trial = np.array(static_residual(*trial, branch, params))
            if np.linalg.norm(f_trial) < fnorm:
                break
            step = step / 2
        else:
            raise NoConvergence(f"line search stalled at ({z[0]}, {z[1]}), |residual| = {fnorm:.3e}")
        z, f = trial, f_trial
    raise NoConvergence(f"no convergence in {max_iter} iterations, |residual| = {np.linalg.norm(f):.3e}")


def _polish(z, f, branch, params):
    try:
        trial = z + np.linalg.lstsq(_jacobian(z, branch, params), -f, rcond=1e-8)[0]
        f_trial = np.array(static_residual(*trial, branch, params))
    except DegenerateBranch:
        return z, f
    if np.linalg.norm(f_trial) < np.linalg.norm(f):
        return trial, f_trial
    return z, f


def search_static_solutions(
    params: ModelParams, guesses, branches=(0, 1, 2, 3), dedupe_tol: float = 1e-7
) -> list[StaticSolution]:
    """Run the Newton search from every guess on every branch.

    Degenerate branches and failed searches are skipped; solutions closer than
    ``dedupe_tol`` on the same branch are reported once.
    """
    found: list[StaticSolution] = []
    for branch in branches:
        for guess in guesses:
            try:
                sol = find_static_solutions(params, branch, guess)
            except (DegenerateBranch, NoConvergence):
                continue
            if any(
                s.branch == branch and np.hypot(s.x - sol.x, s.p - sol.p) < dedupe_tol for s in found
            ):
                continue
            found.append(sol)
    return found


def circle_guesses(radius: float, n_angles: int = 8) -> list[tuple[float, float]]:
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    return [(float(radius * np.cos(t)), float(radius * np.sin(t))) for t in angles]
