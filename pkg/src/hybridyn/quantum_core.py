"""Dense complex linear algebra for small Hilbert spaces.

Everything here works on plain numpy arrays. Matrices are at most 16x16, so
the eigensolver is a cyclic complex Jacobi iteration rather than a call into
LAPACK; the 2x2 case (reduced single-spin density matrices) has a closed form
that is vectorised over leading batch axes.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12
EIG_CLAMP = 1e-12
ENTROPY_CUTOFF = 1e-14


class NotHermitian(ValueError):
    pass


class BadLayout(ValueError):
    pass


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def hermitian_defect(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    # entries of order 1e3 (lambda = 2000 presets) carry rounding at ~1e-13
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    defect = hermitian_defect(a)
    if defect > tol * scale:
        raise NotHermitian(f"max |A - A^dagger| = {defect:.3e} exceeds {tol * scale:.1e}")


def _eig2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenpairs of (batched) 2x2 Hermitian matrices."""
    p = a[..., 0, 0].real
    q = a[..., 1, 1].real
    b = a[..., 0, 1]
    mean = 0.5 * (p + q)
    half = 0.5 * (p - q)
    r = np.hypot(half, np.abs(b))
    evals = np.stack([mean - r, mean + r], axis=-1)

    # rotation angle: tan(2 theta) = |b| / half, eigenvector of the lower root
    # is (-sin(theta) e^{i phi}, cos(theta)) with b = |b| e^{i phi}
    theta = 0.5 * np.arctan2(np.abs(b), half)
    # angle() stays finite for subnormal b where b/|b| would overflow
    phase = np.exp(1j * np.angle(b))
    c = np.cos(theta)
    s = np.sin(theta)
    vecs = np.empty(a.shape, dtype=complex)
    vecs[..., 0, 0] = -s * phase
    vecs[..., 1, 0] = c
    vecs[..., 0, 1] = c * phase
    vecs[..., 1, 1] = s
    return evals, vecs


def _jacobi(a: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    a = a.astype(complex, copy=True)
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.max(np.abs(a[offdiag])) <= 1e-14 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau < 0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^dagger A J with J[p,q] = s*phase, J[q,p] = -s*conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * np.conj(phase) * v[:, q]
                v[:, q] = s * phase * vp + c * v[:, q]
    else:
        raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    evals = np.diag(a).real
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


def eig_hermitian(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns:
        (eigenvalues ascending, eigenvectors as columns)

    Raises:
        NotHermitian: if ``a`` is not Hermitian to within ``HERMITIAN_TOL``.
    """
    a = np.asarray(a, dtype=complex)
    check_hermitian(a)
    n = a.shape[0]
    if n == 1:
        return a.real.diagonal().copy(), np.ones((1, 1), dtype=complex)
    if n == 2:
        return _eig2(a)
    return _jacobi(a)


def eigvals_hermitian_2x2(rho: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a stack of 2x2 Hermitian matrices."""
    return _eig2(np.asarray(rho, dtype=complex))[0]


_SUBSYSTEMS = {"oscillator": 0, "spin1": -2, "spin2": -1}


def _resolve_layout(dim: int, layout: tuple[int, ...] | None) -> tuple[int, ...]:
    if layout is None:
        if dim == 4:
            layout = (2, 2)
        elif dim % 4 == 0 and dim > 4:
            layout = (dim // 4, 2, 2)
        else:
            raise BadLayout(f"no default layout for dimension {dim}")
    if int(np.prod(layout)) != dim:
        raise BadLayout(f"layout {layout} does not match dimension {dim}")
    return tuple(layout)


def _keep_axis(layout: tuple[int, ...], keep: str) -> int:
    if keep not in _SUBSYSTEMS:
        raise BadLayout(f"unknown subsystem {keep!r}")
    if keep == "oscillator" and len(layout) != 3:
        raise BadLayout("layout has no oscillator factor")
    return _SUBSYSTEMS[keep] % len(layout)


def partial_trace(rho: np.ndarray, keep: str = "spin1", layout: tuple[int, ...] | None = None) -> np.ndarray:
    """Reduce a density matrix onto one factor of the composite space.

    ``layout`` lists factor dimensions in kron order, ``(levels, 2, 2)`` for the
    oscillator-spin-spin space and ``(2, 2)`` for two spins; it is inferred
    from the matrix size when omitted. Leading batch axes are carried through.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2]:
        raise BadLayout(f"expected square matrices, got shape {rho.shape}")
    layout = _resolve_layout(rho.shape[-1], layout)
    axis = _keep_axis(layout, keep)
    k = len(layout)
    t = rho.reshape(rho.shape[:-2] + layout + layout)
    rows = list("abc"[:k])
    cols = list(rows)
    cols[axis] = "z"
    return np.einsum(f"...{''.join(rows)}{''.join(cols)}->...{rows[axis]}z", t)


def reduce_pure(psi: np.ndarray, keep: str = "spin1", layout: tuple[int, ...] | None = None) -> np.ndarray:
    """Reduced density matrix of a pure state (or a stack of them).

    Equivalent to ``partial_trace(outer(psi, psi*))`` without forming the full
    density matrix.
    """
    psi = np.asarray(psi, dtype=complex)
    layout = _resolve_layout(psi.shape[-1], layout)
    axis = _keep_axis(layout, keep)
    t = psi.reshape(psi.shape[:-1] + layout)
    t = np.moveaxis(t, t.ndim - len(layout) + axis, -1)
    t = t.reshape(psi.shape[:-1] + (-1, layout[axis]))
    return np.einsum("...ka,...kb->...ab", t, np.conj(t))


def _entropy_from_eigs(evals: np.ndarray) -> np.ndarray:
    lam = np.where(np.abs(evals) <= EIG_CLAMP, 0.0, evals)
    lam = np.clip(lam, 0.0, None)
    safe = np.where(lam > ENTROPY_CUTOFF, lam, 1.0)
    s = -np.sum(np.where(lam > ENTROPY_CUTOFF, lam * np.log(safe), 0.0), axis=-1)
    # an eigenvalue of 1 + eps gives -eps
    return np.maximum(s, 0.0)


def von_neumann_entropy(rho: np.ndarray) -> float | np.ndarray:
    """S = -sum(lam ln lam) in nats.

    Eigenvalues within ``EIG_CLAMP`` of zero are treated as zero; those below
    ``ENTROPY_CUTOFF`` do not contribute. 2x2 inputs may be stacked along
    leading axes.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] == (2, 2):
        s = _entropy_from_eigs(eigvals_hermitian_2x2(rho))
        return float(s) if s.ndim == 0 else s
    if rho.ndim != 2:
        return np.array([von_neumann_entropy(r) for r in rho.reshape((-1,) + rho.shape[-2:])]).reshape(
            rho.shape[:-2]
        )
    evals, _ = eig_hermitian(rho)
    return float(_entropy_from_eigs(evals))
