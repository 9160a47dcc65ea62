"""Compiled RK4 loops for the two-spin regimes.

The spin generator is H = h0 + a G + conj(a) G^dagger with a the classical
amplitude; SC also advances (x, p) under H_eff. Each loop takes ``nsub`` RK4
steps of size ``h`` between consecutive samples and returns the sampled
states. Time inside the loop is computed from the step index, never
accumulated.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _spin_rhs(psi, a, h0, g, gd, out):
    """out = -i H psi; returns <psi|G|psi>."""
    gexp = 0j
    for i in range(4):
        s0 = 0j
        sg = 0j
        sgd = 0j
        for j in range(4):
            s0 += h0[i, j] * psi[j]
            sg += g[i, j] * psi[j]
            sgd += gd[i, j] * psi[j]
        out[i] = -1j * (s0 + a * sg + np.conj(a) * sgd)
        gexp += np.conj(psi[i]) * sg
    return gexp


@njit(cache=True)
def sc_loop(x0, p0, psi0, h0, g, m, omega, h, nsub, nsamples):
    cx = np.sqrt(m * omega / 2.0)
    cp = 1.0 / np.sqrt(2.0 * m * omega)
    kx = m * omega * omega
    gd = np.conj(g.T).copy()

    xs = np.empty(nsamples)
    ps = np.empty(nsamples)
    states = np.empty((nsamples, 4), dtype=np.complex128)

    x = x0
    p = p0
    psi = psi0.copy()
    k1 = np.empty(4, dtype=np.complex128)
    k2 = np.empty(4, dtype=np.complex128)
    k3 = np.empty(4, dtype=np.complex128)
    k4 = np.empty(4, dtype=np.complex128)
    tmp = np.empty(4, dtype=np.complex128)

    xs[0] = x
    ps[0] = p
    states[0, :] = psi
    for k in range(1, nsamples):
        for _ in range(nsub):
            ge = _spin_rhs(psi, x * cx + 1j * p * cp, h0, g, gd, k1)
            dx1 = p / m - 2.0 * cp * ge.imag
            dp1 = -kx * x - 2.0 * cx * ge.real

            xa = x + 0.5 * h * dx1
            pa = p + 0.5 * h * dp1
            for i in range(4):
                tmp[i] = psi[i] + 0.5 * h * k1[i]
            ge = _spin_rhs(tmp, xa * cx + 1j * pa * cp, h0, g, gd, k2)
            dx2 = pa / m - 2.0 * cp * ge.imag
            dp2 = -kx * xa - 2.0 * cx * ge.real

            xa = x + 0.5 * h * dx2
            pa = p + 0.5 * h * dp2
            for i in range(4):
                tmp[i] = psi[i] + 0.5 * h * k2[i]
            ge = _spin_rhs(tmp, xa * cx + 1j * pa * cp, h0, g, gd, k3)
            dx3 = pa / m - 2.0 * cp * ge.imag
            dp3 = -kx * xa - 2.0 * cx * ge.real

            xa = x + h * dx3
            pa = p + h * dp3
            for i in range(4):
                tmp[i] = psi[i] + h * k3[i]
            ge = _spin_rhs(tmp, xa * cx + 1j * pa * cp, h0, g, gd, k4)
            dx4 = pa / m - 2.0 * cp * ge.imag
            dp4 = -kx * xa - 2.0 * cx * ge.real

            x += h / 6.0 * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4)
            p += h / 6.0 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
            for i in range(4):
                psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not (np.isfinite(x) and np.isfinite(p)):
            return xs[:k], ps[:k], states[:k], False
        xs[k] = x
        ps[k] = p
        states[k, :] = psi
    return xs, ps, states, True


@njit(cache=True)
def cb_loop(x0, p0, psi0, h0, g, m, omega, t0, h, nsub, nsamples):
    cx = np.sqrt(m * omega / 2.0)
    cp = 1.0 / np.sqrt(2.0 * m * omega)
    gd = np.conj(g.T).copy()

    states = np.empty((nsamples, 4), dtype=np.complex128)
    psi = psi0.copy()
    k1 = np.empty(4, dtype=np.complex128)
    k2 = np.empty(4, dtype=np.complex128)
    k3 = np.empty(4, dtype=np.complex128)
    k4 = np.empty(4, dtype=np.complex128)
    tmp = np.empty(4, dtype=np.complex128)

    states[0, :] = psi
    for k in range(1, nsamples):
        for j in range(nsub):
            t = t0 + ((k - 1) * nsub + j) * h
            c = np.cos(omega * t)
            s = np.sin(omega * t)
            a = (x0 * c + p0 / (m * omega) * s) * cx + 1j * (p0 * c - m * omega * x0 * s) * cp
            _spin_rhs(psi, a, h0, g, gd, k1)

            c = np.cos(omega * (t + 0.5 * h))
            s = np.sin(omega * (t + 0.5 * h))
            a = (x0 * c + p0 / (m * omega) * s) * cx + 1j * (p0 * c - m * omega * x0 * s) * cp
            for i in range(4):
                tmp[i] = psi[i] + 0.5 * h * k1[i]
            _spin_rhs(tmp, a, h0, g, gd, k2)
            for i in range(4):
                tmp[i] = psi[i] + 0.5 * h * k2[i]
            _spin_rhs(tmp, a, h0, g, gd, k3)

            c = np.cos(omega * (t + h))
            s = np.sin(omega * (t + h))
            a = (x0 * c + p0 / (m * omega) * s) * cx + 1j * (p0 * c - m * omega * x0 * s) * cp
            for i in range(4):
                tmp[i] = psi[i] + h * k3[i]
            _spin_rhs(tmp, a, h0, g, gd, k4)

            for i in range(4):
                psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        states[k, :] = psi
    return states
