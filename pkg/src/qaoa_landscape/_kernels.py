"""Hot statevector kernels: numba-accelerated with a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``QAOA_LANDSCAPE_BACKEND``:

* ``auto`` (default) -- use numba when importable, else numpy
* ``numba``          -- require numba, fail loudly if missing
* ``numpy``          -- force the vectorized numpy path

Both backends implement identical IEEE double-precision arithmetic (no
fastmath), so results agree to the last few ulp; within one backend results
are bit-reproducible run to run.

Conventions: basis index z has qubit 0 as the least significant bit.  The
cost layer multiplies amplitudes by exp(-i*gamma*c(z)); the mixer layer is
exp(-i*delta*H_M) with H_M = -sum_i X_i, i.e. per qubit
(a, b) -> (cos(d)*a + i*sin(d)*b, i*sin(d)*a + cos(d)*b).
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "backend_name",
    "available_backends",
    "get_backend",
    "plus_state",
    "apply_phase",
    "apply_mixer",
    "apply_mixer_single",
    "evolve_amplitudes",
    "energy_value",
    "energy_and_gradient",
]


# ---------------------------------------------------------------------------
# pure-numpy backend
# ---------------------------------------------------------------------------

def _np_plus_state(n_qubits):
    dim = 1 << n_qubits
    return np.full(dim, 2.0 ** (-n_qubits / 2.0), dtype=np.complex128)


def _np_apply_phase(psi, diag, gamma):
    psi *= np.exp(-1j * gamma * diag)


def _np_apply_mixer_single(psi, delta, qubit):
    c = math.cos(delta)
    s = math.sin(delta)
    view = psi.reshape(-1, 2, 1 << qubit)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = c * a + 1j * s * b
    view[:, 1, :] = 1j * s * a + c * b


def _np_apply_mixer(psi, delta, n_qubits):
    for q in range(n_qubits):
        _np_apply_mixer_single(psi, delta, q)


def _np_evolve_amplitudes(diag, gammas, deltas, n_qubits):
    psi = _np_plus_state(n_qubits)
    for l in range(gammas.shape[0]):
        _np_apply_phase(psi, diag, gammas[l])
        _np_apply_mixer(psi, deltas[l], n_qubits)
    return psi


def _np_energy_value(diag, gammas, deltas, n_qubits):
    psi = _np_evolve_amplitudes(diag, gammas, deltas, n_qubits)
    return float(np.sum(diag * (psi.real * psi.real + psi.imag * psi.imag)))


def _np_sum_x(psi, n_qubits):
    # y[z] = sum_q psi[z ^ (1 << q)]
    y = np.zeros_like(psi)
    for q in range(n_qubits):
        view = psi.reshape(-1, 2, 1 << q)
        out = y.reshape(-1, 2, 1 << q)
        out[:, 0, :] += view[:, 1, :]
        out[:, 1, :] += view[:, 0, :]
    return y


def _np_energy_and_gradient(diag, gammas, deltas, n_qubits):
    L = gammas.shape[0]
    psi = _np_evolve_amplitudes(diag, gammas, deltas, n_qubits)
    energy = float(np.sum(diag * (psi.real * psi.real + psi.imag * psi.imag)))
    lam = diag * psi
    grad = np.zeros(2 * L)
    for l in range(L - 1, -1, -1):
        # d/d delta_l = -2 Im <lam| sum_q X_q |psi>, states taken after layer l
        grad[L + l] = -2.0 * float(np.sum(np.conj(lam) * _np_sum_x(psi, n_qubits)).imag)
        _np_apply_mixer(psi, -deltas[l], n_qubits)
        _np_apply_mixer(lam, -deltas[l], n_qubits)
        # d/d gamma_l = 2 Im <lam| diag |psi>, mixer of layer l removed
        grad[l] = 2.0 * float(np.sum(np.conj(lam) * diag * psi).imag)
        _np_apply_phase(psi, diag, -gammas[l])
        _np_apply_phase(lam, diag, -gammas[l])
    return energy, grad


_NUMPY_IMPL = {
    "plus_state": _np_plus_state,
    "apply_phase": _np_apply_phase,
    "apply_mixer": _np_apply_mixer,
    "apply_mixer_single": _np_apply_mixer_single,
    "evolve_amplitudes": _np_evolve_amplitudes,
    "energy_value": _np_energy_value,
    "energy_and_gradient": _np_energy_and_gradient,
}


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

def _build_numba_impl():
    from numba import njit

    @njit(cache=True)
    def nb_plus_state(n_qubits):
        dim = 1 << n_qubits
        amp = 2.0 ** (-n_qubits / 2.0)
        psi = np.empty(dim, np.complex128)
        for z in range(dim):
            psi[z] = amp
        return psi

    @njit(cache=True)
    def nb_apply_phase(psi, diag, gamma):
        for z in range(psi.shape[0]):
            ang = -gamma * diag[z]
            psi[z] = psi[z] * complex(math.cos(ang), math.sin(ang))

    @njit(cache=True)
    def nb_apply_mixer_single(psi, delta, qubit):
        c = math.cos(delta)
        s = math.sin(delta)
        step = 1 << qubit
        dim = psi.shape[0]
        base = 0
        while base < dim:
            for r in range(base, base + step):
                a = psi[r]
                b = psi[r + step]
                psi[r] = c * a + 1j * (s * b)
                psi[r + step] = 1j * (s * a) + c * b
            base += 2 * step

    @njit(cache=True)
    def nb_apply_mixer(psi, delta, n_qubits):
        for q in range(n_qubits):
            nb_apply_mixer_single(psi, delta, q)

    @njit(cache=True)
    def nb_evolve_amplitudes(diag, gammas, deltas, n_qubits):
        psi = nb_plus_state(n_qubits)
        for l in range(gammas.shape[0]):
            nb_apply_phase(psi, diag, gammas[l])
            nb_apply_mixer(psi, deltas[l], n_qubits)
        return psi

    @njit(cache=True)
    def nb_energy_value(diag, gammas, deltas, n_qubits):
        psi = nb_evolve_amplitudes(diag, gammas, deltas, n_qubits)
        e = 0.0
        for z in range(psi.shape[0]):
            p = psi[z]
            e += diag[z] * (p.real * p.real + p.imag * p.imag)
        return e

    @njit(cache=True)
    def nb_sum_x_imag_dot(lam, psi, n_qubits):
        # Im <lam| sum_q X_q |psi>
        acc = 0.0
        dim = psi.shape[0]
        for q in range(n_qubits):
            mask = 1 << q
            for z in range(dim):
                t = np.conj(lam[z]) * psi[z ^ mask]
                acc += t.imag
        return acc

    @njit(cache=True)
    def nb_energy_and_gradient(diag, gammas, deltas, n_qubits):
        L = gammas.shape[0]
        dim = diag.shape[0]
        psi = nb_evolve_amplitudes(diag, gammas, deltas, n_qubits)
        energy = 0.0
        for z in range(dim):
            p = psi[z]
            energy += diag[z] * (p.real * p.real + p.imag * p.imag)
        lam = np.empty(dim, np.complex128)
        for z in range(dim):
            lam[z] = diag[z] * psi[z]
        grad = np.zeros(2 * L)
        for l in range(L - 1, -1, -1):
            grad[L + l] = -2.0 * nb_sum_x_imag_dot(lam, psi, n_qubits)
            nb_apply_mixer(psi, -deltas[l], n_qubits)
            nb_apply_mixer(lam, -deltas[l], n_qubits)
            acc = 0.0
            for z in range(dim):
                acc += (np.conj(lam[z]) * (diag[z] * psi[z])).imag
            grad[l] = 2.0 * acc
            nb_apply_phase(psi, diag, -gammas[l])
            nb_apply_phase(lam, diag, -gammas[l])
        return energy, grad

    return {
        "plus_state": nb_plus_state,
        "apply_phase": nb_apply_phase,
        "apply_mixer": nb_apply_mixer,
        "apply_mixer_single": nb_apply_mixer_single,
        "evolve_amplitudes": nb_evolve_amplitudes,
        "energy_value": nb_energy_value,
        "energy_and_gradient": nb_energy_and_gradient,
    }


def available_backends():
    """Names of backends importable in this environment."""
    names = ["numpy"]
    try:
        import numba  # noqa: F401

        names.insert(0, "numba")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel table for an explicit backend (for benchmarks)."""
    if name == "numpy":
        return _NUMPY_IMPL
    if name == "numba":
        return _build_numba_impl()
    raise ValueError(f"unknown backend {name!r}")


def _select():
    requested = os.environ.get("QAOA_LANDSCAPE_BACKEND", "auto").lower()
    if requested == "numpy":
        return "numpy", _NUMPY_IMPL
    if requested == "numba":
        return "numba", _build_numba_impl()
    if requested != "auto":
        raise ValueError(
            f"QAOA_LANDSCAPE_BACKEND={requested!r}: expected auto, numba or numpy"
        )
    try:
        return "numba", _build_numba_impl()
    except ImportError:
        return "numpy", _NUMPY_IMPL


_BACKEND_NAME, _IMPL = _select()

plus_state = _IMPL["plus_state"]
apply_phase = _IMPL["apply_phase"]
apply_mixer = _IMPL["apply_mixer"]
apply_mixer_single = _IMPL["apply_mixer_single"]
evolve_amplitudes = _IMPL["evolve_amplitudes"]
energy_value = _IMPL["energy_value"]
energy_and_gradient = _IMPL["energy_and_gradient"]


def backend_name():
    """Active kernel backend: 'numba' or 'numpy'."""
    return _BACKEND_NAME
