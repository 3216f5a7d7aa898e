"""Exact statevector simulation of the alternating cost/mixer ansatz.

The circuit applies, for each layer l, the diagonal phase exp(-i*gamma_l*c)
followed by the transverse-field mixer exp(-i*delta_l*H_M) with
H_M = -sum_i X_i, acting on the uniform superposition.  Basis index z has
qubit 0 as the least significant bit; vertex i maps to qubit i; the 'a' label
of a partition maps to bit 0.

Gradients come in two exact flavours: an adjoint backward sweep through the
statevector (fast, used by the optimizers) and the per-gate two-point shift
rule (kept as an independent oracle; each shift is applied to a single
gate's own half-angle, weighted by the chain-rule factor of the shared
circuit parameter).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import WeightedGraph, SolutionSet, MAX_ENUM_VERTICES

__all__ = [
    "CostDiagonal",
    "ParameterVector",
    "StateVector",
    "cost_diagonal",
    "initial_state",
    "evolve",
    "expectation",
    "energy_and_gradient",
    "gradient",
    "parameter_shift_gradient",
    "solution_probability",
    "overlap_distance",
]


@dataclass(frozen=True)
class CostDiagonal:
    """Diagonal of the Ising cost operator: c(z) = (1/2) sum w_ij s_i s_j
    with s_k = +1 for bit 0 and -1 for bit 1."""

    n_qubits: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (1 << self.n_qubits,):
            raise ValueError("diagonal length must be 2^n_qubits")


@dataclass(frozen=True)
class ParameterVector:
    """The 2L circuit angles theta = (gamma_1..gamma_L, delta_1..delta_L)."""

    gammas: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=np.float64))
        d = np.atleast_1d(np.asarray(self.deltas, dtype=np.float64))
        if g.shape != d.shape or g.ndim != 1 or g.shape[0] < 1:
            raise ValueError("gammas and deltas must be 1-d of equal length >= 1")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "deltas", d)

    @property
    def layers(self) -> int:
        return self.gammas.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.deltas])

    @classmethod
    def from_flat(cls, x) -> "ParameterVector":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] % 2 or x.shape[0] < 2:
            raise ValueError("flat parameter vector must have even length >= 2")
        L = x.shape[0] // 2
        return cls(gammas=x[:L].copy(), deltas=x[L:].copy())


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude count must be 2^n_qubits")


def cost_diagonal(g: WeightedGraph) -> CostDiagonal:
    """Build c(z) for all 2^N basis states; O(2^N * |E|)."""
    if g.n_vertices > MAX_ENUM_VERTICES:
        raise ValueError(f"size bound is {MAX_ENUM_VERTICES} qubits")
    z = np.arange(1 << g.n_vertices, dtype=np.int64)
    vals = np.zeros(z.shape[0])
    for i, j, w in g.edges:
        sign = 1.0 - 2.0 * (((z >> i) ^ (z >> j)) & 1)
        vals += 0.5 * w * sign
    return CostDiagonal(n_qubits=g.n_vertices, values=vals)


def initial_state(n: int) -> StateVector:
    """Uniform superposition |+>^n."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return StateVector(n_qubits=n, amplitudes=_kernels.plus_state(n))


def _check(diag: CostDiagonal, theta: ParameterVector):
    if not isinstance(diag, CostDiagonal):
        raise TypeError("expected CostDiagonal")
    if theta.layers < 1:
        raise ValueError("need at least one layer")


def evolve(diag: CostDiagonal, theta: ParameterVector) -> StateVector:
    """Run the full L-layer circuit from the uniform superposition."""
    _check(diag, theta)
    amp = _kernels.evolve_amplitudes(diag.values, theta.gammas, theta.deltas, diag.n_qubits)
    return StateVector(n_qubits=diag.n_qubits, amplitudes=amp)


def expectation(diag: CostDiagonal, theta: ParameterVector) -> float:
    """Objective <H_C> = sum_z c(z) |<z|Psi(theta)>|^2."""
    _check(diag, theta)
    return float(_kernels.energy_value(diag.values, theta.gammas, theta.deltas, diag.n_qubits))


def energy_and_gradient(diag: CostDiagonal, theta: ParameterVector) -> tuple[float, np.ndarray]:
    """Exact objective and its 2L-gradient via an adjoint backward sweep."""
    _check(diag, theta)
    e, grad = _kernels.energy_and_gradient(
        diag.values, theta.gammas, theta.deltas, diag.n_qubits
    )
    return float(e), np.asarray(grad)


def gradient(diag: CostDiagonal, theta: ParameterVector) -> np.ndarray:
    """Exact gradient d<H_C>/d(theta), ordered (gammas..., deltas...)."""
    return energy_and_gradient(diag, theta)[1]


def solution_probability(psi: StateVector, s: SolutionSet) -> float:
    """Total probability of measuring any maximum-cut string."""
    idx = np.fromiter(sorted(s.solutions), dtype=np.int64)
    if idx.size and idx.max() >= psi.amplitudes.shape[0]:
        raise ValueError("solution index out of range for this statevector")
    a = psi.amplitudes[idx]
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def state_probability(psi: StateVector, states) -> float:
    """Total probability of an arbitrary set of basis states."""
    idx = np.fromiter(sorted(states), dtype=np.int64)
    if idx.size and idx.max() >= psi.amplitudes.shape[0]:
        raise ValueError("state index out of range for this statevector")
    a = psi.amplitudes[idx]
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def overlap_distance(psi_a: StateVector, psi_b: StateVector) -> float:
    """S = 1 - |<Psi_a|Psi_b>|; zero for equal states up to global phase."""
    if psi_a.n_qubits != psi_b.n_qubits:
        raise ValueError("statevector dimensions differ")
    ov = abs(np.vdot(psi_a.amplitudes, psi_b.amplitudes))
    return float(min(max(1.0 - ov, 0.0), 1.0))


# ---------------------------------------------------------------------------
# per-gate two-point shift rule (oracle path; not performance critical)
# ---------------------------------------------------------------------------

def _edge_half_signs(g: WeightedGraph):
    """(1/2)*s_i*s_j per edge, the unit-weight diagonal of one phase gate."""
    z = np.arange(1 << g.n_vertices, dtype=np.int64)
    out = []
    for i, j, _ in g.edges:
        out.append(0.5 * (1.0 - 2.0 * (((z >> i) ^ (z >> j)) & 1)))
    return out


def _evolve_shifted(diag, g, theta, layer, kind, which, shift):
    """Evolve with one gate's half-angle shifted: kind is 'edge' or 'qubit'."""
    edge_signs = _edge_half_signs(g)
    psi = _kernels.plus_state(diag.n_qubits)
    for l in range(theta.layers):
        _kernels.apply_phase(psi, diag.values, theta.gammas[l])
        if kind == "edge" and l == layer:
            # edge gate exp(-i * t * s_e(z)) with t = w_e*gamma_l; half-angle
            # u = 2t so the shift adds exp(-i * (shift/2) * 2*s_e(z))
            psi *= np.exp(-1j * shift * edge_signs[which])
        if kind == "qubit" and l == layer:
            # mixer gate exp(+i*delta*X_q) = exp(-i*(-2*delta)/2 * X_q);
            # shifting the half-angle by s means delta -> delta - s/2
            _kernels.apply_mixer_single(psi, -shift / 2.0, which)
        _kernels.apply_mixer(psi, theta.deltas[l], diag.n_qubits)
    return psi


def parameter_shift_gradient(g: WeightedGraph, theta: ParameterVector,
                             diag: CostDiagonal | None = None) -> np.ndarray:
    """Gradient assembled gate by gate from the two-point shift rule.

    Each shared circuit parameter is a weighted sum of gate half-angles:
    gamma_l enters edge gate e with weight w_e, delta_l enters each of the N
    mixer gates with weight -2.  The derivative is the chain-rule sum of
    (1/2)[E(+pi/2) - E(-pi/2)] shifts of each gate's own half-angle.
    """
    if diag is None:
        diag = cost_diagonal(g)
    L = theta.layers
    grad = np.zeros(2 * L)

    def energy_of(psi):
        return float(np.sum(diag.values * (psi.real ** 2 + psi.imag ** 2)))

    for l in range(L):
        acc = 0.0
        for e, (_, _, w) in enumerate(g.edges):
            ep = energy_of(_evolve_shifted(diag, g, theta, l, "edge", e, +np.pi / 2))
            em = energy_of(_evolve_shifted(diag, g, theta, l, "edge", e, -np.pi / 2))
            acc += w * 0.5 * (ep - em)
        grad[l] = acc
        acc = 0.0
        for q in range(g.n_vertices):
            ep = energy_of(_evolve_shifted(diag, g, theta, l, "qubit", q, +np.pi / 2))
            em = energy_of(_evolve_shifted(diag, g, theta, l, "qubit", q, -np.pi / 2))
            acc += -2.0 * 0.5 * (ep - em)
        grad[L + l] = acc
    return grad
