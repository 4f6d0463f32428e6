"""Two-level effective model of the adiabatic Grover search Hamiltonian.

The search Hamiltonian

    H(s) = (1-s) (1 - |psi0><psi0|) + s (1 - |w><w|),      hbar = 1,

acts on N = 2^n basis states, but the dynamics starting from the uniform
superposition |psi0> never leaves the plane spanned by the marked state |w>
and its Gram-Schmidt partner |w_perp> = (sqrt(N)|psi0> - |w>) / sqrt(N-1).
Everything in this module is therefore expressed in the ordered basis
{|w>, |w_perp>}: a real symmetric 2x2 Hamiltonian, its gap

    dE(s) = sqrt(1 + 4 s (1-s) (1/N - 1)),

instantaneous eigenpairs, the ground/excited transition matrix elements of
the single-qubit Pauli operators, and the accumulated dynamical phase
Phi(t) = int_0^t dE dtau.  All functions are numpy-vectorized over ``s``.

The minimum gap is dE(1/2) = 1/sqrt(N); evaluating the gap formula at
s = 1/2 in floating point yields exactly sqrt(1/N) because the intermediate
1 + (1/N - 1) is exact for N a power of two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "GroverInstance",
    "EffectiveHamiltonian",
    "MatrixElement",
    "gap",
    "gap_derivative",
    "effective_hamiltonian",
    "matrix_element",
    "phase_integral",
    "adiabatic_coupling",
    "adiabatic_error_estimate",
    "sigma_subspace",
]


@dataclass(frozen=True)
class GroverInstance:
    """Problem size and marked state of one search instance.

    ``marked`` is the solution bitstring w (most significant bit first);
    only its bits enter the physics, through the signs (-1)^{w_a} of the
    sigma^z couplings.
    """

    n_qubits: int
    marked: str

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if len(self.marked) != self.n_qubits or set(self.marked) - {"0", "1"}:
            raise ValueError(
                f"marked must be a bitstring of length {self.n_qubits}, got {self.marked!r}"
            )

    @classmethod
    def balanced(cls, n_qubits: int) -> "GroverInstance":
        """Instance whose marked state has alternating bits (as many ones as
        zeros for even n), the configuration that suppresses the x-z cross
        channels of a common bath."""
        return cls(n_qubits, "01" * (n_qubits // 2) + "0" * (n_qubits % 2))

    @classmethod
    def from_int(cls, n_qubits: int, w: int) -> "GroverInstance":
        if not 0 <= w < 2 ** n_qubits:
            raise ValueError("marked integer out of range")
        return cls(n_qubits, format(w, f"0{n_qubits}b"))

    @property
    def N(self) -> int:
        return 2 ** self.n_qubits

    @property
    def marked_int(self) -> int:
        return int(self.marked, 2)

    @property
    def marked_bits(self) -> tuple[int, ...]:
        return tuple(int(b) for b in self.marked)

    @property
    def gap_min(self) -> float:
        """Minimum gap 1/sqrt(N) = 2^(-n/2), attained at s = 1/2."""
        return math.sqrt(1.0 / self.N)


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("interpolation parameter s must lie in [0, 1]")
    return s


def gap(instance: GroverInstance, s):
    """Energy gap dE(s) between ground and first excited state.

    Symmetric about s = 1/2 where it attains 1/sqrt(N); equals 1 at both
    endpoints.
    """
    s = _check_s(s)
    N = instance.N
    val = np.sqrt(1.0 + 4.0 * s * (1.0 - s) * (1.0 / N - 1.0))
    return val if val.ndim else float(val)


def gap_derivative(instance: GroverInstance, s):
    """d(dE)/ds, used for saddle curvatures; antisymmetric about s = 1/2."""
    s = _check_s(s)
    N = instance.N
    kappa = 1.0 - 1.0 / N
    u = s - 0.5
    val = 4.0 * kappa * u / np.sqrt(1.0 / N + 4.0 * kappa * u * u)
    return val if val.ndim else float(val)


def _hamiltonian_entries(instance: GroverInstance, s):
    """Entries (h11, h22, b) of the 2x2 Hamiltonian in {|w>, |w_perp>}."""
    N = instance.N
    h11 = 1.0 - s - (1.0 - s) / N
    h22 = 1.0 - (1.0 - s) * (N - 1.0) / N
    b = -(1.0 - s) * math.sqrt(N - 1.0) / N
    return h11, h22, b


def _eigen_pieces(instance: GroverInstance, s):
    """Vectorized eigenvector building blocks.

    Returns (q, b, r2, dE) with q = E1 - h11 > 0 and b the off-diagonal
    entry, such that the unnormalized ground / excited eigenvectors are
    (-q, b) and (b, q); r2 = q^2 + b^2 is their common squared norm.  q is
    evaluated through the cancellation-free form

        q = (dE - (1-2s))/2 + (1-s)/N,
        dE - (1-2s) = 4 s (1-s) / (N (dE + |1-2s|))     for s < 1/2,

    so the O(1/N) size of q before the crossing is not lost to rounding.
    """
    N = instance.N
    s = np.asarray(s, dtype=float)
    dE = np.sqrt(1.0 + 4.0 * s * (1.0 - s) * (1.0 / N - 1.0))
    lin = 1.0 - 2.0 * s
    # (dE - |lin|) without cancellation: dE^2 - lin^2 = 4 s (1-s) / N
    diff = 4.0 * s * (1.0 - s) / (N * (dE + np.abs(lin)))
    half = np.where(lin > 0.0, diff, diff + 2.0 * np.abs(lin)) / 2.0
    q = half + (1.0 - s) / N
    b = -(1.0 - s) * math.sqrt(N - 1.0) / N
    r2 = q * q + b * b
    return q, b, r2, dE


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """The 2x2 Hamiltonian at a single value of s, with its spectrum.

    The matrix is real symmetric, so the instantaneous eigenvectors can be
    (and are) chosen real; the Berry phase of the eigenbasis vanishes
    identically.
    """

    s: float
    matrix: np.ndarray
    energies: tuple[float, float]
    ground: np.ndarray
    excited: np.ndarray

    @property
    def splitting(self) -> float:
        return self.energies[1] - self.energies[0]


def effective_hamiltonian(instance: GroverInstance, s: float) -> EffectiveHamiltonian:
    """Build H(s) projected on {|w>, |w_perp>} and diagonalize it.

    Eigenvector signs are fixed so the largest-magnitude component is
    positive: at s = 0 the ground state is (1/sqrt(N), sqrt(1 - 1/N)), at
    s = 1 it is (1, 0).
    """
    s = float(_check_s(s))
    h11, h22, b = _hamiltonian_entries(instance, s)
    mat = np.array([[h11, b], [b, h22]])
    q, bb, r2, dE = _eigen_pieces(instance, s)
    r = math.sqrt(float(r2))
    ground = np.array([-float(q), float(bb)]) / r
    excited = np.array([float(bb), float(q)]) / r
    for v in (ground, excited):
        if v[np.argmax(np.abs(v))] < 0:
            v *= -1.0
    e0 = 0.5 * (1.0 - float(dE))
    return EffectiveHamiltonian(
        s=s, matrix=mat, energies=(e0, e0 + float(dE)), ground=ground, excited=excited
    )


def sigma_subspace(instance: GroverInstance, channel: str, qubit: int = 0) -> np.ndarray:
    """Projection of the single-qubit Pauli operator onto {|w>, |w_perp>}.

    For sigma^x the projection is the same for every qubit; sigma^z carries
    the sign (-1)^{w_a} of the marked bit; sigma^y is purely off-diagonal
    with magnitude 1/sqrt(N-1).
    """
    N = instance.N
    beta = 1.0 / math.sqrt(N - 1.0)
    if channel == "x":
        return np.array([[0.0, beta], [beta, (N - 2.0) / (N - 1.0)]], dtype=complex)
    if channel == "z":
        d = (-1.0) ** instance.marked_bits[qubit]
        return np.array([[d, 0.0], [0.0, -d / (N - 1.0)]], dtype=complex)
    if channel == "y":
        d = (-1.0) ** instance.marked_bits[qubit]
        return np.array([[0.0, -1j * d * beta], [1j * d * beta, 0.0]])
    raise ValueError(f"unknown Pauli channel {channel!r}")


def transition_profile(instance: GroverInstance, s):
    """Magnitude (1-s) / (sqrt(N) dE(s)) of the ground-excited matrix element.

    This is the envelope all lowest-order failure engines integrate; it is
    strongly peaked at the crossing, where it reaches 1/2 independent of N.
    """
    s = np.asarray(s, dtype=float)
    N = instance.N
    dE = np.sqrt(1.0 + 4.0 * s * (1.0 - s) * (1.0 / N - 1.0))
    val = (1.0 - s) / (math.sqrt(N) * dE)
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class MatrixElement:
    """An interaction-picture transition amplitude with its channel flags."""

    value: complex
    channel: str
    suppressed: bool = False
    sign_factor: float = 1.0


def matrix_element(
    instance: GroverInstance,
    qubit: int,
    channel: str,
    t: float,
    schedule,
) -> MatrixElement:
    """Interaction-picture Pauli matrix element between excited and ground
    branch at time t.

    For channel x this is -exp(-i Phi(t)) (1-s) / (sqrt(N) dE); channel z
    is the same amplitude with the extra sign (-1)^{w_a + 1}.  Channel y is
    returned with ``suppressed=True``: its magnitude is exactly
    1/sqrt(N-1) at every s, and the lowest-order failure engines exclude it.
    """
    T = schedule.T
    if not 0.0 <= t <= T * (1.0 + 1e-12):
        raise ValueError(f"time {t} outside [0, T={T}]")
    s = float(schedule.s_of_t(t))
    phi = float(schedule.phase(t))
    phase = np.exp(-1j * phi)
    if channel == "x":
        return MatrixElement(complex(-phase * transition_profile(instance, s)), "x")
    if channel == "z":
        sign = (-1.0) ** (instance.marked_bits[qubit] + 1)
        return MatrixElement(
            complex(-phase * sign * transition_profile(instance, s)), "z",
            sign_factor=sign,
        )
    if channel == "y":
        d = (-1.0) ** instance.marked_bits[qubit]
        val = complex(phase * (-1j) * d / math.sqrt(instance.N - 1.0))
        return MatrixElement(val, "y", suppressed=True)
    raise ValueError(f"unknown Pauli channel {channel!r}")


def phase_integral(schedule, t):
    """Accumulated dynamical phase Phi(t) = int_0^t dE(tau) dtau.

    Thin accessor over the schedule's cached phase interpolant; vectorized
    over t.
    """
    return schedule.phase(t)


def adiabatic_coupling(instance: GroverInstance, s):
    """|<E1| dH/ds |E0>| evaluated from the 2x2 model; dH/ds is the fixed
    matrix P_psi0 - P_w, so the s dependence enters only through the
    eigenvectors."""
    N = instance.N
    s = np.asarray(s, dtype=float)
    q, b, r2, _ = _eigen_pieces(instance, s)
    w1 = math.sqrt(N - 1.0) / N
    k11 = 1.0 / N - 1.0
    k22 = (N - 1.0) / N
    # (b, q) . K . (-q, b) with K = [[k11, w1], [w1, k22]]
    val = (b * (-k11 * q + w1 * b) + q * (-w1 * q + k22 * b)) / r2
    out = np.abs(val)
    return out if out.ndim else float(out)


def adiabatic_error_estimate(instance: GroverInstance, schedule, n_grid: int = 2001) -> float:
    """Max over the sweep of |<E1| dH/dt |E0>| / dE^2, the size of the
    first-order nonadiabatic correction.

    Runtimes are normalized by holding this estimate at a fixed target, so
    runtime scaling laws can be compared across N on an equal-error footing.
    The maximum sits at (or very near) the crossing; the search grid is
    refined there like the schedule's own grid.
    """
    s = _error_grid(instance, n_grid)
    dE = gap(instance, s)
    est = schedule.s_dot_of_s(s) * adiabatic_coupling(instance, s) / dE ** 2
    return float(np.max(est))


def _error_grid(instance: GroverInstance, n_grid: int) -> np.ndarray:
    """Grid on [0,1] refined geometrically toward s = 1/2."""
    backbone = np.linspace(0.0, 1.0, n_grid // 2)
    u_min = 0.01 * instance.gap_min
    levels = np.geomspace(u_min, 0.5, n_grid // 4)
    return np.unique(np.concatenate([backbone, 0.5 - levels, [0.5], 0.5 + levels]))
