#
# Copyright 2020 NVIDIA CORPORATION.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Model Hamiltonians, exact propagation and the closed-form displaced-frame propagator."""

from functools import lru_cache
import logging
import math
import warnings

import numpy as np
import qutip

from spinmechworks import hilbert, units
from spinmechworks.types import EvolutionResult, HamiltonianKind, MagnusBranches, \
    OperatorMatrix, ProtocolSettings, QuantumState, SpinLevels
from spinmechworks.utils.exceptions import BasisMismatchError, BranchResolutionError, DomainError, \
    TruncationError, ValidityWarning

logger = logging.getLogger(__name__)


def default_fock_dim(params, n=0):
    """Truncation large enough for the displaced states of a cat preparation.

    Args:
        params : ExperimentParams instance.
        n : Initial Fock level.

    Returns:
        max(64, ceil(4 (D_m / 4 a2)^2) + 20) + 2n.
    """
    m = units.mass_from_diameter(params.diameter, params.density)
    D_m = units.max_separation(params.gradient, m, params.trap_freq_final)
    a2 = units.zero_point_width(m, params.trap_freq_final)
    return max(64, math.ceil(4 * (D_m / (4 * a2)) ** 2) + 20) + 2 * n


@lru_cache(maxsize=8)
def build_hamiltonian(spec, basis):
    """Build a model Hamiltonian H/hbar in rad/s.

    EFFECTIVE   ω a†a + Ω σz + λ (σ+ + σ−)(a + a†)
    SPIN_MECH   ω a†a + λ S_z (a + a†)
    JC          ω a†a + Ω σz + λ (σ+ a + σ− a†),  Ω = ω/2
    ANTI_JC     ω a†a + Ω σz + λ (σ+ a† + σ− a),  Ω = −ω/2
    QND         χ σz a†a

    Results are cached, so repeated propagation with the same spec and basis
    reuses one eigendecomposition.

    Args:
        spec : HamiltonianSpec instance.
        basis : FockBasis of the mechanical mode.

    Returns:
        Hermitian OperatorMatrix over spin ⊗ ladder.
    """
    dim = basis.dim
    a = qutip.destroy(dim)
    n = qutip.num(dim)
    omega, coupling = spec.omega_m, spec.coupling
    spin_blocks = False
    if spec.kind == HamiltonianKind.SPIN_MECH:
        hamiltonian = omega * qutip.tensor(qutip.qeye(3), n) \
            + coupling * qutip.tensor(qutip.jmat(1, "z"), a + a.dag())
        spin_blocks = True
    elif spec.kind == HamiltonianKind.QND:
        chi = units.qnd_chi(spec.Omega, coupling, omega)
        hamiltonian = chi * qutip.tensor(qutip.sigmaz(), n)
        spin_blocks = True
    else:
        free = omega * qutip.tensor(qutip.qeye(2), n) + spec.Omega * qutip.tensor(qutip.sigmaz(), qutip.qeye(dim))
        if spec.kind == HamiltonianKind.EFFECTIVE:
            interaction = qutip.tensor(qutip.sigmap() + qutip.sigmam(), a + a.dag())
        elif spec.kind == HamiltonianKind.JC:
            interaction = qutip.tensor(qutip.sigmap(), a) + qutip.tensor(qutip.sigmam(), a.dag())
        elif spec.kind == HamiltonianKind.ANTI_JC:
            interaction = qutip.tensor(qutip.sigmap(), a.dag()) + qutip.tensor(qutip.sigmam(), a)
        else:
            raise DomainError("Unknown Hamiltonian kind {}".format(spec.kind))
        hamiltonian = free + coupling * interaction
    logger.debug("Built {} Hamiltonian with spin_dim {} and {} levels".format(spec.kind.name, spec.spin_dim, dim))
    return OperatorMatrix(hamiltonian.full(), basis, spin_dim=spec.spin_dim, hermitian=True, spin_blocks=spin_blocks)


def propagate_amplitudes(H, amplitudes, times):
    """Apply exp(−iHt) to an amplitude vector for every t.

    Args:
        H : Hermitian OperatorMatrix.
        amplitudes : Initial amplitude vector.
        times : Sequence of times [s].

    Returns:
        Complex array of shape (len(times), size).
    """
    energies, vectors = H.eigensystem
    coefficients = vectors.conj().T @ np.asarray(amplitudes, dtype=np.complex128)
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=np.float64), energies))
    return (phases * coefficients) @ vectors.T


def evolve(H, psi0, times):
    """Propagate a state under a time independent Hamiltonian.

    Args:
        H : Hermitian OperatorMatrix in rad/s.
        psi0 : Initial QuantumState in the same basis.
        times : Sequence of times [s].

    Returns:
        EvolutionResult with one state per time.
    """
    if not H.hermitian:
        raise DomainError("evolve requires a Hermitian operator")
    if psi0.spin_dim != H.spin_dim or not psi0.basis.same_ladder(H.basis):
        raise BasisMismatchError("State and Hamiltonian live in different spaces")
    times = np.asarray(times, dtype=np.float64)
    trajectory = propagate_amplitudes(H, psi0.amplitudes, times)

    norms = np.linalg.norm(trajectory, axis=1)
    norm_drift = float(np.max(np.abs(1.0 - norms))) if times.size else 0.0
    energies = np.einsum("ti,ti->t", trajectory.conj(), trajectory @ H.entries.T).real
    scale = max(np.max(np.abs(H.eigensystem[0])), np.finfo(float).tiny)
    energy_drift = float(np.max(np.abs(energies - energies[0])) / scale) if times.size else 0.0
    if norm_drift > 1e-9 or energy_drift > 1e-9:
        logger.warning("Propagation drift above tolerance: norm {:.3g}, energy {:.3g}".format(norm_drift, energy_drift))
    states = [QuantumState(row, psi0.spin_dim, psi0.basis) for row in trajectory]
    return EvolutionResult(times=times, states=states, norm_drift=norm_drift, energy_drift=energy_drift)


def magnus_oracle(n, coupling, omega_m, t, basis):
    """Closed-form propagation of |n⟩ under the spin-conditioned displacement Hamiltonian.

    For each S_z = ±1 returns e^{−iω a†a t} exp(α a − α* a†)|n⟩ with
    α(t) = S_z λ (e^{−iωt} − 1)/ω. The exact state equals e^{iφ} times this, where
    φ = λ²(t/ω − sin(ωt)/ω²) is reported as global_phase.

    Args:
        n : Initial Fock level.
        coupling : λ [rad/s].
        omega_m : Trap frequency [rad/s].
        t : Time [s].
        basis : FockBasis with basis.omega equal to omega_m.

    Returns:
        MagnusBranches instance.
    """
    if not 0 <= n < basis.dim:
        raise DomainError("Fock level {} outside a {}-level basis".format(n, basis.dim))
    if not np.isclose(basis.omega, omega_m, rtol=1e-12, atol=0.0):
        raise BasisMismatchError("Basis frequency {} differs from omega_m {}".format(basis.omega, omega_m))
    free_phase = np.exp(-1j * omega_m * t * np.arange(basis.dim))
    states, alphas = {}, {}
    for s_z in (1, -1):
        alpha = s_z * coupling * (np.exp(-1j * omega_m * t) - 1) / omega_m
        # exp(α a − α* a†) is D(−α*)
        column = hilbert.displacement(basis, -np.conj(alpha)).entries[:, n]
        states[s_z] = QuantumState.normalized(free_phase * column, 1, basis)
        alphas[s_z] = complex(alpha)
    global_phase = coupling ** 2 * (t / omega_m - np.sin(omega_m * t) / omega_m ** 2)
    return MagnusBranches(states=states, alpha=alphas, global_phase=float(global_phase))


def check_truncation(state, tolerance=1e-8):
    """Raise TruncationError when the top tenth of the ladder holds more than tolerance."""
    populations = state.populations()
    top = state.basis.dim - max(1, math.ceil(state.basis.dim / 10))
    leaked = float(np.sum(populations[top:]))
    if leaked > tolerance:
        raise TruncationError("{:.3g} of the probability sits in the top levels of a {}-level basis".format(
            leaked, state.basis.dim))


def apply_half_period_map(mech, coupling, omega):
    """Spin-conditioned split of an oscillator state after half a trap period.

    Applies (−1)^{a†a} D(±2λ/ω) to the mechanical state for S_z = ±1 and returns
    (|+1⟩ ⊗ branch₊ + |−1⟩ ⊗ branch₋)/√2, the exact propagator at t = π/ω up to a
    global phase.

    Args:
        mech : QuantumState with spin_dim 1 in the ladder of omega.
        coupling : λ at omega [rad/s].
        omega : Trap frequency [rad/s].

    Returns:
        QuantumState with spin_dim 3.
    """
    if mech.spin_dim != 1:
        raise DomainError("A bare oscillator state is required")
    if not np.isclose(mech.basis.omega, omega, rtol=1e-12, atol=0.0):
        raise BasisMismatchError("State ladder {} differs from trap frequency {}".format(mech.basis.omega, omega))
    beta = 2 * coupling / omega
    flip = hilbert.parity(mech.basis).entries
    branches = [flip @ (hilbert.displacement(mech.basis, s_z * beta).entries @ mech.amplitudes) for s_z in (1, -1)]
    amplitudes = np.concatenate([branches[0], np.zeros(mech.basis.dim), branches[1]]) / np.sqrt(2)
    state = QuantumState.normalized(amplitudes, int(SpinLevels.TRIPLET), mech.basis)
    check_truncation(state)
    return state


def cat_state(n, params, basis):
    """Spin-entangled spatial superposition reached after half a period of the final trap.

    Args:
        n : Initial Fock level.
        params : ExperimentParams instance.
        basis : FockBasis of the final trap frequency.

    Returns:
        QuantumState (|+1⟩|branch₊⟩ + |−1⟩|branch₋⟩)/√2 with spin_dim 3.
    """
    m = units.mass_from_diameter(params.diameter, params.density)
    if not np.isclose(basis.omega, params.trap_freq_final, rtol=1e-12, atol=0.0):
        raise BasisMismatchError("cat_state needs the ladder of the final trap frequency")
    if not np.isclose(basis.mass, m, rtol=1e-12, atol=0.0):
        raise BasisMismatchError("Basis mass {} differs from particle mass {}".format(basis.mass, m))
    coupling = units.coupling_lambda(params.gradient, m, params.trap_freq_final)
    return apply_half_period_map(hilbert.fock_state(basis, n), coupling, params.trap_freq_final)


def branch_splitting(params):
    """Spin splitting of the two separated branches [rad/s]."""
    m = units.mass_from_diameter(params.diameter, params.density)
    D_m = units.max_separation(params.gradient, m, params.trap_freq_final)
    return units.spin_splitting(params.gradient, D_m)


def disentangle(state, params, sign=1, settings=ProtocolSettings()):
    """Map both spin branches onto |0⟩ with impulsive conditional pulses.

    |+1⟩ ⊗ branch₊ becomes |0⟩ ⊗ branch₊ and |−1⟩ ⊗ branch₋ becomes sign·|0⟩ ⊗ branch₋,
    leaving |0⟩ ⊗ (branch₊ + sign·branch₋) renormalized with the exact overlap.
    The pulses are only selective when the branch splitting exceeds
    settings.min_splitting_ratio pulse linewidths.

    Args:
        state : QuantumState with spin_dim 3 and an empty |0⟩ component.
        params : ExperimentParams that produced the state.
        sign : +1 for ψ₊, −1 for ψ₋.
        settings : ProtocolSettings with the pulse linewidth and selectivity ratio.

    Returns:
        QuantumState with spin_dim 3, populated only in |0⟩.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if state.spin_dim != int(SpinLevels.TRIPLET):
        raise DomainError("disentangle acts on spin_dim 3 states")
    components = state.components()
    if np.linalg.norm(components[1]) > 1e-9:
        raise DomainError("The |0> spin level is already populated")

    splitting = branch_splitting(params)
    required = settings.min_splitting_ratio * settings.pulse_linewidth
    if splitting == 0:
        warnings.warn("Branches are not separated, pulses act on a single position", ValidityWarning)
    elif splitting < required:
        raise BranchResolutionError(
            "Branch splitting 2pi x {:.4g} Hz is below {} pulse linewidths (2pi x {:.4g} Hz)".format(
                units.angular_to_hz(splitting), settings.min_splitting_ratio,
                units.angular_to_hz(settings.pulse_linewidth)))
    logger.info("Disentangling with branch splitting 2pi x {:.4g} Hz".format(units.angular_to_hz(splitting)))

    combined = components[0] + sign * components[2]
    if np.linalg.norm(combined) < 1e-12:
        raise BranchResolutionError("The two branches cancel, no state is left for sign {}".format(sign))
    amplitudes = np.zeros_like(components)
    amplitudes[1] = combined
    return QuantumState.normalized(amplitudes.reshape(-1), state.spin_dim, state.basis)
