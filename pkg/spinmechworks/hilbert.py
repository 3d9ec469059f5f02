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
"""Truncated Fock space states, operators and basis changes."""

import logging
import math
import warnings

import numpy as np
import qutip
import scipy.linalg

from spinmechworks import units
from spinmechworks.types import GridWavefunction, OperatorMatrix, QuantumState, SpinLevels
from spinmechworks.utils.exceptions import BasisMismatchError, DomainError, GridError, TruncationError, \
    ValidityWarning
from spinmechworks.utils.grids import hermite_projections, hermite_series

logger = logging.getLogger(__name__)

# Spin vectors, index order follows the spin-major amplitude layout.
SPIN_LABELS = {
    SpinLevels.QUBIT: {"+": 0, "-": 1},
    SpinLevels.TRIPLET: {"+1": 0, "0": 1, "-1": 2},
}


def ladder_ops(basis):
    """Annihilation and creation operators of a truncated ladder.

    Args:
        basis : FockBasis to build the operators on.

    Returns:
        Tuple (a, a_dagger) of OperatorMatrix.
    """
    a = qutip.destroy(basis.dim).full()
    return OperatorMatrix(a, basis), OperatorMatrix(a.conj().T, basis)


def number_op(basis):
    """Number operator a†a."""
    return OperatorMatrix(qutip.num(basis.dim).full(), basis, hermitian=True)


def identity(basis, spin_dim=1):
    """Identity over spin ⊗ ladder."""
    return OperatorMatrix(np.eye(spin_dim * basis.dim), basis, spin_dim=spin_dim, hermitian=True, unitary=True)


def parity(basis):
    """Parity operator (−1)^{a†a}."""
    signs = (-1.0) ** np.arange(basis.dim)
    return OperatorMatrix(np.diag(signs), basis, hermitian=True, unitary=True)


def displacement(basis, alpha):
    """Displacement operator D(α) = exp(α a† − α* a).

    The anti-Hermitian generator is exponentiated through the eigendecomposition of
    the Hermitian matrix i(α a† − α* a). A ValidityWarning is emitted when the
    displaced vacuum leaks more than 1e-6 of its probability into the top tenth of
    the ladder.

    Args:
        basis : FockBasis to build the operator on.
        alpha : Complex displacement amplitude.

    Returns:
        Unitary OperatorMatrix.
    """
    a = qutip.destroy(basis.dim).full()
    generator = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
    energies, vectors = scipy.linalg.eigh(generator)
    entries = (vectors * np.exp(-1j * energies)) @ vectors.conj().T
    top = basis.dim - max(1, math.ceil(basis.dim / 10))
    leaked = np.sum(np.abs(entries[top:, 0]) ** 2)
    if leaked > 1e-6:
        warnings.warn("Displacement {} leaks {:.3g} of the vacuum into the top levels of a {}-level basis".format(
            alpha, leaked, basis.dim), ValidityWarning)
    return OperatorMatrix(entries, basis, unitary=True)


def spin_vector(spin_dim, label):
    """Return the basis vector of a spin level.

    Args:
        spin_dim : 2 for {|+⟩, |−⟩} or 3 for {|+1⟩, |0⟩, |−1⟩}.
        label : "+", "-" for qubits; "+1", "0", "-1" for the triplet.

    Returns:
        Complex unit vector of length spin_dim.
    """
    try:
        index = SPIN_LABELS[SpinLevels(spin_dim)][label]
    except (KeyError, ValueError) as e:
        raise DomainError("No spin level {} in a spin_dim {} space".format(label, spin_dim)) from e
    vector = np.zeros(spin_dim, dtype=np.complex128)
    vector[index] = 1.0
    return vector


def product_state(spin, mech, basis):
    """Normalized state spin ⊗ mech.

    Args:
        spin : Spin amplitudes, length 2 or 3, or None for a bare oscillator.
        mech : Ladder amplitudes of length basis.dim.
        basis : FockBasis of the mechanical amplitudes.

    Returns:
        QuantumState instance.
    """
    mech = np.asarray(mech, dtype=np.complex128)
    if mech.size != basis.dim:
        raise BasisMismatchError("Mechanical amplitudes of size {} for a {}-level basis".format(mech.size, basis.dim))
    if spin is None:
        return QuantumState.normalized(mech, 1, basis)
    spin = np.asarray(spin, dtype=np.complex128)
    return QuantumState.normalized(np.kron(spin, mech), spin.size, basis)


def fock_state(basis, n, spin=None):
    """Number state |n⟩, optionally tensored with a spin vector."""
    if not 0 <= n < basis.dim:
        raise DomainError("Fock level {} outside a {}-level basis".format(n, basis.dim))
    mech = np.zeros(basis.dim, dtype=np.complex128)
    mech[n] = 1.0
    return product_state(spin, mech, basis)


def mechanical_state(state, spin_index=None):
    """Extract the oscillator state of one spin component, renormalized.

    Args:
        state : QuantumState instance.
        spin_index : Spin component to keep; None picks the only populated one.

    Returns:
        QuantumState with spin_dim 1.
    """
    components = state.components()
    if spin_index is None:
        weights = np.sum(np.abs(components) ** 2, axis=1)
        populated = np.flatnonzero(weights > 1e-12)
        if populated.size != 1:
            raise DomainError("State is spread over spin components {}, pick one".format(populated.tolist()))
        spin_index = int(populated[0])
    return QuantumState.normalized(components[spin_index], 1, state.basis)


def fidelity(a, b):
    """Overlap |⟨a|b⟩|² of two states in the same basis."""
    a.check_compatible(b)
    return float(min(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2, 1.0))


def reduced_fidelity(state, target):
    """Fidelity of the oscillator state, traced over spin, with a pure target.

    Args:
        state : QuantumState with any spin_dim.
        target : QuantumState with spin_dim 1 in the same ladder.

    Returns:
        sum_s |⟨target|ψ_s⟩|².
    """
    if target.spin_dim != 1 or not state.basis.same_ladder(target.basis):
        raise BasisMismatchError("Target must be a bare oscillator state in the same ladder")
    overlaps = state.components() @ target.amplitudes.conj()
    return float(min(np.sum(np.abs(overlaps) ** 2), 1.0))


def oscillator_length(basis):
    """Return sqrt(hbar / (m omega)) of a ladder, i.e. sqrt(2) a0."""
    return np.sqrt(2.0) * units.zero_point_width(basis.mass, basis.omega)


def position_moments(state):
    """Position mean and standard deviation per spin component.

    Uses x = a0 (a + a†). Components without population report NaN.

    Args:
        state : QuantumState instance.

    Returns:
        List of (mean, std) tuples in metres, one per spin component.
    """
    a0 = units.zero_point_width(state.basis.mass, state.basis.omega)
    a = qutip.destroy(state.basis.dim).full()
    x = a0 * (a + a.conj().T)
    moments = []
    for component in state.components():
        weight = np.vdot(component, component).real
        if weight < 1e-15:
            moments.append((np.nan, np.nan))
            continue
        mean = np.vdot(component, x @ component).real / weight
        second = np.vdot(component, x @ (x @ component)).real / weight
        moments.append((mean, np.sqrt(max(second - mean ** 2, 0.0))))
    return moments


def thermal_weights(nbar, n_max):
    """Bose-Einstein populations of the lowest n_max levels, renormalized.

    Args:
        nbar : Mean phonon number of the untruncated distribution.
        n_max : Number of retained levels.

    Returns:
        Array of n_max probabilities summing to one.
    """
    if nbar < 0:
        raise DomainError("Mean phonon number must not be negative")
    if n_max < 1:
        raise DomainError("At least one level must be retained")
    n = np.arange(n_max)
    weights = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    return weights / np.sum(weights)


def frame_change(state, new_omega, n_points=2 ** 14):
    """Re-express a state in the ladder of a trap with a different frequency.

    The wavefunction of every spin component is sampled on a position grid wide
    enough for both ladders and projected onto the new eigenfunctions with
    trapezoidal quadrature. Even and odd parts are projected separately so the
    two parity sectors never mix.

    Args:
        state : QuantumState instance.
        new_omega : Trap frequency of the target ladder [rad/s].
        n_points : Quadrature points.

    Returns:
        QuantumState in FockBasis(dim, new_omega, mass).
    """
    if not new_omega > 0:
        raise DomainError("Trap frequency must be positive")
    old_basis = state.basis
    new_basis = old_basis.__class__(dim=old_basis.dim, omega=new_omega, mass=old_basis.mass)
    if np.isclose(new_omega, old_basis.omega, rtol=1e-12, atol=0.0):
        return QuantumState(state.amplitudes, state.spin_dim, new_basis)

    ell_old = oscillator_length(old_basis)
    ell_new = oscillator_length(new_basis)
    half_extent = 1.2 * max(ell_old, ell_new) * (np.sqrt(2 * old_basis.dim + 1) + 6)
    x = np.linspace(-half_extent, half_extent, n_points)
    logger.debug("Frame change {:.6g} -> {:.6g} rad/s over {} points".format(old_basis.omega, new_omega, n_points))

    components = state.components()
    even = np.arange(old_basis.dim) % 2 == 0
    new_components = np.zeros_like(components)
    for mask in (even, ~even):
        sector = np.where(mask, components, 0)
        samples = hermite_series(sector, x / ell_old) * np.sqrt(ell_new / ell_old)
        projected = hermite_projections(samples, x / ell_new, new_basis.dim)
        new_components[:, mask] = projected[:, mask]

    retained = np.vdot(new_components, new_components).real
    if retained < 1 - 1e-6:
        raise TruncationError("Frame change to {} rad/s keeps only {:.9f} of the norm in {} levels".format(
            new_omega, retained, new_basis.dim))
    return QuantumState.normalized(new_components.reshape(-1), state.spin_dim, new_basis)


def to_grid(state, grid):
    """Sample every spin component of a state on a position grid.

    Args:
        state : QuantumState instance.
        grid : GridSpec covering at least six standard deviations of each component.

    Returns:
        GridWavefunction with one row per spin component.
    """
    for mean, std in position_moments(state):
        if np.isfinite(mean) and abs(mean) + 6 * std > grid.extent / 2:
            raise GridError("Grid extent {:.4g} m does not cover |<x>| + 6 std = {:.4g} m".format(
                grid.extent, abs(mean) + 6 * std))
    ell = oscillator_length(state.basis)
    values = hermite_series(state.components(), grid.positions / ell) / np.sqrt(ell)
    norm = np.sum(np.abs(values) ** 2) * grid.spacing
    if abs(norm - 1.0) > 1e-6:
        raise GridError("Grid spacing {:.4g} m does not resolve the state, discrete norm {:.9f}".format(
            grid.spacing, norm))
    return GridWavefunction(values, grid, state.basis.mass)
