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

import math

import numpy as np
import pytest

from spinmechworks import hilbert, units
from spinmechworks.types import FockBasis, GridSpec, QuantumState
from spinmechworks.utils.exceptions import BasisMismatchError, DomainError, GridError, TruncationError, \
    ValidityWarning
from spinmechworks.utils.grids import hermite_projections

MASS = units.mass_from_diameter(30e-9, 3500.0)
BASIS = FockBasis(dim=64, omega=units.hz_to_angular(20e3), mass=MASS)


def test_ladder_commutator():
    a, a_dag = hilbert.ladder_ops(BASIS)
    commutator = a.entries @ a_dag.entries - a_dag.entries @ a.entries
    # the truncation only spoils the last diagonal entry
    assert(np.allclose(commutator[:-1, :-1], np.eye(BASIS.dim - 1)))
    assert(np.allclose(hilbert.number_op(BASIS).entries, a_dag.entries @ a.entries))


@pytest.mark.parametrize("alpha", [0.5, 1.5j, 2.0 - 1.0j])
def test_displaced_vacuum_is_coherent(alpha):
    displaced = hilbert.displacement(BASIS, alpha).entries[:, 0]
    n = np.arange(BASIS.dim)
    expected = np.exp(-abs(alpha) ** 2 / 2) * np.array([alpha ** k / math.sqrt(math.factorial(k)) for k in n])
    assert(np.allclose(displaced, expected, atol=1e-10))


def test_displacement_leakage_warning():
    with pytest.warns(ValidityWarning):
        hilbert.displacement(FockBasis(dim=16, omega=1.0, mass=1.0), 4.0)


def test_spin_vectors():
    assert(np.array_equal(hilbert.spin_vector(2, "-"), [0, 1]))
    assert(np.array_equal(hilbert.spin_vector(3, "+1"), [1, 0, 0]))
    with pytest.raises(DomainError):
        hilbert.spin_vector(2, "0")
    with pytest.raises(DomainError):
        hilbert.spin_vector(4, "+")


def test_fock_state_layout():
    state = hilbert.fock_state(BASIS, 3, hilbert.spin_vector(2, "-"))
    assert(state.spin_dim == 2)
    assert(state.amplitudes[BASIS.dim + 3] == 1.0)
    with pytest.raises(DomainError):
        hilbert.fock_state(BASIS, BASIS.dim)


def test_states_must_be_normalized():
    with pytest.raises(DomainError):
        QuantumState(np.ones(BASIS.dim), 1, BASIS)


def test_fidelity_basis_mismatch():
    other = FockBasis(dim=32, omega=BASIS.omega, mass=MASS)
    with pytest.raises(BasisMismatchError):
        hilbert.fidelity(hilbert.fock_state(BASIS, 0), hilbert.fock_state(other, 0))


def test_reduced_fidelity_traces_spin():
    mech = np.zeros(BASIS.dim)
    mech[1] = 1.0
    state = hilbert.product_state([1.0, 1.0j], mech, BASIS)
    assert(hilbert.reduced_fidelity(state, hilbert.fock_state(BASIS, 1)) == pytest.approx(1.0))
    assert(hilbert.reduced_fidelity(state, hilbert.fock_state(BASIS, 0)) == pytest.approx(0.0))


def test_mechanical_state_needs_single_component():
    state = hilbert.fock_state(BASIS, 0, np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        hilbert.mechanical_state(state)
    assert(hilbert.mechanical_state(state, 1).spin_dim == 1)


def test_coherent_state_moments():
    alpha = 1.5
    state = QuantumState(hilbert.displacement(BASIS, alpha).entries[:, 0], 1, BASIS)
    (mean, std), = hilbert.position_moments(state)
    a0 = units.zero_point_width(MASS, BASIS.omega)
    assert(mean == pytest.approx(2 * a0 * alpha, rel=1e-9))
    assert(std == pytest.approx(a0, rel=1e-9))


def test_position_moments_of_empty_component():
    moments = hilbert.position_moments(hilbert.fock_state(BASIS, 0, hilbert.spin_vector(3, "+1")))
    assert(np.isnan(moments[1][0]))


@pytest.mark.parametrize(
    "nbar,expected",
    [
        (0.0, [1.0, 0.0]),
        (0.01, [1.01 / 1.02, 0.01 / 1.02]),
        (0.1, [1.1 / 1.2, 0.1 / 1.2]),
    ]
)
def test_two_level_thermal_weights(nbar, expected):
    assert(np.allclose(hilbert.thermal_weights(nbar, 2), expected, rtol=1e-12))


def test_thermal_weights_are_geometric():
    weights = hilbert.thermal_weights(0.5, 6)
    assert(np.sum(weights) == pytest.approx(1.0))
    assert(np.allclose(weights[1:] / weights[:-1], 1 / 3))
    with pytest.raises(DomainError):
        hilbert.thermal_weights(-0.1, 2)


def test_frame_change_same_frequency_is_identity():
    state = hilbert.fock_state(BASIS, 2)
    changed = hilbert.frame_change(state, BASIS.omega)
    assert(np.array_equal(changed.amplitudes, state.amplitudes))


def test_sudden_softening_squeezes_vacuum():
    stiff = FockBasis(dim=64, omega=units.hz_to_angular(100e3), mass=MASS)
    soft = hilbert.frame_change(hilbert.fock_state(stiff, 0), units.hz_to_angular(20e3))
    populations = soft.populations()
    # overlap of two ground states is 2 sqrt(w1 w2) / (w1 + w2)
    assert(populations[0] == pytest.approx(2 * math.sqrt(5) / 6, abs=1e-6))
    assert(np.sum(populations[1::2]) < 1e-12)
    assert(soft.basis.omega == units.hz_to_angular(20e3))


def test_vacuum_on_grid():
    a0 = units.zero_point_width(MASS, BASIS.omega)
    grid = GridSpec(n_points=1024, extent=40 * a0)
    psi = hilbert.to_grid(hilbert.fock_state(BASIS, 0), grid)
    expected = np.exp(-grid.positions ** 2 / (4 * a0 ** 2)) / (2 * np.pi * a0 ** 2) ** 0.25
    assert(np.allclose(psi.density, expected ** 2, rtol=0, atol=1e-9 * np.max(expected ** 2)))


def test_grid_too_narrow():
    a0 = units.zero_point_width(MASS, BASIS.omega)
    with pytest.raises(GridError):
        hilbert.to_grid(hilbert.fock_state(BASIS, 0), GridSpec(n_points=1024, extent=4 * a0))


def test_parity_is_an_involution_that_flips_the_ladder():
    P = hilbert.parity(BASIS).entries
    a, _ = hilbert.ladder_ops(BASIS)
    assert(np.array_equal(P @ P, np.eye(BASIS.dim)))
    assert(np.allclose(P @ a.entries @ P, -a.entries, atol=1e-15))


@pytest.mark.parametrize("alpha", [0.5, 1.5j, 2.0 - 1.0j])
def test_opposite_displacements_cancel(alpha):
    forward = hilbert.displacement(BASIS, alpha).entries
    backward = hilbert.displacement(BASIS, -alpha).entries
    assert(np.allclose(forward @ backward, np.eye(BASIS.dim), atol=1e-10))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_frame_change_round_trip(n):
    stiff = FockBasis(dim=64, omega=units.hz_to_angular(100e3), mass=MASS)
    state = hilbert.fock_state(stiff, n)
    soft = hilbert.frame_change(state, units.hz_to_angular(20e3))
    back = hilbert.frame_change(soft, stiff.omega)
    assert(back.basis == stiff)
    assert(hilbert.fidelity(state, back) == pytest.approx(1.0, abs=1e-7))


def test_frame_change_compares_retained_probability(monkeypatch):
    def lossy(samples, xi, n_max):
        # keeps the norm above 1 - 1e-6 while the probability drops below it
        return hermite_projections(samples, xi, n_max) * np.sqrt(1 - 1.5e-6)

    monkeypatch.setattr(hilbert, "hermite_projections", lossy)
    with pytest.raises(TruncationError):
        hilbert.frame_change(hilbert.fock_state(BASIS, 0), 1.01 * BASIS.omega)


def test_first_excited_state_has_central_node():
    a0 = units.zero_point_width(MASS, BASIS.omega)
    grid = GridSpec(n_points=1024, extent=40 * a0)
    density = hilbert.to_grid(hilbert.fock_state(BASIS, 1), grid).density
    assert(grid.positions[grid.n_points // 2] == 0.0)
    assert(density[grid.n_points // 2] < 1e-12 * np.max(density))


@pytest.mark.parametrize(
    "first,second",
    [
        ([1.0], [0.0, 1.0]),
        ([1.0, 1.0], [1.0, 1.0j]),
        ([1.0, 0.0, 1.0], [0.0, 1.0, 1.0]),
    ]
)
def test_grid_overlap_matches_fock_fidelity(first, second):
    def state(amplitudes):
        padded = np.zeros(BASIS.dim, dtype=np.complex128)
        padded[:len(amplitudes)] = amplitudes
        return QuantumState.normalized(padded, 1, BASIS)

    a, b = state(first), state(second)
    a0 = units.zero_point_width(MASS, BASIS.omega)
    grid = GridSpec(n_points=1024, extent=40 * a0)
    overlap = np.sum(np.conj(hilbert.to_grid(a, grid).values) * hilbert.to_grid(b, grid).values) * grid.spacing
    assert(abs(overlap) ** 2 == pytest.approx(hilbert.fidelity(a, b), abs=1e-8))
