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

from spinmechworks import hilbert, protocols, units
from spinmechworks.types import CouplingParams, ExperimentParams, NumericsSettings, PulseKind, TransferMode
from spinmechworks.utils.exceptions import DomainError, SingularityError, TruncationError, ValidityWarning

SCAN_NUMERICS = NumericsSettings(fock_dim=64, convergence_check=False)
CAT_NUMERICS = NumericsSettings(convergence_check=False)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_ideal_fock_ladder(n, section3_coupling, fast_numerics):
    result = protocols.fock_ladder(n, TransferMode.IDEAL_RWA, section3_coupling, fast_numerics)
    assert(result.summary["fidelity"] == pytest.approx(1.0, abs=1e-10))
    assert(result.fidelities[-1] == pytest.approx(1.0, abs=1e-10))


def test_fock_ladder_step_durations(section3_coupling, fast_numerics):
    result = protocols.fock_ladder(5, "ideal_RWA", section3_coupling, fast_numerics)
    t1 = result.summary["t1"]
    assert(t1 == np.pi / (2 * section3_coupling.coupling))
    assert([step.duration for step in result.steps] == [t1 / math.sqrt(i) for i in range(1, 6)])
    assert([step.kind for step in result.steps] == [PulseKind.JC, PulseKind.ANTI_JC] * 2 + [PulseKind.JC])


def test_fock_ladder_under_full_hamiltonian(section3_coupling, fast_numerics):
    params = CouplingParams.from_ratio(10, section3_coupling.coupling, mass=section3_coupling.mass)
    result = protocols.fock_ladder(1, TransferMode.FULL_EQ1, params, fast_numerics)
    assert(result.summary["fidelity"] > 0.99)
    assert(0.5 * result.summary["t1"] <= result.steps[0].duration <= 1.5 * result.summary["t1"])


def test_fock_ladder_rejects_bad_targets(section3_coupling):
    with pytest.raises(DomainError):
        protocols.fock_ladder(-1, TransferMode.IDEAL_RWA, section3_coupling)
    with pytest.raises(DomainError):
        protocols.fock_ladder(20, TransferMode.IDEAL_RWA, section3_coupling, NumericsSettings(fock_dim=32))


@pytest.mark.parametrize("s", [6.3, 10.0])
def test_superposition_transfer_peak_fidelity(s):
    params = CouplingParams.from_ratio(s, units.hz_to_angular(52e3))
    c = 1 / np.sqrt(2)
    result = protocols.superposition_transfer(c, c, TransferMode.FULL_EQ1, params, SCAN_NUMERICS)
    assert(result.summary["peak_fidelity"] > 0.99)
    assert(result.summary["s"] == pytest.approx(s))
    # the fidelity trace oscillates inside the search window
    assert(np.min(result.fidelities) < result.summary["peak_fidelity"] - 0.05)


def test_fidelity_envelope_approaches_one():
    scan = dict(protocols.fidelity_scan([10.0, 40.0], units.hz_to_angular(52e3), SCAN_NUMERICS))
    assert(scan[40.0] >= scan[10.0] - 1e-3)


def test_fidelity_scan_depends_on_ratio_only():
    a = protocols.fidelity_scan([8.0], 1.0e5, SCAN_NUMERICS)
    b = protocols.fidelity_scan([8.0], 3.0e5, SCAN_NUMERICS)
    assert(a[0][1] == pytest.approx(b[0][1], abs=1e-6))


def test_fidelity_scan_rejects_small_ratio():
    with pytest.raises(DomainError):
        protocols.fidelity_scan([2.0], 1e5, SCAN_NUMERICS)


def test_superposition_transfer_needs_normalized_spin(section3_coupling):
    with pytest.raises(DomainError):
        protocols.superposition_transfer(1.0, 1.0, TransferMode.IDEAL_RWA, section3_coupling)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_qnd_phase_is_linear_in_phonon_number(n, section3_coupling):
    Omega = units.qnd_drive(section3_coupling.omega_m, section3_coupling.coupling)
    chi = units.qnd_chi(Omega, section3_coupling.coupling, section3_coupling.omega_m)
    hold_time = 1 / (2 * abs(chi))
    phase = protocols.qnd_phase(n, hold_time, section3_coupling)
    assert(phase == pytest.approx(2 * chi * n * hold_time, rel=1e-9, abs=1e-12))


def test_qnd_readout_summary(section3_coupling):
    result = protocols.qnd_readout(2, 1e-5, section3_coupling, NumericsSettings(time_samples=16))
    assert(result.summary["phase"] == pytest.approx(result.summary["expected_phase"], rel=1e-9))
    assert(len(result.fidelities) == 16)
    assert(result.steps[0].kind == PulseKind.QND_HOLD)


def test_qnd_readout_convergence_guard(section3_coupling):
    Omega = units.qnd_drive(section3_coupling.omega_m, section3_coupling.coupling)
    chi = units.qnd_chi(Omega, section3_coupling.coupling, section3_coupling.omega_m)
    hold_time = 1 / (2 * abs(chi))
    # three levels leave out the |n+1> partner of |2>
    with pytest.raises(TruncationError):
        protocols.qnd_readout(2, hold_time, section3_coupling, NumericsSettings(fock_dim=3, time_samples=16))
    result = protocols.qnd_readout(2, hold_time, section3_coupling, NumericsSettings(time_samples=16))
    assert(result.summary["fock_dim"] == 26)


@pytest.mark.parametrize("fock_dim", [2, 3])
def test_qnd_needs_the_measured_level(fock_dim, section3_coupling):
    with pytest.raises(DomainError):
        protocols.qnd_phase(3, 1e-5, section3_coupling, NumericsSettings(fock_dim=fock_dim))


def test_qnd_resonance(section3_coupling):
    params = CouplingParams(section3_coupling.coupling, section3_coupling.omega_m, section3_coupling.mass,
                            Omega=section3_coupling.omega_m / 2)
    with pytest.raises(SingularityError):
        protocols.qnd_phase(1, 1e-5, params)


def test_cat_pipeline_reaches_maximum_separation():
    params = units.interference_params()
    result = protocols.cat_pipeline(0, params, 1, CAT_NUMERICS)
    summary = result.summary
    assert(summary["oracle_fidelity"] >= 1 - 1e-6)
    assert(summary["separation"] == pytest.approx(summary["max_separation"], rel=1e-6))
    assert(summary["preparation_time"] == pytest.approx(np.pi / params.trap_freq_final))
    assert(summary["t2_budget_passed"] == 1.0)
    assert(result.grid_state.grid.n_points == 2 ** 16)
    assert(np.sum(result.grid_state.density) * result.grid_state.grid.spacing == pytest.approx(1.0, abs=1e-6))


def test_cat_pipeline_minus_has_node_at_centre():
    result = protocols.cat_pipeline(0, units.interference_params(), -1, CAT_NUMERICS)
    density = result.grid_state.density
    centre = density[result.grid_state.grid.n_points // 2]
    assert(centre < 1e-6 * np.max(density))


def test_cat_pipeline_convergence_guard():
    result = protocols.cat_pipeline(0, units.interference_params(), 1, NumericsSettings())
    assert(result.summary["oracle_fidelity"] >= 1 - 1e-6)


@pytest.mark.parametrize("n", [0, 1])
def test_cat_pipeline_without_gradient_keeps_input(n):
    params = ExperimentParams(gradient=0.0)
    with pytest.warns(ValidityWarning):
        result = protocols.cat_pipeline(n, params, 1, CAT_NUMERICS)
    assert(result.summary["separation"] == pytest.approx(0.0, abs=1e-15))
    assert(result.summary["max_separation"] == 0.0)
    mech = hilbert.mechanical_state(result.final_state)
    assert(hilbert.fidelity(mech, hilbert.fock_state(mech.basis, n)) == pytest.approx(1.0, abs=1e-9))
    density = result.grid_state.density
    mirrored = np.roll(density[::-1], 1)
    assert(np.allclose(density, mirrored, rtol=0, atol=1e-9 * np.max(density)))


def test_cat_pipeline_rejects_stiffening():
    params = ExperimentParams(trap_freq_final=units.hz_to_angular(40e3))
    with pytest.raises(DomainError):
        protocols.cat_pipeline(0, params)


@pytest.mark.parametrize("n", [0, 1])
def test_splitting_map_returns_after_one_period(n):
    params = units.splitting_params()
    result = protocols.splitting_map(n, params, n_frames=16, numerics=CAT_NUMERICS)
    assert(result.density_map.shape == (16, int(result.summary["grid_points"])))
    assert(result.fidelities[0] == pytest.approx(1.0))
    assert(result.fidelities[-1] == pytest.approx(1.0, abs=1e-6))
    assert(result.summary["separation_time"] == pytest.approx(result.summary["half_period"],
                                                              rel=1.0 / 15 + 1e-9))
    kinds = [step.kind for step in result.steps]
    assert(kinds == [PulseKind.FRAME_CHANGE, PulseKind.SET_SPIN, PulseKind.FRAME_CHANGE, PulseKind.IDLE])


def test_splitting_grid_covers_both_branches():
    params = units.splitting_params()
    result = protocols.splitting_map(0, params, n_frames=4, numerics=CAT_NUMERICS)
    assert(result.summary["grid_extent"] > result.summary["max_separation"])
    spin = (hilbert.spin_vector(3, "+1") + hilbert.spin_vector(3, "-1")) / np.sqrt(2)
    assert(np.allclose(result.steps[1].spin_state, spin))


def test_splitting_map_convergence_guard():
    params = units.interference_params()
    with pytest.raises(TruncationError, match="Fock levels"):
        protocols.splitting_map(0, params, n_frames=8, numerics=NumericsSettings(fock_dim=8))
    result = protocols.splitting_map(0, params, n_frames=8, numerics=NumericsSettings())
    assert(result.fidelities[-1] == pytest.approx(1.0, abs=1e-6))
