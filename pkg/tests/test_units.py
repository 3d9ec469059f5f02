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

import numpy as np
import pytest

from spinmechworks import units
from spinmechworks.types import CouplingParams, ExperimentParams, ProtocolSettings
from spinmechworks.utils.checks import require_non_negative, require_positive
from spinmechworks.utils.exceptions import DomainError, SingularityError, ValidityWarning

DIAMOND_30NM = units.mass_from_diameter(30e-9, 3500.0)


def test_mass_of_30nm_diamond():
    assert(DIAMOND_30NM == pytest.approx(4.948e-20, rel=1e-3))


@pytest.mark.parametrize(
    "G,freq,expected_hz",
    [
        (1e5, 0.5e6, 52e3),
        (3e4, 20e3, 77e3),
    ]
)
def test_coupling_strength(G, freq, expected_hz):
    coupling = units.coupling_lambda(G, DIAMOND_30NM, units.hz_to_angular(freq))
    assert(units.angular_to_hz(coupling) == pytest.approx(expected_hz, rel=0.03))


def test_zero_point_width_in_20khz_trap():
    a2 = units.zero_point_width(DIAMOND_30NM, units.hz_to_angular(20e3))
    assert(a2 == pytest.approx(0.092e-9, rel=0.02))


def test_separation_in_units_of_zero_point_width():
    derived = units.derive(units.interference_params())
    assert(derived.max_separation / derived.a2 == pytest.approx(31, rel=0.03))


def test_far_field_fringe_period():
    derived = units.derive(units.interference_params())
    assert(derived.fringe_period == pytest.approx(47e-9, rel=0.02))


def test_separation_scales_linearly_with_gradient():
    omega = units.hz_to_angular(1e3)
    reference = units.max_separation(1e2, DIAMOND_30NM, omega)
    for G in np.logspace(2, 6, 9):
        ratio = units.max_separation(G, DIAMOND_30NM, omega) / reference
        assert(ratio == pytest.approx(G / 1e2, rel=1e-10))


def test_separation_scales_with_inverse_square_frequency():
    reference = units.max_separation(1e5, DIAMOND_30NM, units.hz_to_angular(1e3))
    for freq in np.linspace(1e3, 100e3, 12):
        ratio = units.max_separation(1e5, DIAMOND_30NM, units.hz_to_angular(freq)) / reference
        assert(ratio == pytest.approx((1e3 / freq) ** 2, rel=1e-10))


def test_gradient_for_separation_inverts_max_separation():
    omega = units.hz_to_angular(1e3)
    G = units.gradient_for_separation(30e-9, DIAMOND_30NM, omega)
    assert(units.max_separation(G, DIAMOND_30NM, omega) == pytest.approx(30e-9, rel=1e-12))
    # moderate gradient is enough to split by more than the particle size
    assert(G < 1e3)


def test_threshold_gradient_calibrated_criterion():
    """Threshold at the calibrated lambda*T2 criterion for the 0.5 MHz scenario.
    """
    threshold = units.threshold_gradient(DIAMOND_30NM, units.hz_to_angular(0.5e6), 1.8e-3)
    assert(threshold == pytest.approx(2e3, rel=0.01))
    coupling = units.coupling_lambda(threshold, DIAMOND_30NM, units.hz_to_angular(0.5e6))
    assert(coupling * 1.8e-3 == pytest.approx(ProtocolSettings.threshold_criterion, rel=1e-12))


def test_qnd_shift_order_of_magnitude():
    """Dispersive shift of the 0.5 MHz scenario within a factor three of 2pi x 25 kHz.
    """
    derived = units.derive(units.section3_params())
    two_chi_hz = units.angular_to_hz(2 * abs(derived.chi))
    assert(25e3 / 3 <= two_chi_hz <= 3 * 25e3)


def test_qnd_chi_resonance():
    with pytest.raises(SingularityError):
        units.qnd_chi(0.5, 0.1, 1.0)


def test_qnd_chi_sign_follows_detuning():
    assert(units.qnd_chi(0.6, 0.1, 1.0) > 0)
    assert(units.qnd_chi(0.4, 0.1, 1.0) < 0)


def test_effective_rabi():
    assert(units.effective_rabi(2.0, 100.0) == pytest.approx(0.01))
    with pytest.raises(SingularityError):
        units.effective_rabi(1.0, 0.0)
    with pytest.warns(ValidityWarning):
        units.effective_rabi(1.0, 2.0)


def test_fringe_period_near_field_warning():
    derived = units.derive(units.interference_params())
    with pytest.warns(ValidityWarning):
        units.fringe_period(1e-9, derived.mass, derived.max_separation, beta=derived.beta)


@pytest.mark.parametrize(
    "func,args",
    [
        (units.mass_from_diameter, (-1e-9, 3500.0)),
        (units.mass_from_diameter, (30e-9, 0.0)),
        (units.zero_point_width, (DIAMOND_30NM, 0.0)),
        (units.coupling_lambda, (-1.0, DIAMOND_30NM, 1.0)),
        (units.max_separation, (1e4, DIAMOND_30NM, -1.0)),
        (units.fringe_period, (0.0, DIAMOND_30NM, 1e-9)),
        (units.threshold_gradient, (DIAMOND_30NM, 1.0, 0.0)),
    ]
)
def test_invalid_physical_inputs(func, args):
    with pytest.raises(DomainError):
        func(*args)


def test_zero_gradient_scenario():
    derived = units.derive(ExperimentParams(gradient=0.0))
    assert(derived.coupling == 0.0)
    assert(derived.chi == 0.0)
    assert(derived.max_separation == 0.0)
    assert(np.isinf(derived.fringe_period))


def test_unit_conversions():
    assert(units.angular_to_hz(units.hz_to_angular(20e3)) == pytest.approx(20e3))
    assert(units.torr_to_pa(1.0) == pytest.approx(133.322368, rel=1e-8))
    assert(units.pa_to_torr(units.torr_to_pa(1e-11)) == pytest.approx(1e-11))


def test_material_density():
    assert(units.material_density("diamond") == 3500.0)
    assert(units.material_density("silicon") == 2329.0)
    with pytest.raises(DomainError):
        units.material_density("graphite")


def test_trap_sequence_must_soften():
    params = ExperimentParams(trap_freq_initial=units.hz_to_angular(20e3),
                              trap_freq_final=units.hz_to_angular(100e3))
    with pytest.raises(DomainError):
        params.check_trap_sequence()
    units.splitting_params().check_trap_sequence()


def test_default_coupling_mass_follows_density_table():
    params = CouplingParams(coupling=1.0, omega_m=10.0)
    expected = units.mass_from_diameter(ExperimentParams.diameter, units.material_density("diamond"))
    assert(params.mass == expected)
    assert(params.mass == units.derive(ExperimentParams()).mass)


def test_max_separation_from_coupling(random_generator):
    for _ in range(20):
        G = random_generator.uniform(1e2, 1e6)
        m = units.mass_from_diameter(random_generator.uniform(5e-9, 200e-9), 3500.0)
        omega = units.hz_to_angular(random_generator.uniform(1e2, 1e6))
        coupling = units.coupling_lambda(G, m, omega)
        expected = 8 * coupling * units.zero_point_width(m, omega) / omega
        assert(units.max_separation(G, m, omega) == pytest.approx(expected, rel=1e-12))


@pytest.mark.parametrize("factor", [0.25, 4.0, 9.0])
def test_coupling_scales_with_inverse_root_frequency(factor, random_generator):
    for _ in range(5):
        G = random_generator.uniform(1e2, 1e6)
        omega = units.hz_to_angular(random_generator.uniform(1e3, 1e6))
        ratio = units.coupling_lambda(G, DIAMOND_30NM, factor * omega) / units.coupling_lambda(G, DIAMOND_30NM, omega)
        assert(ratio == pytest.approx(factor ** -0.5, rel=1e-12))


@pytest.mark.parametrize("factor", [0.5, 2.0, 3.0])
def test_mass_scales_with_cube_of_diameter(factor, random_generator):
    for _ in range(5):
        d = random_generator.uniform(5e-9, 500e-9)
        ratio = units.mass_from_diameter(factor * d, 3500.0) / units.mass_from_diameter(d, 3500.0)
        assert(ratio == pytest.approx(factor ** 3, rel=1e-12))


@pytest.mark.parametrize(
    "check,value,raises",
    [
        (require_positive, 1e-30, False),
        (require_positive, 0.0, True),
        (require_positive, float("nan"), True),
        (require_non_negative, 0.0, False),
        (require_non_negative, -1e-30, True),
    ]
)
def test_argument_checks(check, value, raises):
    if raises:
        with pytest.raises(DomainError, match="x must"):
            check(x=value)
    else:
        check(x=value)
