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

import pytest

from spinmechworks import estimators, units
from spinmechworks.types import ExperimentParams
from spinmechworks.utils.exceptions import DomainError

HELIUM_MASS = 4.83e-26


def test_gas_collision_rate():
    rate = estimators.gas_collision_rate(units.torr_to_pa(1e-11), 30e-9, 4.5, HELIUM_MASS)
    assert(rate == pytest.approx(8.0, rel=0.15))


def test_gas_collision_rate_scales_with_pressure_and_area():
    rate = estimators.gas_collision_rate(1e-9, 30e-9, 4.5, HELIUM_MASS)
    assert(estimators.gas_collision_rate(2e-9, 30e-9, 4.5, HELIUM_MASS) == pytest.approx(2 * rate, rel=1e-12))
    assert(estimators.gas_collision_rate(1e-9, 60e-9, 4.5, HELIUM_MASS) == pytest.approx(4 * rate, rel=1e-12))


def test_mean_velocity_of_helium():
    assert(estimators.mean_velocity(4.5, HELIUM_MASS) == pytest.approx(57.0, rel=0.01))


@pytest.mark.parametrize("factor", [0.25, 4.0, 10.0])
def test_mean_velocity_scales_with_root_temperature(factor, random_generator):
    for _ in range(5):
        T = random_generator.uniform(0.1, 500.0)
        ratio = estimators.mean_velocity(factor * T, HELIUM_MASS) / estimators.mean_velocity(T, HELIUM_MASS)
        assert(ratio == pytest.approx(factor ** 0.5, rel=1e-12))


@pytest.mark.parametrize("factor", [0.5, 2.0, 3.0])
def test_blackbody_rate_scales_with_volume(factor, random_generator):
    for _ in range(5):
        d = random_generator.uniform(5e-9, 500e-9)
        z = random_generator.uniform(1e-10, 1e-7)
        ratio = estimators.blackbody_rate(factor * d, 300.0, 1.0, z) / estimators.blackbody_rate(d, 300.0, 1.0, z)
        assert(ratio == pytest.approx(factor ** 3, rel=1e-12))


@pytest.mark.parametrize("factor", [0.1, 2.0, 7.0])
def test_blackbody_rate_scales_with_squared_separation(factor, random_generator):
    for _ in range(5):
        z = random_generator.uniform(1e-10, 1e-7)
        wide, narrow = (estimators.blackbody_rate(30e-9, 300.0, 1.0, x) for x in (factor * z, z))
        ratio = wide / narrow
        assert(ratio == pytest.approx(factor ** 2, rel=1e-12))
    assert(estimators.blackbody_rate(30e-9, 300.0, 1.0, 0.0) == 0.0)


def test_blackbody_rate_temperature_scaling():
    z = units.derive(units.interference_params()).max_separation
    hot = estimators.blackbody_rate(30e-9, 300.0, 1.0, z)
    cold = estimators.blackbody_rate(30e-9, 150.0, 1.0, z)
    assert(cold / hot == pytest.approx(1 / 64, rel=1e-12))


def test_blackbody_rate_calibrated_permittivity_loss():
    """Blackbody emission rate of 3 Hz under the calibrated Im[(eps-1)/(eps+2)].
    """
    params = units.interference_params()
    z = units.derive(params).max_separation
    rate = estimators.blackbody_rate(params.diameter, params.internal_temp, params.permittivity_loss, z)
    assert(rate == pytest.approx(3.0, rel=0.01))


def test_calibrate_permittivity_loss_inverts_rate():
    loss = estimators.calibrate_permittivity_loss(3.0, 30e-9, 300.0, 2.85e-9)
    assert(estimators.blackbody_rate(30e-9, 300.0, loss, 2.85e-9) == pytest.approx(3.0, rel=1e-12))


@pytest.mark.parametrize(
    "func,args",
    [
        (estimators.gas_collision_rate, (-1.0, 30e-9, 4.5, HELIUM_MASS)),
        (estimators.gas_collision_rate, (1e-9, 30e-9, 0.0, HELIUM_MASS)),
        (estimators.blackbody_rate, (30e-9, 300.0, -1.0, 1e-9)),
        (estimators.mean_velocity, (4.5, 0.0)),
    ]
)
def test_invalid_rate_inputs(func, args):
    with pytest.raises(DomainError):
        func(*args)


def test_feasibility_report_of_interference_scenario():
    report = estimators.feasibility_report(units.interference_params())
    assert(report.gamma_gas == pytest.approx(8.0, rel=0.15))
    assert(report.gamma_bb == pytest.approx(3.0, rel=0.01))
    assert(sorted(report.budget) == sorted(["fock_preparation_time", "qnd_detection_time", "cat_preparation_time",
                                            "gas_collisions", "blackbody_emission", "threshold_gradient"]))
    assert(report.budget["cat_preparation_time"].passed)
    assert(report.budget["threshold_gradient"].passed)
    assert("permittivity_loss" in report.annotations)
    assert("gravity_fock_superposition" in report.annotations)


def test_feasibility_report_below_threshold():
    params = ExperimentParams(trap_freq_initial=units.hz_to_angular(0.5e6),
                              trap_freq_low=units.hz_to_angular(0.5e6),
                              trap_freq_final=units.hz_to_angular(0.5e6),
                              gradient=1e3)
    report = estimators.feasibility_report(params)
    item = report.budget["threshold_gradient"]
    assert(not item.passed)
    assert(item.limit == pytest.approx(2e3, rel=0.01))


def test_feasibility_report_without_gradient():
    report = estimators.feasibility_report(ExperimentParams(gradient=0.0))
    assert(report.gamma_bb == 0.0)
    assert(not report.budget["fock_preparation_time"].passed)
