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
"""Decoherence rate estimates and the coherence budget of a scenario."""

import logging

import numpy as np

from spinmechworks import units
from spinmechworks.types import BudgetItem, DecoherenceReport, ProtocolSettings
from spinmechworks.units import CONSTANTS
from spinmechworks.utils.checks import require_non_negative, require_positive

logger = logging.getLogger(__name__)


def mean_velocity(T, m_a):
    """Mean thermal speed sqrt(8 k_B T / (π m_a)) of background gas molecules [m/s]."""
    require_positive(T=T, m_a=m_a)
    return np.sqrt(8 * CONSTANTS.k_B * T / (np.pi * m_a))


def gas_collision_rate(P, d, T, m_a):
    """Localization rate from background gas collisions.

    Args:
        P : Gas pressure [Pa].
        d : Particle diameter [m].
        T : Gas temperature [K].
        m_a : Mass of a gas molecule [kg].

    Returns:
        γ = 4π sqrt(2π) P d² / (sqrt(3) v̄ m_a) in Hz.
    """
    require_non_negative(P=P)
    require_positive(d=d)
    return 4 * np.pi * np.sqrt(2 * np.pi) * P * d ** 2 / (np.sqrt(3) * mean_velocity(T, m_a) * m_a)


def blackbody_rate(d, T_i, Im_eps, z):
    """Decoherence rate from blackbody emission of a hot particle.

    Args:
        d : Particle diameter [m].
        T_i : Internal temperature [K].
        Im_eps : Im[(ε−1)/(ε+2)] of the particle material.
        z : Superposition size [m].

    Returns:
        (2π⁵/189) c d³ (k_B T_i / hbar c)⁶ Im_eps z² in Hz.
    """
    require_positive(d=d, T_i=T_i)
    require_non_negative(Im_eps=Im_eps, z=z)
    thermal_wavenumber = CONSTANTS.k_B * T_i / (CONSTANTS.hbar * CONSTANTS.c)
    return 2 * np.pi ** 5 / 189 * CONSTANTS.c * d ** 3 * thermal_wavenumber ** 6 * Im_eps * z ** 2


def calibrate_permittivity_loss(target_rate, d, T_i, z):
    """Im_eps for which blackbody_rate returns target_rate."""
    require_non_negative(target_rate=target_rate)
    return target_rate / blackbody_rate(d, T_i, 1.0, z)


def gravity_annotations():
    """Gravity induced decoherence rates, quoted values without a model behind them."""
    return {
        "gravity_fock_superposition": "~1e-62 Hz (quoted, not computed)",
        "gravity_spatial_superposition_30nm": "~1e-7 Hz (quoted, not computed)",
    }


def _duration_item(duration, limit, note):
    return BudgetItem(value=float(duration), limit=float(limit), passed=bool(duration < limit), note=note)


def feasibility_report(params, settings=ProtocolSettings()):
    """Decoherence rates and coherence budget of a scenario.

    Protocol durations (1/λ, 1/(2|χ|), π/ω_m2) are compared with the spin
    dephasing time. Expected decoherence events during the flight are compared with
    settings.max_decoherence_events. The gradient is compared with the threshold
    gradient of the initial trap.

    Args:
        params : ExperimentParams instance.
        settings : ProtocolSettings instance.

    Returns:
        DecoherenceReport instance.
    """
    derived = units.derive(params, settings)
    T2 = params.spin_dephasing_time
    v_bar = mean_velocity(params.gas_temp, params.gas_molecule_mass)
    gamma_gas = gas_collision_rate(params.pressure, params.diameter, params.gas_temp, params.gas_molecule_mass)
    width = params.interference_width if params.interference_width is not None else derived.max_separation
    gamma_bb = blackbody_rate(params.diameter, params.internal_temp, params.permittivity_loss, width)

    budget = {
        "fock_preparation_time": _duration_item(
            1 / derived.coupling if derived.coupling > 0 else np.inf, T2, "1/lambda against T2"),
        "qnd_detection_time": _duration_item(
            1 / (2 * abs(derived.chi)) if derived.chi != 0 else np.inf, T2, "1/(2|chi|) against T2"),
        "cat_preparation_time": _duration_item(np.pi / params.trap_freq_final, T2, "pi/omega_m2 against T2"),
        "gas_collisions": _duration_item(gamma_gas * params.flight_time, settings.max_decoherence_events,
                                         "expected gas collisions during the flight"),
        "blackbody_emission": _duration_item(gamma_bb * params.flight_time, settings.max_decoherence_events,
                                             "expected blackbody localization events during the flight"),
    }
    threshold = units.threshold_gradient(derived.mass, params.trap_freq_initial, T2, settings.threshold_criterion)
    budget["threshold_gradient"] = BudgetItem(
        value=float(params.gradient), limit=float(threshold), passed=bool(params.gradient >= threshold),
        note="lambda = 2pi x {:.4g} Hz; threshold where lambda*T2 = {} (calibrated criterion)".format(
            units.angular_to_hz(derived.coupling), settings.threshold_criterion))
    for name, item in sorted(budget.items()):
        if not item.passed:
            logger.warning("Budget item {} fails: {:.4g} against {:.4g}".format(name, item.value, item.limit))

    annotations = gravity_annotations()
    annotations["permittivity_loss"] = "Im_eps = {} is calibrated so the interference scenario gives 3 Hz".format(
        params.permittivity_loss)
    return DecoherenceReport(gamma_gas=float(gamma_gas), gamma_bb=float(gamma_bb), mean_velocity=float(v_bar),
                             budget=budget, annotations=annotations)
