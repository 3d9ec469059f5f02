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
"""Physical constants, unit conversions and closed-form experiment parameters."""

import logging
import warnings

import numpy as np
import scipy.constants

from spinmechworks.types import DerivedParams, ExperimentParams, PhysicalConstants, ProtocolSettings
from spinmechworks.utils.checks import require_non_negative, require_positive
from spinmechworks.utils.exceptions import DomainError, SingularityError, ValidityWarning

logger = logging.getLogger(__name__)

CONSTANTS = PhysicalConstants(hbar=scipy.constants.hbar,
                              k_B=scipy.constants.k,
                              mu_B=scipy.constants.physical_constants["Bohr magneton"][0],
                              g_s=2.0,
                              c=scipy.constants.c)

MATERIAL_DENSITIES = {
    "diamond": 3500.0,
    "silicon": 2329.0,
}


def hz_to_angular(f):
    """Convert a frequency in Hz to rad/s."""
    return 2 * np.pi * f


def angular_to_hz(omega):
    """Convert an angular frequency in rad/s to Hz."""
    return omega / (2 * np.pi)


def torr_to_pa(p):
    """Convert a pressure in Torr to Pa."""
    return p * scipy.constants.torr


def pa_to_torr(p):
    """Convert a pressure in Pa to Torr."""
    return p / scipy.constants.torr


def material_density(name):
    """Look up the bulk density of a supported particle material.

    Args:
        name : Material name, "diamond" or "silicon".

    Returns:
        Density in kg/m^3.
    """
    try:
        return MATERIAL_DENSITIES[name]
    except KeyError as e:
        raise DomainError("Unknown material {}, known: {}".format(name, sorted(MATERIAL_DENSITIES))) from e


def mass_from_diameter(d, rho):
    """Mass of a solid sphere.

    Args:
        d : Diameter [m].
        rho : Density [kg/m^3].

    Returns:
        Mass in kg.
    """
    require_non_negative(d=d)
    require_positive(rho=rho)
    return rho * np.pi * d ** 3 / 6


def zero_point_width(m, omega):
    """Ground state position spread a0 = sqrt(hbar / (2 m omega)) in metres."""
    require_positive(m=m, omega=omega)
    return np.sqrt(CONSTANTS.hbar / (2 * m * omega))


def coupling_lambda(G, m, omega):
    """Spin-phonon coupling strength.

    Args:
        G : Magnetic field gradient [T/m].
        m : Particle mass [kg].
        omega : Trap frequency [rad/s].

    Returns:
        λ = g_s μ_B G a0 / hbar in rad/s.
    """
    require_non_negative(G=G)
    return CONSTANTS.g_s * CONSTANTS.mu_B * G * zero_point_width(m, omega) / CONSTANTS.hbar


def max_separation(G, m, omega2):
    """Largest distance between the two spin-conditioned wave packets, 4 g_s μ_B G / (m ω2²)."""
    require_non_negative(G=G)
    require_positive(m=m, omega2=omega2)
    return 4 * CONSTANTS.g_s * CONSTANTS.mu_B * G / (m * omega2 ** 2)


def gradient_for_separation(D_target, m, omega2):
    """Gradient [T/m] that produces a maximum separation D_target."""
    require_non_negative(D_target=D_target)
    require_positive(m=m, omega2=omega2)
    return D_target * m * omega2 ** 2 / (4 * CONSTANTS.g_s * CONSTANTS.mu_B)


def gradient_for_coupling(lambda_target, m, omega):
    """Gradient [T/m] that produces a coupling strength lambda_target [rad/s]."""
    require_non_negative(lambda_target=lambda_target)
    return lambda_target * CONSTANTS.hbar / (CONSTANTS.g_s * CONSTANTS.mu_B * zero_point_width(m, omega))


def threshold_gradient(m, omega, T2, criterion=ProtocolSettings.threshold_criterion):
    """Gradient at which λ·T2 reaches criterion.

    The default criterion places the threshold of a 30 nm diamond in a 0.5 MHz trap
    with T2 = 1.8 ms at 2e3 T/m. It is a calibration, not a derived bound.

    Args:
        m : Particle mass [kg].
        omega : Trap frequency [rad/s].
        T2 : Spin dephasing time [s].
        criterion : Required value of the dimensionless product λ·T2.

    Returns:
        Gradient in T/m.
    """
    require_positive(T2=T2, criterion=criterion)
    return gradient_for_coupling(criterion / T2, m, omega)


def qnd_chi(Omega, coupling, omega_m):
    """Dispersive phonon-number dependent spin shift χ = 4Ωλ²/(4Ω² − ω_m²) in rad/s."""
    require_positive(omega_m=omega_m)
    denominator = 4 * Omega ** 2 - omega_m ** 2
    if abs(denominator) <= 1e-12 * omega_m ** 2:
        raise SingularityError("qnd_chi is singular at 2|Omega| = omega_m (Omega = {})".format(Omega))
    return 4 * Omega * coupling ** 2 / denominator


def qnd_drive(omega_m, coupling, detuning_factor=ProtocolSettings.qnd_detuning_factor):
    """Effective drive Ω placed detuning_factor·λ above the two-phonon resonance ω_m/2."""
    require_positive(omega_m=omega_m)
    return omega_m / 2 + detuning_factor * coupling


def effective_rabi(Omega_NV, Delta):
    """Effective spin drive Ω = |Ω_NV|²/(4Δ) after eliminating the detuned microwave transition."""
    if Delta == 0:
        raise SingularityError("effective_rabi is singular at Delta = 0")
    if abs(Delta) < 10 * abs(Omega_NV):
        warnings.warn("Detuning {} is not large compared with the drive {}".format(Delta, Omega_NV),
                      ValidityWarning)
    return abs(Omega_NV) ** 2 / (4 * Delta)


def spin_splitting(G, D_m):
    """Energy difference g_s μ_B G D_m / hbar of the two displaced spin branches, in rad/s."""
    require_non_negative(G=G, D_m=D_m)
    return CONSTANTS.g_s * CONSTANTS.mu_B * G * D_m / CONSTANTS.hbar


def flight_scale(m, beta):
    """Time unit 2m/(hbar β²) of the dimensionless free-flight coordinates, in seconds."""
    require_positive(m=m, beta=beta)
    return 2 * m / (CONSTANTS.hbar * beta ** 2)


def fringe_period(t, m, D_m, beta=None):
    """Far-field interference period 2π hbar t / (m D_m).

    Args:
        t : Flight time [s].
        m : Particle mass [kg].
        D_m : Separation of the two wave packets [m].
        beta : Inverse packet width [1/m]; when given, a ValidityWarning is emitted
               outside the far-field regime.

    Returns:
        Fringe period in metres.
    """
    require_positive(t=t, m=m, D_m=D_m)
    if beta is not None:
        bt = (beta * D_m / 2) * (t / flight_scale(m, beta))
        if bt < 10:
            warnings.warn("Far-field fringe period used with b*t = {:.3g}".format(bt), ValidityWarning)
    return 2 * np.pi * CONSTANTS.hbar * t / (m * D_m)


def fringe_period_dimensionless(b, t):
    """Finite-time fringe period 2π(1+4t²)/(4bt) in units of 1/β, for b and t in flight units."""
    require_positive(b=b, t=t)
    return 2 * np.pi * (1 + 4 * t ** 2) / (4 * b * t)


def derive(params, settings=ProtocolSettings()):
    """Compute every closed-form quantity of a scenario.

    The coupling, drive and χ refer to the initial trap where Fock states are
    prepared; a2, the separation and the fringe period refer to the final trap.

    Args:
        params : ExperimentParams instance.
        settings : ProtocolSettings choosing the QND operating point.

    Returns:
        DerivedParams instance.
    """
    m = mass_from_diameter(params.diameter, params.density)
    omega0 = params.trap_freq_initial
    omega2 = params.trap_freq_final
    a0 = zero_point_width(m, omega0)
    a2 = zero_point_width(m, omega2)
    coupling = coupling_lambda(params.gradient, m, omega0)
    Omega = qnd_drive(omega0, coupling, settings.qnd_detuning_factor)
    D_m = max_separation(params.gradient, m, omega2)
    period = fringe_period(params.flight_time, m, D_m) if D_m > 0 and params.flight_time > 0 else np.inf
    beta = 1 / (np.sqrt(2) * a2)
    derived = DerivedParams(mass=m,
                            a0=a0,
                            a2=a2,
                            coupling=coupling,
                            coupling_final=coupling_lambda(params.gradient, m, omega2),
                            Omega=Omega,
                            chi=qnd_chi(Omega, coupling, omega0) if coupling > 0 else 0.0,
                            max_separation=D_m,
                            splitting=spin_splitting(params.gradient, D_m),
                            fringe_period=period,
                            beta=beta,
                            b=D_m / 2)
    logger.debug("Derived parameters: {}".format(derived))
    return derived


def section3_params():
    """Fock state scenario: 30 nm diamond, 0.5 MHz trap, 1e5 T/m."""
    omega = hz_to_angular(0.5e6)
    return ExperimentParams(trap_freq_initial=omega, trap_freq_low=omega, trap_freq_final=omega, gradient=1e5)


def splitting_params():
    """Sudden trap change scenario: 100 kHz softened to 20 kHz, 4e4 T/m."""
    return ExperimentParams(trap_freq_initial=hz_to_angular(100e3),
                            trap_freq_low=hz_to_angular(100e3),
                            trap_freq_final=hz_to_angular(20e3),
                            gradient=4e4)


def interference_params():
    """Free flight scenario: 20 kHz trap, 3e4 T/m, 10 ms of flight."""
    return ExperimentParams()
