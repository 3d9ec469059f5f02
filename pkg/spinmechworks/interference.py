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
"""Free flight of grid wavefunctions and analysis of the resulting fringes."""

import logging
import warnings

import numpy as np
import scipy.ndimage

from spinmechworks import hilbert, units
from spinmechworks.protocols import cat_pipeline
from spinmechworks.types import FringeReport, GridSpec, GridWavefunction, NumericsSettings, ProtocolSettings
from spinmechworks.utils.exceptions import DomainError, GridError, ValidityWarning
from spinmechworks.utils.grids import grid_moments

logger = logging.getLogger(__name__)

NYQUIST_GUARD = 0.9
NYQUIST_LEAKAGE = 1e-10
ENVELOPE_PERIODS = 5.0
SPECTRUM_PADDING = 8


def free_propagate(psi, t):
    """Propagate a wavefunction of a free particle for a time t.

    Every component is multiplied by exp(−i hbar k² t / 2m) in momentum space.
    Raises GridError when the momentum content reaches the Nyquist limit or when
    the ballistic spread |<z>| + 6σ_z + hbar(|<k>| + 6σ_k)t/m leaves the grid.

    Args:
        psi : GridWavefunction instance.
        t : Flight time [s].

    Returns:
        GridWavefunction on the same grid.
    """
    if t < 0:
        raise DomainError("Flight time must not be negative")
    if t == 0:
        return psi
    grid = psi.grid
    k = grid.wavenumbers
    spectrum = np.fft.fft(psi.values, axis=1)
    power = np.sum(np.abs(spectrum) ** 2, axis=0)
    leakage = np.sum(power[np.abs(k) > NYQUIST_GUARD * grid.nyquist]) / np.sum(power)
    if leakage > NYQUIST_LEAKAGE:
        raise GridError("Momentum content {:.3g} near the Nyquist limit, use a finer grid than {:.4g} m".format(
            leakage, grid.spacing))

    z_mean, z_std = grid_moments(grid.positions, psi.density, grid.spacing)
    k_mean, k_std = grid_moments(k, power, 1.0)
    reach = abs(z_mean) + 6 * z_std + units.CONSTANTS.hbar * (abs(k_mean) + 6 * k_std) * t / psi.mass
    if reach > grid.extent / 2:
        raise GridError("Wavefunction spreads to {:.4g} m after {:.4g} s, increase the grid extent to {:.4g} m".format(
            reach, t, 2 * reach))

    kinetic = np.exp(-1j * units.CONSTANTS.hbar * k ** 2 * t / (2 * psi.mass))
    values = np.fft.ifft(spectrum * kinetic, axis=1)
    return GridWavefunction(values, grid, psi.mass)


def extract_fringe_period(z, density, predicted):
    """Measure the fringe period from the dominant spatial frequency.

    A Gaussian-smoothed envelope (width ENVELOPE_PERIODS predicted periods) is
    removed, and the magnitude spectrum of the zero-padded residual is searched
    between a third and three times the predicted fringe frequency. The peak bin is
    refined with a parabola.

    Args:
        z : Uniform sample positions [m].
        density : Probability density samples.
        predicted : Expected period [m].

    Returns:
        Measured period in metres, NaN when no peak is found.
    """
    if not np.isfinite(predicted) or predicted <= 0:
        return np.nan
    n = density.size
    spacing = z[1] - z[0]
    smoothed = np.fft.irfft(scipy.ndimage.fourier_gaussian(np.fft.rfft(density), ENVELOPE_PERIODS * predicted / spacing,
                                                           n=n), n=n)
    padded = SPECTRUM_PADDING * n
    spectrum = np.abs(np.fft.rfft(density - smoothed, n=padded))
    frequencies = np.fft.rfftfreq(padded, d=spacing)
    window = np.flatnonzero((frequencies > 1 / (3 * predicted)) & (frequencies < 3 / predicted))
    if window.size < 3:
        return np.nan
    best = window[np.argmax(spectrum[window])]
    frequency = frequencies[best]
    if window[0] < best < window[-1]:
        left, centre, right = spectrum[best - 1:best + 2]
        curvature = left - 2 * centre + right
        if curvature < 0:
            frequency += 0.5 * (left - right) / curvature * (frequencies[1] - frequencies[0])
    return 1 / frequency


def central_visibility(z, density, period):
    """(I_max − I_min)/(I_max + I_min) over |z| ≤ period."""
    if not np.isfinite(period):
        return 0.0
    central = density[np.abs(z) <= period]
    high, low = np.max(central), np.min(central)
    return float((high - low) / (high + low)) if high + low > 0 else 0.0


def _report(z, density, predicted):
    measured = extract_fringe_period(z, density, predicted)
    visibility = central_visibility(z, density, measured if np.isfinite(measured) else predicted)
    return FringeReport(z=z, density=density, period_measured=measured, period_predicted=predicted,
                        visibility=visibility)


def analytic_pattern_vacuum(b, t, beta, mass, grid):
    """Closed-form density of ψ₊ built from two ground state packets at ±b after free flight.

    Works in flight units (z in 1/β, t in 2m/(hbar β²)) and normalizes by the
    exact branch overlap 1 + e^{−(βb)²}.

    Args:
        b : Half separation [m].
        t : Flight time [s].
        beta : Inverse packet width 1/(√2 a) [1/m].
        mass : Particle mass [kg].
        grid : GridSpec to evaluate on.

    Returns:
        FringeReport with the density in 1/m.
    """
    if b < 0 or not t > 0:
        raise DomainError("b must not be negative and t must be positive")
    t_u = t / units.flight_scale(mass, beta)
    b_u = beta * b
    z_u = beta * grid.positions
    width = 1 + 4 * t_u ** 2
    density = (np.exp(-(z_u - b_u) ** 2 / width) + np.exp(-(z_u + b_u) ** 2 / width)
               + 2 * np.exp(-(z_u ** 2 + b_u ** 2) / width) * np.cos(4 * b_u * z_u * t_u / width))
    density = beta * density / (2 * np.sqrt(np.pi * width)) / (1 + np.exp(-b_u ** 2))
    if b == 0:
        warnings.warn("Coinciding branches produce no fringes", ValidityWarning)
        return FringeReport(z=grid.positions, density=density, period_measured=np.nan, period_predicted=np.inf,
                            visibility=0.0)
    predicted = units.fringe_period_dimensionless(b_u, t_u) / beta
    return _report(grid.positions, density, predicted)


def estimate_separation(psi):
    """Branch separation 2<|z|> of a symmetric two-lobe wavefunction [m]."""
    z = psi.grid.positions
    return 2 * np.sum(np.abs(z) * psi.density) * psi.grid.spacing


def _check_grid_convergence(source, flown, t, numerics):
    """Compare a flown density with the same flight on a grid of twice the resolution.

    Raises GridError when the densities on the shared nodes differ by more than
    numerics.grid_convergence_tolerance relative to the peak.
    """
    grid = flown.grid
    fine = GridSpec(2 * grid.n_points, grid.extent)
    refined = free_propagate(hilbert.to_grid(source, fine), t).density[::2]
    drift = np.max(np.abs(refined - flown.density)) / np.max(flown.density)
    logger.debug("Grid convergence {} -> {} points: density drift {:.3g}".format(grid.n_points, fine.n_points, drift))
    if drift > numerics.grid_convergence_tolerance:
        raise GridError("Density changes by {:.3g} between {} and {} grid points".format(
            drift, grid.n_points, fine.n_points))


def pattern(psi, t, separation=None, source=None, numerics=NumericsSettings()):
    """Interference pattern of a superposition state after free flight.

    When the Fock-space source of psi is given and numerics.convergence_check is
    set, the flight is repeated on a grid with twice the points over the same extent
    and the densities on the shared nodes must agree.

    Args:
        psi : GridWavefunction of ψ±.
        t : Flight time [s].
        separation : Branch separation [m] for the predicted far-field period;
                     estimated from the initial density when None.
        source : QuantumState psi was sampled from, or None to skip the grid check.
        numerics : NumericsSettings instance.

    Returns:
        FringeReport instance.
    """
    separation = estimate_separation(psi) if separation is None else separation
    flown = free_propagate(psi, t)
    if source is not None and numerics.convergence_check:
        _check_grid_convergence(source, flown, t, numerics)
    predicted = units.fringe_period(t, psi.mass, separation) if separation > 0 else np.inf
    report = _report(psi.grid.positions, flown.density, predicted)
    logger.debug("Pattern after {:.4g} s: period {:.6g} m (predicted {:.6g} m), visibility {:.4f}".format(
        t, report.period_measured, predicted, report.visibility))
    return report


def thermal_patterns(nbars, params, t=None, sign=1, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Patterns of thermal initial states mixed from the |0⟩ and |1⟩ results.

    The Bose-Einstein distribution is truncated to its two lowest terms and
    renormalized, so the |1⟩ weight is nbar/(1 + 2 nbar). The densities are mixed
    incoherently.

    Args:
        nbars : Iterable of mean phonon numbers.
        params : ExperimentParams instance.
        t : Flight time [s], params.flight_time when None.
        sign : +1 for ψ₊, −1 for ψ₋.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        List of FringeReport, one per nbar.
    """
    nbars = list(nbars)
    t = params.flight_time if t is None else t
    for nbar in nbars:
        if nbar > 0.2:
            warnings.warn("Two-term thermal mixture used at nbar = {}".format(nbar), ValidityWarning)
    m = units.mass_from_diameter(params.diameter, params.density)
    separation = units.max_separation(params.gradient, m, params.trap_freq_final)
    levels = [0, 1] if any(nbar > 0 for nbar in nbars) else [0]
    densities = {}
    for n in levels:
        result = cat_pipeline(n, params, sign, numerics, settings)
        source = hilbert.mechanical_state(result.final_state)
        densities[n] = pattern(result.grid_state, t, separation, source, numerics).density
    z = result.grid_state.grid.positions
    predicted = units.fringe_period(t, m, separation) if separation > 0 else np.inf
    reports = []
    for nbar in nbars:
        weights = hilbert.thermal_weights(nbar, 2)
        density = weights[0] * densities[0] + (weights[1] * densities[1] if weights[1] > 0 else 0.0)
        reports.append(_report(z, density, predicted))
        logger.info("Thermal pattern nbar={}: visibility {:.6f}".format(nbar, reports[-1].visibility))
    return reports


def thermal_pattern(nbar, params, t=None, sign=1, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Pattern of a thermal initial state with mean phonon number nbar."""
    return thermal_patterns([nbar], params, t, sign, numerics, settings)[0]
