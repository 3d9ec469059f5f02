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
"""Utilities for evaluating oscillator eigenfunctions on position grids."""

import numpy as np
from scipy.integrate import trapezoid


def iter_hermite_functions(n_max, xi):
    """Yield the normalized Hermite functions h_0 ... h_{n_max-1} at xi.

    Uses the three-term recurrence
    h_{n+1} = sqrt(2/(n+1)) xi h_n - sqrt(n/(n+1)) h_{n-1},
    which stays bounded where the explicit polynomials overflow.

    Args:
        n_max : Number of functions to produce.
        xi : Dimensionless positions x / sqrt(hbar / (m omega)).

    Returns:
        Generator of arrays shaped like xi.
    """
    xi = np.asarray(xi, dtype=np.float64)
    previous = np.zeros_like(xi)
    current = np.pi ** -0.25 * np.exp(-xi ** 2 / 2)
    for n in range(n_max):
        yield current
        following = np.sqrt(2.0 / (n + 1)) * xi * current - np.sqrt(n / (n + 1.0)) * previous
        previous, current = current, following


def hermite_series(coeffs, xi):
    """Evaluate sum_n c_n h_n(xi) for one or several coefficient rows.

    Args:
        coeffs : Complex array of shape (n,) or (rows, n).
        xi : Dimensionless positions.

    Returns:
        Complex array of shape (len(xi),) or (rows, len(xi)).
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    rows = np.atleast_2d(coeffs)
    total = np.zeros((rows.shape[0], np.size(xi)), dtype=np.complex128)
    for n, h_n in enumerate(iter_hermite_functions(rows.shape[1], xi)):
        nonzero = rows[:, n] != 0
        if np.any(nonzero):
            total += np.outer(rows[:, n], h_n)
    return total[0] if coeffs.ndim == 1 else total


def hermite_projections(samples, xi, n_max):
    """Project sampled functions onto h_0 ... h_{n_max-1} with trapezoidal quadrature.

    Args:
        samples : Complex array of shape (points,) or (rows, points), in units where
                  the h_n are normalized over xi.
        xi : Dimensionless positions of the samples.
        n_max : Number of projections.

    Returns:
        Complex array of shape (n_max,) or (rows, n_max).
    """
    samples = np.asarray(samples, dtype=np.complex128)
    rows = np.atleast_2d(samples)
    projections = np.empty((rows.shape[0], n_max), dtype=np.complex128)
    for n, h_n in enumerate(iter_hermite_functions(n_max, xi)):
        projections[:, n] = trapezoid(rows * h_n, xi, axis=1)
    return projections[0] if samples.ndim == 1 else projections


def grid_moments(z, density, spacing):
    """Return mean and standard deviation of a sampled probability density."""
    weight = np.sum(density) * spacing
    mean = np.sum(z * density) * spacing / weight
    variance = np.sum((z - mean) ** 2 * density) * spacing / weight
    return mean, np.sqrt(max(variance, 0.0))
