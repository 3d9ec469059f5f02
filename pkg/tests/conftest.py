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

"""Share fixtures across multiple test fies."""

import os
import shutil
import tempfile

import numpy as np
import pytest

from spinmechworks import units
from spinmechworks.types import CouplingParams, NumericsSettings


@pytest.fixture(scope='function')
def get_output_dir():
    """Fixture for creating temporary output directories.

    Returns:
        A function which creates a new empty directory
    """
    def output_dir():
        path = tempfile.mkdtemp(prefix='smw_test_output_')
        created_dirs.append(path)
        return path
    created_dirs = list()
    yield output_dir
    # cleanup
    try:
        for entry in created_dirs:
            shutil.rmtree(entry)
    except OSError as err:
        raise type(err)('Can not remove output directory: {}'.format(entry)) from err


@pytest.fixture(scope='function')
def get_config_file():
    """Fixture for writing scenario INI files from strings.

    Returns:
        A function which writes the content and returns the file path
    """
    def config_file(content):
        fd, path = tempfile.mkstemp(prefix='smw_test_config_', suffix='.conf')
        with os.fdopen(fd, 'w') as fh:
            fh.write(content)
        created_files.append(path)
        return path
    created_files = list()
    yield config_file
    # cleanup
    try:
        for entry in created_files:
            os.remove(entry)
    except OSError as err:
        raise type(err)('Can not remove config file: {}'.format(entry)) from err


@pytest.fixture(scope='session')
def section3_coupling():
    """Coupling of a 30 nm diamond in a 0.5 MHz trap at 1e5 T/m."""
    params = units.section3_params()
    derived = units.derive(params)
    return CouplingParams(coupling=derived.coupling, omega_m=params.trap_freq_initial, mass=derived.mass)


@pytest.fixture(scope='session')
def fast_numerics():
    return NumericsSettings(fock_dim=32, convergence_check=False)


@pytest.fixture(scope='session')
def random_generator():
    return np.random.default_rng(2020)
