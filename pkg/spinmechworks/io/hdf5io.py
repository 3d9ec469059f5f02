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
"""Classes for writing protocol results to HDF5."""

import h5py
import numpy as np

from spinmechworks.io.baseio import BaseWriter


class ProtocolResultWriter(BaseWriter):
    """Writer for ProtocolResult time series.

    Each result becomes a group holding times, fidelities, the final state
    amplitudes and, when present, the density map and grid wavefunction. Summary
    scalars and the provenance header are stored as attributes. Datasets are
    written without timestamps.

    Should be used with a context manager.
    """

    def __enter__(self):
        """For contextmanager support."""
        self.file_obj = h5py.File(self.output_path, "w", track_order=True)
        for key, value in self.header:
            self.file_obj.attrs[key] = value
        return self

    def _dataset(self, group, name, data):
        group.create_dataset(name, data=np.asarray(data), track_times=False)

    def write_output(self, name, result):
        """Write a ProtocolResult under the group name."""
        group = self.file_obj.create_group(name, track_order=True)
        self._dataset(group, "times", result.times)
        self._dataset(group, "fidelities", result.fidelities)
        self._dataset(group, "final_state", result.final_state.amplitudes)
        group.attrs["spin_dim"] = result.final_state.spin_dim
        group.attrs["fock_omega"] = result.final_state.basis.omega
        if result.density_map is not None:
            self._dataset(group, "density_map", result.density_map)
        if result.grid_state is not None:
            self._dataset(group, "z", result.grid_state.grid.positions)
            self._dataset(group, "wavefunction", result.grid_state.values)
        for key in sorted(result.summary):
            group.attrs[key] = result.summary[key]
