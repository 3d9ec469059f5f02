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
"""Base classes for artifact readers and writers."""

from abc import ABC, abstractmethod


class BaseReader(ABC):
    """Base class for artifact readers.

    Readers expose the provenance header of an artifact next to its rows.
    """

    @abstractmethod
    def __getitem__(self, idx):
        """Index into reader class to fetch one row."""
        raise NotImplementedError

    @abstractmethod
    def __len__(self):
        """Return total number of rows in the artifact."""
        raise NotImplementedError

    def __iter__(self):
        """Iterate over rows in file order."""
        return (self[idx] for idx in range(len(self)))

    @property
    @abstractmethod
    def header(self):
        """Return the provenance header as a dictionary."""
        raise NotImplementedError

    @property
    @abstractmethod
    def dataframe(self):
        """Return parsed artifact as dataframe."""
        raise NotImplementedError


class BaseWriter(ABC):
    """Base class for artifact writers.

    Writers open their file on __enter__ and close it on __exit__. Every artifact
    starts with the same ordered provenance header.
    """

    def __init__(self, output_path, header=()):
        """Initialize a writer instance.

        Args:
            output_path : Output path of the artifact.
            header : Sequence of (key, value) provenance pairs.
        """
        self.output_path = output_path
        self.header = list(header)
        self.file_obj = None

    def __exit__(self, exc_type, exc_val, exc_tb):
        """For contextmanager support."""
        if self.file_obj is not None:
            self.file_obj.close()
            self.file_obj = None

    @abstractmethod
    def __enter__(self):
        """For contextmanager support."""
        raise NotImplementedError

    @abstractmethod
    def write_output(self, *args, **kwargs):
        """Write artifact body to disk."""
        raise NotImplementedError
