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
"""Classes for reading and writing CSV tables and JSON reports with provenance headers."""

import json

import numpy as np
import pandas as pd

from spinmechworks import __version__
from spinmechworks.io.baseio import BaseReader, BaseWriter

ARTIFACT_VERSION = "1"
FLOAT_FORMAT = "%.16e"


def artifact_header(scenario, resolved):
    """Ordered provenance entries shared by every artifact.

    Args:
        scenario : Scenario name.
        resolved : Mapping of fully resolved configuration keys to values.

    Returns:
        List of (key, value) string pairs.
    """
    header = [("scenario", str(scenario)),
              ("artifact_version", ARTIFACT_VERSION),
              ("spinmechworks_version", __version__)]
    header += [(key, str(resolved[key])) for key in sorted(resolved)]
    return header


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


class CSVTableWriter(BaseWriter):
    """Writer for CSV tables preceded by '#' header lines.

    Should be used with a context manager.
    """

    def __enter__(self):
        """For contextmanager support."""
        self.file_obj = open(self.output_path, "w", newline="")
        return self

    def write_output(self, dataframe):
        """Write the header followed by a dataframe.

        Args:
            dataframe : pandas DataFrame; floats are written with 17 significant digits.
        """
        for key, value in self.header:
            self.file_obj.write("# {}: {}\n".format(key, value))
        dataframe.to_csv(self.file_obj, index=False, float_format=FLOAT_FORMAT)


class JSONReportWriter(BaseWriter):
    """Writer for JSON reports with the header under "_header".

    Should be used with a context manager.
    """

    def __enter__(self):
        """For contextmanager support."""
        self.file_obj = open(self.output_path, "w")
        return self

    def write_output(self, report):
        """Write a report dictionary with sorted keys."""
        document = dict(_jsonable(report))
        document["_header"] = {key: value for key, value in self.header}
        self.file_obj.write(json.dumps(document, sort_keys=True, indent=2))
        self.file_obj.write("\n")


class CSVTableReader(BaseReader):
    """Reader for CSV tables written by CSVTableWriter."""

    def __init__(self, input_path):
        """Parse the header lines and the table of a CSV artifact.

        Args:
            input_path : Path of the CSV file.

        Returns:
            Instance of object.
        """
        self.input_path = input_path
        self._header = {}
        header_lines = 0
        with open(input_path, "r") as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition(": ")
                self._header[key] = value
                header_lines += 1
        self._dataframe = pd.read_csv(input_path, skiprows=header_lines, float_precision="round_trip")

    @property
    def header(self):
        """Get the provenance header as a dictionary."""
        return dict(self._header)

    def __getitem__(self, idx):
        """Get one table row as a pandas Series."""
        return self._dataframe.iloc[idx]

    def __len__(self):
        """Return number of rows."""
        return len(self._dataframe)

    @property
    def dataframe(self):
        """Get the table as a pandas dataframe."""
        return self._dataframe
