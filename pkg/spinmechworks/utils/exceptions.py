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
"""Custom Exceptions."""


class SpinMechError(Exception):
    """Base class for every error raised by spinmechworks."""

    pass


class DomainError(SpinMechError, ValueError):
    """A physical input lies outside the domain of a formula."""

    pass


class SingularityError(SpinMechError, ZeroDivisionError):
    """A formula was evaluated on one of its resonances."""

    pass


class TruncationError(SpinMechError):
    """The truncated Fock basis lost more norm than tolerated."""

    pass


class BasisMismatchError(SpinMechError, ValueError):
    """States or operators were combined across different bases."""

    pass


class GridError(SpinMechError):
    """A position grid is too small or too coarse for a wavefunction."""

    pass


class BranchResolutionError(SpinMechError):
    """Disentangling pulses cannot address the two spin branches separately."""

    pass


class ConfigError(SpinMechError, ValueError):
    """A scenario configuration failed to parse or validate.

    Args:
        msg : Human readable diagnostic.
        key : Offending configuration key, if known.
    """

    def __init__(self, msg, key=None):
        """Construct a config error carrying the offending key."""
        super().__init__(msg)
        self.key = key


class ValidityWarning(UserWarning):
    """An approximation is used outside of the regime where it holds."""

    pass


def extend_exception(e, msg):
    """Extend an exception with new message.

    Args:
        e : Original exception
        msg : New message to be added to exception

    Returns:
        Exception of the same type carrying both messages and the original traceback.
    """
    extended = type(e).__new__(type(e))
    extended.args = ("{}\n{}".format(str(e), msg),)
    extended.__dict__.update(e.__dict__)
    return extended.with_traceback(e.__traceback__)
