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
"""Argument checks shared by the closed-form formulas."""

from spinmechworks.utils.exceptions import DomainError


def require_positive(**values):
    """Raise DomainError unless every keyword value is strictly positive.

    Args:
        values : Keyword arguments mapping a parameter name to its value.
    """
    for name, value in values.items():
        if not value > 0:
            raise DomainError("{} must be positive, got {}".format(name, value))


def require_non_negative(**values):
    """Raise DomainError if any keyword value is negative."""
    for name, value in values.items():
        if value < 0:
            raise DomainError("{} must not be negative, got {}".format(name, value))
