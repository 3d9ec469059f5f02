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
"""Code snippet for Fock state preparation."""

from spinmechworks import protocols, units
from spinmechworks.types import CouplingParams, NumericsSettings, TransferMode

# Trap and gradient of the Fock state scenario.
params = units.section3_params()
derived = units.derive(params)
coupling = CouplingParams(coupling=derived.coupling, omega_m=params.trap_freq_initial, mass=derived.mass)
print("Coupling lambda = {:.2f} kHz".format(units.angular_to_hz(coupling.coupling) / 1e3))

# Climb the ladder with ideal and full pulses.
numerics = NumericsSettings(fock_dim=32, convergence_check=False)
for mode in TransferMode:
    result = protocols.fock_ladder(3, mode, coupling, numerics)
    print("{}: fidelity to |3> = {:.6f} after {:.3g} s".format(
        mode.value, result.summary["fidelity"], result.summary["total_time"]))

# Oscillator fidelity to |i> after pulse i of the last run.
for step, t, f in zip(result.steps, result.times[1:], result.fidelities[1:]):
    print("{:8s} t = {:.3g} s  F = {:.6f}".format(step.kind.name, t, f))
