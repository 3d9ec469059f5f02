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
"""Code snippet for cat state interference."""

from spinmechworks import estimators, interference, protocols, units

# 30 nm diamond in a 20 kHz trap with a 3e4 T/m gradient, 10 ms of flight.
params = units.interference_params()
derived = units.derive(params)
print("Maximum separation D_m = {:.4g} m".format(derived.max_separation))

# Prepare psi_+ from the mechanical ground state.
result = protocols.cat_pipeline(0, params, sign=1)
print("Separation {:.4g} m prepared in {:.3g} s".format(
    result.summary["separation"], result.summary["preparation_time"]))

# Free flight and fringe analysis.
report = interference.pattern(result.grid_state, params.flight_time, derived.max_separation)
print("Fringe period {:.4g} m (predicted {:.4g} m), visibility {:.4f}".format(
    report.period_measured, report.period_predicted, report.visibility))

# Decoherence budget of the same scenario.
budget = estimators.feasibility_report(params)
print("Gas collisions {:.3g} Hz, blackbody {:.3g} Hz".format(budget.gamma_gas, budget.gamma_bb))
for name, item in sorted(budget.budget.items()):
    print("{}: {:.3g} vs {:.3g} ({})".format(name, item.value, item.limit, "ok" if item.passed else "fails"))
