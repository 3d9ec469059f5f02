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
"""Classes for reading scenario configuration files."""

import configparser
from dataclasses import dataclass, fields, replace
import logging
import os
from typing import Any, Callable, Dict, List, Optional

from spinmechworks import units
from spinmechworks.types import ExperimentParams, NumericsSettings, ProtocolSettings
from spinmechworks.utils.exceptions import ConfigError, SpinMechError, extend_exception

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SPINMECHWORKS_OUTPUT_DIR"

EXPERIMENTS = ("fidelity-scan", "fock-ladder", "qnd", "cat", "interference", "thermal", "decoherence",
               "sweep-Dm", "splitting")
SWEEP_AXES = ("G", "omega2", "d", "nbar", "s")


def _float(text):
    return float(text)


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("{} is not an integer".format(text))
    return int(value)


def _bool(text):
    states = configparser.ConfigParser.BOOLEAN_STATES
    if text.lower() not in states:
        raise ValueError("{} is not a boolean".format(text))
    return states[text.lower()]


def _float_list(text):
    return [float(item) for item in text.replace("\n", ",").split(",") if item.strip()]


def _optional_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _sign(text):
    signs = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text.strip() not in signs:
        raise ValueError("sign must be + or -")
    return signs[text.strip()]


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError("expected one of {}".format(", ".join(options)))
        return text
    return parse


def _positive(value):
    return value > 0


def _non_negative(value):
    return value >= 0


def _all_positive(values):
    return all(v > 0 for v in values)


def _all_non_negative(values):
    return all(v >= 0 for v in values)


@dataclass(frozen=True)
class ConfigField:
    """A dataclass describing one configuration key."""

    parse: Callable[[str], Any]
    default: Any
    help: str
    check: Optional[Callable[[Any], bool]] = None


SCHEMA = {
    "scenario": {
        "experiment": ConfigField(_choice(EXPERIMENTS), "decoherence", "experiment to run"),
        "name": ConfigField(str, "", "scenario name written to artifact headers (default: experiment)"),
        "n": ConfigField(_int, 0, "initial Fock level of cat, interference and splitting runs", _non_negative),
        "n_values": ConfigField(_float_list, [0.0, 1.0, 2.0, 3.0], "phonon numbers of the qnd run",
                                _all_non_negative),
        "n_max": ConfigField(_int, 5, "largest Fock level of the fock-ladder run", _positive),
        "sign": ConfigField(_sign, 1, "+ for psi_plus, - for psi_minus"),
        "mode": ConfigField(_choice(("ideal_RWA", "full_Eq1", "both")), "both", "transfer Hamiltonian"),
        "coupling": ConfigField(_optional_float, None,
                                "coupling lambda in Hz for fidelity-scan (auto: from params)"),
        "s_values": ConfigField(_float_list, [], "omega_m/lambda ratios of fidelity-scan (empty: 3.0 to 40.0 by 0.1)",
                                lambda v: all(s > 2 for s in v)),
        "trace_s": ConfigField(_float_list, [6.3, 10.0], "ratios whose fidelity traces are written",
                               lambda v: all(s > 2 for s in v)),
        "hold_time": ConfigField(_optional_float, None, "QND hold time in s (auto: 1/(2|chi|))"),
        "nbar_values": ConfigField(_float_list, [0.0, 0.01, 0.1], "mean phonon numbers of the thermal run",
                                   _all_non_negative),
        "n_frames": ConfigField(_int, 64, "time frames of the splitting map", lambda v: v >= 2),
    },
    "params": {
        "material": ConfigField(_choice(tuple(units.MATERIAL_DENSITIES)), "diamond", "particle material"),
        "diameter": ConfigField(_float, 30e-9, "particle diameter in m", _positive),
        "density": ConfigField(_optional_float, None, "particle density in kg/m^3 (auto: material)"),
        "trap_freq_initial": ConfigField(_float, 20e3, "initial trap frequency omega_m0/2pi in Hz", _positive),
        "trap_freq_low": ConfigField(_float, 20e3, "intermediate trap frequency omega_m1/2pi in Hz", _positive),
        "trap_freq_final": ConfigField(_float, 20e3, "final trap frequency omega_m2/2pi in Hz", _positive),
        "gradient": ConfigField(_float, 3e4, "magnetic field gradient in T/m", _non_negative),
        "pressure": ConfigField(_float, 1e-11, "background gas pressure in Torr", _non_negative),
        "gas_temp": ConfigField(_float, 4.5, "background gas temperature in K", _positive),
        "internal_temp": ConfigField(_float, 300.0, "internal particle temperature in K", _positive),
        "gas_molecule_mass": ConfigField(_float, 4.83e-26, "gas molecule mass in kg", _positive),
        "flight_time": ConfigField(_float, 10e-3, "free flight time in s", _non_negative),
        "interference_width": ConfigField(_optional_float, None, "superposition size in m (auto: D_m)"),
        "permittivity_loss": ConfigField(_float, 2.7895, "Im[(eps-1)/(eps+2)], calibrated to 3 Hz",
                                         _non_negative),
        "spin_dephasing_time": ConfigField(_float, 1.8e-3, "spin dephasing time T2 in s", _positive),
    },
    "numerics": {
        "fock_dim": ConfigField(_int, 0, "Fock levels (0: automatic)", _non_negative),
        "grid_points": ConfigField(_int, 2 ** 16, "position grid points (power of two)",
                                   lambda v: v >= 2 and not v & (v - 1)),
        "grid_extent": ConfigField(_float, 4e-6, "position grid extent in m", _positive),
        "time_samples": ConfigField(_int, 64, "time samples of evolution traces", lambda v: v >= 2),
        "samples_per_period": ConfigField(_int, 400, "peak search samples per period", lambda v: v >= 4),
        "convergence_check": ConfigField(_bool, True, "rerun with 1.5x Fock levels and 2x grid points and compare"),
        "convergence_tolerance": ConfigField(_float, 1e-6, "allowed drift of the convergence rerun", _positive),
        "oracle_tolerance": ConfigField(_float, 1e-6, "allowed infidelity against the closed form split",
                                        _positive),
        "frame_change_points": ConfigField(_int, 2 ** 14, "quadrature points of trap frequency changes",
                                           lambda v: v >= 64),
        "grid_convergence_tolerance": ConfigField(_float, 1e-8, "allowed density drift when the grid is doubled",
                                                  _positive),
    },
    "protocol": {
        "peak_window_low": ConfigField(_float, 0.5, "peak search window start in units of t1", _positive),
        "peak_window_high": ConfigField(_float, 1.5, "peak search window end in units of t1", _positive),
        "qnd_detuning_factor": ConfigField(_float, 5.0, "QND drive detuning from omega_m/2 in units of lambda"),
        "qnd_min_detuning_factor": ConfigField(_float, 3.0, "warn below this QND detuning in units of lambda",
                                               _non_negative),
        "pulse_linewidth": ConfigField(_float, 1e3, "disentangling pulse linewidth in Hz", _positive),
        "min_splitting_ratio": ConfigField(_float, 100.0, "required branch splitting in pulse linewidths",
                                           _positive),
        "threshold_criterion": ConfigField(_float, 11.66, "lambda*T2 defining the threshold gradient", _positive),
        "max_decoherence_events": ConfigField(_float, 0.1, "tolerated decoherence events during flight",
                                              _positive),
    },
    "sweep": {
        "axis": ConfigField(_choice(SWEEP_AXES), "G", "swept parameter"),
        "values": ConfigField(_float_list, [], "swept values (G in T/m, omega2 in Hz, d in m)"),
    },
    "output": {
        "directory": ConfigField(str, "output", "artifact directory ({} overrides)".format(OUTPUT_DIR_ENV)),
        "format": ConfigField(_choice(("csv", "hdf5")), "csv", "format of time series artifacts"),
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """A dataclass encapsulating a fully resolved scenario."""

    experiment: str
    name: str
    params: ExperimentParams
    numerics: NumericsSettings
    protocol: ProtocolSettings
    options: Dict[str, Any]
    sweep_axis: str
    sweep_values: List[float]
    output_dir: str
    output_format: str
    resolved: Dict[str, str]


def schema_help():
    """Describe every configuration key, for --help."""
    lines = ["configuration keys (section.key = default: description):"]
    for section in SCHEMA:
        for key, spec in SCHEMA[section].items():
            lines.append("  {}.{} = {}: {}".format(section, key, spec.default, spec.help))
    return "\n".join(lines)


def _parse_override(text):
    target, sep, value = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot:
        raise ConfigError("Override {} is not of the form section.key=value".format(text), key=target.strip())
    return section, key, value.strip()


def _raw_values(path, overrides):
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, "r") as fh:
                parser.read_file(fh)
        except configparser.Error as e:
            raise ConfigError("Cannot parse {}: {}".format(path, e)) from e
        except OSError as e:
            raise ConfigError("Cannot read configuration {}: {}".format(path, e)) from e
    raw = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            raw[(section, key)] = value
    for override in overrides:
        section, key, value = _parse_override(override)
        raw[(section, key)] = value
    return raw


def _resolve(raw):
    values = {(section, key): spec.default for section in SCHEMA for key, spec in SCHEMA[section].items()}
    for (section, key), text in raw.items():
        name = "{}.{}".format(section, key)
        if section not in SCHEMA:
            raise ConfigError("Unknown section [{}]".format(section), key=section)
        if key not in SCHEMA[section]:
            raise ConfigError("Unknown key {}".format(name), key=name)
        spec = SCHEMA[section][key]
        try:
            value = spec.parse(text)
        except ValueError as e:
            raise ConfigError("Invalid value {!r} for {}: {}".format(text, name, e), key=name) from e
        if value is not None and spec.check is not None and not spec.check(value):
            raise ConfigError("Value {!r} out of range for {} ({})".format(text, name, spec.help), key=name)
        values[(section, key)] = value
    return values


def _experiment_params(values):
    get = lambda key: values[("params", key)]  # noqa: E731
    density = get("density") if get("density") is not None else units.material_density(get("material"))
    return ExperimentParams(diameter=get("diameter"),
                            density=density,
                            trap_freq_initial=units.hz_to_angular(get("trap_freq_initial")),
                            trap_freq_low=units.hz_to_angular(get("trap_freq_low")),
                            trap_freq_final=units.hz_to_angular(get("trap_freq_final")),
                            gradient=get("gradient"),
                            pressure=units.torr_to_pa(get("pressure")),
                            gas_temp=get("gas_temp"),
                            internal_temp=get("internal_temp"),
                            gas_molecule_mass=get("gas_molecule_mass"),
                            flight_time=get("flight_time"),
                            interference_width=get("interference_width"),
                            permittivity_loss=get("permittivity_loss"),
                            spin_dephasing_time=get("spin_dephasing_time"))


def _section_kwargs(values, section, cls):
    names = {f.name for f in fields(cls)}
    return {key: values[(section, key)] for key in SCHEMA[section] if key in names}


def read_scenario_config(path=None, overrides=(), output_dir=None):
    """Read, override and validate a scenario configuration.

    Precedence is overrides > file values > schema defaults. The output directory is
    taken from output_dir, then the SPINMECHWORKS_OUTPUT_DIR environment variable,
    then the file.

    Args:
        path : INI file path, or None for defaults only.
        overrides : Iterable of "section.key=value" strings.
        output_dir : Explicit output directory.

    Returns:
        ScenarioConfig instance.
    """
    values = _resolve(_raw_values(path, overrides))
    try:
        params = _experiment_params(values)
        numerics = NumericsSettings(**_section_kwargs(values, "numerics", NumericsSettings))
        protocol_values = _section_kwargs(values, "protocol", ProtocolSettings)
        protocol_values["pulse_linewidth"] = units.hz_to_angular(protocol_values["pulse_linewidth"])
        protocol = ProtocolSettings(peak_window=(values[("protocol", "peak_window_low")],
                                                 values[("protocol", "peak_window_high")]),
                                    **protocol_values)
    except SpinMechError as e:
        raise ConfigError(str(e)) from e
    if not protocol.peak_window[0] < 1 < protocol.peak_window[1]:
        raise ConfigError("The peak window must contain t1", key="protocol.peak_window_low")

    experiment = values[("scenario", "experiment")]
    resolved = {"{}.{}".format(section, key): repr(value) for (section, key), value in values.items()
                if section != "output"}
    directory = output_dir or os.environ.get(OUTPUT_DIR_ENV) or values[("output", "directory")]
    options = {key: values[("scenario", key)] for key in SCHEMA["scenario"]}
    config = ScenarioConfig(experiment=experiment,
                            name=values[("scenario", "name")] or experiment,
                            params=params,
                            numerics=numerics,
                            protocol=protocol,
                            options=options,
                            sweep_axis=values[("sweep", "axis")],
                            sweep_values=values[("sweep", "values")],
                            output_dir=directory,
                            output_format=values[("output", "format")],
                            resolved=resolved)
    logger.debug("Resolved scenario {} ({})".format(config.name, path))
    return config


def with_params(config, **changes):
    """Return a config whose ExperimentParams have the given fields replaced."""
    try:
        return replace(config, params=replace(config.params, **changes))
    except SpinMechError as e:
        raise extend_exception(e, "while applying {}".format(sorted(changes)))
