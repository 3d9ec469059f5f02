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
"""Command line runner for spinmechworks scenarios and parameter sweeps."""

import argparse
import dataclasses
from functools import partial
import logging
import multiprocessing as mp
import os
import sys

import numpy as np
import pandas as pd

from spinmechworks import estimators, hilbert, interference, protocols, units
from spinmechworks.io.configio import SWEEP_AXES, read_scenario_config, schema_help, with_params
from spinmechworks.io.hdf5io import ProtocolResultWriter
from spinmechworks.io.tableio import CSVTableWriter, JSONReportWriter, artifact_header
from spinmechworks.types import CouplingParams, GridSpec, TransferMode
from spinmechworks.utils.exceptions import ConfigError, SpinMechError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

SWEEP_COLUMNS = {
    "G": ["coupling_hz", "max_separation", "a2", "splitting_hz", "fringe_period", "two_chi_hz"],
    "omega2": ["coupling_hz", "max_separation", "a2", "splitting_hz", "fringe_period", "two_chi_hz"],
    "d": ["coupling_hz", "max_separation", "a2", "splitting_hz", "fringe_period", "two_chi_hz"],
    "nbar": ["visibility", "period_measured", "period_predicted"],
    "s": ["peak_fidelity", "peak_time"],
}


class ArtifactSink(object):
    """Collects the artifacts of one run under a common provenance header."""

    def __init__(self, config):
        """Construct a sink for a resolved scenario.

        Args:
            config : ScenarioConfig instance.

        Returns:
            Instance of object.
        """
        self.directory = config.output_dir
        self.output_format = config.output_format
        self.header = artifact_header(config.name, config.resolved)
        self.prefix = config.name
        self.artifacts = []
        os.makedirs(self.directory, exist_ok=True)

    def _path(self, name, extension):
        filename = "{}_{}.{}".format(self.prefix, name, extension)
        self.artifacts.append(filename)
        return os.path.join(self.directory, filename)

    def table(self, name, dataframe):
        """Write a dataframe as a CSV artifact."""
        with CSVTableWriter(self._path(name, "csv"), self.header) as writer:
            writer.write_output(dataframe)

    def report(self, name, document):
        """Write a dictionary as a JSON artifact."""
        with JSONReportWriter(self._path(name, "json"), self.header) as writer:
            writer.write_output(document)

    def results(self, name, results):
        """Write labelled ProtocolResult time series, as HDF5 groups or one long CSV table."""
        if self.output_format == "hdf5":
            with ProtocolResultWriter(self._path(name, "h5"), self.header) as writer:
                for label, result in results:
                    writer.write_output(label, result)
            return
        frames = [pd.DataFrame({"label": label, "time": result.times, "fidelity": result.fidelities})
                  for label, result in results]
        self.table(name, pd.concat(frames, ignore_index=True) if frames else
                   pd.DataFrame(columns=["label", "time", "fidelity"]))

    def manifest(self, config):
        """Write <name>_manifest.json listing every artifact with the resolved configuration."""
        path = os.path.join(self.directory, "{}_manifest.json".format(self.prefix))
        with JSONReportWriter(path, self.header) as writer:
            writer.write_output({"experiment": config.experiment,
                                 "artifacts": sorted(self.artifacts),
                                 "output_format": config.output_format,
                                 "configuration": config.resolved})


def _coupling_params(config):
    """Coupling configuration of the initial trap, λ from the gradient unless given in Hz."""
    derived = units.derive(config.params, config.protocol)
    coupling = config.options["coupling"]
    coupling = units.hz_to_angular(coupling) if coupling is not None else derived.coupling
    return CouplingParams(coupling=coupling, omega_m=config.params.trap_freq_initial, mass=derived.mass)


def _modes(config):
    mode = config.options["mode"]
    return [TransferMode.IDEAL_RWA, TransferMode.FULL_EQ1] if mode == "both" else [TransferMode(mode)]


def _derived_report(config):
    return {key: float(value) for key, value in dataclasses.asdict(units.derive(config.params,
                                                                               config.protocol)).items()}


def _fidelity_scan(config, sink):
    coupling = _coupling_params(config).coupling
    s_values = config.options["s_values"] or list(np.round(np.arange(30, 401) / 10, 1))
    scan = protocols.fidelity_scan(s_values, coupling, config.numerics, config.protocol)
    sink.table("fidelity_scan", pd.DataFrame(scan, columns=["s", "peak_fidelity"]))
    traces = []
    c = 1 / np.sqrt(2)
    for s in config.options["trace_s"]:
        result = protocols.superposition_transfer(c, c, TransferMode.FULL_EQ1, CouplingParams.from_ratio(s, coupling),
                                                  config.numerics, config.protocol)
        traces.append(("s={}".format(s), result))
    sink.results("fidelity_traces", traces)


def _fock_ladder(config, sink):
    params = _coupling_params(config)
    rows, series = [], []
    for mode in _modes(config):
        for n in range(1, config.options["n_max"] + 1):
            result = protocols.fock_ladder(n, mode, params, config.numerics, config.protocol)
            rows.append({"n": n, "mode": mode.value, "fidelity": result.summary["fidelity"],
                         "total_time": result.summary["total_time"], "t1": result.summary["t1"]})
            series.append(("{}_n={}".format(mode.value, n), result))
    sink.table("fock_ladder", pd.DataFrame(rows, columns=["n", "mode", "fidelity", "total_time", "t1"]))
    sink.results("fock_ladder_steps", series)


def _qnd(config, sink):
    params = _coupling_params(config)
    Omega = units.qnd_drive(params.omega_m, params.coupling, config.protocol.qnd_detuning_factor)
    chi = units.qnd_chi(Omega, params.coupling, params.omega_m)
    hold_time = config.options["hold_time"] or 1 / (2 * abs(chi))
    rows, series = [], []
    for n in (int(v) for v in config.options["n_values"]):
        result = protocols.qnd_readout(n, hold_time, params, config.numerics, config.protocol)
        rows.append({"n": n, "phase": result.summary["phase"], "expected_phase": result.summary["expected_phase"],
                     "full_deviation": result.summary["full_deviation"], "population": result.summary["fidelity"]})
        series.append(("n={}".format(n), result))
    sink.table("qnd", pd.DataFrame(rows, columns=["n", "phase", "expected_phase", "full_deviation", "population"]))
    sink.report("qnd_summary", {"chi": chi, "Omega": Omega, "hold_time": hold_time,
                                "two_chi_hz": units.angular_to_hz(2 * abs(chi)),
                                "coupling_hz": units.angular_to_hz(params.coupling)})
    sink.results("qnd_populations", series)


def _wavefunction_table(grid_state):
    values = grid_state.values[0]
    return pd.DataFrame({"z": grid_state.grid.positions, "real": values.real, "imag": values.imag,
                         "density": grid_state.density})


def _cat(config, sink):
    n, sign = config.options["n"], config.options["sign"]
    result = protocols.cat_pipeline(n, config.params, sign, config.numerics, config.protocol)
    sink.report("cat_summary", {"summary": result.summary, "derived": _derived_report(config)})
    sink.table("cat_wavefunction", _wavefunction_table(result.grid_state))
    sink.results("cat_evolution", [("n={}".format(n), result)])


def _interference(config, sink):
    n, sign = config.options["n"], config.options["sign"]
    derived = units.derive(config.params, config.protocol)
    result = protocols.cat_pipeline(n, config.params, sign, config.numerics, config.protocol)
    t = config.params.flight_time
    report = interference.pattern(result.grid_state, t, derived.max_separation,
                                  hilbert.mechanical_state(result.final_state), config.numerics)
    table = pd.DataFrame({"z": report.z, "density": report.density})
    summary = {"period_measured": report.period_measured, "period_predicted": report.period_predicted,
               "visibility": report.visibility, "separation": derived.max_separation,
               "separation_over_a2": derived.max_separation / derived.a2}
    if n == 0 and sign == 1 and derived.b > 0:
        grid = GridSpec(config.numerics.grid_points, config.numerics.grid_extent)
        analytic = interference.analytic_pattern_vacuum(derived.b, t, derived.beta, derived.mass, grid)
        table["analytic_density"] = analytic.density
        summary["analytic_period"] = analytic.period_measured
        central = np.abs(grid.positions) <= 3 * analytic.period_measured
        summary["analytic_max_deviation"] = float(np.max(np.abs(report.density - analytic.density)[central])
                                                  / np.max(analytic.density))
    sink.table("interference_pattern", table)
    sink.report("interference_summary", summary)


def _thermal(config, sink):
    nbars = config.options["nbar_values"]
    reports = interference.thermal_patterns(nbars, config.params, sign=config.options["sign"],
                                            numerics=config.numerics, settings=config.protocol)
    table = pd.DataFrame({"z": reports[0].z} if reports else {"z": []})
    for nbar, report in zip(nbars, reports):
        table["density_nbar={}".format(nbar)] = report.density
    sink.table("thermal_patterns", table)
    sink.table("thermal_visibility", pd.DataFrame(
        [(nbar, r.visibility, r.period_measured) for nbar, r in zip(nbars, reports)],
        columns=["nbar", "visibility", "period_measured"]))


def _decoherence(config, sink):
    report = estimators.feasibility_report(config.params, config.protocol)
    sink.report("decoherence", {
        "gamma_gas": report.gamma_gas,
        "gamma_bb": report.gamma_bb,
        "mean_velocity": report.mean_velocity,
        "budget": {name: dataclasses.asdict(item) for name, item in report.budget.items()},
        "annotations": report.annotations,
        "derived": _derived_report(config),
    })


def _separation_table(values, gradients, omegas, diameters, density):
    rows = []
    for value, G, omega, d in zip(values, gradients, omegas, diameters):
        m = units.mass_from_diameter(d, density)
        D_m = units.max_separation(G, m, omega)
        rows.append({"value": value, "max_separation": D_m, "a2": units.zero_point_width(m, omega),
                     "separation_over_diameter": D_m / d})
    return pd.DataFrame(rows, columns=["value", "max_separation", "a2", "separation_over_diameter"])


def _sweep_dm(config, sink):
    p = config.params
    freqs = np.linspace(1e3, 100e3, 100)
    sink.table("separation_vs_omega2", _separation_table(
        freqs, [1e5] * len(freqs), units.hz_to_angular(freqs), [p.diameter] * len(freqs), p.density))
    gradients = np.logspace(2, 6, 81)
    omega = units.hz_to_angular(1e3)
    sink.table("separation_vs_gradient", _separation_table(
        gradients, gradients, [omega] * len(gradients), [p.diameter] * len(gradients), p.density))
    diameters = np.linspace(10e-9, 100e-9, 91)
    sink.table("separation_vs_diameter", _separation_table(
        diameters, [p.gradient] * len(diameters), [p.trap_freq_final] * len(diameters), diameters, p.density))
    m = units.mass_from_diameter(p.diameter, p.density)
    sink.report("separation_summary", {
        "gradient_for_particle_size": units.gradient_for_separation(p.diameter, m, omega),
        "reference_trap_hz": 1e3})


def _splitting(config, sink):
    n = config.options["n"]
    result = protocols.splitting_map(n, config.params, config.options["n_frames"], numerics=config.numerics,
                                     settings=config.protocol)
    sink.report("splitting_summary", {"summary": result.summary, "derived": _derived_report(config)})
    if config.output_format == "hdf5":
        sink.results("splitting_map", [("n={}".format(n), result)])
        return
    extent = result.summary["grid_extent"]
    points = int(result.summary["grid_points"])
    z = GridSpec(points, extent).positions
    frames = len(result.times)
    sink.table("splitting_map", pd.DataFrame({"time": np.repeat(result.times, points),
                                              "z": np.tile(z, frames),
                                              "density": result.density_map.reshape(-1)}))
    sink.results("splitting_return", [("n={}".format(n), result)])


EXPERIMENTS = {
    "fidelity-scan": _fidelity_scan,
    "fock-ladder": _fock_ladder,
    "qnd": _qnd,
    "cat": _cat,
    "interference": _interference,
    "thermal": _thermal,
    "decoherence": _decoherence,
    "sweep-Dm": _sweep_dm,
    "splitting": _splitting,
}


def _sweep_row(config, value):
    """Evaluate one sweep point; module level so worker processes can import it."""
    axis = config.sweep_axis
    row = {axis: value}
    if axis in ("G", "omega2", "d"):
        field = {"G": ("gradient", value), "omega2": ("trap_freq_final", units.hz_to_angular(value)),
                 "d": ("diameter", value)}[axis]
        derived = units.derive(with_params(config, **dict([field])).params, config.protocol)
        row.update({"coupling_hz": units.angular_to_hz(derived.coupling),
                    "max_separation": derived.max_separation,
                    "a2": derived.a2,
                    "splitting_hz": units.angular_to_hz(derived.splitting),
                    "fringe_period": derived.fringe_period,
                    "two_chi_hz": units.angular_to_hz(2 * abs(derived.chi))})
    elif axis == "nbar":
        report = interference.thermal_pattern(value, config.params, sign=config.options["sign"],
                                              numerics=config.numerics, settings=config.protocol)
        row.update({"visibility": report.visibility, "period_measured": report.period_measured,
                    "period_predicted": report.period_predicted})
    else:
        c = 1 / np.sqrt(2)
        coupling = _coupling_params(config).coupling
        result = protocols.superposition_transfer(c, c, TransferMode.FULL_EQ1,
                                                  CouplingParams.from_ratio(value, coupling),
                                                  config.numerics, config.protocol)
        row.update({"peak_fidelity": result.summary["peak_fidelity"], "peak_time": result.summary["peak_time"]})
    return row


def sweep_table(config, workers=1):
    """Evaluate the sweep axis of a scenario, one row per value in input order.

    Args:
        config : ScenarioConfig with sweep_axis and sweep_values.
        workers : Number of worker processes.

    Returns:
        pandas DataFrame.
    """
    if config.sweep_axis not in SWEEP_AXES:
        raise ConfigError("Unknown sweep axis {}".format(config.sweep_axis), key="sweep.axis")
    columns = [config.sweep_axis] + SWEEP_COLUMNS[config.sweep_axis]
    values = list(config.sweep_values)
    row_func = partial(_sweep_row, config)
    if workers > 1 and len(values) > 1:
        with mp.Pool(min(workers, len(values))) as pool:
            rows = list(pool.imap(row_func, values))
    else:
        rows = [row_func(value) for value in values]
    logger.info("Sweep over {} with {} values".format(config.sweep_axis, len(values)))
    return pd.DataFrame(rows, columns=columns)


def _guarded(action, config):
    try:
        action()
    except ConfigError as e:
        logger.error("Configuration error: {}".format(e))
        return EXIT_CONFIG
    except (SpinMechError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.error("Numeric failure in {}: {}".format(config.experiment, e))
        return EXIT_NUMERIC
    except OSError as e:
        logger.error("I/O failure: {}".format(e))
        return EXIT_IO
    return EXIT_OK


def run(config):
    """Run the configured experiment and write its artifacts and manifest.

    Returns:
        Exit status: 0 success, 2 configuration error, 3 numeric failure, 4 I/O failure.
    """
    def action():
        sink = ArtifactSink(config)
        logger.info("Running {} ({})".format(config.experiment, config.name))
        EXPERIMENTS[config.experiment](config, sink)
        sink.manifest(config)
    return _guarded(action, config)


def sweep(config, workers=1):
    """Run the configured sweep and write it as a table artifact.

    Returns:
        Exit status as for run().
    """
    def action():
        table = sweep_table(config, workers)
        sink = ArtifactSink(config)
        sink.table("sweep_{}".format(config.sweep_axis), table)
        sink.manifest(config)
    return _guarded(action, config)


def build_parser():
    """Setup option parsing for the runner."""
    parser = argparse.ArgumentParser(
        prog="spinmechworks",
        description="Simulate spin-optomechanics protocols of levitated nanodiamonds.",
        epilog=schema_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True
    for name, help_text in (("run", "Run one experiment."), ("sweep", "Sweep one parameter.")):
        sub = subparsers.add_parser(name, help=help_text, epilog=schema_help(),
                                    formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument("experiment", nargs="?", choices=sorted(EXPERIMENTS),
                         help="Experiment to run, overriding scenario.experiment.")
        sub.add_argument("-c", "--config", type=str, help="Scenario INI file.")
        sub.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                         help="Override one configuration key. May be repeated.")
        sub.add_argument("--n", type=str, help="Initial Fock level (scenario.n).")
        sub.add_argument("--sign", type=str, help="Superposition sign, + or - (scenario.sign).")
        sub.add_argument("-o", "--output-dir", type=str,
                         help="Output directory, overriding the environment and the file.")
        sub.add_argument("--format", type=str, help="Time series format, csv or hdf5 (output.format).")
        sub.add_argument("--log-level", type=str, default="INFO",
                         choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level.")
        if name == "sweep":
            sub.add_argument("--axis", type=str, help="Swept parameter, one of {}.".format(", ".join(SWEEP_AXES)))
            sub.add_argument("--values", type=str, help="Comma separated values (sweep.values).")
            sub.add_argument("-t", "--workers", type=int, default=mp.cpu_count(),
                             help="Worker processes to parallelize over.")
    return parser


def _overrides(args):
    overrides = list(args.set)
    flags = [("scenario.experiment", args.experiment), ("scenario.n", args.n), ("scenario.sign", args.sign),
             ("output.format", args.format)]
    if args.command == "sweep":
        flags += [("sweep.axis", args.axis), ("sweep.values", args.values)]
    overrides += ["{}={}".format(key, value) for key, value in flags if value is not None]
    return overrides


def main(argv=None):
    """Parse arguments, configure logging and dispatch.

    Returns:
        Exit status.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    logging.captureWarnings(True)
    try:
        config = read_scenario_config(args.config, _overrides(args), args.output_dir)
    except ConfigError as e:
        logger.error("Configuration error: {}".format(e))
        return EXIT_CONFIG
    if args.command == "sweep":
        return sweep(config, max(1, args.workers))
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
