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
"""Pulse sequences built from the dynamics primitives."""

import logging
import math
import warnings

import numpy as np

from spinmechworks import dynamics, hilbert, units
from spinmechworks.types import CouplingParams, FockBasis, GridSpec, HamiltonianKind, HamiltonianSpec, \
    NumericsSettings, ProtocolResult, ProtocolSettings, PulseKind, PulseStep, QuantumState, SpinLevels, \
    TransferMode
from spinmechworks.utils.exceptions import DomainError, TruncationError, ValidityWarning, extend_exception

logger = logging.getLogger(__name__)

QUBIT = int(SpinLevels.QUBIT)
TRIPLET = int(SpinLevels.TRIPLET)


def _transfer_hamiltonian(kind, params, mode, basis):
    """JC or anti-JC step, exact or through the full effective Hamiltonian."""
    if mode == TransferMode.IDEAL_RWA:
        hamiltonian_kind = HamiltonianKind.JC if kind == PulseKind.JC else HamiltonianKind.ANTI_JC
        spec = HamiltonianSpec(hamiltonian_kind, params.omega_m, params.coupling)
    else:
        Omega = params.omega_m / 2 if kind == PulseKind.JC else -params.omega_m / 2
        spec = HamiltonianSpec(HamiltonianKind.EFFECTIVE, params.omega_m, params.coupling, Omega=Omega)
    return dynamics.build_hamiltonian(spec, basis)


def _mechanical_fidelities(trajectory, spin_dim, target):
    """Reduced fidelity to a bare oscillator target for every row of a trajectory."""
    dim = target.basis.dim
    overlaps = trajectory.reshape(trajectory.shape[0], spin_dim, dim) @ target.amplitudes.conj()
    return np.clip(np.sum(np.abs(overlaps) ** 2, axis=1), 0.0, 1.0)


def _peak_search(H, amplitudes, spin_dim, target, nominal, params, numerics, settings):
    """Locate the fidelity maximum in a window around a nominal pulse length.

    The window is sampled with samples_per_period points per period of the fastest
    of the coupling and trap oscillations, then refined by a parabola through the
    best sample and its neighbours, evaluated exactly at the vertex.

    Returns:
        Tuple (times, fidelities, peak_time, peak_fidelity).
    """
    low, high = settings.peak_window
    step = min(2 * np.pi / params.coupling, 2 * np.pi / params.omega_m) / numerics.samples_per_period
    count = int(math.ceil((high - low) * nominal / step)) + 1
    times = np.linspace(low * nominal, high * nominal, count)
    fidelities = _mechanical_fidelities(dynamics.propagate_amplitudes(H, amplitudes, times), spin_dim, target)

    best = int(np.argmax(fidelities))
    peak_time, peak_fidelity = times[best], fidelities[best]
    if 0 < best < count - 1:
        left, centre, right = fidelities[best - 1:best + 2]
        curvature = left - 2 * centre + right
        if curvature < 0:
            vertex = times[best] + 0.5 * (left - right) / curvature * (times[1] - times[0])
            refined = _mechanical_fidelities(dynamics.propagate_amplitudes(H, amplitudes, [vertex]), spin_dim,
                                             target)[0]
            if refined > peak_fidelity:
                peak_time, peak_fidelity = vertex, refined
    return times, fidelities, float(peak_time), float(peak_fidelity)


def _with_convergence_guard(run, dim, numerics, drift):
    """Run a protocol and, if enabled, rerun it with 1.5x the Fock levels.

    Args:
        run : Callable taking a Fock dimension and returning a result.
        dim : Fock dimension of the reported run.
        numerics : NumericsSettings instance.
        drift : Callable comparing the results of the two runs.

    Returns:
        Result of the run at dim.
    """
    result = run(dim)
    if numerics.convergence_check:
        larger = math.ceil(1.5 * dim)
        change = drift(result, run(larger))
        logger.debug("Convergence check {} -> {} levels: drift {:.3g}".format(dim, larger, change))
        if change > numerics.convergence_tolerance:
            raise TruncationError("Result changes by {:.3g} between {} and {} Fock levels".format(
                change, dim, larger))
    return result


def _fidelity_drift(a, b):
    return abs(a.summary["fidelity"] - b.summary["fidelity"])


def _padded_infidelity(small, large):
    padded = np.zeros((small.spin_dim, large.basis.dim), dtype=np.complex128)
    padded[:, :small.basis.dim] = small.components()
    return 1.0 - abs(np.vdot(padded.reshape(-1), large.amplitudes)) ** 2


def _state_drift(a, b):
    return _padded_infidelity(a.final_state, b.final_state)


def _phase_drift(a, b):
    """Wrapped phase difference of the full-model runs, or the population change if larger."""
    phase = abs(np.angle(np.exp(1j * (a.summary["full_deviation"] - b.summary["full_deviation"]))))
    return max(phase, abs(a.summary["fidelity"] - b.summary["fidelity"]))


def _ladder(n_target, mode, params, dim, numerics, settings):
    basis = FockBasis(dim=dim, omega=params.omega_m, mass=params.mass)
    amplitudes = hilbert.fock_state(basis, 0, hilbert.spin_vector(QUBIT, "+")).amplitudes
    t1 = np.pi / (2 * params.coupling)
    elapsed, times, fidelities, steps = 0.0, [0.0], [1.0], []
    for i in range(1, n_target + 1):
        kind = PulseKind.JC if i % 2 else PulseKind.ANTI_JC
        H = _transfer_hamiltonian(kind, params, mode, basis)
        target = hilbert.fock_state(basis, i)
        duration = t1 / math.sqrt(i)
        if mode == TransferMode.FULL_EQ1:
            _, _, duration, _ = _peak_search(H, amplitudes, QUBIT, target, duration, params, numerics, settings)
        amplitudes = dynamics.propagate_amplitudes(H, amplitudes, [duration])[0]
        elapsed += duration
        steps.append(PulseStep(kind=kind, duration=duration))
        times.append(elapsed)
        fidelities.append(_mechanical_fidelities(amplitudes[np.newaxis], QUBIT, target)[0])

    final = QuantumState.normalized(amplitudes, QUBIT, basis)
    dynamics.check_truncation(final)
    target = hilbert.fock_state(basis, n_target)
    summary = {
        "fidelity": hilbert.reduced_fidelity(final, target),
        "total_time": elapsed,
        "t1": t1,
        "n_target": float(n_target),
        "fock_dim": float(dim),
    }
    return ProtocolResult(final_state=final, times=times, fidelities=fidelities, summary=summary, steps=steps)


def fock_ladder(n_target, mode, params, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Climb the Fock ladder with alternating JC and anti-JC pulses.

    Starting from |+⟩|0⟩, step i lasts t_i = π/(2λ√i) and moves one phonon in.
    In full_Eq1 mode every step runs under the effective Hamiltonian with
    Ω = ±ω_m/2 and its length is the population peak inside the search window.

    Args:
        n_target : Phonon number to prepare.
        mode : TransferMode or its string value.
        params : CouplingParams instance.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        ProtocolResult whose series holds, after step i, the oscillator fidelity to |i⟩
        and whose summary holds the final fidelity to |n_target⟩.
    """
    mode = TransferMode(mode)
    if n_target < 0:
        raise DomainError("n_target must not be negative")
    if params.coupling <= 0:
        raise DomainError("The ladder needs a nonzero coupling")
    dim = numerics.fock_dim or max(64, 2 * n_target + 2)
    if not n_target < dim / 2:
        raise DomainError("n_target {} needs more than {} Fock levels".format(n_target, dim))
    result = _with_convergence_guard(lambda d: _ladder(n_target, mode, params, d, numerics, settings),
                                     dim, numerics, _fidelity_drift)
    logger.info("Fock ladder to n={} ({}): fidelity {:.6f}".format(n_target, mode.value, result.summary["fidelity"]))
    return result


def _superposition(c0, c1, mode, params, dim, numerics, settings):
    basis = FockBasis(dim=dim, omega=params.omega_m, mass=params.mass)
    ground = np.zeros(dim, dtype=np.complex128)
    ground[0] = 1.0
    psi0 = hilbert.product_state([c0, c1], ground, basis)
    target_amplitudes = np.zeros(dim, dtype=np.complex128)
    target_amplitudes[:2] = [c1, 1j * c0]
    target = QuantumState.normalized(target_amplitudes, 1, basis)
    H = _transfer_hamiltonian(PulseKind.JC, params, mode, basis)
    t1 = np.pi / (2 * params.coupling)

    times, fidelities, peak_time, peak = _peak_search(H, psi0.amplitudes, QUBIT, target, t1, params, numerics,
                                                      settings)
    if mode == TransferMode.IDEAL_RWA:
        peak_time = t1
        peak = _mechanical_fidelities(dynamics.propagate_amplitudes(H, psi0.amplitudes, [t1]), QUBIT, target)[0]
    final = QuantumState.normalized(dynamics.propagate_amplitudes(H, psi0.amplitudes, [peak_time])[0], QUBIT, basis)
    summary = {
        "fidelity": float(peak),
        "peak_fidelity": float(peak),
        "peak_time": float(peak_time),
        "t1": t1,
        "s": params.omega_m / params.coupling,
    }
    return ProtocolResult(final_state=final, times=times, fidelities=fidelities, summary=summary,
                          steps=[PulseStep(kind=PulseKind.JC, duration=peak_time)])


def superposition_transfer(c0, c1, mode, params, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Map a spin superposition onto the oscillator with one JC pulse.

    Starts from (c0|+⟩ + c1|−⟩)|0⟩ and scores the oscillator state against
    c1|0⟩ + i c0|1⟩ in the laboratory frame. The ideal mode reports the fidelity at
    t1 = π/(2λ); the full mode reports the maximum inside the search window. Both
    return the fidelity trace over the window.

    Args:
        c0 : Amplitude of |+⟩.
        c1 : Amplitude of |−⟩.
        mode : TransferMode or its string value.
        params : CouplingParams instance.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        ProtocolResult instance.
    """
    mode = TransferMode(mode)
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > 1e-9:
        raise DomainError("Spin amplitudes must be normalized")
    if params.coupling <= 0:
        raise DomainError("The transfer needs a nonzero coupling")
    dim = numerics.fock_dim or 64
    return _with_convergence_guard(lambda d: _superposition(c0, c1, mode, params, d, numerics, settings),
                                   dim, numerics, _fidelity_drift)


def fidelity_scan(s_values, coupling, numerics=NumericsSettings(), settings=ProtocolSettings(), c0=None, c1=None):
    """Peak transfer fidelity under the full effective Hamiltonian versus s = ω_m/λ.

    Args:
        s_values : Iterable of ratios, each above 2.
        coupling : λ [rad/s]; the peak fidelity depends on s only.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.
        c0, c1 : Spin amplitudes, default an equal superposition.

    Returns:
        List of (s, peak fidelity) tuples in input order.
    """
    c0 = 1 / np.sqrt(2) if c0 is None else c0
    c1 = 1 / np.sqrt(2) if c1 is None else c1
    scan = []
    for s in s_values:
        if not s > 2:
            raise DomainError("s = omega_m / lambda must exceed 2, got {}".format(s))
        result = superposition_transfer(c0, c1, TransferMode.FULL_EQ1, CouplingParams.from_ratio(s, coupling),
                                        numerics, settings)
        scan.append((float(s), result.summary["peak_fidelity"]))
        logger.debug("s = {:.4g}: peak fidelity {:.6f}".format(s, scan[-1][1]))
    return scan


def _qnd_drive(params, settings):
    Omega = params.Omega if params.Omega is not None else \
        units.qnd_drive(params.omega_m, params.coupling, settings.qnd_detuning_factor)
    if abs(abs(Omega) - params.omega_m / 2) < settings.qnd_min_detuning_factor * params.coupling:
        warnings.warn("QND detuning ||Omega| - omega_m/2| is below {} lambda".format(
            settings.qnd_min_detuning_factor), ValidityWarning)
    return Omega


def _relative_phase(trajectory, dim, n):
    """arg(c_{−,n}) − arg(c_{+,n}) along a qubit trajectory."""
    return np.angle(trajectory[:, dim + n] * np.conj(trajectory[:, n]))


def _qnd_phase(n, hold_time, params, Omega, chi, dim):
    basis = FockBasis(dim=dim, omega=params.omega_m, mass=params.mass)
    psi0 = hilbert.fock_state(basis, n, np.array([1.0, 1.0]) / np.sqrt(2))
    H = dynamics.build_hamiltonian(HamiltonianSpec(HamiltonianKind.QND, params.omega_m, params.coupling, Omega),
                                   basis)
    samples = int(math.ceil(abs(2 * chi * n * hold_time) / (np.pi / 4))) + 2
    times = np.linspace(0.0, hold_time, samples)
    phase = np.unwrap(_relative_phase(dynamics.propagate_amplitudes(H, psi0.amplitudes, times), dim, n))
    return float(phase[-1] - phase[0])


def _fock_dim_for(n, numerics, automatic, minimum):
    dim = numerics.fock_dim or automatic
    if dim < minimum:
        raise DomainError("{} Fock levels cannot hold |{}⟩, at least {} are needed".format(dim, n, minimum))
    return dim


def qnd_phase(n, hold_time, params, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Relative spin phase accumulated under the dispersive QND Hamiltonian.

    Evolves (|+⟩ + |−⟩)/√2 ⊗ |n⟩ under χ σz a†a, sampling densely enough to
    unwrap the phase, so the result equals 2χ n t. The run is repeated with 1.5x
    the Fock levels when numerics.convergence_check is set.

    Args:
        n : Phonon number.
        hold_time : Interaction time [s].
        params : CouplingParams; Omega defaults to ω_m/2 + detuning_factor·λ.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        Accumulated phase in radians.
    """
    if n < 0 or hold_time < 0:
        raise DomainError("n and hold_time must not be negative")
    Omega = _qnd_drive(params, settings)
    chi = units.qnd_chi(Omega, params.coupling, params.omega_m)
    dim = _fock_dim_for(n, numerics, n + 2, n + 1)
    return _with_convergence_guard(lambda d: _qnd_phase(n, hold_time, params, Omega, chi, d), dim, numerics,
                                   lambda a, b: abs(a - b))


def _qnd_full(n, hold_time, params, Omega, chi, dim, numerics):
    basis = FockBasis(dim=dim, omega=params.omega_m, mass=params.mass)
    H = dynamics.build_hamiltonian(HamiltonianSpec(HamiltonianKind.EFFECTIVE, params.omega_m, params.coupling, Omega),
                                   basis)
    times = np.linspace(0.0, hold_time, numerics.time_samples)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    trajectory = dynamics.propagate_amplitudes(H, hilbert.fock_state(basis, n, plus).amplitudes, times)
    vacuum = dynamics.propagate_amplitudes(H, hilbert.fock_state(basis, 0, plus).amplitudes, [hold_time])
    shift = _relative_phase(trajectory[-1:], dim, n)[0] - _relative_phase(vacuum, dim, 0)[0]
    deviation = float(np.angle(np.exp(1j * (shift - 2 * chi * n * hold_time))))
    populations = _mechanical_fidelities(trajectory, QUBIT, hilbert.fock_state(basis, n))
    summary = {
        "chi": chi,
        "Omega": Omega,
        "full_deviation": deviation,
        "fidelity": float(populations[-1]),
        "fock_dim": float(dim),
    }
    final = QuantumState.normalized(trajectory[-1], QUBIT, basis)
    return ProtocolResult(final_state=final, times=times, fidelities=populations, summary=summary,
                          steps=[PulseStep(kind=PulseKind.QND_HOLD, duration=hold_time)])


def qnd_readout(n, hold_time, params, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """QND phase accumulation with a companion run under the full effective Hamiltonian.

    The companion run compares the phonon-number dependent part of the relative
    phase, φ(n) − φ(0), with 2χ n t, and tracks how much population stays in |n⟩.
    Both the phase deviation and that population must agree to
    numerics.convergence_tolerance with a run on 1.5x the Fock levels.

    Args:
        n : Phonon number.
        hold_time : Interaction time [s].
        params : CouplingParams instance.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        ProtocolResult with the |n⟩ population of the full run as its series.
    """
    Omega = _qnd_drive(params, settings)
    chi = units.qnd_chi(Omega, params.coupling, params.omega_m)
    phase = qnd_phase(n, hold_time, params, numerics, settings)

    dim = _fock_dim_for(n, numerics, n + 24, n + 1)
    result = _with_convergence_guard(lambda d: _qnd_full(n, hold_time, params, Omega, chi, d, numerics), dim,
                                     numerics, _phase_drift)
    result.summary.update(phase=phase, expected_phase=2 * chi * n * hold_time)
    logger.info("QND n={}: phase {:.6g} rad, full model deviation {:.3g} rad".format(
        n, phase, result.summary["full_deviation"]))
    return result


def _split_setup(n, params, dim, numerics):
    """Prepare |n⟩, soften the trap and set the spin.

    Returns:
        Tuple (mechanical state in the final ladder, spin-mechanical initial state,
        Hamiltonian, final coupling, steps so far).
    """
    m = units.mass_from_diameter(params.diameter, params.density)
    psi = hilbert.fock_state(FockBasis(dim=dim, omega=params.trap_freq_initial, mass=m), n)
    # The first softening is an ideal state preserving sweep: Fock amplitudes carry over.
    psi = QuantumState(psi.amplitudes, 1, FockBasis(dim=dim, omega=params.trap_freq_low, mass=m))
    steps = [PulseStep(kind=PulseKind.FRAME_CHANGE, new_omega=params.trap_freq_low)]
    spin = (hilbert.spin_vector(TRIPLET, "+1") + hilbert.spin_vector(TRIPLET, "-1")) / np.sqrt(2)
    try:
        psi = hilbert.frame_change(psi, params.trap_freq_final, numerics.frame_change_points)
    except TruncationError as e:
        raise extend_exception(e, "while softening the trap to the final frequency") from e
    steps += [PulseStep(kind=PulseKind.SET_SPIN, spin_state=spin),
              PulseStep(kind=PulseKind.FRAME_CHANGE, new_omega=params.trap_freq_final)]
    coupling = units.coupling_lambda(params.gradient, m, params.trap_freq_final)
    H = dynamics.build_hamiltonian(HamiltonianSpec(HamiltonianKind.SPIN_MECH, params.trap_freq_final, coupling),
                                   psi.basis)
    return psi, hilbert.product_state(spin, psi.amplitudes, psi.basis), H, coupling, steps


def _cat(n, params, sign, dim, numerics, settings):
    mech, psi0, H, coupling, steps = _split_setup(n, params, dim, numerics)
    half_period = np.pi / params.trap_freq_final
    evolution = dynamics.evolve(H, psi0, np.linspace(0.0, half_period, numerics.time_samples))
    split = evolution.states[-1]
    steps.append(PulseStep(kind=PulseKind.IDLE, duration=half_period))

    analytic = dynamics.apply_half_period_map(mech, coupling, params.trap_freq_final)
    oracle = hilbert.fidelity(analytic, split)
    if oracle < 1 - numerics.oracle_tolerance:
        raise TruncationError("Numeric split deviates from the closed form, fidelity {:.12f}".format(oracle))
    dynamics.check_truncation(split)
    fidelities = [hilbert.fidelity(analytic, state) for state in evolution.states]

    moments = hilbert.position_moments(split)
    separation = abs(moments[0][0] - moments[2][0])
    final = dynamics.disentangle(split, params, sign, settings)
    steps.append(PulseStep(kind=PulseKind.SPIN_PULSE))
    summary = {
        "separation": separation,
        "max_separation": units.max_separation(params.gradient, mech.basis.mass, params.trap_freq_final),
        "oracle_fidelity": oracle,
        "preparation_time": half_period,
        "t2_budget_passed": float(half_period < params.spin_dephasing_time),
        "splitting": dynamics.branch_splitting(params),
        "norm_drift": evolution.norm_drift,
        "energy_drift": evolution.energy_drift,
        "fock_dim": float(dim),
    }
    return ProtocolResult(final_state=final, times=evolution.times, fidelities=fidelities, summary=summary,
                          steps=steps)


def cat_pipeline(n, params, sign=1, numerics=NumericsSettings(), settings=ProtocolSettings(), grid=None):
    """Prepare the spatial superposition ψ± starting from the Fock state |n⟩.

    Sequence: |n⟩ in the initial trap, ideal sweep to the low trap, spin set to
    (|+1⟩ + |−1⟩)/√2 together with a sudden change to the final trap, half a period
    of spin-mechanical evolution, verification against the closed form, and the
    disentangling pulses.

    Args:
        n : Initial Fock level.
        params : ExperimentParams instance.
        sign : +1 for ψ₊, −1 for ψ₋.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.
        grid : GridSpec for the position representation; defaults to the numerics grid.

    Returns:
        ProtocolResult with the Fock-basis state, its grid wavefunction and a summary
        holding the achieved separation and the preparation time.
    """
    params.check_trap_sequence()
    dim = numerics.fock_dim or dynamics.default_fock_dim(params, n)
    logger.debug("Cat preparation for n={} with {} Fock levels".format(n, dim))
    result = _with_convergence_guard(lambda d: _cat(n, params, sign, d, numerics, settings),
                                     dim, numerics, _state_drift)
    grid = grid or GridSpec(numerics.grid_points, numerics.grid_extent)
    mech = hilbert.mechanical_state(result.final_state)
    grid_state = hilbert.to_grid(mech, grid)
    logger.info("Cat state n={} sign={:+d}: separation {:.4g} m after {:.4g} s".format(
        n, sign, result.summary["separation"], result.summary["preparation_time"]))
    return ProtocolResult(final_state=result.final_state, times=result.times, fidelities=result.fidelities,
                          summary=result.summary, steps=result.steps, grid_state=grid_state)


def splitting_grid(mech, D_m):
    """Grid wide enough for both branches and fine enough for the narrowest packet.

    Args:
        mech : Oscillator state in the final trap before the split.
        D_m : Maximum branch separation [m].

    Returns:
        GridSpec instance.
    """
    a2 = units.zero_point_width(mech.basis.mass, mech.basis.omega)
    mean_n = float(np.sum(np.arange(mech.basis.dim) * mech.populations()))
    spread = np.sqrt(4 * mean_n + 2)
    half_extent = D_m / 2 + 8 * a2 * spread
    spacing = a2 / spread / 4
    n_points = max(256, 2 ** int(math.ceil(math.log2(2 * half_extent / spacing))))
    return GridSpec(n_points=n_points, extent=2 * half_extent)


def splitting_map(n, params, n_frames=64, grid=None, numerics=NumericsSettings(), settings=ProtocolSettings()):
    """Position density of the particle during one full period of the final trap.

    With numerics.convergence_check set, every frame must keep its state to within
    numerics.convergence_tolerance of a run on 1.5x the Fock levels.

    Args:
        n : Initial Fock level.
        params : ExperimentParams instance.
        n_frames : Number of time frames over [0, 2π/ω_m2].
        grid : GridSpec, chosen from the state when None.
        numerics : NumericsSettings instance.
        settings : ProtocolSettings instance.

    Returns:
        ProtocolResult whose density_map has shape (n_frames, grid points) and whose
        series is the fidelity with the initial state, returning to one after a period.
    """
    params.check_trap_sequence()
    dim = numerics.fock_dim or dynamics.default_fock_dim(params, n)
    period = 2 * np.pi / params.trap_freq_final

    def run(d):
        mech, psi0, H, _, steps = _split_setup(n, params, d, numerics)
        steps.append(PulseStep(kind=PulseKind.IDLE, duration=period))
        return mech, psi0, steps, dynamics.evolve(H, psi0, np.linspace(0.0, period, n_frames))

    def trajectory_drift(a, b):
        return max(_padded_infidelity(small, large) for small, large in zip(a[3].states, b[3].states))

    mech, psi0, steps, evolution = _with_convergence_guard(run, dim, numerics, trajectory_drift)
    D_m = units.max_separation(params.gradient, mech.basis.mass, params.trap_freq_final)
    grid = grid or splitting_grid(mech, D_m)

    density_map = np.array([hilbert.to_grid(state, grid).density for state in evolution.states])
    separations = [abs(moments[0][0] - moments[2][0]) for moments in map(hilbert.position_moments, evolution.states)]
    widest = int(np.argmax(separations))
    fidelities = [hilbert.fidelity(psi0, state) for state in evolution.states]
    summary = {
        "max_separation": D_m,
        "separation": float(separations[widest]),
        "separation_time": float(evolution.times[widest]),
        "half_period": period / 2,
        "grid_extent": grid.extent,
        "grid_points": float(grid.n_points),
    }
    logger.info("Splitting map n={}: widest separation {:.4g} m at {:.4g} s".format(
        n, summary["separation"], summary["separation_time"]))
    return ProtocolResult(final_state=evolution.states[-1], times=evolution.times, fidelities=fidelities,
                          summary=summary, steps=steps, density_map=density_map)
