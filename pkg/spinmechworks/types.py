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
"""Shared enums and types across spinmechworks."""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.constants
import scipy.linalg

from spinmechworks.utils.exceptions import BasisMismatchError, DomainError

NORM_TOLERANCE = 1e-9
FLAG_TOLERANCE = 1e-10


class SpinLevels(IntEnum):
    """An enum defining the spin space attached to a mechanical mode."""

    NONE = 1
    QUBIT = 2
    TRIPLET = 3


class HamiltonianKind(IntEnum):
    """An enum defining the model Hamiltonians that can be built."""

    EFFECTIVE = 0
    SPIN_MECH = 1
    JC = 2
    ANTI_JC = 3
    QND = 4


class PulseKind(IntEnum):
    """An enum defining a step in a pulse sequence."""

    JC = 0
    ANTI_JC = 1
    QND_HOLD = 2
    IDLE = 3
    SPIN_PULSE = 4
    FRAME_CHANGE = 5
    SET_SPIN = 6


class TransferMode(Enum):
    """Which Hamiltonian drives a spin to phonon transfer."""

    IDEAL_RWA = "ideal_RWA"
    FULL_EQ1 = "full_Eq1"


@dataclass(frozen=True)
class PhysicalConstants:
    """A dataclass encapsulating the physical constants used by every formula."""

    hbar: float
    k_B: float
    mu_B: float
    g_s: float
    c: float

    def __post_init__(self):
        """Validate constants."""
        for name in ("hbar", "k_B", "mu_B", "g_s", "c"):
            if not getattr(self, name) > 0:
                raise DomainError("Physical constant {} must be positive".format(name))


@dataclass(frozen=True)
class ExperimentParams:
    """A dataclass encapsulating a physical scenario.

    Frequencies are angular (rad/s) and pressure is in Pa. Defaults describe the
    30 nm nanodiamond in a 20 kHz trap with a 3e4 T/m gradient.
    """

    diameter: float = 30e-9
    density: float = 3500.0
    trap_freq_initial: float = 2 * np.pi * 20e3
    trap_freq_low: float = 2 * np.pi * 20e3
    trap_freq_final: float = 2 * np.pi * 20e3
    gradient: float = 3e4
    pressure: float = 1e-11 * scipy.constants.torr
    gas_temp: float = 4.5
    internal_temp: float = 300.0
    gas_molecule_mass: float = 4.83e-26
    flight_time: float = 10e-3
    interference_width: Optional[float] = None
    permittivity_loss: float = 2.7895
    spin_dephasing_time: float = 1.8e-3

    def __post_init__(self):
        """Validate the scenario."""
        positive = ("diameter", "density", "trap_freq_initial", "trap_freq_low", "trap_freq_final",
                    "gas_temp", "internal_temp", "gas_molecule_mass", "spin_dephasing_time")
        for name in positive:
            if not getattr(self, name) > 0:
                raise DomainError("{} must be positive, got {}".format(name, getattr(self, name)))
        non_negative = ("gradient", "pressure", "flight_time", "permittivity_loss")
        for name in non_negative:
            if getattr(self, name) < 0:
                raise DomainError("{} must not be negative, got {}".format(name, getattr(self, name)))
        if self.interference_width is not None and self.interference_width < 0:
            raise DomainError("interference_width must not be negative")

    def check_trap_sequence(self):
        """Ensure the trap is only ever softened, ω_m2 ≤ ω_m1 ≤ ω_m0."""
        if not self.trap_freq_final <= self.trap_freq_low <= self.trap_freq_initial:
            raise DomainError(
                "Trap frequencies must satisfy final <= low <= initial, got {} <= {} <= {}".format(
                    self.trap_freq_final, self.trap_freq_low, self.trap_freq_initial))


@dataclass(frozen=True)
class DerivedParams:
    """A dataclass encapsulating every closed-form quantity derived from ExperimentParams."""

    mass: float
    a0: float
    a2: float
    coupling: float
    coupling_final: float
    Omega: float
    chi: float
    max_separation: float
    splitting: float
    fringe_period: float
    beta: float
    b: float


@dataclass(frozen=True)
class NumericsSettings:
    """A dataclass encapsulating numerical resolution choices.

    A fock_dim of 0 selects the dimension automatically from the scenario.
    """

    fock_dim: int = 0
    grid_points: int = 2 ** 16
    grid_extent: float = 4e-6
    time_samples: int = 64
    samples_per_period: int = 400
    convergence_check: bool = True
    convergence_tolerance: float = 1e-6
    oracle_tolerance: float = 1e-6
    frame_change_points: int = 2 ** 14
    grid_convergence_tolerance: float = 1e-8

    def __post_init__(self):
        """Validate settings."""
        if self.fock_dim != 0 and self.fock_dim < 2:
            raise DomainError("fock_dim must be 0 (automatic) or at least 2")
        if self.grid_points < 2 or self.grid_points & (self.grid_points - 1):
            raise DomainError("grid_points must be a power of two")
        if not self.grid_extent > 0:
            raise DomainError("grid_extent must be positive")
        if self.time_samples < 2 or self.samples_per_period < 4 or self.frame_change_points < 64:
            raise DomainError("Too few samples requested")
        if not self.grid_convergence_tolerance > 0:
            raise DomainError("grid_convergence_tolerance must be positive")


@dataclass(frozen=True)
class ProtocolSettings:
    """A dataclass encapsulating protocol-level choices that the physics leaves open."""

    peak_window: Tuple[float, float] = (0.5, 1.5)
    qnd_detuning_factor: float = 5.0
    qnd_min_detuning_factor: float = 3.0
    pulse_linewidth: float = 2 * np.pi * 1e3
    min_splitting_ratio: float = 100.0
    threshold_criterion: float = 11.66
    max_decoherence_events: float = 0.1


def default_particle_mass():
    """Mass of a diamond sphere with the default ExperimentParams diameter [kg]."""
    from spinmechworks import units
    return units.mass_from_diameter(ExperimentParams.diameter, units.material_density("diamond"))


@dataclass(frozen=True)
class CouplingParams:
    """A dataclass encapsulating one spin-phonon coupling configuration.

    Args:
        coupling : Spin-phonon coupling λ [rad/s].
        omega_m : Trap frequency [rad/s].
        mass : Particle mass [kg], only used for position conversions;
               defaults to the diamond sphere of ExperimentParams.
        Omega : Effective spin drive Ω [rad/s]; needed by the QND Hamiltonian.
    """

    coupling: float
    omega_m: float
    mass: float = field(default_factory=default_particle_mass)
    Omega: Optional[float] = None

    def __post_init__(self):
        """Validate coupling parameters."""
        if self.coupling < 0 or not self.omega_m > 0 or not self.mass > 0:
            raise DomainError("coupling must be >= 0, omega_m and mass > 0")

    @classmethod
    def from_ratio(cls, s, coupling, **kwargs):
        """Build parameters with ω_m = s·λ."""
        return cls(coupling=coupling, omega_m=s * coupling, **kwargs)

    @property
    def ratio(self):
        """Return s = ω_m/λ."""
        return self.omega_m / self.coupling


@dataclass(frozen=True)
class FockBasis:
    """A dataclass encapsulating a truncated Fock ladder of a harmonic trap."""

    dim: int
    omega: float
    mass: float

    def __post_init__(self):
        """Validate basis."""
        if self.dim < 2:
            raise DomainError("Fock basis needs at least 2 levels, got {}".format(self.dim))
        if not self.omega > 0 or not self.mass > 0:
            raise DomainError("Fock basis needs positive omega and mass")

    def same_ladder(self, other):
        """Return True when both bases describe the same ladder."""
        return (self.dim == other.dim
                and np.isclose(self.omega, other.omega, rtol=1e-12, atol=0.0)
                and np.isclose(self.mass, other.mass, rtol=1e-12, atol=0.0))

    def resized(self, dim):
        """Return the same ladder with a different truncation."""
        return FockBasis(dim=dim, omega=self.omega, mass=self.mass)


def _check_same_basis(basis_a, spin_a, basis_b, spin_b):
    if spin_a != spin_b or not basis_a.same_ladder(basis_b):
        raise BasisMismatchError(
            "Basis mismatch: spin_dim {} vs {}, {} vs {}".format(spin_a, spin_b, basis_a, basis_b))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A normalized state over (spin) ⊗ (truncated Fock ladder).

    Amplitudes are ordered spin-major, index = spin_index * basis.dim + n.
    """

    amplitudes: np.ndarray
    spin_dim: int
    basis: FockBasis

    def __post_init__(self):
        """Validate shape and norm, then freeze the amplitudes."""
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.spin_dim not in tuple(SpinLevels):
            raise DomainError("spin_dim must be 1, 2 or 3, got {}".format(self.spin_dim))
        if amplitudes.size != self.spin_dim * self.basis.dim:
            raise BasisMismatchError("Amplitude vector of size {} does not fit spin_dim {} x dim {}".format(
                amplitudes.size, self.spin_dim, self.basis.dim))
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise DomainError("State is not normalized, norm = {}".format(norm))
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def normalized(cls, amplitudes, spin_dim, basis):
        """Construct a state after normalizing the given amplitudes."""
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise DomainError("Cannot normalize a zero vector")
        return cls(amplitudes / norm, spin_dim, basis)

    def components(self):
        """Return amplitudes as a (spin_dim, dim) matrix."""
        return self.amplitudes.reshape(self.spin_dim, self.basis.dim)

    def check_compatible(self, other):
        """Raise BasisMismatchError unless other lives in the same space."""
        _check_same_basis(self.basis, self.spin_dim, other.basis, other.spin_dim)

    def populations(self):
        """Return the phonon number distribution traced over spin."""
        return np.sum(np.abs(self.components()) ** 2, axis=0)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A dense operator over (spin) ⊗ (truncated Fock ladder).

    When spin_blocks is set the operator is block diagonal in the spin index and
    its eigensystem is computed block by block.
    """

    entries: np.ndarray
    basis: FockBasis
    spin_dim: int = 1
    hermitian: bool = False
    unitary: bool = False
    spin_blocks: bool = False

    def __post_init__(self):
        """Validate shape and verify flags."""
        entries = np.array(self.entries, dtype=np.complex128)
        size = self.spin_dim * self.basis.dim
        if entries.shape != (size, size):
            raise BasisMismatchError("Operator of shape {} does not fit spin_dim {} x dim {}".format(
                entries.shape, self.spin_dim, self.basis.dim))
        if self.hermitian and not np.allclose(entries, entries.conj().T, rtol=0.0, atol=FLAG_TOLERANCE):
            raise DomainError("Operator flagged hermitian is not Hermitian")
        if self.unitary and not np.allclose(entries.conj().T @ entries, np.eye(size),
                                            rtol=0.0, atol=FLAG_TOLERANCE):
            raise DomainError("Operator flagged unitary is not unitary")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @cached_property
    def eigensystem(self):
        """Eigenvalues and eigenvectors of a Hermitian operator, computed once."""
        if not self.hermitian:
            raise DomainError("Eigensystem requested for a non-Hermitian operator")
        if not self.spin_blocks:
            return scipy.linalg.eigh(self.entries)
        dim = self.basis.dim
        energies = []
        vectors = np.zeros_like(self.entries)
        for s in range(self.spin_dim):
            block = slice(s * dim, (s + 1) * dim)
            w, v = scipy.linalg.eigh(self.entries[block, block])
            energies.append(w)
            vectors[block, block] = v
        return np.concatenate(energies), vectors

    def apply(self, state):
        """Return the operator applied to a state, without renormalization."""
        _check_same_basis(self.basis, self.spin_dim, state.basis, state.spin_dim)
        return self.entries @ state.amplitudes

    def expectation(self, state):
        """Return ⟨ψ|A|ψ⟩."""
        return np.vdot(state.amplitudes, self.apply(state))


@dataclass(frozen=True)
class HamiltonianSpec:
    """A dataclass describing which model Hamiltonian to build.

    Frequencies are in rad/s. Omega is required by EFFECTIVE and QND; for JC and
    ANTI_JC it defaults to +ω_m/2 and −ω_m/2 and any other value is rejected.
    """

    kind: HamiltonianKind
    omega_m: float
    coupling: float
    Omega: Optional[float] = None

    def __post_init__(self):
        """Validate the spec."""
        if not self.omega_m > 0:
            raise DomainError("omega_m must be positive")
        if self.coupling < 0:
            raise DomainError("coupling must not be negative")
        resonant = {HamiltonianKind.JC: 0.5, HamiltonianKind.ANTI_JC: -0.5}
        if self.kind in resonant:
            expected = resonant[self.kind] * self.omega_m
            if self.Omega is None:
                object.__setattr__(self, "Omega", expected)
            elif not np.isclose(self.Omega, expected, rtol=1e-12, atol=0.0):
                raise DomainError("{} requires Omega = {}, got {}".format(self.kind.name, expected, self.Omega))
        elif self.kind in (HamiltonianKind.EFFECTIVE, HamiltonianKind.QND) and self.Omega is None:
            raise DomainError("{} requires Omega".format(self.kind.name))

    @property
    def spin_dim(self):
        """Spin dimension the model acts on."""
        if self.kind == HamiltonianKind.SPIN_MECH:
            return int(SpinLevels.TRIPLET)
        return int(SpinLevels.QUBIT)


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """A dataclass encapsulating a propagated trajectory."""

    times: np.ndarray
    states: List[QuantumState]
    norm_drift: float
    energy_drift: float


@dataclass(frozen=True, eq=False)
class MagnusBranches:
    """A dataclass encapsulating the closed-form displaced-frame propagator output.

    Args:
        states : Mechanical state per spin projection S_z.
        alpha : Displacement amplitude α(t) per spin projection.
        global_phase : Real phase φ with e^{Ω₂} = e^{iφ}.
    """

    states: Dict[int, QuantumState]
    alpha: Dict[int, complex]
    global_phase: float


@dataclass(frozen=True, eq=False)
class PulseStep:
    """A dataclass encapsulating one step of a pulse sequence."""

    kind: PulseKind
    duration: float = 0.0
    new_omega: Optional[float] = None
    spin_state: Optional[np.ndarray] = None

    def __post_init__(self):
        """Validate the step."""
        if self.duration < 0:
            raise DomainError("Pulse durations must not be negative")


@dataclass(frozen=True)
class GridSpec:
    """A dataclass encapsulating a uniform position grid symmetric about zero."""

    n_points: int
    extent: float

    def __post_init__(self):
        """Validate grid."""
        if self.n_points < 2 or self.n_points & (self.n_points - 1):
            raise DomainError("n_points must be a power of two, got {}".format(self.n_points))
        if not self.extent > 0:
            raise DomainError("Grid extent must be positive")

    @property
    def spacing(self):
        """Grid spacing [m]."""
        return self.extent / self.n_points

    @property
    def positions(self):
        """Sample positions, with z = 0 at index n_points // 2."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    @property
    def wavenumbers(self):
        """Angular wavenumbers in FFT order [1/m]."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @property
    def nyquist(self):
        """Largest resolvable angular wavenumber [1/m]."""
        return np.pi / self.spacing


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    """A dataclass encapsulating wavefunction components sampled on a grid.

    values has shape (n_components, n_points); the discrete norm sums over components.
    """

    values: np.ndarray
    grid: GridSpec
    mass: float

    def __post_init__(self):
        """Validate shape and norm."""
        values = np.atleast_2d(np.array(self.values, dtype=np.complex128))
        if values.shape[1] != self.grid.n_points:
            raise BasisMismatchError("Wavefunction has {} samples, grid has {}".format(
                values.shape[1], self.grid.n_points))
        norm = np.sum(np.abs(values) ** 2) * self.grid.spacing
        if abs(norm - 1.0) > 1e-6:
            raise DomainError("Grid wavefunction is not normalized, norm = {}".format(norm))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def density(self):
        """Position probability density summed over components [1/m]."""
        return np.sum(np.abs(self.values) ** 2, axis=0)


@dataclass(frozen=True, eq=False)
class FringeReport:
    """A dataclass encapsulating an interference pattern and its fringe analysis."""

    z: np.ndarray
    density: np.ndarray
    period_measured: float
    period_predicted: float
    visibility: float


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    """A dataclass encapsulating the output of a protocol run."""

    final_state: QuantumState
    times: np.ndarray
    fidelities: np.ndarray
    summary: Dict[str, float]
    steps: List[PulseStep] = field(default_factory=list)
    grid_state: Optional[GridWavefunction] = None
    density_map: Optional[np.ndarray] = None

    def __post_init__(self):
        """Validate fidelities."""
        fidelities = np.asarray(self.fidelities, dtype=np.float64)
        if fidelities.size and (fidelities.min() < -1e-12 or fidelities.max() > 1 + 1e-9):
            raise DomainError("Fidelities must lie in [0, 1]")
        object.__setattr__(self, "fidelities", np.clip(fidelities, 0.0, 1.0))
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))

    @property
    def fidelity_series(self):
        """Return the (t, F) pairs."""
        return list(zip(self.times.tolist(), self.fidelities.tolist()))


@dataclass(frozen=True)
class BudgetItem:
    """A dataclass encapsulating one coherence budget comparison."""

    value: float
    limit: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class DecoherenceReport:
    """A dataclass encapsulating decoherence rates and the feasibility budget."""

    gamma_gas: float
    gamma_bb: float
    mean_velocity: float
    budget: Dict[str, BudgetItem]
    annotations: Dict[str, str]

    def __post_init__(self):
        """Validate rates."""
        if self.gamma_gas < 0 or self.gamma_bb < 0 or self.mean_velocity < 0:
            raise DomainError("Rates must not be negative")
