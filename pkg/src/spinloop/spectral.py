"""Phonon-overlap lineshapes and configuration-coordinate diagnostics.

The zero-temperature emission sideband of a set of effective modes is the
convolution of their Poisson progressions, each line rendered as a Gaussian
and the result normalized to unit integral.  Rate formulas sample these
lineshapes at shifted energies through ``evaluate_shifted``.
"""

from dataclasses import dataclass

import numpy as np

from .constants import FORCE_CONST_MEV_AMU_A2
from .errors import InvalidInputError, ResolutionError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

# weights below this are dropped from the line list
_LINE_WEIGHT_FLOOR = 1e-13
_MAX_QUANTA_PER_MODE = 300


@dataclass(frozen=True)
class HuangRhysModel:
    """Partial Huang-Rhys factors (S_k, hw_k in meV) plus grid metadata."""

    modes: tuple          # of (S, hw_meV)
    sigma: float          # Gaussian broadening, meV
    de: float = 0.5       # grid spacing, meV
    e_max: float = 600.0  # grid extent, meV

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple((float(s), float(w)) for s, w in self.modes))
        for s, hw in self.modes:
            if s < 0 or hw <= 0:
                raise InvalidInputError("need S >= 0 and hw > 0 for every mode")
        if self.sigma <= 0:
            raise InvalidInputError("broadening must be positive")
        if self.de <= 0 or self.e_max <= 0:
            raise InvalidInputError("grid spacing and extent must be positive")

    @property
    def total_s(self):
        return sum(s for s, _ in self.modes)


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Normalized lineshape on a uniform energy grid (meV, meV^-1)."""

    energies: np.ndarray
    values: np.ndarray
    sigma: float
    normalization_residual: float

    def at(self, energy):
        """Linear interpolation; zero outside the stored grid."""
        return np.interp(energy, self.energies, self.values, left=0.0, right=0.0)

    def first_moment(self):
        return float(_trapezoid(self.energies * self.values, self.energies))

    def write_csv(self, stream, sig=6):
        stream.write("E_meV,density_per_meV\n")
        for e, v in zip(self.energies, self.values):
            stream.write(f"{e:.{sig}g},{v:.{sig}g}\n")


def build_lineshape(model):
    """Render the zero-temperature emission sideband of a Huang-Rhys model.

    Per-mode Poisson progressions exp(-S) S^n / n! are convolved by direct
    outer summation of their line positions, then broadened on the grid.
    The grid is padded a few sigma below zero so the zero-phonon Gaussian
    is held in full; normalization is enforced by trapezoidal integral.
    """
    if model.de > model.sigma / 2.0:
        raise ResolutionError(
            f"grid spacing {model.de} meV too coarse for sigma = {model.sigma} meV"
        )
    pad = 8.0 * model.sigma
    energies = np.arange(-pad, model.e_max + model.de, model.de)
    positions = np.array([0.0])
    weights = np.array([1.0])
    for s, hw in model.modes:
        prog = [np.exp(-s)]
        n = 1
        while n < _MAX_QUANTA_PER_MODE:
            nxt = prog[-1] * s / n
            if nxt <= _LINE_WEIGHT_FLOOR and nxt < prog[-1]:
                break
            prog.append(nxt)
            n += 1
        quanta = np.arange(len(prog))
        prog = np.array(prog)
        positions = (positions[:, None] + quanta[None, :] * hw).ravel()
        weights = (weights[:, None] * prog[None, :]).ravel()
        mask = (weights > _LINE_WEIGHT_FLOOR) & (positions < model.e_max + pad)
        positions, weights = positions[mask], weights[mask]
    values = np.zeros_like(energies)
    norm = 1.0 / (model.sigma * np.sqrt(2.0 * np.pi))
    for pos, wgt in zip(positions, weights):
        values += wgt * norm * np.exp(-((energies - pos) ** 2) / (2.0 * model.sigma**2))
    integral = _trapezoid(values, energies)
    if integral <= 0:
        raise InvalidInputError("lineshape has no weight on the grid")
    values = values / integral
    out = SpectralFunction(
        energies=energies,
        values=values,
        sigma=model.sigma,
        normalization_residual=abs(integral - 1.0),
    )
    out.energies.flags.writeable = False
    out.values.flags.writeable = False
    return out


def evaluate_shifted(lineshape, delta, shift):
    """Lineshape density at delta - shift, clamped to zero below zero.

    At zero temperature no quanta can be absorbed, so arguments below zero
    carry no overlap; on-grid arguments interpolate linearly and hit stored
    values exactly at the nodes.
    """
    arg = delta - shift
    if arg < 0.0:
        return 0.0
    return float(lineshape.at(arg))


# ---------------------------------------------------------------------------
# configuration-coordinate diagram
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CcdModel:
    """Two harmonic surfaces separated by delta_q and delta_e.

    delta_q in sqrt(amu) Angstrom, delta_e in eV, mode quanta in meV.
    """

    delta_q: float
    delta_e_ev: float
    hw_ground: float
    hw_excited: float

    def __post_init__(self):
        if self.delta_q < 0:
            raise InvalidInputError("delta_q must be non-negative")
        if self.delta_e_ev <= 0:
            raise InvalidInputError("delta_e must be positive")
        if self.hw_ground <= 0 or self.hw_excited <= 0:
            raise InvalidInputError("mode quanta must be positive")


@dataclass(frozen=True)
class CcdCrossing:
    """Crossing report: coordinates within range (empty tuple for none)."""

    crossings: tuple
    q_range: float
    k_ground: float      # meV / (amu A^2)
    k_excited: float
    huang_rhys: float    # effective S of the ground mode at offset delta_q

    @property
    def none(self):
        return len(self.crossings) == 0


def force_constant(hw_mev):
    """Harmonic force constant in meV/(amu A^2) for a mode of energy hw."""
    return FORCE_CONST_MEV_AMU_A2 * hw_mev**2


def ccd_crossing(model, q_range):
    """Intersections of the two surfaces within |Q| <= q_range.

    E_g(Q) = k_g Q^2 / 2 and E_e(Q) = delta_e + k_e (Q - delta_q)^2 / 2;
    the quadratic difference is solved exactly.  Also reports the effective
    Huang-Rhys factor S = k_g delta_q^2 / (2 hw_g).
    """
    if q_range <= 0:
        raise InvalidInputError("q_range must be positive")
    k_g = force_constant(model.hw_ground)
    k_e = force_constant(model.hw_excited)
    delta_e = model.delta_e_ev * 1e3
    # 0.5 k_g Q^2 - delta_e - 0.5 k_e (Q - dq)^2 = 0
    a = 0.5 * (k_g - k_e)
    b = k_e * model.delta_q
    c = -delta_e - 0.5 * k_e * model.delta_q**2
    roots = []
    if abs(a) < 1e-12 * max(k_g, k_e):
        if b != 0.0:
            roots = [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            sq = np.sqrt(disc)
            roots = [(-b - sq) / (2 * a), (-b + sq) / (2 * a)]
    crossings = tuple(sorted(q for q in roots if abs(q) <= q_range))
    s_eff = k_g * model.delta_q**2 / (2.0 * model.hw_ground)
    return CcdCrossing(
        crossings=crossings,
        q_range=q_range,
        k_ground=k_g,
        k_excited=k_e,
        huang_rhys=s_eff,
    )
