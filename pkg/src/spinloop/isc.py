"""Intersystem-crossing rate evaluation.

Golden-rule rates between the triplet and singlet manifolds.  Spin-orbit
constants enter in ordinary frequency (GHz) and are converted to energy as
eps = h * nu; with the lineshape density in 1/meV the rates come out in 1/s
and are reported in MHz.
"""

from dataclasses import dataclass

import numpy as np

from .constants import GHZ_TO_MEV, HBAR_MEV_S
from .errors import InvalidInputError
from .spectral import evaluate_shifted

PERP_TO_AXIAL_DEFAULT = 1.2
# rates below this are written as 0 in CSV output
CSV_RATE_FLOOR_MHZ = 1e-6


@dataclass(frozen=True)
class SocParameters:
    """Axial and transverse spin-orbit constants in GHz."""

    lambda_z: float
    lambda_perp: float = None
    provenance: str = "computed"

    def __post_init__(self):
        if self.lambda_z <= 0:
            raise InvalidInputError("lambda_z must be positive")
        if self.lambda_perp is None:
            object.__setattr__(
                self, "lambda_perp", PERP_TO_AXIAL_DEFAULT * self.lambda_z
            )
        if self.lambda_perp < 0:
            raise InvalidInputError("lambda_perp must be non-negative")
        if self.provenance not in ("computed", "experimental"):
            raise InvalidInputError("provenance must be computed|experimental")


@dataclass(frozen=True)
class UpperIscResult:
    """Channel rates out of the triplet excited state, MHz."""

    delta: float
    gamma_a1: float
    gamma_e12: float
    gamma_a2: float

    @property
    def ratio(self):
        return self.gamma_e12 / self.gamma_a1 if self.gamma_a1 > 0 else np.nan

    @property
    def k45(self):
        return (self.gamma_a1 + 2.0 * self.gamma_e12 + self.gamma_a2) / 4.0


@dataclass(frozen=True)
class LowerIscResult:
    """Channel rates out of the shelving singlet, MHz."""

    sigma: float
    gamma_z: float
    gamma_pm: float
    gamma_mp: float

    @property
    def gamma_perp(self):
        return self.gamma_pm + self.gamma_mp

    @property
    def gamma_total(self):
        return self.gamma_z + self.gamma_perp

    @property
    def ratio(self):
        return self.gamma_z / self.gamma_perp if self.gamma_perp > 0 else np.nan


def _check_table(table, primed):
    if table.primed != primed:
        kind = "primed" if primed else "unprimed"
        raise InvalidInputError(f"expected a {kind} coefficient table")
    if abs(table.total - 1.0) > 1e-3:
        raise InvalidInputError(
            f"coefficient table sums to {table.total:.6f}, not normalized"
        )


def _weighted_density(weights, lineshape, gap, hw):
    return sum(
        w * evaluate_shifted(lineshape, gap, i * hw)
        for i, w in weights
        if w > 0.0
    )


def upper_isc(soc, table, lineshape, hw_e, delta):
    """Second-order rates from the vibronic triplet levels into the singlet.

    Gamma_A1 = (4 pi / hbar) eps_perp^2 sum_i c_i^2 F(delta - i hw_e); the
    E12 channel carries d_i^2 / 2 and the A2 channel f_i^2.
    """
    _check_table(table, primed=False)
    if delta < 0:
        raise InvalidInputError("gap energy must be non-negative")
    eps = soc.lambda_perp * GHZ_TO_MEV
    pref = 4.0 * np.pi * eps**2 / HBAR_MEV_S / 1e6  # MHz
    idx = table.i
    ga1 = pref * _weighted_density(zip(idx, table.c2), lineshape, delta, hw_e)
    ge = pref * _weighted_density(
        zip(idx, 0.5 * table.d2), lineshape, delta, hw_e
    )
    ga2 = pref * _weighted_density(zip(idx, table.f2), lineshape, delta, hw_e)
    return UpperIscResult(delta=delta, gamma_a1=ga1, gamma_e12=ge, gamma_a2=ga2)


def lower_isc(soc, table, c2_mixing, lineshape, hw_E, sigma):
    """Rates from the shelving singlet doublet into the triplet sublevels.

    The axial channel carries an 8 pi prefactor and the mixing weight C^2;
    the two transverse channels carry 2 pi and (1 - C^2), driven by the
    c' and f' weights respectively.
    """
    _check_table(table, primed=True)
    if sigma < 0:
        raise InvalidInputError("gap energy must be non-negative")
    if not 0.0 <= c2_mixing <= 1.0:
        raise InvalidInputError("C2 must lie in [0, 1]")
    eps_z = soc.lambda_z * GHZ_TO_MEV
    eps_p = soc.lambda_perp * GHZ_TO_MEV
    idx = table.i
    pref_z = 8.0 * np.pi * eps_z**2 * c2_mixing / HBAR_MEV_S / 1e6
    pref_p = 2.0 * np.pi * eps_p**2 * (1.0 - c2_mixing) / HBAR_MEV_S / 1e6
    gz = pref_z * _weighted_density(zip(idx, table.d2), lineshape, sigma, hw_E)
    gpm = pref_p * _weighted_density(zip(idx, table.c2), lineshape, sigma, hw_E)
    gmp = pref_p * _weighted_density(zip(idx, table.f2), lineshape, sigma, hw_E)
    return LowerIscResult(sigma=sigma, gamma_z=gz, gamma_pm=gpm, gamma_mp=gmp)


def sweep_upper(soc, table, lineshape, hw_e, deltas):
    """Rate curves over a gap grid, one UpperIscResult per gap value."""
    deltas = np.asarray(deltas, dtype=float)
    _check_monotone(deltas)
    return [upper_isc(soc, table, lineshape, hw_e, d) for d in deltas]


def sweep_lower(soc, table, c2_mixing, lineshape, hw_E, sigmas):
    """Rate curves over a gap grid, one LowerIscResult per gap value."""
    sigmas = np.asarray(sigmas, dtype=float)
    _check_monotone(sigmas)
    return [
        lower_isc(soc, table, c2_mixing, lineshape, hw_E, s) for s in sigmas
    ]


def _check_monotone(grid):
    if grid.size == 0:
        raise InvalidInputError("empty gap grid")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise InvalidInputError("gap grid must be strictly increasing")


def _csv_rate(x, sig=6):
    if abs(x) < CSV_RATE_FLOOR_MHZ:
        return "0"
    return f"{x:.{sig}g}"


def write_upper_sweep_csv(results, stream, sig=6):
    stream.write("gap_meV,Gamma_A1_MHz,Gamma_E12_MHz,Gamma_A2_MHz,ratio\n")
    for r in results:
        ratio = r.ratio
        stream.write(
            ",".join(
                [
                    f"{r.delta:.{sig}g}",
                    _csv_rate(r.gamma_a1, sig),
                    _csv_rate(r.gamma_e12, sig),
                    _csv_rate(r.gamma_a2, sig),
                    "nan" if np.isnan(ratio) else f"{ratio:.{sig}g}",
                ]
            )
            + "\n"
        )


def write_lower_sweep_csv(results, stream, sig=6):
    stream.write("gap_meV,Gamma_z_MHz,Gamma_perp_MHz,Gamma_total_MHz,ratio\n")
    for r in results:
        ratio = r.ratio
        stream.write(
            ",".join(
                [
                    f"{r.sigma:.{sig}g}",
                    _csv_rate(r.gamma_z, sig),
                    _csv_rate(r.gamma_perp, sig),
                    _csv_rate(r.gamma_total, sig),
                    "nan" if np.isnan(ratio) else f"{ratio:.{sig}g}",
                ]
            )
            + "\n"
        )
