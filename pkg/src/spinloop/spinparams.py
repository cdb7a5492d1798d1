"""Spin-Hamiltonian parameter processing.

Covers spin-contamination correction and D/E extraction of zero-field
splitting tensors, the two-directional finite-size extrapolation of the
axial spin-orbit constant, and its vibronic reduction.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitFailureError, InvalidInputError

# optimized 4H lattice constants per unit cell, Angstrom
A0_DEFAULT = 18.43 / 6.0
C0_DEFAULT = 20.10 / 2.0

_AXIS_TIE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ZfsTensor:
    """Real symmetric spin-spin tensor with a unit tag (GHz or MHz)."""

    matrix: np.ndarray
    unit: str = "GHz"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise InvalidInputError("tensor must be 3x3")
        if np.abs(m - m.T).max() > 1e-9 * max(1.0, np.abs(m).max()):
            raise InvalidInputError("tensor must be symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))
        if self.unit not in ("GHz", "MHz"):
            raise InvalidInputError("unit must be GHz or MHz")

    @property
    def trace(self):
        return float(np.trace(self.matrix))


@dataclass(frozen=True, eq=False)
class ZfsParameters:
    """Axial and rhombic parameters with the principal axes as rows."""

    d: float
    e: float
    axes: np.ndarray
    unit: str


def decontaminate(d_total, d_singlet):
    """Remove the ms = 0 determinant contribution: (D_t - D_s) / 2."""
    if d_total.unit != d_singlet.unit:
        raise InvalidInputError(
            f"unit mismatch: {d_total.unit} vs {d_singlet.unit}"
        )
    return ZfsTensor(
        matrix=0.5 * (d_total.matrix - d_singlet.matrix), unit=d_total.unit
    )


def extract_de(tensor):
    """Principal-axis D and E: D = 3/2 D_zz, E = (D_yy - D_xx)/2 >= 0.

    The z axis carries the principal value of largest magnitude; the two
    transverse values are ordered so E is non-negative.  Degenerate values
    are tie-broken by descending absolute value and a deterministic axis
    sign convention (first nonzero component positive, right-handed frame).
    """
    vals, vecs = np.linalg.eigh(tensor.matrix)
    order = sorted(
        range(3),
        key=lambda k: (-round(abs(vals[k]) / _AXIS_TIE_TOL), -vals[k]),
    )
    iz = order[0]
    rest = order[1:]
    # E = (D_yy - D_xx)/2 >= 0
    ix, iy = sorted(rest, key=lambda k: vals[k])
    d = 1.5 * vals[iz]
    e = 0.5 * (vals[iy] - vals[ix])
    axes = np.vstack([_axis_sign(vecs[:, ix]), _axis_sign(vecs[:, iy]),
                      _axis_sign(vecs[:, iz])])
    if np.linalg.det(axes) < 0:
        axes[2] = -axes[2]
    axes.flags.writeable = False
    return ZfsParameters(d=float(d), e=float(e), axes=axes, unit=tensor.unit)


def _axis_sign(v):
    for x in v:
        if abs(x) > _AXIS_TIE_TOL:
            return v if x > 0 else -v
    return v


# ---------------------------------------------------------------------------
# axial SOC finite-size scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SocRow:
    """One supercell data point: lateral/axial multipliers and lambda_z."""

    a_mult: int
    b_mult: int
    c_mult: int
    lambda_z: float

    def __post_init__(self):
        if min(self.a_mult, self.b_mult, self.c_mult) < 1:
            raise InvalidInputError("supercell multipliers must be >= 1")
        if self.lambda_z <= 0:
            raise InvalidInputError("lambda_z must be positive")


@dataclass(frozen=True, eq=False)
class SocDataset:
    """Axial SOC values over a grid of supercell sizes."""

    rows: tuple

    def __post_init__(self):
        if not self.rows:
            raise InvalidInputError("dataset is empty")

    def features(self, a0=A0_DEFAULT, c0=C0_DEFAULT):
        """Inverse cross-section x_ab = 2/(sqrt3 a b) and axial extent y_c."""
        x = np.array(
            [
                2.0 / (np.sqrt(3.0) * (r.a_mult * a0) * (r.b_mult * a0))
                for r in self.rows
            ]
        )
        y = np.array([r.c_mult * c0 for r in self.rows])
        lam = np.array([r.lambda_z for r in self.rows])
        return x, y, lam

    @classmethod
    def from_csv(cls, path):
        """Read rows from a CSV with header a_mult,b_mult,c_mult,lambda_z_GHz."""
        want = ["a_mult", "b_mult", "c_mult", "lambda_z_GHz"]
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [
                f.strip() for f in reader.fieldnames
            ] != want:
                raise InvalidInputError(
                    f"expected CSV header {','.join(want)}"
                )
            rows = tuple(
                SocRow(
                    a_mult=int(rec["a_mult"]),
                    b_mult=int(rec["b_mult"]),
                    c_mult=int(rec["c_mult"]),
                    lambda_z=float(rec["lambda_z_GHz"]),
                )
                for rec in reader
            )
        return cls(rows=rows)


@dataclass(frozen=True, eq=False)
class SocFit:
    """Converged parameters of lambda_z(x, y) = A exp(Bx + Cy) + lambda_z0."""

    A: float
    B: float
    C: float
    lambda_z0: float
    residual_norm: float
    residuals: np.ndarray
    excluded: tuple          # indices removed from the fit
    a0: float
    c0: float

    def predict(self, x_ab, y_c):
        return self.A * np.exp(self.B * x_ab + self.C * y_c) + self.lambda_z0


_START_A = (5.0, 40.0)
_START_BC = (-2.0, 0.5)

# auto-exclusion fires only when dropping the point improves the residual
# norm by more than this factor
OUTLIER_IMPROVEMENT = 2.0


def _fit_once(x, y, lam):
    xs, ys = x / x.mean(), y / y.mean()

    def resid(p):
        a, b, c, l0 = p
        return a * np.exp(b * xs + c * ys) + l0 - lam

    best = None
    for a in _START_A:
        for b in _START_BC:
            for c in _START_BC:
                for l0 in (0.5 * lam.min(), lam.min()):
                    try:
                        sol = least_squares(
                            resid, [a, b, c, l0], method="lm", max_nfev=20000
                        )
                    except Exception:
                        continue
                    if sol.success and (best is None or sol.cost < best.cost):
                        best = sol
    if best is None:
        raise FitFailureError(
            "exponential finite-size fit failed from every start point"
        )
    a, b, c, l0 = best.x
    return (a, b / x.mean(), c / y.mean(), l0), best.fun


def soc_fit(dataset, a0=A0_DEFAULT, c0=C0_DEFAULT, exclude="auto"):
    """Finite-size extrapolation of lambda_z to the isolated defect.

    ``exclude`` is "auto" (leave-one-out scan, drop the single row whose
    removal improves the residual norm by more than 2x), None (use all
    rows), or an explicit iterable of row indices.
    """
    x_all, y_all, lam_all = dataset.features(a0, c0)
    n = len(lam_all)

    if exclude == "auto":
        if n - 1 < 6:
            raise InvalidInputError("need at least 6 rows after exclusion")
        _, fun_full = _fit_once(x_all, y_all, lam_all)
        norm_full = np.linalg.norm(fun_full)
        best_idx, best_norm = None, norm_full
        for i in range(n):
            mask = np.ones(n, bool)
            mask[i] = False
            _, fun = _fit_once(x_all[mask], y_all[mask], lam_all[mask])
            nrm = np.linalg.norm(fun)
            if nrm < best_norm:
                best_idx, best_norm = i, nrm
        if best_idx is not None and norm_full / best_norm > OUTLIER_IMPROVEMENT:
            excluded = (best_idx,)
        else:
            excluded = ()
    elif exclude is None:
        excluded = ()
    else:
        excluded = tuple(sorted(set(int(i) for i in exclude)))
        if any(i < 0 or i >= n for i in excluded):
            raise InvalidInputError("exclusion index out of range")

    mask = np.ones(n, bool)
    for i in excluded:
        mask[i] = False
    if mask.sum() < 6:
        raise InvalidInputError("need at least 6 rows after exclusion")
    (a, b, c, l0), fun = _fit_once(x_all[mask], y_all[mask], lam_all[mask])
    if l0 <= 0:
        raise FitFailureError(f"converged asymptote {l0:.3f} GHz not positive")
    residuals = np.full(n, np.nan)
    residuals[mask] = fun
    return SocFit(
        A=a,
        B=b,
        C=c,
        lambda_z0=l0,
        residual_norm=float(np.linalg.norm(fun)),
        residuals=residuals,
        excluded=excluded,
        a0=a0,
        c0=c0,
    )


def reduce_soc(lambda_z0, p):
    """Vibronic quenching of the axial SOC constant: lambda_z = p * lambda_z0."""
    if not 0.0 < p <= 1.0:
        raise InvalidInputError("reduction factor must lie in (0, 1]")
    return p * lambda_z0
