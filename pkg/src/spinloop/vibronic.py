"""Vibronic Hamiltonians for a C3v defect.

Two systems are covered: the quadratically coupled E x e Jahn-Teller problem
of the orbital doublet (electronic dimension 2 over {e_x, e_y}) and the
lower-branch singlet problem that mixes the {|xx>, |xy>, |yy>} singlets
through combined pseudo- and dynamic Jahn-Teller couplings.  Both are solved
by dense symmetric diagonalization; the ground doublet is decomposed into
symmetry channels whose squared weights feed the intersystem-crossing rates
and the Ham reduction factors.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    InvalidInputError,
    NoConvergenceError,
    SymmetryBreakingError,
)
from .symmetry import circular_harmonics, oscillator_states

DJT = "djt"
LOWER_BRANCH = "lower_branch"

DEFAULT_NMAX_DJT = 6
DEFAULT_NMAX_LOWER = 10

_SZ2 = np.array([[1.0, 0.0], [0.0, -1.0]])
_SX2 = np.array([[0.0, 1.0], [1.0, 0.0]])

# L = 1 operators acting on the {|xx>, |xy>, |yy>} singlet triple
_SZ3 = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
_SX3 = -(1.0 / np.sqrt(2.0)) * np.array(
    [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
)
# the same angular momentum spinning in the paired-singlet channel
_SZ3_BAR = 0.5 * np.array(
    [[-1.0, 0.0, 1.0], [0.0, 2.0, 0.0], [1.0, 0.0, -1.0]]
)
_SX3_BAR = (1.0 / np.sqrt(2.0)) * np.array(
    [[0.0, -1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
)

# electronic rows of the lower-branch space
_U_E_X = np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0)
_U_E_Y = np.array([0.0, 1.0, 0.0])
_U_A1 = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)


@dataclass(frozen=True)
class JtParameters:
    """Quadratic E x e coupling set, all in meV."""

    e_jt: float
    delta_jt: float
    hw_e: float
    F: float
    G: float

    def __post_init__(self):
        if min(self.e_jt, self.hw_e, self.F) < 0 or self.delta_jt < 0 or self.G < 0:
            raise InvalidInputError("JT energies must be non-negative")
        if self.hw_e <= 2.0 * self.G:
            raise InvalidInputError("need hw_e > 2G for a bound lower sheet")

    def relation_defects(self):
        """Relative errors of the two APES relations tying (F, G) to
        (E_JT, delta_JT, hw_e)."""
        e_pred = self.F**2 / (2.0 * (self.hw_e - 2.0 * self.G))
        d_pred = 4.0 * self.e_jt * self.G / (self.hw_e + 2.0 * self.G)
        de = abs(e_pred - self.e_jt) / self.e_jt if self.e_jt else 0.0
        dd = abs(d_pred - self.delta_jt) / self.delta_jt if self.delta_jt else 0.0
        return de, dd


@dataclass(frozen=True)
class PjtParameters:
    """Lower-branch coupling set: gap, e mode, JT energy, mixing, coupling."""

    lambda_e: float   # meV, gap between the singlet doublet and 1A1
    hw_E: float       # meV
    e_jt2: float      # meV
    C2: float         # dimensionless mixing weight
    F2: float         # meV

    def __post_init__(self):
        if not 0.0 <= self.C2 <= 1.0:
            raise InvalidInputError("C2 must lie in [0, 1]")
        if min(self.hw_E, self.e_jt2, self.F2) <= 0 or self.lambda_e < 0:
            raise InvalidInputError("energies must be positive")
        pred = f2_from_apes(self.hw_E, self.e_jt2, self.C2)
        if abs(pred - self.F2) / pred > 0.01:
            raise InvalidInputError(
                f"F2 = {self.F2} deviates more than 1% from "
                f"sqrt(2 hw_E E_JT2)/(1 + C2) = {pred:.3f}"
            )


def jt_params_from_apes(e_jt, delta_jt, hw_e):
    """Solve the quadratic APES relations for the couplings (F, G).

    The minima depth and barrier of the warped E x e lower sheet satisfy
    E_JT = F^2 / (2 (hw_e - 2G)) and delta_JT = 4 E_JT G / (hw_e + 2G).
    G is found by bisection on (0, hw_e/2); delta_JT = 0 reduces to the
    linear-coupling F = sqrt(2 hw_e E_JT) exactly.
    """
    if e_jt <= 0 or hw_e <= 0:
        raise InvalidInputError("E_JT and hw_e must be positive")
    if not 0 <= delta_jt < e_jt:
        raise InvalidInputError("need 0 <= delta_JT < E_JT")
    if delta_jt == 0.0:
        g = 0.0
    else:
        def barrier_defect(g):
            return 4.0 * e_jt * g / (hw_e + 2.0 * g) - delta_jt

        hi = 0.5 * hw_e * (1.0 - 1e-12)
        if barrier_defect(hi) < 0:
            raise NoConvergenceError(
                "no quadratic coupling with hw_e > 2G reproduces the barrier"
            )
        g = brentq(barrier_defect, 0.0, hi, xtol=1e-14, rtol=1e-14)
    f = np.sqrt(2.0 * e_jt * (hw_e - 2.0 * g))
    return JtParameters(e_jt=e_jt, delta_jt=delta_jt, hw_e=hw_e, F=f, G=g)


def f2_from_apes(hw_E, e_jt2, C2):
    """Lower-branch coupling from the distorted-geometry relaxation energy."""
    if hw_E <= 0 or e_jt2 <= 0:
        raise InvalidInputError("energies must be positive")
    return np.sqrt(2.0 * hw_E * e_jt2) / (1.0 + C2)


def mixing_from_amplitudes(p_amp, s_amp):
    """Mixing weight C^2 = 1 - 2 p^2 s^2 from the two orbital amplitudes."""
    if p_amp**2 + s_amp**2 > 1.0 + 1e-9:
        raise InvalidInputError("amplitudes exceed unit norm")
    return 1.0 - 2.0 * (p_amp**2) * (s_amp**2)


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------


def _mode_operators(states):
    """Exact projected matrices of x, y, x^2, y^2 and xy on the given basis.

    Matrix elements come from the ladder algebra of x = (a + a^+)/sqrt2;
    targets outside the basis are dropped (Rayleigh-Ritz projection).
    """
    idx = {(s.n, s.m): k for k, s in enumerate(states)}
    dim = len(states)
    X = np.zeros((dim, dim))
    Y = np.zeros((dim, dim))
    X2 = np.zeros((dim, dim))
    Y2 = np.zeros((dim, dim))
    XY = np.zeros((dim, dim))
    for s, k in ((s, idx[(s.n, s.m)]) for s in states):
        for mode, (M1, M2) in enumerate(((X, X2), (Y, Y2))):
            n = (s.n, s.m)[mode]
            first = (
                (1, np.sqrt((n + 1) / 2.0)),
                (-1, np.sqrt(n / 2.0) if n else 0.0),
            )
            second = (
                (2, 0.5 * np.sqrt((n + 1.0) * (n + 2.0))),
                (0, 0.5 * (2.0 * n + 1.0)),
                (-2, 0.5 * np.sqrt(n * (n - 1.0)) if n >= 2 else 0.0),
            )
            for dn, amp in first:
                t = (s.n + dn, s.m) if mode == 0 else (s.n, s.m + dn)
                if amp and t in idx:
                    M1[idx[t], k] += amp
            for dn, amp in second:
                t = (s.n + dn, s.m) if mode == 0 else (s.n, s.m + dn)
                if amp and t in idx:
                    M2[idx[t], k] += amp
        for dn, ax in ((1, np.sqrt((s.n + 1) / 2.0)), (-1, np.sqrt(s.n / 2.0))):
            for dm, ay in ((1, np.sqrt((s.m + 1) / 2.0)), (-1, np.sqrt(s.m / 2.0))):
                t = (s.n + dn, s.m + dm)
                if ax and ay and t in idx:
                    XY[idx[t], k] += ax * ay
    number = np.diag([float(s.i) for s in states])
    return X, Y, X2, Y2, XY, number


def symmetry_adapted_oscillator_basis(n_max):
    """Real rotation-closed oscillator basis with n+ and n- up to n_max.

    Truncating the two circular (angular-momentum) modes keeps the basis
    closed under every C3v operation, so E doublets stay exactly degenerate,
    and it converges the ground-doublet expansion markedly faster than the
    triangular total-quantum cut of equal n_max.  Returns the underlying
    Cartesian triangle basis (levels up to 2 n_max), the (triangle x kept)
    matrix of real basis vectors, and per-vector labels (i, l, parity)
    where parity 0/1 marks the y-even/y-odd member of each |l| > 0 pair.
    """
    triangle = oscillator_states(2 * n_max)
    pos = {(s.n, s.m): k for k, s in enumerate(triangle)}
    columns = []
    labels = []
    for i in range(2 * n_max + 1):
        l_cap = min(i, 2 * n_max - i)
        level = [(n, i - n) for n in range(i, -1, -1)]
        for l, vec in circular_harmonics(i):
            if l < 0 or l > l_cap:
                continue
            embedded = np.zeros(len(triangle), dtype=complex)
            for j, st in enumerate(level):
                embedded[pos[st]] = vec[j]
            if l == 0:
                columns.append(embedded.real.copy())
                labels.append((i, 0, 0))
            else:
                columns.append(np.sqrt(2.0) * embedded.real)
                labels.append((i, l, 0))
                columns.append(np.sqrt(2.0) * embedded.imag)
                labels.append((i, l, 1))
    basis = np.array(columns).T
    return triangle, basis, tuple(labels)


@dataclass(frozen=True, eq=False)
class VibronicProblem:
    """Assembled vibronic eigenproblem in the symmetry-adapted basis."""

    kind: str
    electronic_dim: int
    n_max: int
    hw: float            # oscillator quantum in meV
    matrix: np.ndarray
    labels: tuple        # (level, |l|, parity) per oscillator basis vector
    jt: JtParameters = None
    pjt: PjtParameters = None

    @property
    def dim(self):
        return self.matrix.shape[0]


def _assemble(electronic_terms, hw, n_max):
    """Project sum(E_k x O_k(x, y)) onto the symmetry-adapted basis.

    ``electronic_terms`` maps operator names ('1', 'x', 'y', 'x2-y2',
    '2xy') to electronic matrices; the oscillator term hw (n + 1) is added
    automatically.  Oscillator operators are built exactly on the Cartesian
    triangle that contains the kept subspace, then projected.
    """
    triangle, basis, labels = symmetry_adapted_oscillator_basis(n_max)
    X, Y, X2, Y2, XY, number = _mode_operators(triangle)
    eye = np.eye(len(triangle))
    osc_ops = {
        "1": number + eye,
        "x": X,
        "y": Y,
        "x2-y2": X2 - Y2,
        "2xy": 2.0 * XY,
    }
    osc_ops["1"] = hw * osc_ops["1"]
    nelec = next(iter(electronic_terms.values())).shape[0]
    dim_full = len(triangle)
    h_full = np.zeros((nelec * dim_full, nelec * dim_full))
    for name, elec in electronic_terms.items():
        h_full += np.kron(elec, osc_ops[name])
    proj = np.kron(np.eye(nelec), basis)
    h = proj.T @ h_full @ proj
    h = 0.5 * (h + h.T)  # scrub rounding asymmetry from the projection
    return h, labels


def build_djt_hamiltonian(params, n_max=DEFAULT_NMAX_DJT):
    """E x e Hamiltonian over {e_x, e_y} x oscillator space.

    H = hw (n_x + n_y + 1) + F (x sz - y sx) + G ((x^2 - y^2) sz + (xy + yx) sx),
    real symmetric, in the symmetry-adapted oscillator basis of order n_max.
    """
    if n_max < 2:
        raise InvalidInputError("n_max must be at least 2")
    terms = {
        "1": np.eye(2),
        "x": params.F * _SZ2,
        "y": -params.F * _SX2,
        "x2-y2": params.G * _SZ2,
        "2xy": params.G * _SX2,
    }
    h, labels = _assemble(terms, params.hw_e, n_max)
    return VibronicProblem(
        kind=DJT,
        electronic_dim=2,
        n_max=n_max,
        hw=params.hw_e,
        matrix=h,
        labels=labels,
        jt=params,
    )


def build_lower_branch_hamiltonian(params, n_max=DEFAULT_NMAX_LOWER):
    """Combined PJT + DJT Hamiltonian over {|xx>, |xy>, |yy>} x oscillator.

    The electronic part places the symmetric singlet at lambda_e; the
    coupling acts with weight C^2 * 2 F2 in the primary channel and
    (1 - C^2) * F2 in the paired-singlet channel.
    """
    if n_max < 2:
        raise InvalidInputError("n_max must be at least 2")
    h_e = 0.5 * params.lambda_e * np.array(
        [[1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 1.0]]
    )
    strong = params.C2 * 2.0 * params.F2
    weak = (1.0 - params.C2) * params.F2
    terms = {
        "1": np.eye(3),
        "x": strong * _SZ3 + weak * _SZ3_BAR,
        "y": -(strong * _SX3 + weak * _SX3_BAR),
    }
    h, labels = _assemble(terms, params.hw_E, n_max)
    nosc = len(labels)
    h += np.kron(h_e, np.eye(nosc))
    return VibronicProblem(
        kind=LOWER_BRANCH,
        electronic_dim=3,
        n_max=n_max,
        hw=params.hw_E,
        matrix=h,
        labels=labels,
        pjt=params,
    )


# ---------------------------------------------------------------------------
# solution and coefficient tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Per-level squared expansion weights of one ground-doublet member.

    Unprimed tables carry (c2, d2, f2); primed (lower-branch) tables add g2.
    Row index i is the total phonon quantum entering the rate shifts.
    """

    i: np.ndarray
    c2: np.ndarray
    d2: np.ndarray
    f2: np.ndarray
    g2: np.ndarray = None

    @property
    def primed(self):
        return self.g2 is not None

    @property
    def sums(self):
        out = {"c2": float(self.c2.sum()), "d2": float(self.d2.sum()),
               "f2": float(self.f2.sum())}
        if self.primed:
            out["g2"] = float(self.g2.sum())
        return out

    @property
    def total(self):
        return float(sum(self.sums.values()))

    def write_csv(self, stream, sig=6):
        cols = ["i", "c2", "d2", "f2"] + (["g2"] if self.primed else [])
        stream.write(",".join(cols) + "\n")
        for k in range(len(self.i)):
            row = [str(int(self.i[k]))] + [
                _fmt(getattr(self, c)[k], sig) for c in cols[1:]
            ]
            stream.write(",".join(row) + "\n")
        sums = self.sums
        stream.write(
            ",".join(["sum"] + [_fmt(sums[c], sig) for c in cols[1:]]) + "\n"
        )


def _fmt(x, sig=6):
    return f"{x:.{sig}g}"


@dataclass(frozen=True)
class HamFactors:
    """Vibronic reduction factors of electronic operators."""

    p: float
    q: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0 and 0.0 < self.q <= 1.0):
            raise InvalidInputError("reduction factors must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class VibronicSolution:
    """Eigenpairs plus the symmetry-resolved ground-doublet expansion."""

    problem: VibronicProblem
    eigenvalues: np.ndarray
    doublet: np.ndarray        # two gauge-fixed ground vectors as columns
    doublet_gap: float
    table: CoefficientTable
    ham: HamFactors = None

    @property
    def ground_energy(self):
        return float(self.eigenvalues[0])


def solve(problem, degeneracy_rtol=1e-6):
    """Diagonalize and decompose the ground doublet.

    Raises SymmetryBreakingError when the two lowest states are split by
    more than degeneracy_rtol * hw.  The doublet gauge is fixed by
    diagonalizing the vertical reflection inside the degenerate pair and
    making each member's largest coefficient positive.
    """
    h = problem.matrix
    w, v = np.linalg.eigh(h)
    scale = np.linalg.norm(h)
    residual = np.linalg.norm(h @ v[:, 0] - w[0] * v[:, 0])
    if residual > 1e-9 * scale:
        raise NoConvergenceError("eigensolver residual above tolerance")
    gap = float(w[1] - w[0])
    if gap > degeneracy_rtol * problem.hw:
        raise SymmetryBreakingError(
            f"ground state split by {gap:.3e} meV, expected a degenerate "
            f"E doublet (tolerance {degeneracy_rtol * problem.hw:.3e} meV)",
            gap_mev=gap,
        )
    doublet = _gauge_fix(problem, v[:, :2])
    table = _coefficient_table(problem, doublet[:, 0])
    ham = None
    if problem.kind == DJT:
        sums = table.sums
        ham = HamFactors(
            p=sums["c2"] - sums["d2"] + sums["f2"],
            q=sums["c2"] - sums["f2"],
        )
    return VibronicSolution(
        problem=problem,
        eigenvalues=w,
        doublet=doublet,
        doublet_gap=gap,
        table=table,
        ham=ham,
    )


def ham_factors(solution):
    """Reduction factors p = sum(c2 - d2 + f2), q = sum(c2 - f2)."""
    if isinstance(solution, VibronicSolution):
        if solution.problem.kind != DJT:
            raise InvalidInputError(
                "Ham factors are defined for the orbital-doublet problem only"
            )
        return solution.ham
    table = solution
    if table.primed:
        raise InvalidInputError(
            "Ham factors are defined for the orbital-doublet problem only"
        )
    sums = table.sums
    return HamFactors(
        p=sums["c2"] - sums["d2"] + sums["f2"],
        q=sums["c2"] - sums["f2"],
    )


def _reflection_operator(problem):
    """Vertical reflection: e_y flips sign, as do the y-odd basis vectors."""
    vib = np.diag([1.0 - 2.0 * parity for _, _, parity in problem.labels])
    if problem.electronic_dim == 2:
        elec = np.diag([1.0, -1.0])
    else:
        elec = np.diag([1.0, -1.0, 1.0])  # |xx>, |xy>, |yy>
    return np.kron(elec, vib)


def _gauge_fix(problem, pair):
    refl = _reflection_operator(problem)
    small = pair.T @ refl @ pair
    w, u = np.linalg.eigh(small)
    if np.abs(np.abs(w) - 1.0).max() > 1e-6:
        raise SymmetryBreakingError(
            "reflection is not diagonalizable inside the ground doublet",
            gap_mev=float("nan"),
        )
    fixed = pair @ u[:, ::-1]  # even member first
    for k in range(2):
        col = fixed[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            fixed[:, k] = -col
    fixed.flags.writeable = False
    return fixed


def _coefficient_table(problem, member):
    """Accumulate the symmetry-channel weights of one doublet member.

    Oscillator angular momenta that are multiples of 3 feed the two A-type
    channels; the conjugate +-|l| pairs carry their weight in an even
    A1/A2 split, the convention under which the tabulated channel weights
    enter the rate formulas.  The remaining angular momenta form the E
    channel.  For the lower branch the electronic factor is resolved too:
    the symmetric singlet row pairs with E vibrations (d'), the doublet
    rows with A1 (c'), E (f') and A2 (g') vibrations.
    """
    nelec = problem.electronic_dim
    nosc = len(problem.labels)
    m = member.reshape(nelec, nosc)
    levels = sorted({i for i, _, _ in problem.labels})
    index = {lvl: k for k, lvl in enumerate(levels)}
    primed = problem.kind == LOWER_BRANCH
    acc = {name: np.zeros(len(levels)) for name in ("c2", "d2", "f2", "g2")}
    for k, (i, l, _) in enumerate(problem.labels):
        amp = m[:, k]
        row = index[i]
        if primed:
            w_e = np.dot(_U_E_X, amp) ** 2 + np.dot(_U_E_Y, amp) ** 2
            w_a = np.dot(_U_A1, amp) ** 2
            if l == 0:
                acc["c2"][row] += w_e
            elif l % 3 == 0:
                acc["c2"][row] += 0.5 * w_e
                acc["g2"][row] += 0.5 * w_e
            else:
                acc["f2"][row] += w_e
                acc["d2"][row] += w_a
        else:
            wgt = float(np.dot(amp, amp))
            if l == 0:
                acc["c2"][row] += wgt
            elif l % 3 == 0:
                acc["c2"][row] += 0.5 * wgt
                acc["f2"][row] += 0.5 * wgt
            else:
                acc["d2"][row] += wgt
    return CoefficientTable(
        i=np.array(levels),
        c2=acc["c2"],
        d2=acc["d2"],
        f2=acc["f2"],
        g2=acc["g2"] if primed else None,
    )
