"""C3v group machinery.

Three things live here: projection of site bases onto symmetry-adapted
orbitals, the two-hole multiplet expansions over {a, e+, e-}, and the irrep
classification of two-mode harmonic-oscillator levels that the vibronic
solvers project against.
"""

from dataclasses import dataclass, field
from math import comb, factorial, sqrt

import numpy as np

from .errors import InvalidInputError

ELEMENTS = ("E", "C3", "C3^2", "sv1", "sv2", "sv3")
ROTATIONS = ("E", "C3", "C3^2")
IRREPS = ("A1", "A2", "E")

# per-element characters (classes: E | 2C3 | 3 sigma_v)
_CHARACTERS = {
    "A1": {"E": 1.0, "C3": 1.0, "C3^2": 1.0, "sv1": 1.0, "sv2": 1.0, "sv3": 1.0},
    "A2": {"E": 1.0, "C3": 1.0, "C3^2": 1.0, "sv1": -1.0, "sv2": -1.0, "sv3": -1.0},
    "E": {"E": 2.0, "C3": -1.0, "C3^2": -1.0, "sv1": 0.0, "sv2": 0.0, "sv3": 0.0},
}

_IRREP_DIM = {"A1": 1, "A2": 1, "E": 2}

# multiplication table g*h via permutations of the 3 sites: C3 = (1 2 3),
# sv1 fixes site 1.  Site permutations are enough to define the abstract group.
_SITE_PERM = {
    "E": (0, 1, 2),
    "C3": (1, 2, 0),
    "C3^2": (2, 0, 1),
    "sv1": (0, 2, 1),
    "sv2": (2, 1, 0),
    "sv3": (1, 0, 2),
}


def _compose(pa, pb):
    # permutation of "apply pb, then pa"
    return tuple(pa[pb[i]] for i in range(3))


class PointGroupC3v:
    """The abstract C3v group with its character table."""

    elements = ELEMENTS
    irreps = IRREPS
    order = 6

    def character(self, irrep, element):
        return _CHARACTERS[irrep][element]

    def irrep_dim(self, irrep):
        return _IRREP_DIM[irrep]

    def multiply(self, a, b):
        """Group product a*b, i.e. the element acting as 'apply b then a'."""
        target = _compose(_SITE_PERM[a], _SITE_PERM[b])
        for name, perm in _SITE_PERM.items():
            if perm == target:
                return name
        raise KeyError((a, b))

    def character_orthogonality_defect(self):
        """Max deviation from the row/column orthogonality relations."""
        defect = 0.0
        for g1 in self.irreps:
            for g2 in self.irreps:
                s = sum(
                    _CHARACTERS[g1][el] * _CHARACTERS[g2][el] for el in self.elements
                )
                want = self.order if g1 == g2 else 0.0
                defect = max(defect, abs(s - want))
        return defect


C3V = PointGroupC3v()


@dataclass(frozen=True)
class SiteBasis:
    """Labelled orbitals with a signed-permutation action of each group element.

    ``action[g]`` is a tuple of target indices: element g sends orbital j to
    orbital action[g][j] (times ``signs[g][j]`` if signs are given).  sp3-type
    dangling-bond bases permute with all signs +1.
    """

    labels: tuple
    action: dict
    signs: dict = None

    def __post_init__(self):
        if self.signs is None:
            object.__setattr__(
                self,
                "signs",
                {g: (1.0,) * len(self.labels) for g in ELEMENTS},
            )

    @property
    def dim(self):
        return len(self.labels)

    def matrix(self, element):
        """Representation matrix D(g) over the orbital basis."""
        dim = self.dim
        mat = np.zeros((dim, dim))
        for j, (tgt, sgn) in enumerate(
            zip(self.action[element], self.signs[element])
        ):
            mat[tgt, j] = sgn
        return mat

    def validate(self, group=C3V):
        """Check bijectivity and the homomorphism property D(a)D(b) = D(ab)."""
        for g in ELEMENTS:
            if sorted(self.action[g]) != list(range(self.dim)):
                raise InvalidInputError(f"action of {g} is not a bijection")
        for a in ELEMENTS:
            for b in ELEMENTS:
                lhs = self.matrix(a) @ self.matrix(b)
                rhs = self.matrix(group.multiply(a, b))
                if not np.allclose(lhs, rhs, atol=1e-12):
                    raise InvalidInputError(
                        f"group action is not a homomorphism at ({a}, {b})"
                    )


def _cycle_basis(labels, triples):
    """Action for a basis made of 3-site orbital shells (plus fixed orbitals).

    ``triples`` lists index triples (i1, i2, i3) permuted like the three
    equivalent sites; indices not covered are left fixed by every element.
    """
    dim = len(labels)
    action = {}
    for g, perm in _SITE_PERM.items():
        tgt = list(range(dim))
        for tri in triples:
            for site, orb in enumerate(tri):
                tgt[orb] = tri[perm[site]]
        action[g] = tuple(tgt)
    return SiteBasis(labels=tuple(labels), action=action)


def divacancy_basis():
    """Six sp3 dangling bonds: three Si and three C around the divacancy."""
    return _cycle_basis(
        ("s1", "s2", "s3", "c1", "c2", "c3"), [(0, 1, 2), (3, 4, 5)]
    )


def nv_basis():
    """Nitrogen sp3 orbital plus three C dangling bonds."""
    return _cycle_basis(("n", "c1", "c2", "c3"), [(1, 2, 3)])


@dataclass(frozen=True, eq=False)
class Salc:
    """One symmetry-adapted linear combination."""

    irrep: str
    row: int          # 0 for 1-dim irreps; 0 = x-like, 1 = y-like for E
    coefficients: np.ndarray
    labels: tuple

    def __str__(self):
        terms = [
            f"{c:+.4f}|{l}>"
            for c, l in zip(self.coefficients, self.labels)
            if abs(c) > 1e-12
        ]
        return f"{self.irrep}[{self.row}]: " + " ".join(terms)


@dataclass(frozen=True, eq=False)
class SymmetryAdaptedOrbitals:
    """Full orthonormal SALC set for one site basis."""

    basis: SiteBasis
    orbitals: tuple  # of Salc

    def by_irrep(self, irrep, row=None):
        return [
            s
            for s in self.orbitals
            if s.irrep == irrep and (row is None or s.row == row)
        ]

    def coefficient_matrix(self):
        return np.array([s.coefficients for s in self.orbitals])


def _gram_schmidt(vectors, tol=1e-10):
    out = []
    for v in vectors:
        w = v.copy()
        for u in out:
            w -= np.dot(u, w) * u
        n = np.linalg.norm(w)
        if n > tol:
            out.append(w / n)
    return out


def project_salcs(basis, group=C3V):
    """Project a site basis onto orthonormal C3v symmetry-adapted orbitals.

    Character projectors are applied to the basis vectors in enumeration
    order and Gram-Schmidt orthonormalized within each irrep block (orbital
    overlap integrals are ignored).  E-pair partners are generated from the
    x-like member with the C3 transfer operator, which pins the relative
    phase of the two rows.
    """
    basis.validate(group)
    dim = basis.dim
    mats = {g: basis.matrix(g) for g in ELEMENTS}

    # multiplicities from the character decomposition of the permutation rep
    mult = {}
    for irrep in IRREPS:
        s = sum(group.character(irrep, g) * np.trace(mats[g]) for g in ELEMENTS)
        m = s / group.order
        mult[irrep] = int(round(m))
        if abs(m - mult[irrep]) > 1e-9:
            raise InvalidInputError("non-integer irrep multiplicity")

    projectors = {
        irrep: sum(group.character(irrep, g) * mats[g] for g in ELEMENTS)
        * (group.irrep_dim(irrep) / group.order)
        for irrep in IRREPS
    }

    orbitals = []
    for irrep in ("A1", "A2"):
        images = [projectors[irrep] @ np.eye(dim)[j] for j in range(dim)]
        vecs = _gram_schmidt(images)
        if len(vecs) != mult[irrep]:
            raise InvalidInputError(f"projection defect in irrep {irrep}")
        for v in vecs:
            v = _sign_fix(v)
            orbitals.append(Salc(irrep, 0, v, basis.labels))

    # E space: project, take x-like rows even under sv1, build y partners
    images = [projectors["E"] @ np.eye(dim)[j] for j in range(dim)]
    evecs = _gram_schmidt(images) if mult["E"] else []
    if len(evecs) != 2 * mult["E"]:
        raise InvalidInputError("projection defect in irrep E")
    if not evecs:
        sad = SymmetryAdaptedOrbitals(basis=basis, orbitals=tuple(orbitals))
        if len(orbitals) != dim:
            raise InvalidInputError("SALC count does not match basis dimension")
        return sad
    sv1 = mats["sv1"]
    respan = np.array(evecs).T  # columns span the E space
    sym = respan.T @ sv1 @ respan
    w, u = np.linalg.eigh(sym)
    rot = respan @ u
    x_span = [rot[:, k] for k in range(rot.shape[1]) if w[k] > 0.5]
    if len(x_span) != mult["E"]:
        raise InvalidInputError("reflection does not split E rows evenly")
    # resolve the x-like multiplicity space along the basis enumeration order
    px = sum(np.outer(v, v) for v in x_span)
    x_rows = _gram_schmidt([px @ np.eye(dim)[j] for j in range(dim)])
    transfer = mats["C3"] - mats["C3^2"]
    for vx in x_rows:
        vx = _sign_fix(vx)
        vy = transfer @ vx
        vy /= np.linalg.norm(vy)
        orbitals.append(Salc("E", 0, vx, basis.labels))
        orbitals.append(Salc("E", 1, vy, basis.labels))

    sad = SymmetryAdaptedOrbitals(basis=basis, orbitals=tuple(orbitals))
    if len(orbitals) != dim:
        raise InvalidInputError("SALC count does not match basis dimension")
    return sad


def _sign_fix(v, tol=1e-9):
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


# ---------------------------------------------------------------------------
# two-hole multiplets over {a, e+, e-}
# ---------------------------------------------------------------------------

ORBITALS = ("a", "e+", "e-")
SPINS = ("u", "d")
CONFIGURATIONS = ("ee", "ae", "aa")


@dataclass(frozen=True, eq=False)
class TwoHoleMultiplet:
    """One two-hole state: a list of (orbital pair, spin pair, coefficient)."""

    configuration: str
    term: str        # e.g. "3A2", "1E", "1A1", "3E", "1E'", "1A1'"
    spin: int        # total S
    label: str       # component label, e.g. "3A2(+1)", "1E(-)"
    terms: tuple     # of ((orb1, orb2), (spin1, spin2), float)

    def vector(self):
        """Coefficients over the 36-dim two-slot product basis."""
        v = np.zeros(36)
        for (o1, o2), (s1, s2), c in self.terms:
            v[_product_index(o1, o2, s1, s2)] += c
        return v


def _product_index(o1, o2, s1, s2):
    i1, i2 = ORBITALS.index(o1), ORBITALS.index(o2)
    j1, j2 = SPINS.index(s1), SPINS.index(s2)
    return ((i1 * 3 + i2) * 2 + j1) * 2 + j2


_TRIPLET_SPINS = {
    "+1": ((("u", "u"), sqrt(2.0)),),
    "0": ((("u", "d"), 1.0), (("d", "u"), 1.0)),
    "-1": ((("d", "d"), sqrt(2.0)),),
}
_SINGLET_SPIN = ((("u", "d"), 1.0), (("d", "u"), -1.0))


def _combine(orb_terms, spin_terms, norm):
    out = []
    for (o1, o2), co in orb_terms:
        for (s1, s2), cs in spin_terms:
            out.append(((o1, o2), (s1, s2), co * cs * norm))
    return _phase_fix(out)


def _phase_fix(terms):
    # global phase: coefficient of the lexicographically first orbital-spin
    # product is real positive
    key = min(terms, key=lambda t: (t[0], t[1]))
    if key[2] < 0:
        terms = [(o, s, -c) for (o, s, c) in terms]
    return tuple(terms)


def two_hole_multiplets(configuration):
    """All two-hole multiplet states of the given hole configuration.

    (ee) gives 3A2 (3 states), 1E (2), 1A1 (1); (ae) gives 3E (6), 1E' (2);
    (aa) gives 1A1' (1).  States are orthonormal and antisymmetric under the
    simultaneous exchange of orbital and spin slots.
    """
    if configuration not in CONFIGURATIONS:
        raise InvalidInputError(f"unknown configuration {configuration!r}")
    states = []
    if configuration == "ee":
        orb_3a2 = ((("e+", "e-"), 1.0), (("e-", "e+"), -1.0))
        for ms, spin in _TRIPLET_SPINS.items():
            states.append(
                TwoHoleMultiplet(
                    "ee", "3A2", 1, f"3A2({ms})",
                    _combine(orb_3a2, spin, 0.5),
                )
            )
        # 1E-+: orbital e+e+ pairs with the minus combo, e-e- with plus
        for sign, orb in (("-", "e+"), ("+", "e-")):
            states.append(
                TwoHoleMultiplet(
                    "ee", "1E", 0, f"1E({sign})",
                    _combine(
                        (((orb, orb), 1.0),), _SINGLET_SPIN, 1.0 / sqrt(2.0)
                    ),
                )
            )
        orb_1a1 = ((("e+", "e-"), 1.0), (("e-", "e+"), 1.0))
        states.append(
            TwoHoleMultiplet(
                "ee", "1A1", 0, "1A1", _combine(orb_1a1, _SINGLET_SPIN, 0.5)
            )
        )
    elif configuration == "ae":
        for sign in ("+", "-"):
            orb = (((f"e{sign}", "a"), 1.0), (("a", f"e{sign}"), -1.0))
            for ms, spin in _TRIPLET_SPINS.items():
                states.append(
                    TwoHoleMultiplet(
                        "ae", "3E", 1, f"3E({sign},{ms})",
                        _combine(orb, spin, 0.5),
                    )
                )
        for sign in ("+", "-"):
            orb = (((f"e{sign}", "a"), 1.0), (("a", f"e{sign}"), 1.0))
            states.append(
                TwoHoleMultiplet(
                    "ae", "1E'", 0, f"1E'({sign})",
                    _combine(orb, _SINGLET_SPIN, 0.5),
                )
            )
    else:
        states.append(
            TwoHoleMultiplet(
                "aa", "1A1'", 0, "1A1'",
                _combine(((("a", "a"), 1.0),), _SINGLET_SPIN, 1.0 / sqrt(2.0)),
            )
        )
    return states


def real_singlet_basis_change():
    """Orthogonal map from {|xx>, |xy>, |yy>} to the {1E_x, 1E_y, 1A1} singlets.

    Rows are (1E_x, 1E_y, 1A1): 1E_x = (-|xx> + |yy>)/sqrt2, 1E_y = |xy>,
    1A1 = (|xx> + |yy>)/sqrt2.  The transform is its own inverse transpose,
    so round trips are exact.
    """
    s = 1.0 / sqrt(2.0)
    return np.array(
        [
            [-s, 0.0, s],
            [0.0, 1.0, 0.0],
            [s, 0.0, s],
        ]
    )


# ---------------------------------------------------------------------------
# two-mode oscillator levels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatorState:
    """Number state |n, m> of the two Cartesian e-mode oscillators."""

    n: int
    m: int

    @property
    def i(self):
        return self.n + self.m

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise InvalidInputError("negative quanta")


def oscillator_states(n_max):
    """All |n, m> with n + m <= n_max, ordered by (level, n descending)."""
    return [
        OscillatorState(n, i - n)
        for i in range(n_max + 1)
        for n in range(i, -1, -1)
    ]


def _level_states(i):
    return [(n, i - n) for n in range(i, -1, -1)]


def circular_harmonics(i):
    """Circular-mode states of level i as (l, complex coefficient vector).

    The vector is over the Cartesian level-i states ordered n descending.
    l = n_plus - n_minus runs over i, i-2, ..., -i; the states diagonalize
    the phonon angular momentum.
    """
    states_i = _level_states(i)
    pos = {s: k for k, s in enumerate(states_i)}
    out = []
    for l in range(i, -i - 1, -2):
        n_p = (i + l) // 2
        n_m = (i - l) // 2
        coeff = np.zeros(len(states_i), dtype=complex)
        for k in range(n_p + 1):
            for j in range(n_m + 1):
                p = k + j
                q = i - p
                phase = (1j) ** (n_p - k) * (-1j) ** (n_m - j)
                coeff[pos[(p, q)]] += (
                    comb(n_p, k)
                    * comb(n_m, j)
                    * phase
                    * sqrt(factorial(p) * factorial(q))
                )
        coeff /= sqrt(2.0**i * factorial(n_p) * factorial(n_m))
        out.append((l, coeff))
    return out


@dataclass(frozen=True, eq=False)
class VibrationalIrrepSector:
    """Orthonormal basis of one irrep inside oscillator level i.

    ``basis`` rows are real vectors over the Cartesian level-i states
    (ordered n descending); ``l_values`` records the |l| each row came from.
    """

    i: int
    irrep: str
    basis: np.ndarray
    l_values: tuple


def classify_oscillator_level(i, n_max):
    """Split oscillator level i into A1 / A2 / E sectors.

    Classification is by phonon angular momentum mod 3: l = 0 states are A1;
    conjugate pairs with l a nonzero multiple of 3 give one A1 (even in y)
    and one A2 (odd in y) combination; the remaining pairs give E rows.
    Sector dimensions sum to i + 1.
    """
    if not 0 <= i <= n_max:
        raise InvalidInputError(f"level {i} outside [0, {n_max}]")
    a1, a2, e = [], [], []
    la1, la2, le = [], [], []
    for l, v in circular_harmonics(i):
        if l < 0:
            continue  # handled together with the +l partner
        if l == 0:
            a1.append(v.real.copy())  # l = 0 harmonics are real
            la1.append(0)
        elif l % 3 == 0:
            a1.append(sqrt(2.0) * v.real)
            a2.append(sqrt(2.0) * v.imag)
            la1.append(l)
            la2.append(l)
        else:
            e.append(sqrt(2.0) * v.real)
            e.append(sqrt(2.0) * v.imag)
            le.extend((l, l))
    sectors = []
    if a1:
        sectors.append(
            VibrationalIrrepSector(i, "A1", np.array(a1), tuple(la1))
        )
    if a2:
        sectors.append(
            VibrationalIrrepSector(i, "A2", np.array(a2), tuple(la2))
        )
    if e:
        sectors.append(VibrationalIrrepSector(i, "E", np.array(e), tuple(le)))
    return sectors
