"""Five-level optical spin-polarization loop.

Level indexing is fixed: 1 = ground triplet ms=0, 2 = ground triplet
ms=+-1, 3 = excited triplet ms=0, 4 = excited triplet ms=+-1, 5 = singlet
shelf.  A sixth sink bucket tracks ionization leakage so probability stays
conserved.  Rates are in MHz and times in ns (1 MHz * 1 ns = 1e-3).
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import null_space

from .constants import C_SI, DEBYE_CM, EPSILON_0, EV_TO_J, HBAR_SI
from .errors import DegenerateModelError, InvalidInputError, StiffnessError

_PER_NS = 1e-3  # MHz expressed in 1/ns


@dataclass(frozen=True)
class RadiativeInputs:
    """Refractive index, zero-phonon-line energy (eV), dipole moment (debye)."""

    n: float
    e_zpl_ev: float
    mu_debye: float

    def __post_init__(self):
        if self.n < 1.0:
            raise InvalidInputError("refractive index must be >= 1")
        if self.e_zpl_ev <= 0:
            raise InvalidInputError("ZPL energy must be positive")
        if self.mu_debye < 0:
            raise InvalidInputError("dipole moment must be non-negative")


def radiative_rate(inputs):
    """Spontaneous-emission rate n E^3 mu^2 / (3 pi eps0 hbar^4 c^3), in MHz."""
    e_j = inputs.e_zpl_ev * EV_TO_J
    mu = inputs.mu_debye * DEBYE_CM
    rate = (
        inputs.n
        * e_j**3
        * mu**2
        / (3.0 * np.pi * EPSILON_0 * HBAR_SI**4 * C_SI**3)
    )
    return rate / 1e6


def k45_off_resonant(gamma_a1, gamma_e12, gamma_a2):
    """Off-resonant shelving rate: the (A1 + 2 E12 + A2)/4 channel average."""
    if min(gamma_a1, gamma_e12, gamma_a2) < 0:
        raise InvalidInputError("rates must be non-negative")
    return (gamma_a1 + 2.0 * gamma_e12 + gamma_a2) / 4.0


@dataclass(frozen=True)
class RateModel:
    """Rate constants of the five-level loop, MHz."""

    k31: float
    k42: float
    k45: float
    k51: float
    k52: float
    k35: float = 0.0
    k_ic: float = 0.0
    k_ir: float = 0.0
    p13: float = 1.0
    p24: float = 1.0

    def __post_init__(self):
        for name in ("k31", "k42", "k45", "k51", "k52", "k35", "k_ic",
                     "k_ir", "p13", "p24"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be non-negative")

    def with_rates(self, **kw):
        return replace(self, **kw)


def build_generator(model):
    """Column-conservative 6x6 generator over levels (1..5, sink).

    Internal conversion runs in parallel with the radiative decays;
    ionization routes both excited levels into the sink.
    """
    flows = [
        (0, 2, model.p13),
        (1, 3, model.p24),
        (2, 0, model.k31 + model.k_ic),
        (3, 1, model.k42 + model.k_ic),
        (2, 4, model.k35),
        (3, 4, model.k45),
        (4, 0, model.k51),
        (4, 1, model.k52),
        (2, 5, model.k_ir),
        (3, 5, model.k_ir),
    ]
    gen = np.zeros((6, 6))
    for src, dst, rate in flows:
        gen[dst, src] += rate
    gen[np.diag_indices(6)] = -gen.sum(axis=0)
    return gen


@dataclass(frozen=True, eq=False)
class KineticsResult:
    """Populations plus optional transient trajectory and PL rate."""

    populations: np.ndarray        # final/steady 6-vector incl. sink
    t_ns: np.ndarray = None
    trajectory: np.ndarray = None  # shape (len(t), 6)
    pl_mhz: np.ndarray = None      # k31 n3 + k42 n4 along the trajectory

    @property
    def pl_rate(self):
        return None if self.pl_mhz is None else float(self.pl_mhz[-1])


DEFAULT_GROUND_SPLIT = (0.5, 0.5)


def steady_state(model, initial_ground=DEFAULT_GROUND_SPLIT,
                 resolve_degenerate=True):
    """Long-time populations of the loop.

    Closed models (k_ir = 0) solve the generator null space; with pumping
    off the loop never leaves the ground doublet and the populations follow
    ``initial_ground``.  Leaky models are integrated to their long-time
    limit, where the sink holds whatever probability passed through the
    excited states.

    A pumped network that splits into disconnected pieces has a null space
    of dimension above one; by default the leftover freedom is resolved as
    the long-time limit started from ``initial_ground``, while
    ``resolve_degenerate=False`` raises DegenerateModelError instead.
    """
    if abs(sum(initial_ground) - 1.0) > 1e-9:
        raise InvalidInputError("initial ground split must sum to 1")
    if model.p13 == 0.0 and model.p24 == 0.0:
        pops = np.zeros(6)
        pops[0], pops[1] = initial_ground
        return KineticsResult(populations=pops)
    if model.k_ir > 0.0:
        rates = [
            r
            for r in (model.k31, model.k42, model.k45, model.k35, model.k51,
                      model.k52, model.k_ic, model.k_ir, model.p13, model.p24)
            if r > 0
        ]
        t_end = 200.0 / (min(rates) * _PER_NS)
        init = np.zeros(6)
        init[0], init[1] = initial_ground
        res = transient(model, init[:5], np.linspace(0.0, t_end, 201))
        return KineticsResult(populations=res.populations)
    gen = build_generator(model)[:5, :5]
    kernel = null_space(gen, rcond=1e-12)
    if kernel.shape[1] != 1:
        if not resolve_degenerate:
            raise DegenerateModelError(
                "steady state not unique: null space dimension "
                f"{kernel.shape[1]}"
            )
        vec = _project_onto_kernel(gen, kernel, initial_ground)
    else:
        vec = kernel[:, 0]
        vec = vec / vec.sum()
    if vec.min() < -1e-9:
        raise DegenerateModelError("steady state has negative populations")
    pops = np.concatenate([np.clip(vec, 0.0, None), [0.0]])
    pops /= pops.sum()
    return KineticsResult(populations=pops)


def _project_onto_kernel(gen, kernel, initial_ground):
    """Spectral projection of the initial state onto the stationary space.

    The limit of exp(G t) v0 solves (M^T N) a = M^T v0 with N and M right
    and left kernel bases; generator matrices are semisimple at zero, so
    the system is well posed whenever the model is meaningful.
    """
    left = null_space(gen.T, rcond=1e-12)
    if left.shape[1] != kernel.shape[1]:
        raise DegenerateModelError("defective stationary space")
    v0 = np.zeros(gen.shape[0])
    v0[0], v0[1] = initial_ground
    overlap = left.T @ kernel
    try:
        coeff = np.linalg.solve(overlap, left.T @ v0)
    except np.linalg.LinAlgError:
        raise DegenerateModelError("stationary projection is singular")
    return kernel @ coeff


def transient(model, initial, t_ns, rtol=1e-10, min_step_ns=1e-9):
    """Propagate populations with classic fourth-order Runge-Kutta.

    Steps between grid points are halved until the step-doubling error
    estimate is below ``rtol``; hitting ``min_step_ns`` raises
    StiffnessError.  PL(t) = k31 n3 + k42 n4 is returned alongside.
    """
    initial = np.asarray(initial, dtype=float)
    if initial.shape == (5,):
        initial = np.concatenate([initial, [0.0]])
    if initial.shape != (6,):
        raise InvalidInputError("initial populations must have 5 or 6 entries")
    if abs(initial.sum() - 1.0) > 1e-9:
        raise InvalidInputError("initial populations must sum to 1")
    t_ns = np.asarray(t_ns, dtype=float)
    if t_ns.ndim != 1 or t_ns.size < 2 or not np.all(np.diff(t_ns) > 0):
        raise InvalidInputError("time grid must be increasing with >= 2 points")
    gen = build_generator(model) * _PER_NS  # 1/ns

    def rk4_step_matrix(h):
        # one classic RK4 step of the linear system is the matrix
        # I + hG + (hG)^2/2 + (hG)^3/6 + (hG)^4/24
        hg = h * gen
        eye = np.eye(6)
        return (
            eye
            + hg
            + hg @ hg / 2.0
            + hg @ hg @ hg / 6.0
            + hg @ hg @ hg @ hg / 24.0
        )

    max_rate = max(1e-12, np.abs(np.diag(gen)).max())
    traj = np.empty((t_ns.size, 6))
    traj[0] = initial
    y = initial.copy()
    for k in range(1, t_ns.size):
        span = t_ns[k] - t_ns[k - 1]
        nsub = max(1, int(np.ceil(span * max_rate * 4.0)))
        h = span / nsub
        while True:
            if h < min_step_ns:
                raise StiffnessError(
                    "step floor reached; shorten the time span or relax rtol"
                )
            y_try = np.linalg.matrix_power(rk4_step_matrix(h), nsub) @ y
            y_half = (
                np.linalg.matrix_power(rk4_step_matrix(0.5 * h), 2 * nsub) @ y
            )
            if np.abs(y_try - y_half).max() < rtol:
                y = y_half
                break
            nsub *= 2
            h = span / nsub
        traj[k] = y
    pl = model.k31 * traj[:, 2] + model.k42 * traj[:, 3]
    return KineticsResult(
        populations=traj[-1], t_ns=t_ns, trajectory=traj, pl_mhz=pl
    )


def pl_lifetime(k_rad, k_ph, k_ir=0.0):
    """Lifetime (ns) and quantum yield of the excited-state decay.

    1/tau = k_rad + k_ph + k_ir with all rates in MHz; the yield is the
    radiative fraction.
    """
    if k_rad <= 0:
        raise InvalidInputError("radiative rate must be positive")
    if k_ph < 0 or k_ir < 0:
        raise InvalidInputError("rates must be non-negative")
    total = k_rad + k_ph + k_ir
    tau_ns = 1e3 / total
    return tau_ns, k_rad / total


def odmr_contrast(k31, k42, k45, k35=0.0, k_ic=0.0, k_ir=0.0):
    """Pulsed-readout contrast bound (k0 - k_pm1) / k_pm1.

    k0 = k31 + k_IC + k35 + k_ir and k_pm1 = k42 + k_IC + k45 + k_ir are
    the total decay rates of the ms = 0 and ms = +-1 excited sublevels;
    a negative value means the ms = +-1 branch is darker.
    """
    k0 = k31 + k_ic + k35 + k_ir
    k_pm1 = k42 + k_ic + k45 + k_ir
    if k0 <= 0 or k_pm1 <= 0:
        raise InvalidInputError("sublevel decay rates must be positive")
    return (k0 - k_pm1) / k_pm1
