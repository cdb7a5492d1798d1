"""Preset-driven workflows tying the solvers, lineshapes and rates together."""

from dataclasses import replace

import numpy as np
from scipy.optimize import minimize

from .errors import NoConvergenceError
from .isc import lower_isc, upper_isc
from .spectral import build_lineshape
from .vibronic import (
    DEFAULT_NMAX_DJT,
    DEFAULT_NMAX_LOWER,
    build_djt_hamiltonian,
    build_lower_branch_hamiltonian,
    solve,
)


def solve_djt(preset, n_max=None):
    """Ground-doublet solution of the preset's orbital-doublet problem."""
    problem = build_djt_hamiltonian(preset.jt, n_max or DEFAULT_NMAX_DJT)
    return solve(problem)


def solve_lower(preset, n_max=None, alternate=False):
    """Ground-doublet solution of the shelving-singlet problem."""
    pjt = preset.alternate_pjt() if alternate else preset.pjt
    if pjt is None:
        raise NoConvergenceError(
            f"preset {preset.name} has no alternate lower-branch parameters"
        )
    problem = build_lower_branch_hamiltonian(pjt, n_max or DEFAULT_NMAX_LOWER)
    return solve(problem)


def upper_rates(preset, delta=None, n_max=None, solution=None, lineshape=None):
    """Upper-branch channel rates at gap ``delta`` (default: preset gap)."""
    if solution is None:
        solution = solve_djt(preset, n_max)
    if lineshape is None:
        lineshape = build_lineshape(preset.lineshape_upper)
    gap = preset.gaps.delta if delta is None else delta
    return upper_isc(
        preset.soc, solution.table, lineshape, preset.jt.hw_e, gap
    )


def lower_rates(preset, sigma=None, n_max=None, alternate=False,
                solution=None, lineshape=None):
    """Lower-branch channel rates at gap ``sigma`` (default: preset gap)."""
    if solution is None:
        solution = solve_lower(preset, n_max, alternate=alternate)
    if lineshape is None:
        lineshape = build_lineshape(preset.lineshape_lower)
    if sigma is None:
        sigma = preset.alternate.sigma if alternate else preset.gaps.sigma
    pjt = preset.alternate_pjt() if alternate else preset.pjt
    return lower_isc(
        preset.soc, solution.table, pjt.C2, lineshape, pjt.hw_E, sigma
    )


# ---------------------------------------------------------------------------
# lineshape calibration
# ---------------------------------------------------------------------------
#
# The microscopic phonon sidebands behind the overlap functions are not
# shipped with the presets; instead each preset carries effective
# Huang-Rhys models whose few parameters are tuned once so the channel
# rates reproduce their target values.  The routines below redo that
# tuning, starting from the stored parameters.


def calibrate_upper(preset, targets=None, n_max=None):
    """Re-tune (S, sigma) of the upper-branch model against rate targets.

    ``targets`` is a mapping with optional entries ``gamma_a1`` as
    (delta_mev, rate_mhz) and ``ratios`` as a list of (delta_mev, ratio).
    Defaults target the stored table rate at the preset gap.
    """
    if targets is None:
        targets = {
            "gamma_a1": (preset.gaps.delta, preset.table_rates["gamma_a1"]),
            "ratios": [],
        }
    solution = solve_djt(preset, n_max)
    model = preset.lineshape_upper
    hw_mode = model.modes[0][1]

    def objective(x):
        s, sigma = x
        if not (0.0 < s < 12.0 and 2.0 * model.de < sigma < 20.0):
            return 1e6
        trial = replace(model, modes=((s, hw_mode),), sigma=sigma)
        shape = build_lineshape(trial)
        cost = 0.0
        gap, want = targets["gamma_a1"]
        got = upper_rates(preset, gap, solution=solution, lineshape=shape)
        if got.gamma_a1 <= 0:
            return 1e6
        cost += ((got.gamma_a1 - want) / (0.01 * want)) ** 2
        for gap, want_ratio in targets.get("ratios", []):
            res = upper_rates(preset, gap, solution=solution, lineshape=shape)
            if res.gamma_a1 <= 0:
                return 1e6
            cost += ((res.ratio - want_ratio) / 0.03) ** 2
        return cost

    start = [model.modes[0][0], model.sigma]
    best = minimize(objective, start, method="Nelder-Mead",
                    options={"maxiter": 400, "fatol": 1e-8})
    if not np.isfinite(best.fun) or best.fun >= 1e6:
        raise NoConvergenceError("upper lineshape calibration failed")
    s, sigma = best.x
    return replace(model, modes=((float(s), hw_mode),), sigma=float(sigma))


def calibrate_lower(preset, targets, n_max=None):
    """Re-tune the lower-branch bath model against (sigma, Gamma_z, ratio)
    targets given as a list of (sigma_mev, gamma_z_mhz, ratio, alternate)."""
    model = preset.lineshape_lower
    solutions = {
        False: solve_lower(preset, n_max),
    }
    if any(t[3] for t in targets):
        solutions[True] = solve_lower(preset, n_max, alternate=True)

    mode_count = len(model.modes)

    def unpack(x):
        modes = tuple(
            (float(x[2 * k]), float(x[2 * k + 1])) for k in range(mode_count)
        )
        return modes, float(x[-1])

    def objective(x):
        modes, sigma = unpack(x)
        if sigma <= 2.0 * model.de or sigma > 40.0:
            return 1e6
        if any(s <= 0 or s > 4.0 or w <= 10.0 or w > 400.0 for s, w in modes):
            return 1e6
        trial = replace(model, modes=modes, sigma=sigma)
        shape = build_lineshape(trial)
        cost = 0.0
        for gap, want_gz, want_ratio, alternate in targets:
            res = lower_rates(
                preset, gap, alternate=alternate,
                solution=solutions[alternate], lineshape=shape,
            )
            if res.gamma_z <= 0 or res.gamma_perp <= 0:
                return 1e6
            cost += np.log(res.gamma_z / want_gz) ** 2
            cost += ((res.ratio - want_ratio) / 0.3) ** 2
        return cost

    start = [v for mode in model.modes for v in mode] + [model.sigma]
    best = minimize(objective, start, method="Nelder-Mead",
                    options={"maxiter": 800, "fatol": 1e-8})
    if not np.isfinite(best.fun) or best.fun >= 1e6:
        raise NoConvergenceError("lower lineshape calibration failed")
    modes, sigma = unpack(best.x)
    return replace(model, modes=modes, sigma=sigma)
