"""Command-line front end: presets in, figure-ready CSV/JSON out."""

import argparse
import io
import json
import sys

import numpy as np

from . import __version__
from .errors import (
    InvalidInputError,
    PresetParseError,
    PresetValidationError,
    SpinloopError,
)
from .isc import (
    sweep_lower,
    sweep_upper,
    write_lower_sweep_csv,
    write_upper_sweep_csv,
)
from .kinetics import (
    odmr_contrast,
    pl_lifetime,
    radiative_rate,
    steady_state,
    transient,
)
from .pipeline import (
    calibrate_lower,
    calibrate_upper,
    lower_rates,
    solve_djt,
    solve_lower,
    upper_rates,
)
from .presets import load_preset, serialize
from .spectral import build_lineshape, ccd_crossing
from .spinparams import (
    A0_DEFAULT,
    C0_DEFAULT,
    SocDataset,
    ZfsTensor,
    decontaminate,
    extract_de,
    soc_fit,
)
from .symmetry import divacancy_basis, nv_basis, project_salcs


def _fmt(x, sig=6):
    return f"{float(x):.{sig}g}"


def _parse_range(spec):
    """A:B:step, inclusive of A and of B (up to step/2 rounding); or one value."""
    parts = spec.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise InvalidInputError(f"bad range {spec!r}, expected A:B:step")
    a, b, step = (float(p) for p in parts)
    if step <= 0 or b < a:
        raise InvalidInputError(f"bad range {spec!r}")
    return np.arange(a, b + step / 2.0, step)


def _parse_set(values):
    out = []
    for item in values or []:
        if "=" not in item:
            raise InvalidInputError(f"--set needs path=value, got {item!r}")
        path, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        out.append((path, val))
    return out


def _header_lines(args):
    lines = [f"# spinloop {__version__}"]
    if getattr(args, "preset", None):
        lines.append(f"# preset={args.preset}")
    for path, val in _parse_set(getattr(args, "set", None)):
        lines.append(f"# override {path}={val}")
    return lines


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(args, body_writer):
    buf = io.StringIO()
    for line in _header_lines(args):
        buf.write(line + "\n")
    body_writer(buf)
    _emit(args, buf.getvalue())


def _emit_json(args, payload):
    meta = {"tool": f"spinloop {__version__}"}
    if getattr(args, "preset", None):
        meta["preset"] = args.preset
    overrides = [f"{p}={v}" for p, v in _parse_set(getattr(args, "set", None))]
    if overrides:
        meta["overrides"] = overrides
    payload = {"meta": meta, **payload}
    _emit(args, json.dumps(payload, indent=2) + "\n")


def _say(args, message):
    if not args.quiet:
        print(message)


def _preset(args):
    return load_preset(args.preset, overrides=_parse_set(args.set))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_salcs(args):
    basis = {"divacancy": divacancy_basis, "nv": nv_basis}[args.basis]()
    salcs = project_salcs(basis)
    payload = {
        "basis": list(basis.labels),
        "salcs": [
            {
                "irrep": s.irrep,
                "row": s.row,
                "coefficients": [round(float(c), 12) for c in s.coefficients],
            }
            for s in salcs.orbitals
        ],
    }
    _emit_json(args, payload)
    _say(args, f"{len(salcs.orbitals)} symmetry-adapted orbitals "
               f"({args.basis} basis)")
    return 0


def cmd_djt(args):
    preset = _preset(args)
    sol = solve_djt(preset, args.n_max)
    if args.format == "json":
        t = sol.table
        _emit_json(args, {
            "ground_energy_mev": sol.ground_energy,
            "doublet_gap_mev": sol.doublet_gap,
            "p": sol.ham.p,
            "q": sol.ham.q,
            "rows": [
                {"i": int(i), "c2": c, "d2": d, "f2": f}
                for i, c, d, f in zip(t.i, t.c2, t.d2, t.f2)
            ],
            "sums": t.sums,
        })
    else:
        _emit_csv(args, lambda buf: sol.table.write_csv(buf))
    _say(args, f"p = {_fmt(sol.ham.p, 3)}, q = {_fmt(sol.ham.q, 3)} "
               f"(E0 = {_fmt(sol.ground_energy)} meV, "
               f"doublet gap {sol.doublet_gap:.2e} meV)")
    return 0


def cmd_pjt(args):
    preset = _preset(args)
    sol = solve_lower(preset, args.n_max, alternate=args.alternate)
    sums = sol.table.sums
    if args.format == "json":
        t = sol.table
        _emit_json(args, {
            "ground_energy_mev": sol.ground_energy,
            "doublet_gap_mev": sol.doublet_gap,
            "rows": [
                {"i": int(i), "c2": c, "d2": d, "f2": f, "g2": g}
                for i, c, d, f, g in zip(t.i, t.c2, t.d2, t.f2, t.g2)
            ],
            "sums": sums,
        })
    else:
        _emit_csv(args, lambda buf: sol.table.write_csv(buf))
    _say(args, "channel sums: " + ", ".join(
        f"{k} = {_fmt(v, 3)}" for k, v in sums.items()))
    return 0


def cmd_lineshape(args):
    preset = _preset(args)
    model = (preset.lineshape_upper if args.branch == "upper"
             else preset.lineshape_lower)
    shape = build_lineshape(model)
    _emit_csv(args, lambda buf: shape.write_csv(buf))
    _say(args, f"{args.branch} lineshape: total S = {_fmt(model.total_s, 4)}, "
               f"normalization residual {shape.normalization_residual:.2e}")
    return 0


def cmd_isc_upper(args):
    preset = _preset(args)
    deltas = _parse_range(args.delta) if args.delta else np.array(
        [preset.gaps.delta]
    )
    sol = solve_djt(preset, args.n_max)
    shape = build_lineshape(preset.lineshape_upper)
    results = sweep_upper(
        preset.soc, sol.table, shape, preset.jt.hw_e, deltas
    )
    _emit_csv(args, lambda buf: write_upper_sweep_csv(results, buf))
    nominal = min(
        results, key=lambda r: abs(r.delta - preset.gaps.delta)
    )
    _say(args, f"Gamma_A1({_fmt(nominal.delta)} meV) = "
               f"{_fmt(nominal.gamma_a1, 4)} MHz, "
               f"Gamma_E12/Gamma_A1 = {_fmt(nominal.ratio, 3)}")
    return 0


def cmd_isc_lower(args):
    preset = _preset(args)
    if args.sigma:
        sigmas = _parse_range(args.sigma)
    elif args.alternate:
        sigmas = np.array([preset.alternate.sigma])
    else:
        sigmas = np.array([preset.gaps.sigma])
    sol = solve_lower(preset, args.n_max, alternate=args.alternate)
    shape = build_lineshape(preset.lineshape_lower)
    pjt = preset.alternate_pjt() if args.alternate else preset.pjt
    results = sweep_lower(
        preset.soc, sol.table, pjt.C2, shape, pjt.hw_E, sigmas
    )
    _emit_csv(args, lambda buf: write_lower_sweep_csv(results, buf))
    mid = results[len(results) // 2]
    _say(args, f"Gamma_z({_fmt(mid.sigma)} meV) = {_fmt(mid.gamma_z, 3)} MHz, "
               f"Gamma_z/Gamma_perp = {_fmt(mid.ratio, 3)}")
    return 0


def cmd_soc_fit(args):
    if args.data:
        dataset = SocDataset.from_csv(args.data)
        name = args.data
    elif args.preset:
        preset = _preset(args)
        dataset = preset.soc_dataset
        name = preset.name
    else:
        raise InvalidInputError("soc-fit needs --preset or --data")
    if args.exclude == "auto":
        exclude = "auto"
    elif args.exclude in ("none", ""):
        exclude = None
    else:
        exclude = [int(i) for i in args.exclude.split(",")]
    fit = soc_fit(dataset, a0=args.a0, c0=args.c0, exclude=exclude)
    _emit_json(args, {
        "dataset": name,
        "lambda_z0_ghz": fit.lambda_z0,
        "A": fit.A,
        "B": fit.B,
        "C": fit.C,
        "residual_norm": fit.residual_norm,
        "residuals": [None if np.isnan(r) else r for r in fit.residuals],
        "excluded_rows": list(fit.excluded),
    })
    _say(args, f"lambda_z0 = {_fmt(fit.lambda_z0, 5)} GHz "
               f"(residual norm {_fmt(fit.residual_norm, 3)}, "
               f"excluded rows {list(fit.excluded)})")
    return 0


def _read_tensor(path, unit):
    if path.endswith(".json"):
        with open(path) as fh:
            doc = json.load(fh)
        return ZfsTensor(matrix=np.array(doc["matrix"], dtype=float),
                         unit=doc.get("unit", unit))
    return ZfsTensor(matrix=np.loadtxt(path), unit=unit)


def cmd_zfs(args):
    dt = _read_tensor(args.dt, args.unit)
    ds = _read_tensor(args.ds, args.unit)
    corrected = decontaminate(dt, ds)
    params = extract_de(corrected)
    _emit_json(args, {
        "unit": params.unit,
        "corrected_tensor": [[round(float(x), 12) for x in row]
                             for row in corrected.matrix],
        "trace": corrected.trace,
        "D": params.d,
        "E": params.e,
        "axes": [[round(float(x), 12) for x in row] for row in params.axes],
    })
    _say(args, f"D = {_fmt(params.d, 5)} {params.unit}, "
               f"E = {_fmt(params.e, 5)} {params.unit}")
    return 0


def cmd_rad_rate(args):
    preset = _preset(args)
    k_rad = radiative_rate(preset.radiative)
    tau, _ = pl_lifetime(k_rad, 0.0)
    _emit_json(args, {
        "k_rad_mhz": k_rad,
        "radiative_lifetime_ns": tau,
    })
    _say(args, f"k_rad = {_fmt(k_rad, 4)} MHz "
               f"(radiative lifetime {_fmt(tau, 4)} ns)")
    return 0


def cmd_kinetics(args):
    preset = _preset(args)
    model = preset.rate_model.with_rates(p13=args.pump, p24=args.pump)
    if args.transient:
        t = np.linspace(0.0, args.t_max, args.points)
        init = np.array([0.5, 0.5, 0.0, 0.0, 0.0])
        res = transient(model, init, t)

        def body(buf):
            buf.write("t_ns,n1,n2,n3,n4,n5,sink,PL_MHz\n")
            for k in range(t.size):
                row = [f"{t[k]:.6g}"]
                row += [f"{x:.6g}" for x in res.trajectory[k]]
                row.append(f"{res.pl_mhz[k]:.6g}")
                buf.write(",".join(row) + "\n")

        _emit_csv(args, body)
        _say(args, f"propagated to t = {_fmt(args.t_max)} ns, "
                   f"PL = {_fmt(res.pl_mhz[-1], 4)} MHz")
    else:
        res = steady_state(model)
        pops = res.populations
        k_rad = preset.rate_model.k31
        tau, eta = pl_lifetime(
            k_rad, preset.rate_model.k45 + preset.rate_model.k35,
            preset.rate_model.k_ir,
        )
        _emit_json(args, {
            "populations": {
                "n1": pops[0], "n2": pops[1], "n3": pops[2],
                "n4": pops[3], "n5": pops[4], "sink": pops[5],
            },
            "pl_mhz": model.k31 * pops[2] + model.k42 * pops[3],
            "tau_pl_ns": tau,
            "eta_qy": eta,
        })
        _say(args, "steady state: " + ", ".join(
            f"n{k + 1} = {_fmt(pops[k], 4)}" for k in range(5)))
    return 0


def cmd_contrast(args):
    preset = _preset(args)
    m = preset.rate_model
    value = odmr_contrast(m.k31, m.k42, m.k45, m.k35, m.k_ic, m.k_ir)
    tau, eta = pl_lifetime(m.k31, m.k45 + m.k35, m.k_ir)
    _emit_json(args, {
        "contrast": value,
        "contrast_percent": 100.0 * value,
        "tau_pl_ns": tau,
        "eta_qy": eta,
    })
    _say(args, f"ODMR contrast = {100.0 * value:.2f}% "
               f"(eta_QY = {100.0 * eta:.2f}%, tau_PL = {_fmt(tau, 4)} ns)")
    return 0


def cmd_ccd(args):
    preset = _preset(args)
    report = ccd_crossing(preset.ccd, args.q_range)
    _emit_json(args, {
        "crossings": list(report.crossings),
        "none": report.none,
        "q_range": report.q_range,
        "huang_rhys": report.huang_rhys,
        "k_ground_mev_per_amu_A2": report.k_ground,
        "k_excited_mev_per_amu_A2": report.k_excited,
    })
    state = "no crossing" if report.none else f"crossings at {report.crossings}"
    _say(args, f"{state} within |Q| <= {_fmt(args.q_range)} "
               f"(effective S = {_fmt(report.huang_rhys, 4)})")
    return 0


def cmd_calibrate(args):
    preset = _preset(args)
    payload = {}
    if args.branch in ("upper", "both"):
        targets = {
            "gamma_a1": (preset.gaps.delta, preset.table_rates["gamma_a1"]),
            "ratios": [],
        }
        model = calibrate_upper(preset, targets, args.n_max)
        payload["upper"] = {
            "modes": [list(m) for m in model.modes],
            "sigma_mev": model.sigma,
        }
    if args.branch in ("lower", "both"):
        targets = [(
            preset.gaps.sigma, preset.table_rates["k51"],
            preset.table_rates["k51"] / max(preset.table_rates["k52"], 1e-9),
            False,
        )]
        model = calibrate_lower(preset, targets, args.n_max)
        payload["lower"] = {
            "modes": [list(m) for m in model.modes],
            "sigma_mev": model.sigma,
        }
    _emit_json(args, payload)
    _say(args, "calibrated lineshape parameters written")
    return 0


def cmd_preset_dump(args):
    preset = _preset(args)
    _emit(args, json.dumps(serialize(preset), indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinloop",
        description="Vibronic structure, crossing rates and spin-polarization "
                    "kinetics of C3v spin-1 color centers.",
    )
    parser.add_argument("--version", action="version",
                        version=f"spinloop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, preset=True):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        if preset:
            p.add_argument("--preset", required=True,
                           help="built-in name (pl1, plx1) or JSON path")
            p.add_argument("--set", action="append", metavar="PATH=VALUE",
                           help="override a preset field (repeatable)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the summary line")
        return p

    p = add("salcs", cmd_salcs, "dump symmetry-adapted orbitals", preset=False)
    p.add_argument("--basis", choices=("divacancy", "nv"), default="divacancy")

    p = add("djt", cmd_djt, "solve the orbital-doublet vibronic problem")
    p.add_argument("--n-max", type=int, default=None)

    p = add("pjt", cmd_pjt, "solve the lower-branch singlet problem")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--alternate", action="store_true",
                   help="use the alternate lower-branch parameter set")

    p = add("lineshape", cmd_lineshape, "write a phonon-overlap lineshape")
    p.add_argument("--branch", choices=("upper", "lower"), default="upper")

    p = add("isc-upper", cmd_isc_upper, "upper-branch crossing rates")
    p.add_argument("--delta", help="gap in meV, single value or A:B:step")
    p.add_argument("--n-max", type=int, default=None)

    p = add("isc-lower", cmd_isc_lower, "lower-branch crossing rates")
    p.add_argument("--sigma", help="gap in meV, single value or A:B:step")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--alternate", action="store_true")

    p = add("soc-fit", cmd_soc_fit, "finite-size extrapolation of lambda_z",
            preset=False)
    p.add_argument("--preset", help="built-in name (pl1, plx1) or JSON path")
    p.add_argument("--set", action="append", metavar="PATH=VALUE",
                   help="override a preset field (repeatable)")
    p.add_argument("--data", help="CSV with a_mult,b_mult,c_mult,lambda_z_GHz")
    p.add_argument("--exclude", default="auto",
                   help="'auto', 'none', or comma-separated row indices")
    p.add_argument("--a0", type=float, default=A0_DEFAULT)
    p.add_argument("--c0", type=float, default=C0_DEFAULT)

    p = add("zfs", cmd_zfs, "decontaminate a spin-spin tensor and extract D, E",
            preset=False)
    p.add_argument("--dt", required=True, help="total-tensor file (json/txt)")
    p.add_argument("--ds", required=True, help="singlet-tensor file (json/txt)")
    p.add_argument("--unit", choices=("GHz", "MHz"), default="GHz")

    add("rad-rate", cmd_rad_rate, "radiative rate from preset inputs")

    p = add("kinetics", cmd_kinetics, "five-level loop populations")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--steady", action="store_true", default=True)
    group.add_argument("--transient", action="store_true")
    p.add_argument("--t-max", type=float, default=2000.0, help="ns")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--pump", type=float, default=1.0,
                   help="spin-conserving pump rate, MHz")

    add("contrast", cmd_contrast, "ODMR contrast bound from preset rates")

    p = add("ccd", cmd_ccd, "configuration-coordinate crossing check")
    p.add_argument("--q-range", type=float, default=3.0)

    p = add("calibrate", cmd_calibrate,
            "re-derive effective lineshape parameters from rate targets")
    p.add_argument("--branch", choices=("upper", "lower", "both"),
                   default="both")
    p.add_argument("--n-max", type=int, default=None)

    add("preset-dump", cmd_preset_dump, "print the validated preset document")

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (PresetParseError, PresetValidationError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpinloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
