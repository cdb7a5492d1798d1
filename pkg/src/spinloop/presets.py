"""Curated parameter bundles for the PL1 and PLX1 centers.

A preset document is JSON; every numeric leaf is an object
``{"value": x, "source": "..."}`` so each number carries its provenance.
Loading validates the schema and a set of internal consistency relations
before handing out typed parameter objects.
"""

import copy
import json
from dataclasses import dataclass
from importlib import resources

from .errors import PresetParseError, PresetValidationError
from .isc import SocParameters
from .kinetics import RadiativeInputs, RateModel
from .spectral import CcdModel, HuangRhysModel
from .spinparams import SocDataset, SocRow
from .vibronic import JtParameters, PjtParameters, f2_from_apes

BUILTIN_PRESETS = ("pl1", "plx1")

# tolerances of the on-load consistency relations
JT_RELATION_RTOL = 0.01
F2_RELATION_RTOL = 0.01
K45_RELATION_ATOL_MHZ = 0.01


@dataclass(frozen=True)
class GapEnergies:
    """Manifold separations in meV: triplet-singlet, singlet-ground, doublet."""

    delta: float
    sigma: float
    lambda_e: float
    delta_alternate: float = None


@dataclass(frozen=True)
class AlternateLowerBranch:
    """Second published parameter set for the lower branch (PL1 only)."""

    sigma: float
    lambda_e: float
    c2_mixing: float


@dataclass(frozen=True, eq=False)
class DefectPreset:
    """Typed view of one defect parameter document."""

    name: str
    description: str
    jt: JtParameters
    pjt: PjtParameters
    gaps: GapEnergies
    alternate: AlternateLowerBranch
    soc: SocParameters
    lambda_z0: float
    p_published: float
    q_published: float
    soc_dataset: SocDataset
    radiative: RadiativeInputs
    rate_model: RateModel
    table_rates: dict
    ccd: CcdModel
    lineshape_upper: HuangRhysModel
    lineshape_lower: HuangRhysModel
    zfs: dict
    hyperfine: dict
    experimental: dict
    doc: dict

    def alternate_pjt(self):
        """PjtParameters of the alternate lower-branch set, if present."""
        if self.alternate is None:
            return None
        f2 = f2_from_apes(
            self.pjt.hw_E, self.pjt.e_jt2, self.alternate.c2_mixing
        )
        return PjtParameters(
            lambda_e=self.alternate.lambda_e,
            hw_E=self.pjt.hw_E,
            e_jt2=self.pjt.e_jt2,
            C2=self.alternate.c2_mixing,
            F2=f2,
        )


def _get(doc, path):
    node = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise PresetParseError(path, "missing field")
        node = node[part]
    return node


def _num(doc, path):
    node = _get(doc, path)
    if not isinstance(node, dict) or "value" not in node:
        raise PresetParseError(path, "expected an object with 'value'")
    v = node["value"]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise PresetParseError(path + ".value", "expected a number")
    # provenance coverage (own or inherited) is enforced document-wide
    return float(v)


def _opt_num(doc, path, default=None):
    try:
        _get(doc, path)
    except PresetParseError:
        return default
    return _num(doc, path)


def missing_provenance(doc, prefix="", sourced=False):
    """Paths of numeric leaves not covered by a provenance string.

    A numeric value is covered when its own node or any enclosing object
    carries a nonempty "source" entry.
    """
    bad = []
    if isinstance(doc, dict):
        has_src = isinstance(doc.get("source"), str) and bool(doc["source"].strip())
        if "value" in doc:
            if not (has_src or sourced):
                bad.append(prefix or "<root>")
            return bad
        for key, val in doc.items():
            if key == "source":
                continue
            bad.extend(
                missing_provenance(
                    val, f"{prefix}.{key}" if prefix else key, sourced or has_src
                )
            )
    elif isinstance(doc, list):
        for k, val in enumerate(doc):
            bad.extend(missing_provenance(val, f"{prefix}[{k}]", sourced))
    elif isinstance(doc, (int, float)) and not isinstance(doc, bool):
        if not sourced:
            bad.append(prefix)
    return bad


def _check_sourced_table(doc, path):
    node = _get(doc, path)
    if not isinstance(node, dict) or "rows" not in node:
        raise PresetParseError(path, "expected an object with 'rows'")
    if not isinstance(node.get("source"), str) or not node["source"].strip():
        raise PresetParseError(path + ".source", "missing provenance string")
    return node["rows"]


def load_preset(name_or_path, overrides=None):
    """Load and validate a preset by built-in name or file path."""
    if name_or_path in BUILTIN_PRESETS:
        text = (
            resources.files("spinloop.data")
            .joinpath(f"{name_or_path}.json")
            .read_text()
        )
    else:
        try:
            with open(name_or_path) as fh:
                text = fh.read()
        except OSError as exc:
            raise PresetParseError("<file>", f"cannot read preset: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PresetParseError("<file>", f"invalid JSON: {exc}")
    if overrides:
        doc = apply_overrides(doc, overrides)
    return preset_from_doc(doc)


def apply_overrides(doc, overrides):
    """Apply dotted-path overrides; every path must already exist."""
    doc = copy.deepcopy(doc)
    for path, value in overrides:
        node = doc
        parts = path.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise PresetParseError(path, "override path does not exist")
            node = node[part]
        leaf = parts[-1]
        if not isinstance(node, dict) or leaf not in node:
            raise PresetParseError(path, "override path does not exist")
        if isinstance(node[leaf], dict) and "value" in node[leaf]:
            node[leaf]["value"] = value
            node[leaf]["source"] = f"override ({node[leaf].get('source', '')})"
        else:
            node[leaf] = value
    return doc


def preset_from_doc(doc):
    """Build the typed preset, enforcing the consistency relations."""
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise PresetParseError("name", "missing preset name")

    try:
        jt = JtParameters(
            e_jt=_num(doc, "jahn_teller.e_jt_mev"),
            delta_jt=_num(doc, "jahn_teller.delta_jt_mev"),
            hw_e=_num(doc, "jahn_teller.hw_e_mev"),
            F=_num(doc, "jahn_teller.f_mev"),
            G=_num(doc, "jahn_teller.g_mev"),
        )
    except ValueError as exc:
        raise PresetValidationError(f"jahn_teller: {exc}")
    de, dd = jt.relation_defects()
    if de > JT_RELATION_RTOL or dd > JT_RELATION_RTOL:
        raise PresetValidationError(
            "jahn_teller: F, G violate the APES relations "
            f"E_JT = F^2/(2(hw - 2G)) and delta = 4 E_JT G/(hw + 2G) "
            f"(defects {de:.3%}, {dd:.3%})"
        )

    c2 = _num(doc, "pseudo_jahn_teller.c2_mixing")
    f2 = _num(doc, "pseudo_jahn_teller.f2_mev")
    hw_E = _num(doc, "pseudo_jahn_teller.hw_E_mev")
    e_jt2 = _num(doc, "pseudo_jahn_teller.e_jt2_mev")
    pred = f2_from_apes(hw_E, e_jt2, c2)
    if abs(pred - f2) / pred > F2_RELATION_RTOL:
        raise PresetValidationError(
            f"pseudo_jahn_teller: F2 = {f2} deviates {abs(pred - f2) / pred:.2%} "
            f"from sqrt(2 hw_E E_JT2)/(1 + C2) = {pred:.3f}"
        )
    try:
        pjt = PjtParameters(
            lambda_e=_num(doc, "pseudo_jahn_teller.lambda_e_mev"),
            hw_E=hw_E,
            e_jt2=e_jt2,
            C2=c2,
            F2=f2,
        )
    except ValueError as exc:
        raise PresetValidationError(f"pseudo_jahn_teller: {exc}")

    gaps = GapEnergies(
        delta=_num(doc, "gaps.delta_mev"),
        sigma=_num(doc, "gaps.sigma_mev"),
        lambda_e=_num(doc, "gaps.lambda_mev"),
        delta_alternate=_opt_num(doc, "gaps.delta_alternate_mev"),
    )

    alternate = None
    if "alternate_lower_branch" in doc:
        alternate = AlternateLowerBranch(
            sigma=_num(doc, "alternate_lower_branch.sigma_mev"),
            lambda_e=_num(doc, "alternate_lower_branch.lambda_e_mev"),
            c2_mixing=_num(doc, "alternate_lower_branch.c2_mixing"),
        )

    try:
        soc = SocParameters(
            lambda_z=_num(doc, "soc.lambda_z_ghz"),
            lambda_perp=_num(doc, "soc.lambda_perp_ghz"),
            provenance="computed",
        )
    except ValueError as exc:
        raise PresetValidationError(f"soc: {exc}")
    rows = _check_sourced_table(doc, "soc.dataset")
    try:
        soc_dataset = SocDataset(
            rows=tuple(SocRow(int(a), int(b), int(c), float(l))
                       for a, b, c, l in rows)
        )
    except (TypeError, ValueError) as exc:
        raise PresetParseError("soc.dataset.rows", str(exc))

    try:
        radiative = RadiativeInputs(
            n=_num(doc, "radiative.refractive_index"),
            e_zpl_ev=_num(doc, "radiative.e_zpl_ev"),
            mu_debye=_num(doc, "radiative.mu_debye"),
        )
    except ValueError as exc:
        raise PresetValidationError(f"radiative: {exc}")

    rates = {
        key: _num(doc, f"rates_mhz.{key}")
        for key in ("k31", "k42", "gamma_a1", "gamma_e12", "gamma_a2",
                    "k45", "k51", "k52")
    }
    k45_pred = (rates["gamma_a1"] + 2 * rates["gamma_e12"] + rates["gamma_a2"]) / 4.0
    if abs(k45_pred - rates["k45"]) > K45_RELATION_ATOL_MHZ:
        raise PresetValidationError(
            f"rates_mhz: k45 = {rates['k45']} differs from the channel average "
            f"(Gamma_A1 + 2 Gamma_E12 + Gamma_A2)/4 = {k45_pred:.4f} by more "
            f"than {K45_RELATION_ATOL_MHZ} MHz"
        )
    rate_model = RateModel(
        k31=rates["k31"],
        k42=rates["k42"],
        k45=rates["k45"],
        k51=rates["k51"],
        k52=rates["k52"],
    )

    try:
        ccd = CcdModel(
            delta_q=_num(doc, "ccd.delta_q"),
            delta_e_ev=_num(doc, "ccd.delta_e_ev"),
            hw_ground=_num(doc, "ccd.hw_ground_mev"),
            hw_excited=_num(doc, "ccd.hw_excited_mev"),
        )
    except ValueError as exc:
        raise PresetValidationError(f"ccd: {exc}")

    lineshapes = {}
    for branch in ("upper", "lower"):
        node = _get(doc, f"lineshapes.{branch}")
        if not isinstance(node.get("source"), str) or not node["source"].strip():
            raise PresetParseError(
                f"lineshapes.{branch}.source", "missing provenance string"
            )
        try:
            lineshapes[branch] = HuangRhysModel(
                modes=tuple((float(s), float(w)) for s, w in node["modes"]),
                sigma=float(node["sigma_mev"]),
                de=float(node["de_mev"]),
                e_max=float(node["e_max_mev"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PresetParseError(f"lineshapes.{branch}", str(exc))

    bad = missing_provenance(doc)
    if bad:
        raise PresetParseError(bad[0], "missing provenance string")

    return DefectPreset(
        name=name,
        description=doc.get("description", ""),
        jt=jt,
        pjt=pjt,
        gaps=gaps,
        alternate=alternate,
        soc=soc,
        lambda_z0=_num(doc, "soc.lambda_z0_ghz"),
        p_published=_num(doc, "soc.p"),
        q_published=_num(doc, "soc.q"),
        soc_dataset=soc_dataset,
        radiative=radiative,
        rate_model=rate_model,
        table_rates=rates,
        ccd=ccd,
        lineshape_upper=lineshapes["upper"],
        lineshape_lower=lineshapes["lower"],
        zfs={k: _num(doc, f"zfs.{k}") for k in _get(doc, "zfs")},
        hyperfine=doc.get("hyperfine_mhz", {}),
        experimental=doc.get("experimental", {}),
        doc=doc,
    )


def serialize(preset):
    """Document form of a preset; loading it back reproduces the preset."""
    return copy.deepcopy(preset.doc)


def save_preset(preset, path):
    with open(path, "w") as fh:
        json.dump(serialize(preset), fh, indent=2, sort_keys=False)
        fh.write("\n")
