"""Deciding linear expand-contract plasticity of an ellipsoid from its profile.

The ellipsoid is LEC-plastic exactly when a threshold tau exists (see
:func:`lecplastic.profile.find_tau`).  Otherwise a set B of semi-axes is
produced that has at least two elements, no minimum of finite multiplicity
and no maximum of finite multiplicity; such a B drives the chain-shift
counterexample in :mod:`lecplastic.operator`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import InternalError, ProfileFormatError
from .profile import (
    Atom,
    FailureKind,
    FailureWitness,
    GeometricSequence,
    SemiAxisProfile,
    TauCertificate,
    _component_from_dict,
    component_to_dict,
    find_tau,
    format_rational,
    parse_rational,
    require_valid,
)

FORMAT_VERSION = 1


class Verdict(str, enum.Enum):
    PLASTIC = "plastic"
    NOT_PLASTIC = "not_plastic"


@dataclass(frozen=True)
class WitnessPart:
    """One side of B: an infinite atom, or the tail of a sequence from ``tail_start`` on."""

    component: int
    spec: Union[Atom, GeometricSequence]
    tail_start: Optional[int] = None

    @property
    def is_atom(self) -> bool:
        return isinstance(self.spec, Atom)

    @property
    def first(self) -> Fraction:
        """Value at the start of the tail (the extreme value nearest the midpoint)."""
        if self.is_atom:
            return self.spec.value
        return self.spec.term(self.tail_start)

    @property
    def bound(self) -> Fraction:
        """The infimum (lower side) or supremum (upper side) this part contributes."""
        return self.spec.value if self.is_atom else self.spec.limit


@dataclass(frozen=True)
class WitnessSet:
    kind: FailureKind
    r: Fraction
    R: Fraction
    lower_part: WitnessPart
    upper_part: WitnessPart

    @property
    def midpoint(self) -> Fraction:
        return (self.r + self.R) / 2


@dataclass(frozen=True)
class PlasticityVerdict:
    verdict: Verdict
    certificate: Union[TauCertificate, WitnessSet]

    @property
    def plastic(self) -> bool:
        return self.verdict is Verdict.PLASTIC


def _part(p: SemiAxisProfile, index: int, *, below=None, above=None) -> WitnessPart:
    c = p.components[index]
    if isinstance(c, Atom):
        return WitnessPart(index, c)
    return WitnessPart(index, c, c.first_index(below=below, above=above))


def extract_witness(p: SemiAxisProfile, f: FailureWitness) -> WitnessSet:
    """Build B for a failed threshold search, cutting sequence tails at (r+R)/2."""
    if isinstance(f, TauCertificate):
        raise InternalError("extract_witness called on a profile that has a threshold")
    mid = (f.r + f.R) / 2
    lower = _part(p, f.lower, below=mid)
    upper = _part(p, f.upper, above=mid)
    w = WitnessSet(f.kind, f.r, f.R, lower, upper)
    if not (w.r < w.R and lower.first < upper.first):
        raise InternalError(f"degenerate witness {w}")
    return w


def decide(p: SemiAxisProfile) -> PlasticityVerdict:
    require_valid(p)
    found = find_tau(p)
    if isinstance(found, TauCertificate):
        return PlasticityVerdict(Verdict.PLASTIC, found)
    return PlasticityVerdict(Verdict.NOT_PLASTIC, extract_witness(p, found))


# ---------------------------------------------------------------------------
# serialization


def _part_to_dict(part: WitnessPart) -> dict:
    return {"component": part.component, "spec": component_to_dict(part.spec),
            "tail_start": part.tail_start}


def _part_from_dict(d) -> WitnessPart:
    return WitnessPart(d["component"], _component_from_dict(d["spec"], d["component"]), d["tail_start"])


def witness_to_dict(w: WitnessSet) -> dict:
    return {
        "kind": w.kind.value,
        "r": format_rational(w.r),
        "R": format_rational(w.R),
        "lower_part": _part_to_dict(w.lower_part),
        "upper_part": _part_to_dict(w.upper_part),
    }


def witness_from_dict(d) -> WitnessSet:
    return WitnessSet(FailureKind(d["kind"]), parse_rational(d["r"]), parse_rational(d["R"]),
                      _part_from_dict(d["lower_part"]), _part_from_dict(d["upper_part"]))


def verdict_to_dict(v: PlasticityVerdict) -> dict:
    out = {"format_version": FORMAT_VERSION, "verdict": v.verdict.value}
    if v.plastic:
        c = v.certificate
        out["tau"] = format_rational(c.tau)
        out["certificate"] = {
            "has_infinite_atom": c.has_infinite_atom,
            "a_plus_components": list(c.a_plus_components),
            "a_minus_components": list(c.a_minus_components),
        }
    else:
        out["witness"] = witness_to_dict(v.certificate)
    return out


def verdict_from_dict(d) -> PlasticityVerdict:
    try:
        verdict = Verdict(d["verdict"])
        if verdict is Verdict.PLASTIC:
            c = d["certificate"]
            cert = TauCertificate(parse_rational(d["tau"]), c["has_infinite_atom"],
                                  tuple(c["a_plus_components"]), tuple(c["a_minus_components"]))
            return PlasticityVerdict(verdict, cert)
        return PlasticityVerdict(verdict, witness_from_dict(d["witness"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileFormatError(f"malformed verdict: {exc}") from None


def describe_verdict(v: PlasticityVerdict) -> str:
    if v.plastic:
        c = v.certificate
        lines = [f"PLASTIC  tau = {format_rational(c.tau)}"]
        if c.has_infinite_atom:
            lines.append("  tau is the unique infinite-multiplicity semi-axis")
        lines.append(f"  components above tau: {list(c.a_plus_components)}")
        lines.append(f"  components below tau: {list(c.a_minus_components)}")
        return "\n".join(lines)
    w = v.certificate
    lines = [
        f"NOT PLASTIC  ({w.kind.value})",
        f"  B spans r = {format_rational(w.r)} .. R = {format_rational(w.R)}",
    ]
    for label, part in (("lower", w.lower_part), ("upper", w.upper_part)):
        if part.is_atom:
            lines.append(f"  {label}: {part.spec.describe()}")
        else:
            lines.append(f"  {label}: {part.spec.describe()}, terms from k = {part.tail_start} "
                         f"(first {format_rational(part.first)})")
    return "\n".join(lines)
