"""Semi-axis profiles: finite symbolic descriptions of an ellipsoid's axes.

A profile is an ordered list of components.  An :class:`Atom` is a single
value repeated ``multiplicity`` times (possibly infinitely often); a
:class:`GeometricSequence` is the strictly monotone run

    limit + gap * ratio**(k-1)    (decreasing)
    limit - gap * ratio**(k-1)    (increasing),   k = 1, 2, ...

whose limit is *not* itself a value.  Everything here is exact
(:class:`fractions.Fraction`); no floating point is involved.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .errors import IndexBeyondSupport, ProfileFormatError, ProfileValidationError

INFINITE = math.inf

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text) -> Fraction:
    """Parse the strict rational-string grammar: ``[sign]digits[/digits]``."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ProfileFormatError(f"not a rational string: {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ProfileFormatError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class Direction(str, enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"


@dataclass(frozen=True)
class Atom:
    value: Fraction
    multiplicity: Union[int, float] = 1

    @property
    def is_infinite(self) -> bool:
        return self.multiplicity == INFINITE

    def value_at(self, occurrence: int) -> Fraction:
        return self.value

    def describe(self) -> str:
        mult = "inf" if self.is_infinite else str(self.multiplicity)
        return f"atom {format_rational(self.value)}:{mult}"


@dataclass(frozen=True)
class GeometricSequence:
    limit: Fraction
    direction: Direction
    gap: Fraction
    ratio: Fraction

    multiplicity = INFINITE  # number of emitted values, each with multiplicity 1
    is_infinite = False  # no single value repeats

    @property
    def decreasing(self) -> bool:
        return self.direction is Direction.DECREASING

    def term(self, k: int) -> Fraction:
        """The k-th value, k >= 1."""
        if k < 1:
            raise ValueError("sequence terms are numbered from 1")
        offset = self.gap * self.ratio ** (k - 1)
        return self.limit + offset if self.decreasing else self.limit - offset

    def value_at(self, occurrence: int) -> Fraction:
        return self.term(occurrence + 1)

    def index_of(self, value: Fraction) -> Optional[int]:
        """Return k with ``term(k) == value``, or None.

        Solves ``(value - limit) / gap == ratio**(k-1)`` by repeated exact
        division; the quotient grows geometrically so the loop is short.
        """
        q = (value - self.limit) if self.decreasing else (self.limit - value)
        q /= self.gap
        if q <= 0 or q > 1:
            return None
        k = 1
        while q < 1:
            q /= self.ratio
            k += 1
        return k if q == 1 else None

    def first_index(self, below: Optional[Fraction] = None, above: Optional[Fraction] = None,
                    strict: bool = True) -> int:
        """Smallest k whose term lies on the requested side of a threshold.

        Exactly one of ``below``/``above`` is given; the limit must lie on
        that side so that a whole tail qualifies.
        """
        if (below is None) == (above is None):
            raise ValueError("give exactly one of below/above")
        if below is not None:
            ok = (lambda v: v < below) if strict else (lambda v: v <= below)
            reachable = self.limit < below if strict else self.limit <= below
        else:
            ok = (lambda v: v > above) if strict else (lambda v: v >= above)
            reachable = self.limit > above if strict else self.limit >= above
        if not reachable:
            raise ValueError("threshold is on the wrong side of the limit")
        k = 1
        while not ok(self.term(k)):
            k += 1
        return k

    def describe(self) -> str:
        return (f"{self.direction.value} sequence -> {format_rational(self.limit)} "
                f"(gap {format_rational(self.gap)}, ratio {format_rational(self.ratio)})")


Component = Union[Atom, GeometricSequence]


@dataclass(frozen=True)
class SemiAxisProfile:
    name: str
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def is_finite(self) -> bool:
        return all(isinstance(c, Atom) and not c.is_infinite for c in self.components)

    def total_multiplicity(self):
        return sum(c.multiplicity for c in self.components)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    code: Optional[str] = None
    message: str = ""
    components: tuple = ()

    def raise_if_invalid(self):
        if not self.ok:
            raise ProfileValidationError(self.code, self.message, self.components)


def _component_problem(i, c):
    if isinstance(c, Atom):
        if c.value <= 0:
            return "NONPOSITIVE_VALUE", f"component {i}: atom value {format_rational(c.value)} <= 0"
        if not (c.is_infinite or (isinstance(c.multiplicity, int) and c.multiplicity >= 1)):
            return "NONPOSITIVE_VALUE", f"component {i}: multiplicity must be a positive integer or inf"
        return None
    if c.limit <= 0:
        return "NONPOSITIVE_VALUE", f"component {i}: limit {format_rational(c.limit)} <= 0"
    if c.gap <= 0:
        return "NONPOSITIVE_VALUE", f"component {i}: gap {format_rational(c.gap)} <= 0"
    if not 0 < c.ratio < 1:
        return "BAD_RATIO", f"component {i}: ratio {format_rational(c.ratio)} not in (0, 1)"
    if not c.decreasing and c.limit - c.gap <= 0:
        return "NEGATIVE_START", f"component {i}: increasing sequence starts at {format_rational(c.limit - c.gap)}"
    return None


def _valuations(q: Fraction) -> dict:
    from sympy import factorint

    v = dict(factorint(q.numerator))
    for p, e in factorint(q.denominator).items():
        v[p] = v.get(p, 0) - e
    return v


def _same_limit_meeting(a: GeometricSequence, b: GeometricSequence) -> Optional[Fraction]:
    """Common value of two same-limit, same-direction sequences, if any.

    Needs integers i, j >= 0 with ``a.gap * a.ratio**i == b.gap * b.ratio**j``.
    Taking p-adic valuations turns this into the linear system
    ``j*v(rb) - i*v(ra) = v(ga/gb)`` over the primes involved.
    """
    va, vb, vc = _valuations(a.ratio), _valuations(b.ratio), _valuations(a.gap / b.gap)
    primes = sorted(set(va) | set(vb) | set(vc))
    A = [va.get(p, 0) for p in primes]
    B = [vb.get(p, 0) for p in primes]
    C = [vc.get(p, 0) for p in primes]

    def solution(i, j):
        if i >= 0 and j >= 0 and a.gap * a.ratio ** i == b.gap * b.ratio ** j:
            return a.term(i + 1)
        return None

    pivot = None
    for s in range(len(primes)):
        for t in range(s + 1, len(primes)):
            if A[s] * B[t] - A[t] * B[s] != 0:
                pivot = (s, t)
                break
        if pivot:
            break
    if pivot is not None:
        s, t = pivot
        # -A_s i + B_s j = C_s ; -A_t i + B_t j = C_t
        det = Fraction(-A[s] * B[t] + A[t] * B[s])
        i = (C[s] * B[t] - C[t] * B[s]) / det
        j = (-A[s] * C[t] + A[t] * C[s]) / det
        if i.denominator != 1 or j.denominator != 1:
            return None
        return solution(int(i), int(j))

    # valuation vectors are parallel: ra = rb**slope
    p = next(k for k, x in enumerate(B) if x != 0)
    slope = Fraction(A[p], B[p])
    mu = Fraction(C[p], B[p])
    if any(C[k] != mu * B[k] for k in range(len(primes))):
        return None
    # j = mu + slope * i
    for i0 in range(slope.denominator):
        j0 = mu + slope * i0
        if j0.denominator == 1:
            break
    else:
        return None
    if j0 < 0:
        steps = math.ceil(-j0 / slope.numerator)
        i0 += steps * slope.denominator
        j0 += steps * slope.numerator
    return solution(i0, int(j0))


def _sequences_meet(a: GeometricSequence, b: GeometricSequence) -> Optional[Fraction]:
    if a.limit == b.limit:
        if a.direction is not b.direction:
            return None
        return _same_limit_meeting(a, b)
    # Each sequence has only finitely many terms outside the half-distance
    # neighbourhood of its own limit; a common value must be one of them.
    half = abs(a.limit - b.limit) / 2
    for s, other in ((a, b), (b, a)):
        k = 1
        while s.gap * s.ratio ** (k - 1) >= half:
            v = s.term(k)
            if other.index_of(v) is not None:
                return v
            k += 1
    return None


def validate_profile(p: SemiAxisProfile) -> ValidationResult:
    """Check every profile invariant; report the first violation found."""
    if not p.components:
        return ValidationResult(False, "NONPOSITIVE_VALUE", "profile has no components")
    for i, c in enumerate(p.components):
        problem = _component_problem(i, c)
        if problem:
            return ValidationResult(False, problem[0], problem[1], (i,))
    comps = p.components
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            a, b = comps[i], comps[j]
            hit = None
            if isinstance(a, Atom) and isinstance(b, Atom):
                hit = a.value if a.value == b.value else None
            elif isinstance(a, Atom):
                hit = a.value if b.index_of(a.value) is not None else None
            elif isinstance(b, Atom):
                hit = b.value if a.index_of(b.value) is not None else None
            else:
                hit = _sequences_meet(a, b)
            if hit is not None:
                return ValidationResult(
                    False, "COLLISION",
                    f"value {format_rational(hit)} produced by components {i} and {j}",
                    (i, j),
                )
    return ValidationResult(True)


def require_valid(p: SemiAxisProfile) -> SemiAxisProfile:
    validate_profile(p).raise_if_invalid()
    return p


# ---------------------------------------------------------------------------
# enumeration a: N -> Q+


def _emitted_before_round(p: SemiAxisProfile, rnd: int):
    return sum(min(c.multiplicity, rnd) for c in p.components)


def position_of(p: SemiAxisProfile, component: int, occurrence: int) -> int:
    """Basis index at which ``component`` emits its ``occurrence``-th value (0-based).

    Round-robin: round j visits, in listing order, every component that still
    has values left, so the index is the number of values emitted in rounds
    before j plus the number of active components listed before this one.
    """
    c = p.components[component]
    if occurrence < 0 or occurrence >= c.multiplicity:
        raise IndexBeyondSupport(f"component {component} has no occurrence {occurrence}")
    before = sum(1 for d in p.components[:component] if d.multiplicity > occurrence)
    return int(_emitted_before_round(p, occurrence)) + before


def locate(p: SemiAxisProfile, n: int):
    """Inverse of :func:`position_of`: return ``(component, occurrence)`` for index n."""
    if n < 0:
        raise IndexBeyondSupport("negative index")
    if p.is_finite and n >= p.total_multiplicity():
        raise IndexBeyondSupport(f"index {n} beyond finite support of size {p.total_multiplicity()}")
    # largest round j with emitted_before_round(j) <= n; every round emits >= 1
    lo, hi = 0, n + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _emitted_before_round(p, mid) <= n:
            lo = mid
        else:
            hi = mid
    offset = n - int(_emitted_before_round(p, lo))
    for i, c in enumerate(p.components):
        if c.multiplicity > lo:
            if offset == 0:
                return i, lo
            offset -= 1
    raise AssertionError("round-robin bookkeeping is inconsistent")


def enumerate_axis(p: SemiAxisProfile, n: int) -> Fraction:
    """The semi-axis a(n) of basis vector e_n under the round-robin order."""
    i, occ = locate(p, n)
    return p.components[i].value_at(occ)


def iter_axes(p: SemiAxisProfile) -> Iterator[tuple]:
    """Yield ``(value, component, occurrence)`` in basis order."""
    rnd = 0
    while True:
        active = False
        for i, c in enumerate(p.components):
            if c.multiplicity > rnd:
                active = True
                yield c.value_at(rnd), i, rnd
        if not active:
            return
        rnd += 1


def axes_prefix(p: SemiAxisProfile, n: int) -> list:
    out = []
    for value, _, _ in iter_axes(p):
        if len(out) >= n:
            break
        out.append(value)
    return out


# ---------------------------------------------------------------------------
# threshold


class FailureKind(str, enum.Enum):
    TWO_INFINITE_ATOMS = "two_infinite_atoms"
    INC_LIMIT_ABOVE_DEC_LIMIT = "inc_limit_above_dec_limit"
    INFINITE_ATOM_BELOW_INC_LIMIT = "infinite_atom_below_inc_limit"
    INFINITE_ATOM_ABOVE_DEC_LIMIT = "infinite_atom_above_dec_limit"


_KIND_ORDER = list(FailureKind)


@dataclass(frozen=True)
class TauCertificate:
    tau: Fraction
    has_infinite_atom: bool
    a_plus_components: tuple  # indices of components whose values exceed tau
    a_minus_components: tuple  # indices of components whose values are below tau


@dataclass(frozen=True)
class FailureWitness:
    """Two components whose order structure rules out a threshold.

    ``lower`` supplies B's bottom (an infinite atom, or a decreasing sequence
    with no minimum); ``upper`` supplies its top.  ``r < R`` are their
    infimum and supremum.
    """

    kind: FailureKind
    lower: int
    upper: int
    r: Fraction
    R: Fraction


def _order_summary(p: SemiAxisProfile):
    infinite = [i for i, c in enumerate(p.components) if isinstance(c, Atom) and c.is_infinite]
    inc = [i for i, c in enumerate(p.components)
           if isinstance(c, GeometricSequence) and not c.decreasing]
    dec = [i for i, c in enumerate(p.components)
           if isinstance(c, GeometricSequence) and c.decreasing]
    comps = p.components
    # first listed component attains the extreme limit
    top_inc = max(inc, key=lambda i: (comps[i].limit, -i)) if inc else None
    low_dec = min(dec, key=lambda i: (comps[i].limit, i)) if dec else None
    return infinite, top_inc, low_dec


def find_tau(p: SemiAxisProfile):
    """Return a :class:`TauCertificate`, or a :class:`FailureWitness` if none exists."""
    comps = p.components
    infinite, top_inc, low_dec = _order_summary(p)
    L_inc = comps[top_inc].limit if top_inc is not None else None
    L_dec = comps[low_dec].limit if low_dec is not None else None

    if len(infinite) >= 2:
        lo = min(infinite, key=lambda i: (comps[i].value, i))
        hi = max(infinite, key=lambda i: (comps[i].value, -i))
        return FailureWitness(FailureKind.TWO_INFINITE_ATOMS, lo, hi, comps[lo].value, comps[hi].value)

    clashes = []
    if L_inc is not None and L_dec is not None and L_dec < L_inc:
        clashes.append(FailureWitness(FailureKind.INC_LIMIT_ABOVE_DEC_LIMIT, low_dec, top_inc, L_dec, L_inc))
    if infinite:
        v = comps[infinite[0]].value
        if L_inc is not None and v < L_inc:
            clashes.append(FailureWitness(FailureKind.INFINITE_ATOM_BELOW_INC_LIMIT,
                                          infinite[0], top_inc, v, L_inc))
        if L_dec is not None and L_dec < v:
            clashes.append(FailureWitness(FailureKind.INFINITE_ATOM_ABOVE_DEC_LIMIT,
                                          low_dec, infinite[0], L_dec, v))
    if clashes:
        return min(clashes, key=lambda f: (-(f.R - f.r), _KIND_ORDER.index(f.kind)))

    if infinite:
        tau = comps[infinite[0]].value
    elif L_inc is not None:
        tau = L_inc
    elif L_dec is not None:
        tau = L_dec
    else:
        tau = min(c.value for c in comps)

    plus, minus = [], []
    for i, c in enumerate(comps):
        if isinstance(c, Atom):
            if c.value > tau:
                plus.append(i)
            elif c.value < tau:
                minus.append(i)
        elif c.decreasing:
            plus.append(i)
        else:
            minus.append(i)
    return TauCertificate(tau, bool(infinite), tuple(plus), tuple(minus))


# ---------------------------------------------------------------------------
# JSON profile files

_ATOM_KEYS = {"kind", "value", "multiplicity"}
_SEQ_KEYS = {"kind", "limit", "direction", "gap", "ratio"}


def _component_from_dict(d, i) -> Component:
    if not isinstance(d, dict):
        raise ProfileFormatError(f"component {i} is not an object")
    kind = d.get("kind")
    if kind == "atom":
        keys = _ATOM_KEYS
    elif kind == "sequence":
        keys = _SEQ_KEYS
    else:
        raise ProfileFormatError(f"component {i}: unknown kind {kind!r}")
    if set(d) != keys:
        extra, missing = set(d) - keys, keys - set(d)
        raise ProfileFormatError(
            f"component {i}: unknown fields {sorted(extra)}, missing fields {sorted(missing)}")
    if kind == "atom":
        m = d["multiplicity"]
        if m == "inf":
            m = INFINITE
        elif isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ProfileFormatError(f"component {i}: multiplicity must be a positive integer or \"inf\"")
        return Atom(parse_rational(d["value"]), m)
    try:
        direction = Direction(d["direction"])
    except ValueError:
        raise ProfileFormatError(f"component {i}: bad direction {d['direction']!r}") from None
    return GeometricSequence(parse_rational(d["limit"]), direction,
                             parse_rational(d["gap"]), parse_rational(d["ratio"]))


def profile_from_dict(d) -> SemiAxisProfile:
    if not isinstance(d, dict):
        raise ProfileFormatError("profile must be a JSON object")
    if set(d) != {"name", "components"}:
        raise ProfileFormatError(f"profile fields must be exactly name, components; got {sorted(d)}")
    if not isinstance(d["name"], str):
        raise ProfileFormatError("name must be a string")
    comps = d["components"]
    if not isinstance(comps, list) or not comps:
        raise ProfileFormatError("components must be a non-empty array")
    return SemiAxisProfile(d["name"], tuple(_component_from_dict(c, i) for i, c in enumerate(comps)))


def component_to_dict(c: Component) -> dict:
    if isinstance(c, Atom):
        return {"kind": "atom", "value": format_rational(c.value),
                "multiplicity": "inf" if c.is_infinite else c.multiplicity}
    return {"kind": "sequence", "limit": format_rational(c.limit), "direction": c.direction.value,
            "gap": format_rational(c.gap), "ratio": format_rational(c.ratio)}


def profile_to_dict(p: SemiAxisProfile) -> dict:
    return {"name": p.name, "components": [component_to_dict(c) for c in p.components]}


def loads_profile(text: str) -> SemiAxisProfile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"invalid JSON: {exc}") from None
    return profile_from_dict(data)


def load_profile(path) -> SemiAxisProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ProfileFormatError(f"cannot read {path}: {exc}") from None
    return loads_profile(text)
