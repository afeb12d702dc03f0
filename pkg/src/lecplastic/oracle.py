"""Independent cross-checks for the decision procedure and operator checks.

Nothing here calls :func:`lecplastic.profile.find_tau` or
:func:`lecplastic.plasticity.extract_witness`; the routes are deliberately
different so that agreement means something.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .operator import SAMPLED_TOL, groups_by_axis, norm_estimate, verify_block_structure
from .plasticity import Verdict, WitnessPart, WitnessSet
from .profile import (
    INFINITE,
    Atom,
    Direction,
    FailureKind,
    GeometricSequence,
    SemiAxisProfile,
    validate_profile,
)

# ---------------------------------------------------------------------------
# second decision route


def decide_by_tau_enumeration(p: SemiAxisProfile) -> Verdict:
    """PLASTIC iff some atom value or sequence limit works as a threshold."""
    comps = p.components
    candidates = {c.value if isinstance(c, Atom) else c.limit for c in comps}
    for tau in sorted(candidates):
        ok = True
        for c in comps:
            if isinstance(c, Atom):
                if c.is_infinite and c.value != tau:
                    ok = False
            elif c.decreasing and c.limit < tau:
                ok = False
            elif not c.decreasing and c.limit > tau:
                ok = False
        if ok:
            return Verdict.PLASTIC
    return Verdict.NOT_PLASTIC


def _scan_tail(seq: GeometricSequence, accept) -> int:
    k = 1
    while not accept(seq.term(k)):
        k += 1
    return k


def scan_pairwise_failures(p: SemiAxisProfile) -> list:
    """Every witness built from one bottom-deficient and one top-deficient part.

    A part lacks a finite-multiplicity minimum if it is an infinite atom or a
    decreasing sequence tail, and lacks a finite-multiplicity maximum if it is
    an infinite atom or an increasing sequence tail.  Any such pair whose
    bottom infimum sits strictly below the top supremum gives a witness.
    """
    comps = p.components
    bottoms = [i for i, c in enumerate(comps)
               if (isinstance(c, Atom) and c.is_infinite)
               or (isinstance(c, GeometricSequence) and c.decreasing)]
    tops = [i for i, c in enumerate(comps)
            if (isinstance(c, Atom) and c.is_infinite)
            or (isinstance(c, GeometricSequence) and not c.decreasing)]
    found = []
    for lo in bottoms:
        for hi in tops:
            if lo == hi:
                continue
            a, b = comps[lo], comps[hi]
            r = a.value if isinstance(a, Atom) else a.limit
            R = b.value if isinstance(b, Atom) else b.limit
            if not r < R:
                continue
            mid = (r + R) / 2
            lower = WitnessPart(lo, a) if isinstance(a, Atom) else \
                WitnessPart(lo, a, _scan_tail(a, lambda v: v < mid))
            upper = WitnessPart(hi, b) if isinstance(b, Atom) else \
                WitnessPart(hi, b, _scan_tail(b, lambda v: v > mid))
            if isinstance(a, Atom) and isinstance(b, Atom):
                kind = FailureKind.TWO_INFINITE_ATOMS
            elif isinstance(a, Atom):
                kind = FailureKind.INFINITE_ATOM_BELOW_INC_LIMIT
            elif isinstance(b, Atom):
                kind = FailureKind.INFINITE_ATOM_ABOVE_DEC_LIMIT
            else:
                kind = FailureKind.INC_LIMIT_ABOVE_DEC_LIMIT
            found.append(WitnessSet(kind, r, R, lower, upper))
    return found


# ---------------------------------------------------------------------------
# symbolic witness checker


def check_witness(w: WitnessSet) -> list:
    """Problems with ``w`` as a witness; an empty list means it is sound.

    Checks, from the witness data alone, that B = lower part U upper part has
    at least two elements, has no minimum or an infinite-multiplicity one,
    and has no maximum or an infinite-multiplicity one.
    """
    problems = []
    lo, hi = w.lower_part, w.upper_part
    if not w.r < w.R:
        problems.append("r >= R")
    mid = (w.r + w.R) / 2

    if isinstance(lo.spec, Atom):
        if not lo.spec.is_infinite:
            problems.append("lower atom has finite multiplicity, so B has a finite-multiplicity minimum")
        if lo.spec.value != w.r:
            problems.append("lower atom is not inf B")
        lower_sup = lo.spec.value
    else:
        if not lo.spec.decreasing:
            problems.append("lower sequence is increasing, so its tail has a minimum")
        if lo.spec.limit != w.r:
            problems.append("lower limit is not inf B")
        if lo.tail_start is None or lo.tail_start < 1:
            problems.append("lower tail start missing")
            return problems
        lower_sup = lo.spec.term(lo.tail_start)
        if not lower_sup < mid:
            problems.append("lower tail is not below the midpoint")

    if isinstance(hi.spec, Atom):
        if not hi.spec.is_infinite:
            problems.append("upper atom has finite multiplicity, so B has a finite-multiplicity maximum")
        if hi.spec.value != w.R:
            problems.append("upper atom is not sup B")
        upper_inf = hi.spec.value
    else:
        if hi.spec.decreasing:
            problems.append("upper sequence is decreasing, so its tail has a maximum")
        if hi.spec.limit != w.R:
            problems.append("upper limit is not sup B")
        if hi.tail_start is None or hi.tail_start < 1:
            problems.append("upper tail start missing")
            return problems
        upper_inf = hi.spec.term(hi.tail_start)
        if not upper_inf > mid:
            problems.append("upper tail is not above the midpoint")

    # with every lower value below every upper value, B's extremes come from
    # the parts themselves: at least two elements, min/max as checked above
    if not lower_sup < upper_inf:
        problems.append("lower and upper parts overlap")

    expected = {
        (True, True): FailureKind.TWO_INFINITE_ATOMS,
        (True, False): FailureKind.INFINITE_ATOM_BELOW_INC_LIMIT,
        (False, True): FailureKind.INFINITE_ATOM_ABOVE_DEC_LIMIT,
        (False, False): FailureKind.INC_LIMIT_ABOVE_DEC_LIMIT,
    }[(isinstance(lo.spec, Atom), isinstance(hi.spec, Atom))]
    if w.kind is not expected:
        problems.append(f"kind {w.kind.value} does not match parts ({expected.value})")
    return problems


# ---------------------------------------------------------------------------
# small-grid profile generator

GRID = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))
GRID_MULTIPLICITIES = (1, 2, INFINITE)
# two shapes whose values can never coincide: 2**-i / 4 == 3**-j / 5 has no solution
GRID_SHAPES = ((Fraction(1, 4), Fraction(1, 2)), (Fraction(1, 5), Fraction(1, 3)))


def grid_components() -> list:
    comps = [Atom(v, m) for v in GRID for m in GRID_MULTIPLICITIES]
    for limit in GRID:
        for direction in Direction:
            for gap, ratio in GRID_SHAPES:
                comps.append(GeometricSequence(limit, direction, gap, ratio))
    return comps


def small_grid_profiles(max_components: int = 4):
    """Yield every valid profile made of <= ``max_components`` distinct grid components."""
    pool = grid_components()
    for size in range(1, max_components + 1):
        for combo in itertools.combinations(pool, size):
            atoms = [c.value for c in combo if isinstance(c, Atom)]
            if len(atoms) != len(set(atoms)):
                continue
            p = SemiAxisProfile("grid", combo)
            if validate_profile(p).ok:
                yield p


# ---------------------------------------------------------------------------
# finite-dimensional sampling


@dataclass(frozen=True)
class Sample:
    kind: str  # "conjugated", "block" or "perturbed"
    matrix: np.ndarray


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a Gaussian matrix with the sign fix that makes it Haar distributed."""
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def _block_orthogonal(groups, d, rng):
    V = np.zeros((d, d))
    for members in groups:
        V[np.ix_(members, members)] = random_orthogonal(len(members), rng)
    return V


def sample_preserving_maps(axes, count: int, seed: int) -> list:
    """Sample maps of the finite ellipsoid with semi-axes ``axes`` onto itself.

    For each of ``count`` rounds three samples are drawn:

    * ``conjugated``: D V D^-1 with V random orthogonal; preserves the
      ellipsoid, usually expansive;
    * ``block``: orthogonal inside each equal-axis group; preserves the
      ellipsoid and is an isometry;
    * ``perturbed``: a block map composed with a rotation mixing a longest
      and a shortest axis (or scaled by 1.001 if all axes are equal); always
      expansive somewhere.

    Uses numpy's PCG64 generator seeded with ``seed``.
    """
    a = np.array([float(x) for x in axes])
    if np.any(a <= 0) or count < 1:
        raise ValueError("axes must be positive and count >= 1")
    d = len(a)
    rng = np.random.default_rng(seed)
    groups = groups_by_axis(axes)
    D, Dinv = np.diag(a), np.diag(1 / a)
    longest = int(np.argmax(a))
    shortest = int(np.argmin(a))
    out = []
    for _ in range(count):
        out.append(Sample("conjugated", D @ random_orthogonal(d, rng) @ Dinv))
        B = _block_orthogonal(groups, d, rng)
        out.append(Sample("block", B))
        if a[longest] == a[shortest]:
            out.append(Sample("perturbed", 1.001 * B))
        else:
            theta = rng.uniform(0.1, 1.0)
            G = np.eye(d)
            G[longest, longest] = G[shortest, shortest] = np.cos(theta)
            G[longest, shortest] = -np.sin(theta)
            G[shortest, longest] = np.sin(theta)
            out.append(Sample("perturbed", D @ G @ Dinv @ B))
    return out


def preserves_ellipsoid(matrix, axes, tol: float = 1e-10) -> bool:
    """True when D^-1 T D is orthogonal, i.e. T maps the ellipsoid onto itself."""
    a = np.array([float(x) for x in axes])
    M = matrix / a[:, None] * a[None, :]
    return bool(np.max(np.abs(M.T @ M - np.eye(len(a)))) <= tol)


def accepted_samples(axes, samples, accept_tol: float = 1e-10) -> list:
    """Samples that are non-expansive and map the ellipsoid onto itself."""
    return [s for s in samples
            if norm_estimate(s.matrix).value <= 1 + accept_tol
            and preserves_ellipsoid(s.matrix, axes, accept_tol)]


def block_defect(report) -> float:
    return max(report.isometry_defect, report.block_violation, report.unitarity_defect)


def check_sampled_maps(axes, samples, accept_tol: float = 1e-10, tol: float = SAMPLED_TOL):
    """Filter samples with :func:`accepted_samples` and verify each survivor.

    Returns ``(accepted, failures)`` where ``failures`` lists the reports of
    accepted maps that are not isometric and block-diagonal within ``tol``.
    """
    groups = groups_by_axis(axes)
    kept = accepted_samples(axes, samples, accept_tol)
    failures = []
    for s in kept:
        report = verify_block_structure(s.matrix, groups=groups, axes=axes, tol=tol)
        if block_defect(report) > tol:
            failures.append(report)
    return len(kept), failures
