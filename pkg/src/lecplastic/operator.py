"""Chain-shift operators, finite truncations and their numerical verification.

For a non-plastic profile with witness set B the chain shift acts on a
two-sided sequence of distinct basis indices ``n_k`` (k in Z)::

    T e_{n_k} = (a(n_{k+1}) / a(n_k)) e_{n_{k+1}},     T e_n = e_n off the chain.

Forward positions (k >= 1) walk the lower part of B down towards r, backward
positions (k <= 0) walk the upper part up towards R.  The weights are exact
rationals; in the modified inner product ``<x, y>_a = sum x_n y_n / a(n)^2``
the operator is unitary, while in the ordinary norm it contracts the crossing
link k = 0 by ``a(n_1) / a(n_0) < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import CheckFailed, InternalError, NoConvergence
from .plasticity import WitnessSet
from .profile import SemiAxisProfile, axes_prefix, format_rational, position_of

NORM_TOL = 1e-12  # exactly constructed operators: error is pure rounding
SAMPLED_TOL = 1e-8  # sampled or iterative verifications
MAX_POWER_ITERATIONS = 10_000


# ---------------------------------------------------------------------------
# modified inner product


def modified_inner(x, y, axes):
    """``sum_n x_n * conj(y_n) / a(n)**2``.

    Exact when every input is rational (Fraction/int).  Real floating-point
    input is evaluated exactly on the binary64 values and rounded once, so the
    result is the correctly rounded value for those inputs.  Complex input
    falls back to a compensated float sum.
    """
    if not (len(x) == len(y) == len(axes)):
        raise ValueError(f"LENGTH_MISMATCH: {len(x)}, {len(y)}, {len(axes)}")
    exact = all(isinstance(v, (int, Fraction)) for seq in (x, y, axes) for v in seq)
    if exact:
        return sum((Fraction(a) * Fraction(b) / Fraction(c) ** 2 for a, b, c in zip(x, y, axes)),
                   Fraction(0))
    xs = np.asarray(x)
    ys = np.asarray(y)
    ax = np.asarray(axes, dtype=float)
    if np.any(ax <= 0):
        raise ValueError("semi-axes must be positive")
    if np.iscomplexobj(xs) or np.iscomplexobj(ys):
        terms = xs * np.conj(ys) / ax ** 2
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    total = sum((Fraction(a) * Fraction(b) / Fraction(c) ** 2
                 for a, b, c in zip(xs.tolist(), ys.tolist(), ax.tolist())), Fraction(0))
    return float(total)


def modified_norm(x, axes):
    value = modified_inner(x, x, axes)
    if isinstance(value, Fraction):
        return value  # squared norm; square roots leave the rationals
    return math.sqrt(abs(value))


# ---------------------------------------------------------------------------
# chain shift


@dataclass(frozen=True)
class ChainShiftOperator:
    profile: SemiAxisProfile
    witness: WitnessSet
    lower_start: int  # occurrence of the lower component at k = 1
    upper_start: int  # occurrence of the upper component at k = 0

    def node(self, k: int):
        """``(n_k, a(n_k))`` for chain position k."""
        if k >= 1:
            part, occ = self.witness.lower_part, self.lower_start + k - 1
        else:
            part, occ = self.witness.upper_part, self.upper_start - k
        comp = self.profile.components[part.component]
        return position_of(self.profile, part.component, occ), comp.value_at(occ)

    def index(self, k: int) -> int:
        return self.node(k)[0]

    def value(self, k: int) -> Fraction:
        return self.node(k)[1]

    def weight(self, k: int) -> Fraction:
        return self.value(k + 1) / self.value(k)

    def positions_below(self, N: int) -> dict:
        """Map basis index -> chain position for every chain index < N."""
        out = {}
        k = 1
        while (n := self.index(k)) < N:
            out[n] = k
            k += 1
        k = 0
        while (n := self.index(k)) < N:
            out[n] = k
            k -= 1
        return out

    def chain(self, K: int) -> list:
        return [(k, *self.node(k)) for k in range(-K, K + 1)]


def build_shift(p: SemiAxisProfile, w: WitnessSet) -> ChainShiftOperator:
    """Chain shift for witness ``w``.

    The forward chain uses the lower part's values below (r+R)/2; the backward
    chain uses the upper component's values at or above (r+R)/2, which keeps
    the two halves disjoint and makes a(n_1) < a(n_0).
    """
    mid = w.midpoint
    lower, upper = w.lower_part, w.upper_part
    lower_start = 0 if lower.is_atom else lower.spec.first_index(below=mid) - 1
    upper_start = 0 if upper.is_atom else upper.spec.first_index(above=mid, strict=False) - 1
    op = ChainShiftOperator(p, w, lower_start, upper_start)

    a0, a1 = op.value(0), op.value(1)
    if not (a1 < mid <= a0):
        raise InternalError(f"chain does not cross the midpoint: a(n_1)={a1}, a(n_0)={a0}")
    for k in range(-8, 9):
        if op.weight(k) > 1:
            raise InternalError(f"weight w_{k} = {op.weight(k)} exceeds 1")
    return op


def chain_weights_bounded(op: ChainShiftOperator) -> bool:
    """Exact symbolic check that every weight is <= 1 and w_0 < 1.

    Forward values are non-increasing and backward values non-decreasing as
    k moves away from the crossing: constant on an atom, monotone on a
    sequence tail.  Those two facts and a(n_1) < a(n_0) give every bound.
    """
    lower, upper = op.witness.lower_part, op.witness.upper_part
    forward_ok = lower.is_atom or lower.spec.decreasing
    backward_ok = upper.is_atom or not upper.spec.decreasing
    return forward_ok and backward_ok and op.value(1) < op.value(0)


# ---------------------------------------------------------------------------
# truncation


@dataclass
class TruncatedOperator:
    """The compression ``P_N T P_N`` onto the first N basis vectors."""

    dimension: int
    matrix: np.ndarray
    axes: np.ndarray
    exact_axes: list
    chain_window: frozenset = frozenset()
    # (row, col) -> exact rational entry for in-window chain links
    exact_entries: dict = field(default_factory=dict)
    # column -> chain position for in-window chain links
    chain_columns: dict = field(default_factory=dict)
    # chain columns whose successor falls outside the window
    excluded_columns: tuple = ()

    @classmethod
    def from_matrix(cls, matrix, axes):
        matrix = np.asarray(matrix, dtype=float)
        exact = list(axes) if all(isinstance(a, (int, Fraction)) for a in axes) else []
        return cls(matrix.shape[0], matrix, np.asarray([float(a) for a in axes]), exact)


def truncate(op: ChainShiftOperator, N: int) -> TruncatedOperator:
    if N < 1:
        raise ValueError("dimension must be >= 1")
    exact_axes = axes_prefix(op.profile, N)
    if len(exact_axes) < N:
        raise ValueError(f"profile supports only {len(exact_axes)} basis vectors")
    on_chain = op.positions_below(N)
    M = np.zeros((N, N))
    window, entries, columns, excluded = set(), {}, {}, []
    for n in range(N):
        k = on_chain.get(n)
        if k is None:
            M[n, n] = 1.0
            continue
        succ = op.index(k + 1)
        if succ >= N:
            excluded.append(n)  # the image leaves the window: compressed to zero
            continue
        w = op.weight(k)
        M[succ, n] = float(w)
        window.add(k)
        entries[(succ, n)] = w
        columns[n] = k
    return TruncatedOperator(N, M, np.array([float(a) for a in exact_axes]), exact_axes,
                             frozenset(window), entries, columns, tuple(excluded))


# ---------------------------------------------------------------------------
# operator norm


@dataclass(frozen=True)
class NormEstimate:
    value: float  # Rayleigh estimate of the largest singular value (a lower bound)
    upper_bound: float  # sqrt(||T||_1 ||T||_inf), a guaranteed upper bound
    residual: float  # ||G x - rho x|| for the final unit iterate x, G = T^T T
    iterations: int


class _Stopper:
    """Stopping rule on a monotonically increasing Rayleigh sequence.

    Stops when the increase has stalled at machine precision, or when the
    geometric-tail extrapolation of the remaining increase is below ``tol``
    relative.
    """

    def __init__(self, tol):
        self.tol = tol
        self.prev = self.delta_prev = None

    def __call__(self, rho) -> bool:
        done = False
        if self.prev is not None:
            delta = abs(rho - self.prev)
            done = delta <= 8 * np.finfo(float).eps * rho
            if not done and self.delta_prev and delta < self.delta_prev:
                q = delta / self.delta_prev
                done = delta * q / (1 - q) <= self.tol * rho
            self.delta_prev = delta
        self.prev = rho
        return done


def norm_estimate(matrix, tol: float = NORM_TOL, max_iter: int = MAX_POWER_ITERATIONS) -> NormEstimate:
    """Largest singular value by power iteration on the Gram matrix G = T^T T.

    The powers are taken by doubling, S <- S @ S on the normalized G^(2^m),
    and the Rayleigh quotient of G at S x0 is tracked.  Eigenvalues of G
    within a relative gap g of the top one are suppressed by about
    exp(-g 2^m), so at least ``log2(40 / tol)`` doublings are done before the
    stopping rule is consulted: a near-degenerate pair below the top produces
    a plateau that any power method mistakes for convergence until 2^m g is
    large.  Chain shifts whose weights accumulate at 1 are exactly this case.

    The Rayleigh quotient of a PSD matrix never exceeds its top eigenvalue, so
    ``value`` is a lower bound; ``upper_bound`` brackets it from above and
    ``residual`` certifies that ``value**2`` lies within that distance of an
    eigenvalue of G.
    """
    T = np.asarray(matrix, dtype=float)
    if T.size == 0:
        return NormEstimate(0.0, 0.0, 0.0, 0)
    A = np.abs(T)
    upper = math.sqrt(A.sum(axis=0).max() * A.sum(axis=1).max())
    G = T.T @ T
    top = np.max(np.abs(G))
    if top == 0.0:
        return NormEstimate(0.0, upper, 0.0, 0)
    x0 = np.random.default_rng(0x5EED).standard_normal(G.shape[0])
    min_doublings = math.ceil(math.log2(40 / tol))
    stop = _Stopper(tol)
    S = G / top
    for m in range(1, max_iter + 1):
        S = S @ S
        top = np.max(np.abs(S))
        if top == 0.0 or not np.isfinite(top):
            raise NoConvergence("Gram matrix powers underflowed")
        S /= top
        z = S @ x0
        z /= np.linalg.norm(z)
        y = G @ z
        rho = float(z @ y)
        if stop(rho) and m >= min_doublings:
            residual = float(np.linalg.norm(y - rho * z))
            return NormEstimate(math.sqrt(max(rho, 0.0)), upper, residual, m)
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def operator_norm(t) -> float:
    matrix = t.matrix if isinstance(t, TruncatedOperator) else t
    return norm_estimate(matrix).value


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class VerificationReport:
    dimension: int
    operator_norm: float
    norm_upper_bound: float
    modified_defect: float
    isometry_defect: float
    contraction_index: Optional[int] = None
    contraction_ratio: Optional[Fraction] = None
    block_violation: Optional[float] = None
    unitarity_defect: Optional[float] = None
    excluded_columns: int = 0
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "dimension": self.dimension,
            "operator_norm": self.operator_norm,
            "norm_upper_bound": self.norm_upper_bound,
            "modified_defect": self.modified_defect,
            "isometry_defect": self.isometry_defect,
            "contraction_index": self.contraction_index,
            "contraction_ratio": (None if self.contraction_ratio is None
                                  else format_rational(self.contraction_ratio)),
            "contraction_ratio_float": (None if self.contraction_ratio is None
                                        else float(self.contraction_ratio)),
            "block_violation": self.block_violation,
            "unitarity_defect": self.unitarity_defect,
            "excluded_columns": self.excluded_columns,
        }
        for name, tol in self.tolerances.items():
            d[f"tolerance_{name}"] = tol
        return d

    @classmethod
    def from_dict(cls, d):
        from .profile import parse_rational

        tolerances = {k[len("tolerance_"):]: v for k, v in d.items() if k.startswith("tolerance_")}
        ratio = d.get("contraction_ratio")
        return cls(
            dimension=d["dimension"],
            operator_norm=d["operator_norm"],
            norm_upper_bound=d["norm_upper_bound"],
            modified_defect=d["modified_defect"],
            isometry_defect=d["isometry_defect"],
            contraction_index=d.get("contraction_index"),
            contraction_ratio=None if ratio is None else parse_rational(ratio),
            block_violation=d.get("block_violation"),
            unitarity_defect=d.get("unitarity_defect"),
            excluded_columns=d.get("excluded_columns", 0),
            tolerances=tolerances,
        )


def verify_counterexample(t: TruncatedOperator, tol: float = NORM_TOL) -> VerificationReport:
    """Check a truncated chain shift: non-expansive, modified-unitary on its
    chain links, and strictly contracting at the crossing column.

    Raises :class:`CheckFailed` naming the first clause that fails.
    """
    est = norm_estimate(t.matrix, tol=tol)
    if est.value > 1 + tol or est.upper_bound > 1 + tol:
        raise CheckFailed("non_expansive", f"operator norm {est.value!r} (bound {est.upper_bound!r}) > 1")

    # exact: D^-1 T D is a partial permutation on the chain links
    for (row, col), w in t.exact_entries.items():
        if w > 1:
            raise CheckFailed("weights", f"weight {w} at column {col} exceeds 1")
        if t.exact_axes and w * t.exact_axes[col] / t.exact_axes[row] != 1:
            raise CheckFailed("modified_norm", f"column {col} does not preserve the modified norm exactly")

    kept = [n for n in range(t.dimension) if n not in set(t.excluded_columns)]
    cols = t.matrix[:, kept]
    # every column has at most one nonzero, so column norms are the singular values
    col_norms = np.linalg.norm(cols, axis=0)
    scaled = (t.matrix / t.axes[:, None]) * t.axes[None, :]
    mod_norms = np.linalg.norm(scaled[:, kept], axis=0)
    modified_defect = float(np.max(np.abs(mod_norms - 1))) if kept else 0.0
    isometry_defect = float(np.max(np.abs(col_norms - 1))) if kept else 0.0
    if modified_defect > tol:
        raise CheckFailed("modified_norm", f"modified-norm defect {modified_defect!r} > {tol}")

    index = ratio = None
    if 0 in t.chain_window:
        index = next(n for n, k in t.chain_columns.items() if k == 0)
        (_, col), ratio = next(((rc, w) for rc, w in t.exact_entries.items() if rc[1] == index))
        if not ratio < 1:
            raise CheckFailed("contraction", f"crossing weight {ratio} is not < 1")
        if abs(col_norms[kept.index(index)] - float(ratio)) > tol:
            raise CheckFailed("contraction", "numeric crossing column disagrees with its exact weight")

    return VerificationReport(
        dimension=t.dimension,
        operator_norm=est.value,
        norm_upper_bound=est.upper_bound,
        modified_defect=modified_defect,
        isometry_defect=isometry_defect,
        contraction_index=index,
        contraction_ratio=ratio,
        excluded_columns=len(t.excluded_columns),
        tolerances={"norm": tol, "modified": tol},
    )


def groups_by_axis(axes) -> list:
    """Partition indices by equal semi-axis value, in order of first appearance."""
    groups = {}
    for i, a in enumerate(axes):
        groups.setdefault(a, []).append(i)
    return list(groups.values())


def verify_block_structure(t, groups=None, axes=None, tol: float = SAMPLED_TOL) -> VerificationReport:
    """Measure how far ``t`` is from block-diagonal with orthogonal blocks.

    Pure measurement: nothing is raised; compare the defects against ``tol``.
    """
    if isinstance(t, TruncatedOperator):
        matrix = t.matrix
        if axes is None:
            axes = t.exact_axes or list(t.axes)
    else:
        matrix = np.asarray(t, dtype=float)
    N = matrix.shape[0]
    if groups is None:
        if axes is None:
            raise ValueError("need groups or axes")
        groups = groups_by_axis(axes)
    label = np.empty(N, dtype=int)
    for g, members in enumerate(groups):
        label[list(members)] = g
    cross = label[:, None] != label[None, :]
    block_violation = float(np.max(np.abs(matrix[cross]))) if cross.any() else 0.0
    unitarity = 0.0
    for members in groups:
        B = matrix[np.ix_(members, members)]
        unitarity = max(unitarity, float(np.max(np.abs(B.T @ B - np.eye(len(members))))))

    sv = np.linalg.svd(matrix, compute_uv=False)
    isometry_defect = float(np.max(np.abs(sv - 1)))
    modified_defect = float("nan")
    if axes is not None:
        d = np.array([float(a) for a in axes])
        msv = np.linalg.svd(matrix / d[:, None] * d[None, :], compute_uv=False)
        modified_defect = float(np.max(np.abs(msv - 1)))
    est = norm_estimate(matrix)
    return VerificationReport(
        dimension=N,
        operator_norm=est.value,
        norm_upper_bound=est.upper_bound,
        modified_defect=modified_defect,
        isometry_defect=isometry_defect,
        block_violation=block_violation,
        unitarity_defect=unitarity,
        tolerances={"block": tol},
    )
