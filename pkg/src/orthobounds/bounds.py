"""Certified bound chains for truncated orthonormal expansions.

Everything here revolves around a coefficient box: per-index scalar pairs
(phi_i, Phi_i) constraining a vector x through two equivalent conditions,

    (i)   Re< sum_F Phi_i e_i - x, x - sum_F phi_i e_i >  >=  0,
    (ii)  ||x - sum_F (phi_i + Phi_i)/2 e_i||  <=  (1/2) (sum_F |Phi_i - phi_i|^2)^(1/2),

and two bound chains built on them:

* the Bessel-residual chain
    0 <= ||x||^2 - sum_F |<x, e_i>|^2 <= 1/4 sum_F |Phi_i - phi_i|^2 - slack
      <= 1/4 sum_F |Phi_i - phi_i|^2,
* the Gruss-deviation chain bounding |<x,y> - sum_F <x,e_i><e_i,y>| by the
  product form 1/4 (sum|Phi-phi|^2)^(1/2) (sum|Gamma-gamma|^2)^(1/2) minus a
  product of condition-slack square roots.

The constant 1/4 is sharp in every chain; :mod:`orthobounds.sharpness`
confirms that numerically.

Condition failure never aborts a computation: reports carry
``certified=False`` together with the numeric values so that near-misses
stay inspectable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .space import (
    OrthonormalFamily,
    SpaceContext,
    Vector,
    as_vector,
    combination,
    fourier_coefficients,
    index_set,
    inner_product,
    norm,
    require_certified,
)

#: Relative factor for the default certification tolerance: a condition holds
#: when its inner slack is >= -DEFAULT_CONDITION_RTOL * scale, with
#: scale = ||x||^2 + (1/4) sum |Phi_i - phi_i|^2.
DEFAULT_CONDITION_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class CoefficientBox:
    """Per-index scalar bounds (phi_i, Phi_i) over a fixed index set.

    ``indices`` are 0-based member positions; ``lower`` and ``upper`` are
    aligned with them.  ``half_diameter_sq`` = (1/4) sum_i |Phi_i - phi_i|^2
    is computed once at construction.
    """

    indices: tuple[int, ...]
    lower: tuple[complex, ...]
    upper: tuple[complex, ...]
    half_diameter_sq: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.indices:
            raise ValueError("box must cover a nonempty index set")
        if len(self.lower) != len(self.indices) or len(self.upper) != len(self.indices):
            raise ValueError("lower/upper must have exactly one entry per index")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "lower", tuple(complex(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(complex(v) for v in self.upper))
        if not all(np.isfinite([v.real, v.imag]).all() for v in self.lower + self.upper):
            raise ValueError("box endpoints must be finite")
        diff = self.upper_array - self.lower_array
        object.__setattr__(
            self, "half_diameter_sq", float(0.25 * np.sum(np.abs(diff) ** 2))
        )

    @classmethod
    def from_maps(
        cls, lower: Mapping[int, complex], upper: Mapping[int, complex]
    ) -> "CoefficientBox":
        if set(lower) != set(upper):
            raise ValueError("lower and upper must be keyed by the same indices")
        idx = tuple(sorted(int(i) for i in lower))
        return cls(idx, tuple(lower[i] for i in idx), tuple(upper[i] for i in idx))

    @classmethod
    def centered(
        cls,
        indices: Sequence[int],
        midpoints: Sequence[complex],
        half_widths: Sequence[complex],
    ) -> "CoefficientBox":
        """Box with endpoints midpoint -/+ half_width per index."""
        mids = np.asarray(midpoints, dtype=np.complex128)
        hw = np.asarray(half_widths, dtype=np.complex128)
        return cls(tuple(indices), tuple(mids - hw), tuple(mids + hw))

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=np.complex128)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=np.complex128)

    @property
    def lower_map(self) -> dict[int, complex]:
        return dict(zip(self.indices, self.lower))

    @property
    def upper_map(self) -> dict[int, complex]:
        return dict(zip(self.indices, self.upper))

    @property
    def diameter_sq_sum(self) -> float:
        """sum_i |Phi_i - phi_i|^2."""
        return 4.0 * self.half_diameter_sq

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lower_array + self.upper_array)


@dataclass(frozen=True)
class ConditionReport:
    """Both slack forms of the box condition, plus the certification verdict.

    ``holds`` is decided by the inner-product slack alone (that is the
    quantity the refined bounds subtract); the norm slack is diagnostic.
    ``sign_disagreement`` flags the pathological case where the two slacks
    disagree in sign while both exceed the tolerance in magnitude.
    """

    slack_inner: float
    slack_norm: float
    holds: bool
    tolerance: float
    sign_disagreement: bool = False


@dataclass(frozen=True)
class BesselBoundReport:
    """Residual chain report: 0 <= residual <= refined <= coarse when certified."""

    residual: float
    refined: float
    coarse: float
    condition: ConditionReport
    certified: bool

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "refined": self.refined,
            "coarse": self.coarse,
            "slack_inner": self.condition.slack_inner,
            "slack_norm": self.condition.slack_norm,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class GrussBoundReport:
    """Deviation chain report: |deviation| <= refined <= coarse when certified."""

    deviation: complex
    refined: float
    coarse: float
    condition_x: ConditionReport
    condition_y: ConditionReport
    certified: bool

    @property
    def deviation_abs(self) -> float:
        return abs(self.deviation)

    def to_dict(self) -> dict:
        return {
            "deviation": [self.deviation.real, self.deviation.imag],
            "deviation_abs": self.deviation_abs,
            "refined": self.refined,
            "coarse": self.coarse,
            "slack_inner_x": self.condition_x.slack_inner,
            "slack_norm_x": self.condition_x.slack_norm,
            "slack_inner_y": self.condition_y.slack_inner,
            "slack_norm_y": self.condition_y.slack_norm,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class CompanionReport:
    """Bound on Re(deviation) certified by a box condition at (x+y)/2."""

    re_deviation: float
    bound: float
    condition: ConditionReport
    certified: bool

    def to_dict(self) -> dict:
        return {
            "re_deviation": self.re_deviation,
            "bound": self.bound,
            "slack_inner": self.condition.slack_inner,
            "slack_norm": self.condition.slack_norm,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class CompanionAbsReport:
    """Two-sided bound on |Re(deviation)|, needing both (x+y)/2 and (x-y)/2
    to satisfy the box condition."""

    abs_re_deviation: float
    bound: float
    condition_sum: ConditionReport
    condition_diff: ConditionReport
    certified: bool

    def to_dict(self) -> dict:
        return {
            "abs_re_deviation": self.abs_re_deviation,
            "bound": self.bound,
            "slack_inner_sum": self.condition_sum.slack_inner,
            "slack_inner_diff": self.condition_diff.slack_inner,
            "certified": self.certified,
        }


def instance_scale(ctx: SpaceContext, x: Vector, box: CoefficientBox) -> float:
    """Magnitude reference for relative tolerances: ||x||^2 + half_diameter^2."""
    return norm(ctx, x) ** 2 + box.half_diameter_sq


def _validated(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox | None = None,
) -> tuple[Vector, tuple[int, ...]]:
    require_certified(fam)
    idx = index_set(indices, fam.size)
    if box is not None and box.indices != idx:
        raise ValueError(f"box covers indices {box.indices}, expected {idx}")
    return as_vector(ctx, x), idx


def condition_slack_inner(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
) -> float:
    """Re< sum Phi_i e_i - x, x - sum phi_i e_i >, computed exactly as written.

    No clamping: a violated condition shows up as a negative value.
    """
    x, idx = _validated(ctx, x, fam, indices, box)
    upper_comb = combination(fam, idx, box.upper_array)
    lower_comb = combination(fam, idx, box.lower_array)
    return inner_product(ctx, upper_comb - x, x - lower_comb).real


def condition_slack_norm(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
) -> float:
    """(1/2)(sum |Phi_i - phi_i|^2)^(1/2) - ||x - sum (phi_i+Phi_i)/2 e_i||.

    Nonnegative exactly when the norm form of the box condition holds.
    """
    x, idx = _validated(ctx, x, fam, indices, box)
    mid_comb = combination(fam, idx, box.midpoints())
    return 0.5 * np.sqrt(box.diameter_sq_sum) - norm(ctx, x - mid_comb)


def check_condition(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
    tol: float | None = None,
) -> ConditionReport:
    """Evaluate both slack forms and certify on the inner-product slack.

    ``tol`` is an absolute slack tolerance; by default it is
    ``DEFAULT_CONDITION_RTOL * (||x||^2 + half_diameter^2)``.
    """
    slack_inner = condition_slack_inner(ctx, x, fam, indices, box)
    slack_norm = condition_slack_norm(ctx, x, fam, indices, box)
    if tol is None:
        tol = DEFAULT_CONDITION_RTOL * instance_scale(ctx, x, box)
    disagreement = (
        min(abs(slack_inner), abs(slack_norm)) > tol
        and (slack_inner > 0) != (slack_norm > 0)
    )
    return ConditionReport(
        slack_inner=slack_inner,
        slack_norm=slack_norm,
        holds=slack_inner >= -tol,
        tolerance=tol,
        sign_disagreement=disagreement,
    )


def bessel_residual(
    ctx: SpaceContext, x: Vector, fam: OrthonormalFamily, indices: Sequence[int]
) -> float:
    """||x||^2 - sum_F |<x, e_i>|^2 (nonnegative for certified families)."""
    x, idx = _validated(ctx, x, fam, indices)
    coeffs = fourier_coefficients(ctx, x, fam, idx)
    return norm(ctx, x) ** 2 - float(sum(abs(c) ** 2 for c in coeffs.values()))


def residual_identity_sides(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
) -> tuple[float, float]:
    """Both sides of the residual decomposition identity

        ||x||^2 - sum_F |<x,e_i>|^2
            = sum_F Re[(Phi_i - <x,e_i>)(conj(<x,e_i>) - conj(phi_i))] - slack_inner.

    Returned as (left, right) so the two evaluation routes can be compared;
    they agree to roundoff for exactly orthonormal families.
    """
    x, idx = _validated(ctx, x, fam, indices, box)
    left = bessel_residual(ctx, x, fam, idx)
    coeffs = fourier_coefficients(ctx, x, fam, idx)
    c = np.asarray([coeffs[i] for i in idx], dtype=np.complex128)
    coefficient_term = float(
        np.sum(((box.upper_array - c) * np.conj(c - box.lower_array)).real)
    )
    right = coefficient_term - condition_slack_inner(ctx, x, fam, idx, box)
    return left, right


def counterpart_bounds(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
    tol: float | None = None,
) -> BesselBoundReport:
    """Residual chain: residual <= coarse - slack_inner <= coarse.

    ``coarse`` = (1/4) sum_F |Phi_i - phi_i|^2.  The report is produced even
    when the box condition fails; ``certified`` records whether the chain is
    applicable.
    """
    x, idx = _validated(ctx, x, fam, indices, box)
    condition = check_condition(ctx, x, fam, idx, box, tol)
    coarse = box.half_diameter_sq
    return BesselBoundReport(
        residual=bessel_residual(ctx, x, fam, idx),
        refined=coarse - condition.slack_inner,
        coarse=coarse,
        condition=condition,
        certified=condition.holds,
    )


def gruss_deviation(
    ctx: SpaceContext,
    x: Vector,
    y: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
) -> complex:
    """<x,y> - sum_F <x,e_i><e_i,y>.

    Equals the inner product of the two projection residuals
    <x - Px, y - Py> for exactly orthonormal families.
    """
    x, idx = _validated(ctx, x, fam, indices)
    y = as_vector(ctx, y)
    cx = fourier_coefficients(ctx, x, fam, idx)
    cy = fourier_coefficients(ctx, y, fam, idx)
    truncated = sum(cx[i] * np.conj(cy[i]) for i in idx)
    return inner_product(ctx, x, y) - complex(truncated)


def gruss_bounds(
    ctx: SpaceContext,
    x: Vector,
    y: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box_x: CoefficientBox,
    box_y: CoefficientBox,
    tol: float | None = None,
) -> GrussBoundReport:
    """Deviation chain with product-form bounds.

    coarse  = 1/4 (sum|Phi-phi|^2)^(1/2) (sum|Gamma-gamma|^2)^(1/2)
    refined = coarse - sqrt(max(slack_x, 0)) * sqrt(max(slack_y, 0))

    The clamps keep ``refined`` defined when a slack sits at -epsilon within
    tolerance; certification still requires both conditions to hold.
    """
    x, idx = _validated(ctx, x, fam, indices, box_x)
    if box_y.indices != idx:
        raise ValueError(f"box_y covers indices {box_y.indices}, expected {idx}")
    condition_x = check_condition(ctx, x, fam, idx, box_x, tol)
    condition_y = check_condition(ctx, y, fam, idx, box_y, tol)
    coarse = 0.25 * float(
        np.sqrt(box_x.diameter_sq_sum) * np.sqrt(box_y.diameter_sq_sum)
    )
    refined = coarse - float(
        np.sqrt(max(condition_x.slack_inner, 0.0))
        * np.sqrt(max(condition_y.slack_inner, 0.0))
    )
    return GrussBoundReport(
        deviation=gruss_deviation(ctx, x, y, fam, idx),
        refined=refined,
        coarse=coarse,
        condition_x=condition_x,
        condition_y=condition_y,
        certified=condition_x.holds and condition_y.holds,
    )


def companion_bound(
    ctx: SpaceContext,
    x: Vector,
    y: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
    tol: float | None = None,
) -> CompanionReport:
    """Re(deviation) <= (1/4) sum_F |Phi_i - phi_i|^2, certified by the box
    condition evaluated at the midpoint (x+y)/2."""
    x, idx = _validated(ctx, x, fam, indices, box)
    y = as_vector(ctx, y)
    midpoint = 0.5 * (x + y)
    condition = check_condition(ctx, midpoint, fam, idx, box, tol)
    return CompanionReport(
        re_deviation=gruss_deviation(ctx, x, y, fam, idx).real,
        bound=box.half_diameter_sq,
        condition=condition,
        certified=condition.holds,
    )


def companion_abs_bound(
    ctx: SpaceContext,
    x: Vector,
    y: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
    box: CoefficientBox,
    tol: float | None = None,
) -> CompanionAbsReport:
    """|Re(deviation)| <= (1/4) sum_F |Phi_i - phi_i|^2, certified when both
    (x+y)/2 and (x-y)/2 satisfy the box condition.

    In a real context with real box endpoints this is the two-sided
    Gruss-type bound with m_i = phi_i, M_i = Phi_i.
    """
    x, idx = _validated(ctx, x, fam, indices, box)
    y = as_vector(ctx, y)
    condition_sum = check_condition(ctx, 0.5 * (x + y), fam, idx, box, tol)
    condition_diff = check_condition(ctx, 0.5 * (x - y), fam, idx, box, tol)
    return CompanionAbsReport(
        abs_re_deviation=abs(gruss_deviation(ctx, x, y, fam, idx).real),
        bound=box.half_diameter_sq,
        condition_sum=condition_sum,
        condition_diff=condition_diff,
        certified=condition_sum.holds and condition_diff.holds,
    )


def scalar_lemmas_check(
    a: complex, b: complex, m: float, n: float, p: float, q: float
) -> tuple[bool, bool]:
    """Truth of the two scalar inequalities the bound proofs rest on:

        Re[a * conj(b)] <= (1/4) |a + b|^2
        (m^2 - n^2)(p^2 - q^2) <= (mp - nq)^2

    Exposed so the building blocks can be fuzzed independently of the
    vector-level chains.  Both sides are evaluated as written; comparisons
    allow a few ulps so the algebraic equality cases (a = b, mq = np) do not
    flip on rounding.
    """
    a = complex(a)
    b = complex(b)
    lhs1 = (a * b.conjugate()).real
    rhs1 = 0.25 * abs(a + b) ** 2
    lhs2 = (m * m - n * n) * (p * p - q * q)
    rhs2 = (m * p - n * q) ** 2
    eps = 16.0 * np.finfo(float).eps
    first = lhs1 <= rhs1 + eps * max(1.0, abs(lhs1), abs(rhs1))
    second = lhs2 <= rhs2 + eps * max(1.0, abs(lhs2), abs(rhs2))
    return first, second
