"""Inner product space substrate shared by the coordinate and quadrature backends.

Scalars are plain ``complex`` values; a context tagged ``field="real"`` requires
every imaginary part to be exactly zero, so real spaces run through the same
formulas with all conjugations acting as no-ops.  The inner product is linear
in its first argument and conjugates the second:

    <x, y> = sum_k w_k * x_k * conj(y_k)

with w identically 1 for the coordinate backend and w the effective quadrature
weights for the weighted backend (see :mod:`orthobounds.quadrature`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

REAL = "real"
COMPLEX = "complex"

#: Default certification tolerance for orthonormal families.  An order looser
#: than double-precision accumulation error at the dimensions this library
#: targets (<= a few hundred).
DEFAULT_ORTHO_TOL = 1e-10

#: Pivot norms below ``rank_drop_factor * max(input norms)`` abort
#: orthonormalization with a DegeneracyError.
RANK_DROP_FACTOR = 1e-12

Vector = np.ndarray


class DegeneracyError(ValueError):
    """Input vectors are numerically rank deficient (or a weight pattern
    leaves too little mass to normalize against)."""


@dataclass(frozen=True, eq=False)
class SpaceContext:
    """Ambient space description: scalar field, dimension and backend weights.

    ``weights is None`` selects the plain coordinate backend.  A weight vector
    (nonnegative, not identically zero) turns the same formulas into a
    discretized weighted-L2 inner product.
    """

    field: str
    dimension: int
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"unknown field tag {self.field!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.dimension,):
                raise ValueError("weights length must equal the dimension")
            if not np.all(np.isfinite(w)) or np.any(w < 0.0):
                raise ValueError("weights must be finite and nonnegative")
            if not np.any(w > 0.0):
                raise ValueError("weights must not be identically zero")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def is_complex(self) -> bool:
        return self.field == COMPLEX

    @property
    def backend(self) -> str:
        return "coordinate" if self.weights is None else "weighted-quadrature"


def as_vector(ctx: SpaceContext, coords: Iterable[complex]) -> Vector:
    """Validate and freeze coordinates as a vector of ``ctx``.

    Rejects dimension mismatches, non-finite entries and (for real contexts)
    any nonzero imaginary part.
    """
    v = np.asarray(coords, dtype=np.complex128)
    if v.shape != (ctx.dimension,):
        raise ValueError(
            f"vector has shape {v.shape}, context dimension is {ctx.dimension}"
        )
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if not ctx.is_complex and np.any(v.imag != 0.0):
        raise ValueError("real-field vector has a nonzero imaginary part")
    v = v.copy()
    v.setflags(write=False)
    return v


def zero_vector(ctx: SpaceContext) -> Vector:
    return as_vector(ctx, np.zeros(ctx.dimension))


def inner_product(ctx: SpaceContext, x: Vector, y: Vector) -> complex:
    """<x, y>: linear in ``x``, conjugate-linear in ``y``."""
    x = _conforming(ctx, x)
    y = _conforming(ctx, y)
    if ctx.weights is None:
        return complex(np.dot(x, np.conj(y)))
    return complex(np.dot(ctx.weights * x, np.conj(y)))


def norm(ctx: SpaceContext, x: Vector) -> float:
    """||x|| = sqrt(Re <x, x>)."""
    return float(np.sqrt(max(inner_product(ctx, x, x).real, 0.0)))


@dataclass(frozen=True, eq=False)
class OrthonormalFamily:
    """Ordered finite family of unit vectors with a Gram-matrix certificate.

    ``gram_defect`` is max_{i,j} |<e_i, e_j> - delta_ij| as measured at
    construction time; the family counts as certified while it stays within
    ``tolerance``.  Members are stored as the rows of a read-only matrix.
    """

    members: np.ndarray
    gram_defect: float
    tolerance: float = DEFAULT_ORTHO_TOL

    def __post_init__(self) -> None:
        m = np.asarray(self.members, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ValueError("members must be a nonempty (count x dimension) matrix")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @classmethod
    def from_members(
        cls,
        ctx: SpaceContext,
        members: Sequence[Iterable[complex]],
        tolerance: float = DEFAULT_ORTHO_TOL,
    ) -> "OrthonormalFamily":
        """Build a family from explicit vectors, measuring its Gram defect.

        The result may be uncertified; use :func:`verify_orthonormal` or
        ``certified`` to check before feeding it to bound computations.
        """
        rows = np.vstack([as_vector(ctx, v) for v in members])
        if ctx.weights is None and rows.shape[0] > ctx.dimension:
            raise ValueError(
                "family size exceeds the dimension of a coordinate backend"
            )
        return cls(rows, _gram_defect(ctx, rows), tolerance)

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    @property
    def certified(self) -> bool:
        return self.gram_defect <= self.tolerance

    def member(self, index: int) -> Vector:
        return self.members[index]


@dataclass(frozen=True)
class OrthonormalityReport:
    gram_defect: float
    passed: bool


def _gram_defect(ctx: SpaceContext, rows: np.ndarray) -> float:
    if ctx.weights is None:
        gram = rows @ rows.conj().T
    else:
        gram = (rows * ctx.weights) @ rows.conj().T
    return float(np.max(np.abs(gram - np.eye(rows.shape[0]))))


def verify_orthonormal(ctx: SpaceContext, fam: OrthonormalFamily) -> OrthonormalityReport:
    """Recompute the Gram defect and compare against the family tolerance."""
    defect = _gram_defect(ctx, fam.members)
    return OrthonormalityReport(gram_defect=defect, passed=defect <= fam.tolerance)


def require_certified(fam: OrthonormalFamily) -> None:
    if not fam.certified:
        raise ValueError(
            f"family is not certified orthonormal: gram defect {fam.gram_defect:.3e} "
            f"exceeds tolerance {fam.tolerance:.3e}"
        )


def gram_schmidt(
    ctx: SpaceContext,
    raw: Sequence[Iterable[complex]],
    tol: float = DEFAULT_ORTHO_TOL,
) -> OrthonormalFamily:
    """Orthonormalize ``raw`` with modified Gram-Schmidt plus one
    re-orthogonalization pass.

    The second projection pass is what keeps the Gram defect near machine
    epsilon; classical single-pass Gram-Schmidt loses orthogonality well
    above the certification tolerances used here.  A pivot whose norm falls
    below ``RANK_DROP_FACTOR * max(input norms)`` raises
    :class:`DegeneracyError` naming the offending vector.
    """
    vectors = [as_vector(ctx, v).copy() for v in raw]
    if not vectors:
        raise ValueError("gram_schmidt needs at least one input vector")
    drop = RANK_DROP_FACTOR * max(norm(ctx, v) for v in vectors)
    members: list[np.ndarray] = []
    for position, v in enumerate(vectors):
        u = v
        for _ in range(2):
            for e in members:
                u = u - inner_product(ctx, u, e) * e
        pivot = norm(ctx, u)
        if pivot <= drop:
            raise DegeneracyError(
                f"input vector {position} is numerically dependent on its "
                f"predecessors (pivot norm {pivot:.3e}, drop threshold {drop:.3e})"
            )
        members.append(u / pivot)
    rows = np.vstack(members)
    defect = _gram_defect(ctx, rows)
    if defect > tol:
        raise DegeneracyError(
            f"orthonormalization stalled at gram defect {defect:.3e} > tol {tol:.3e}; "
            "the input is too ill-conditioned for this tolerance"
        )
    return OrthonormalFamily(rows, defect, tol)


def index_set(indices: Sequence[int], family_size: int) -> tuple[int, ...]:
    """Validate a finite index selection into a family (0-based positions).

    Must be nonempty, strictly increasing and within range.
    """
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ValueError("index set must be nonempty")
    if any(i < 0 or i >= family_size for i in idx):
        raise ValueError(f"index set {idx} out of range for family size {family_size}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"index set {idx} must be strictly increasing")
    return idx


def fourier_coefficients(
    ctx: SpaceContext,
    x: Vector,
    fam: OrthonormalFamily,
    indices: Sequence[int],
) -> dict[int, complex]:
    """Expansion coefficients <x, e_i> for each selected member."""
    require_certified(fam)
    idx = index_set(indices, fam.size)
    x = _conforming(ctx, x)
    return {i: inner_product(ctx, x, fam.members[i]) for i in idx}


def combination(
    fam: OrthonormalFamily, indices: Sequence[int], coefficients: Sequence[complex]
) -> Vector:
    """sum_i c_i e_i over the selected members."""
    idx = list(indices)
    coeffs = np.asarray(coefficients, dtype=np.complex128)
    if coeffs.shape != (len(idx),):
        raise ValueError("one coefficient per selected index is required")
    return coeffs @ fam.members[idx]


def family_projection(
    ctx: SpaceContext, x: Vector, fam: OrthonormalFamily, indices: Sequence[int]
) -> Vector:
    """Orthogonal projection of x onto span{e_i : i in indices}."""
    coeffs = fourier_coefficients(ctx, x, fam, indices)
    idx = sorted(coeffs)
    return combination(fam, idx, [coeffs[i] for i in idx])


def _conforming(ctx: SpaceContext, x: Vector) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.shape != (ctx.dimension,):
        raise ValueError(
            f"vector has shape {v.shape}, context dimension is {ctx.dimension}"
        )
    return v
