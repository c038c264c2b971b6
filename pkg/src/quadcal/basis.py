"""Graded-lexicographic monomial bases and Vandermonde matrices.

The polynomial space used for quadrature exactness is spanned by the
first ``count`` monomials in graded-lexicographic order.  The ordering is
graded by total degree; within a degree, indices with a higher exponent
of the first coordinate come first.  This makes every basis a prefix of
any larger basis, so exactness spaces are nested automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _compositions(total: int, parts: int):
    """Yield exponent tuples of `parts` entries summing to `total`,
    first coordinate descending (intra-degree tie break)."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


@dataclass(frozen=True)
class MultiIndexBasis:
    """Ordered monomial basis of a `dimension`-variate polynomial space.

    ``exponents`` has shape (count, dimension); row j holds the exponents
    of the j-th basis monomial.  If ``box`` is set (pair of lower/upper
    bound vectors), monomials are evaluated in coordinates affinely mapped
    from the box to [-1, 1]^d, which only changes the basis of the spanned
    space but keeps high-degree Vandermonde systems well conditioned.
    """

    dimension: int
    exponents: np.ndarray
    box: tuple[np.ndarray, np.ndarray] | None = field(default=None)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        expo = np.asarray(self.exponents, dtype=np.int64)
        if expo.ndim != 2 or expo.shape[1] != self.dimension:
            raise ValueError("exponents must have shape (count, dimension)")
        if np.any(expo < 0):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "exponents", expo)

    def __len__(self) -> int:
        return self.exponents.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    def map_points(self, points: np.ndarray) -> np.ndarray:
        """Map points into the evaluation coordinates of the basis."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {points.shape[1]}, expected {self.dimension}"
            )
        if self.box is None:
            return points
        lo, hi = self.box
        return 2.0 * (points - lo) / (hi - lo) - 1.0


def enumerate_basis(d: int, count: int, box=None) -> MultiIndexBasis:
    """First `count` multi-indices of dimension `d` in graded-lex order.

    The first index is always all-zeros (the constant monomial) and
    enumerate_basis(d, n) is a prefix of enumerate_basis(d, n + 1).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    rows = []
    degree = 0
    while len(rows) < count:
        for expo in _compositions(degree, d):
            rows.append(expo)
            if len(rows) == count:
                break
        degree += 1
    if box is not None:
        lo = np.asarray(box[0], dtype=float)
        hi = np.asarray(box[1], dtype=float)
        box = (lo, hi)
    return MultiIndexBasis(dimension=d, exponents=np.array(rows, dtype=np.int64), box=box)


def total_degree_count(degree: int, d: int) -> int:
    """Number of d-variate monomials of total degree <= degree."""
    from math import comb

    return comb(degree + d, d)


def evaluate_monomial(index, point) -> float:
    """Evaluate a single monomial given by its exponent tuple at a point."""
    index = np.asarray(index, dtype=np.int64)
    point = np.asarray(point, dtype=float)
    if index.shape != point.shape:
        raise ValueError("index and point must have the same length")
    return float(np.prod(point**index))


def vandermonde(basis: MultiIndexBasis, points) -> np.ndarray:
    """Vandermonde matrix V[j, k] = phi_j(x_k), shape (count, npoints).

    Points are mapped through the basis box (if any) before evaluation.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("empty point list")
    t = basis.map_points(points)
    n = t.shape[0]
    expo = basis.exponents
    out = np.ones((len(basis), n))
    for i in range(basis.dimension):
        max_e = int(expo[:, i].max())
        # powers[p] = t[:, i] ** p
        powers = np.ones((max_e + 1, n))
        for p in range(1, max_e + 1):
            powers[p] = powers[p - 1] * t[:, i]
        out *= powers[expo[:, i]]
    return out
