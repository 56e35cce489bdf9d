"""Brute-force quadrature oracle for small node counts.

Estimates P(exactly m components) by a midpoint-rule scan of the unit
cube of node positions (scaled so r = 1, L = rho), classifying every grid
cell with the same gap-counting rule the rest of the package uses.  It
contains no alternating-sum code at all, so a sign or truncation bug in
the closed-form evaluator cannot cancel against it.

Cost is grid**n cells, which caps the node count at 3.  For the free
model and an anchor at 0 the classification is exact integer arithmetic
on grid indices; a general anchor position falls back to a float path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numba as nb
import numpy as np

from .exact import ModelKind, Ratio
from .model import count_components_batch

__all__ = ["QuadratureResult", "quadrature_q_m", "quadrature_distribution"]

MAX_NODES = 3
MIN_GRID = 64


@dataclass(frozen=True)
class QuadratureResult:
    """Midpoint-rule probability estimate with a grid-refinement error proxy.

    ``richardson_error`` is the larger of the last two refinement
    differences, max(|v(g) - v(g/2)|, |v(g/2) - v(g/4)|).  A single
    difference is not safe here: with power-of-two refinement and a
    rational rho the floor-based cell classification can repeat its bias
    exactly between two grids, collapsing |v(g) - v(g/2)| to zero while
    the true error stays at O(1/g).  Two consecutive coincidences are far
    rarer, and the method is first order on an indicator integrand, so
    the pairwise max tracks the real error up to a modest constant.
    """

    value: float
    grid_points_per_dim: int
    richardson_error: float


@nb.njit(cache=True)
def _scan3(grid: int, jmax: int, amax: int, anchored: bool) -> np.ndarray:  # pragma: no cover
    counts = np.zeros(6, dtype=np.int64)
    for a in range(grid):
        for b in range(grid):
            lo = a if a < b else b
            hi = a if a > b else b
            for c in range(grid):
                mn = lo if lo < c else c
                mx = hi if hi > c else c
                md = a + b + c - mn - mx
                m = 1
                if md - mn > jmax:
                    m += 1
                if mx - md > jmax:
                    m += 1
                if anchored and mn > amax:
                    m += 1
                counts[m] += 1
    return counts


def _scan12(grid: int, n: int, jmax: int, amax: int, anchored: bool) -> np.ndarray:
    j = np.arange(grid, dtype=np.int64)
    if n == 1:
        m = np.ones(grid, dtype=np.int64)
        if anchored:
            m += j > amax
    else:
        j1 = j[:, None]
        j2 = j[None, :]
        m = 1 + (np.abs(j1 - j2) > jmax).astype(np.int64)
        if anchored:
            m += np.minimum(j1, j2) > amax
    return np.bincount(m.ravel(), minlength=n + 3)


def _scan_float(grid: int, n: int, rho: float, anchor: float) -> np.ndarray:
    """General-anchor path: build cell midpoints, insert the anchor, and
    reuse the shared batch gap counter.  Works in r = 1 units."""
    u = (np.arange(grid) + 0.5) * (rho / grid)
    counts = np.zeros(n + 3, dtype=np.int64)
    if n == 1:
        pts = u[:, None]
        chunks = [pts]
    elif n == 2:
        pts = np.stack(np.meshgrid(u, u, indexing="ij"), axis=-1).reshape(-1, 2)
        chunks = [pts]
    else:
        chunks = (
            np.stack(
                np.meshgrid(u[i : i + 1], u, u, indexing="ij"), axis=-1
            ).reshape(-1, 3)
            for i in range(grid)
        )
    for block in chunks:
        full = np.concatenate(
            [block, np.full((block.shape[0], 1), anchor)], axis=1
        )
        full.sort(axis=1)
        m = count_components_batch(full, 1.0)
        counts += np.bincount(m, minlength=n + 3)
    return counts


@lru_cache(maxsize=64)
def _distribution_pass(
    n: int, num: int, den: int, grid: int, anchor: float | None
) -> tuple[float, ...]:
    """Component-count probabilities from one full grid scan.

    rho = num/den exactly.  Integer index arithmetic keeps the gap rule
    exact for the free model and anchor 0: a sorted-index gap dj
    disconnects iff dj * num > grid * den, and a node at index j reaches
    an anchor at 0 iff (2 j + 1) * num <= 2 * grid * den.
    """
    if anchor is None or anchor == 0.0:
        anchored = anchor is not None
        jmax = (grid * den) // num
        amax = ((2 * grid * den) // num - 1) // 2
        if n == 3:
            counts = _scan3(grid, jmax, amax, anchored)
        else:
            counts = _scan12(grid, n, jmax, amax, anchored)
    else:
        counts = _scan_float(grid, n, num / den, anchor)
    total = grid**n
    probs = np.zeros(n + 2)
    for m, c in enumerate(counts):
        if m <= n + 1:
            probs[m] = c / total
    return tuple(probs)


def _resolve_anchor(model: ModelKind, anchor: float | None) -> float | None:
    if anchor is not None:
        return float(anchor)
    return 0.0 if model is ModelKind.ANCHORED else None


def quadrature_distribution(
    model: ModelKind,
    n: int,
    ratio: Ratio,
    grid: int,
    anchor: float | None = None,
) -> dict[int, QuadratureResult]:
    """All component-count probabilities at once, with refinement errors.

    ``anchor`` overrides the model's fixed-node position, in units of the
    transmission radius (so it lives on [0, rho]).
    """
    if not 1 <= n <= MAX_NODES:
        raise ValueError(f"quadrature supports 1 <= n <= {MAX_NODES}; cost is grid**n")
    if grid < MIN_GRID or grid % 2:
        raise ValueError(f"grid must be an even number >= {MIN_GRID}")
    a = _resolve_anchor(model, anchor)
    if a is not None and not 0 <= a <= ratio.value:
        raise ValueError("anchor must lie on the segment [0, rho]")
    num, den = ratio.exact.numerator, ratio.exact.denominator
    fine = _distribution_pass(n, num, den, grid, a)
    mid = _distribution_pass(n, num, den, grid // 2, a)
    coarse = _distribution_pass(n, num, den, grid // 4, a)
    max_m = n + (0 if a is None else 1)
    return {
        m: QuadratureResult(
            fine[m],
            grid,
            max(abs(fine[m] - mid[m]), abs(mid[m] - coarse[m])),
        )
        for m in range(1, max_m + 1)
    }


def quadrature_q_m(
    model: ModelKind,
    n: int,
    m: int,
    ratio: Ratio,
    grid: int,
    anchor: float | None = None,
) -> QuadratureResult:
    """Midpoint-rule estimate of P(exactly m components)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    dist = quadrature_distribution(model, n, ratio, grid, anchor)
    if m in dist:
        return dist[m]
    return QuadratureResult(0.0, grid, 0.0)
