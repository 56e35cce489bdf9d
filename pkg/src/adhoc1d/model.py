"""Network model types and deterministic component counting on a line.

A network is n points dropped uniformly on a segment of length L, plus an
optional fixed access point; two vertices are linked when they are at most
a transmission radius r apart.  On a line the number of connected
components is 1 plus the number of sorted-neighbour gaps that exceed r,
so no adjacency structure is ever built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "NetworkConfig",
    "Realization",
    "ComponentDistribution",
    "InvalidConfigError",
    "config_violations",
    "validate_config",
    "count_components",
    "count_components_batch",
]


class InvalidConfigError(ValueError):
    """Raised when a NetworkConfig violates its invariants.

    Carries the complete list of violations, not just the first one.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class NetworkConfig:
    """Physical parameters of one experiment.

    n random nodes on [0, length], transmission radius ``radius``, and an
    optional fixed access point at ``access_point``.
    """

    n: int
    length: float
    radius: float
    access_point: float | None = None

    @property
    def rho(self) -> float:
        """Dimensionless length-to-radius ratio L/r."""
        return self.length / self.radius

    @property
    def vertex_count(self) -> int:
        return self.n + (1 if self.access_point is not None else 0)


def config_violations(config: NetworkConfig) -> list[str]:
    """Return every invariant violation of *config* (empty list if valid)."""
    problems = []
    if not isinstance(config.n, int) or config.n < 0:
        problems.append("n: node count must be a non-negative integer")
    if not (config.length > 0) or not math.isfinite(config.length):
        problems.append("length: segment length must be positive and finite")
    if not (config.radius > 0) or not math.isfinite(config.radius):
        problems.append("radius: transmission radius must be positive and finite")
    x = config.access_point
    if x is not None and not (0 <= x <= config.length):
        problems.append("access_point: position must lie in [0, length]")
    return problems


def validate_config(config: NetworkConfig) -> NetworkConfig:
    """Return *config* unchanged, or raise InvalidConfigError listing all problems."""
    problems = config_violations(config)
    if problems:
        raise InvalidConfigError(problems)
    return config


@dataclass(frozen=True)
class Realization:
    """One realized set of vertex positions, sorted ascending.

    Includes the access point when the source config has one.
    """

    positions: tuple[float, ...]
    source_config: NetworkConfig

    def __post_init__(self):
        pos = self.positions
        if any(pos[i] > pos[i + 1] for i in range(len(pos) - 1)):
            raise ValueError("positions must be sorted ascending")
        L = self.source_config.length
        if pos and (pos[0] < 0 or pos[-1] > L):
            raise ValueError("positions must lie in [0, L]")
        if len(pos) != self.source_config.vertex_count:
            raise ValueError(
                f"expected {self.source_config.vertex_count} positions, got {len(pos)}"
            )

    @classmethod
    def from_unsorted(cls, points: Sequence[float], config: NetworkConfig) -> "Realization":
        return cls(tuple(sorted(points)), config)

    def component_count(self, radius: float | None = None) -> int:
        r = self.source_config.radius if radius is None else radius
        return count_components(self.positions, r)


def count_components(positions: Sequence[float] | Realization, radius: float) -> int:
    """Number of connected components of the interval graph on *positions*.

    Positions must be sorted ascending; vertices at distance exactly
    ``radius`` are connected (the edge rule is <=).  Empty input has zero
    components.
    """
    if isinstance(positions, Realization):
        positions = positions.positions
    if radius <= 0:
        raise ValueError("radius must be positive")
    if len(positions) == 0:
        return 0
    m = 1
    prev = positions[0]
    for p in positions[1:]:
        if p < prev:
            raise ValueError("positions must be sorted ascending")
        if p - prev > radius:
            m += 1
        prev = p
    return m


def count_components_batch(sorted_positions: np.ndarray, radius: float) -> np.ndarray:
    """Component counts for many realizations at once.

    *sorted_positions* is a (trials, vertices) array, each row sorted
    ascending.  Returns an int64 vector of per-row component counts.
    Rows with zero columns count as zero components.
    """
    if sorted_positions.shape[1] == 0:
        return np.zeros(sorted_positions.shape[0], dtype=np.int64)
    gaps = np.diff(sorted_positions, axis=1)
    return 1 + (gaps > radius).sum(axis=1, dtype=np.int64)


@dataclass(frozen=True)
class ComponentDistribution:
    """Probability vector over component counts m, with provenance.

    ``provenance`` is one of "exact-float", "exact-rational",
    "monte-carlo", "oracle".  ``config`` identifies what the distribution
    describes: either a NetworkConfig or a (model, n, rho) triple.
    ``details`` optionally carries per-m evaluation diagnostics.
    """

    probs: Mapping[int, float]
    provenance: str
    config: object
    details: Mapping[int, object] | None = field(default=None, compare=False)

    _PROVENANCES = ("exact-float", "exact-rational", "monte-carlo", "oracle")

    def __post_init__(self):
        if self.provenance not in self._PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def total(self) -> float:
        return sum(self.probs.values())

    def __getitem__(self, m: int) -> float:
        return self.probs.get(m, 0.0)
