"""Blowup factors and conditioning analysis for decimated spectral sampling.

Mapping nodes x_j to points exp(2 pi i lambda x_j) on the unit circle turns
the choice of sampling rate lambda into a separation problem: the set of rates
at which two nodes stay angularly close is a periodic union of short intervals,
and removing those unions over all pairs involving a non-cluster node leaves
the admissible rates.  Row-wise bounds on the inverse confluent Vandermonde of
the mapped nodes then predict how recovery errors amplify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyAdmissibleSetError, NearCoincidentNodesError
from .signal import ClusterGeometry

__all__ = [
    "IntervalSet",
    "JacobianBoundReport",
    "angular_distance",
    "sigma_intervals",
    "admissible_lambdas",
    "confluent_vandermonde",
    "gautschi_bounds",
    "predicted_condition_numbers",
]


class IntervalSet:
    """Finite union of disjoint closed intervals, kept sorted.

    Overlapping or touching inputs are merged on construction; degenerate
    single-point intervals are allowed.
    """

    __slots__ = ("_intervals",)

    def __init__(self, intervals=()):
        pairs = []
        for a, b in intervals:
            a, b = float(a), float(b)
            if b < a:
                raise ValueError(f"invalid interval [{a}, {b}]")
            pairs.append((a, b))
        pairs.sort()
        merged: list[list[float]] = []
        for a, b in pairs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self._intervals = tuple((a, b) for a, b in merged)

    @property
    def intervals(self) -> tuple:
        return self._intervals

    def __len__(self) -> int:
        return len(self._intervals)

    def __iter__(self):
        return iter(self._intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._intervals == other._intervals

    def __repr__(self) -> str:
        return f"IntervalSet({list(self._intervals)!r})"

    @property
    def is_empty(self) -> bool:
        return not self._intervals

    def measure(self) -> float:
        return float(sum(b - a for a, b in self._intervals))

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(a - tol <= x <= b + tol for a, b in self._intervals)

    def __contains__(self, x) -> bool:
        return self.contains(float(x))

    def padded(self, pad: float) -> "IntervalSet":
        """Grow every component outward by pad (components may merge)."""
        return IntervalSet((a - pad, b + pad) for a, b in self._intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self._intervals) + list(other._intervals))

    def intersect(self, lo: float, hi: float) -> "IntervalSet":
        """Intersection with the closed interval [lo, hi]."""
        out = []
        for a, b in self._intervals:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return IntervalSet(out)

    def complement_within(self, lo: float, hi: float) -> "IntervalSet":
        """Closure of [lo, hi] minus this set."""
        if hi < lo:
            raise ValueError("empty host interval")
        out = []
        cursor = lo
        for a, b in self.intersect(lo, hi):
            if a > cursor:
                out.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < hi:
            out.append((cursor, hi))
        if not out and self.is_empty:
            out.append((lo, hi))
        return IntervalSet(out)

    def to_json_dict(self) -> dict:
        return {"intervals": [[a, b] for a, b in self._intervals]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "IntervalSet":
        return cls(obj["intervals"])


@dataclass(frozen=True)
class JacobianBoundReport:
    """Analytic row bounds for the inverse confluent Vandermonde of a node set,
    together with the measured l1 row norms of the actually computed inverse.

    Rows 1..d of the inverse act on amplitude coordinates, rows d+1..2d on node
    coordinates; the analytic bounds are (1 + 2 (1+|z_j|) Delta_j) Gamma_j and
    (1 + |z_j|) Gamma_j respectively.
    """

    delta: np.ndarray
    gamma: np.ndarray
    amplitude_row_bounds: np.ndarray
    node_row_bounds: np.ndarray
    empirical_amplitude_row_norms: np.ndarray
    empirical_node_row_norms: np.ndarray
    condition_number: float

    def to_json_dict(self) -> dict:
        return {
            "delta": list(map(float, self.delta)),
            "gamma": list(map(float, self.gamma)),
            "amplitude_row_bounds": list(map(float, self.amplitude_row_bounds)),
            "node_row_bounds": list(map(float, self.node_row_bounds)),
            "empirical_amplitude_row_norms": list(
                map(float, self.empirical_amplitude_row_norms)
            ),
            "empirical_node_row_norms": list(map(float, self.empirical_node_row_norms)),
            "condition_number": float(self.condition_number),
        }


def angular_distance(alpha: complex, beta: complex) -> float:
    """|Arg(alpha / beta)| with the principal branch, a value in [0, pi]."""
    if alpha == 0 or beta == 0:
        raise ValueError("angular distance is undefined for zero")
    return float(abs(np.angle(complex(alpha) / complex(beta))))


def sigma_intervals(delta: float, alpha: float, interval) -> IntervalSet:
    """Rates lambda in [a, b] at which two nodes separated by delta stay within
    angular distance alpha after mapping to the unit circle.

    The result is the intersection of [a, b] with the periodic union of
    closed intervals of half-width alpha / (2 pi delta) centered at the
    integer multiples of 1 / delta.
    """
    if delta <= 0:
        raise ValueError("node separation must be positive")
    if not 0 < alpha <= math.pi:
        raise ValueError("angular threshold must lie in (0, pi]")
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        raise ValueError("empty interval")
    half_width = alpha / (2.0 * math.pi * delta)
    period = 1.0 / delta
    first = math.ceil((a - half_width) / period)
    last = math.floor((b + half_width) / period)
    pieces = []
    for ell in range(first, last + 1):
        center = ell * period
        lo, hi = max(center - half_width, a), min(center + half_width, b)
        if lo <= hi:
            pieces.append((lo, hi))
    return IntervalSet(pieces)


def admissible_lambdas(
    nodes,
    geometry: ClusterGeometry,
    omega: float,
    alpha: float | None = None,
    pad: float = 1e-12,
) -> IntervalSet:
    """Blowup factors in [omega/(2(2d-1)), omega/(2d-1)] keeping mapped nodes apart.

    Every pair involving a non-cluster node must keep mapped angular distance
    at least alpha (default 1/d^2); cluster pairs automatically satisfy the
    linear separation 2 pi lambda tau h on this range because omega h is capped
    at (2d-1)/2.  The exclusion intervals are padded outward by pad so that the
    returned complement is conservative.

    Raises EmptyAdmissibleSetError when nothing in the range survives.
    """
    x = np.asarray(nodes, dtype=float)
    d = geometry.d
    if len(x) != d:
        raise ValueError("node count does not match the geometry")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if omega * geometry.h > (2 * d - 1) / 2 + 1e-12:
        raise ValueError("omega exceeds the cluster condition omega h <= (2d-1)/2")
    if alpha is None:
        alpha = 1.0 / d**2
    lo = omega / (2.0 * (2 * d - 1))
    hi = omega / (2 * d - 1)
    in_cluster = np.zeros(d, dtype=bool)
    in_cluster[geometry.cluster_slice] = True
    excluded = IntervalSet()
    for j in range(d):
        for k in range(j + 1, d):
            if in_cluster[j] and in_cluster[k]:
                continue
            sep = abs(x[k] - x[j])
            excluded = excluded.union(sigma_intervals(sep, alpha, (lo, hi)))
    admissible = excluded.padded(pad).complement_within(lo, hi)
    if admissible.is_empty:
        raise EmptyAdmissibleSetError(
            "empty admissible set: every rate in the range violates a separation condition"
        )
    return admissible


def confluent_vandermonde(z) -> np.ndarray:
    """2d x 2d confluent Vandermonde of d distinct values: plain power columns
    followed by their derivative columns."""
    w = np.atleast_1d(np.asarray(z, dtype=complex))
    d = len(w)
    k = np.arange(2 * d)
    plain = np.power.outer(w, k).T  # 2d x d
    deriv = k[:, None] * np.power.outer(w, np.maximum(k - 1, 0)).T
    deriv[0, :] = 0.0
    return np.hstack([plain, deriv])


def gautschi_bounds(z, min_gap: float = 1e-12) -> JacobianBoundReport:
    """Closed-form l1 row bounds for the inverse confluent Vandermonde, plus the
    measured row norms of the computed inverse for a dominance check.

    Delta_j sums the reciprocal gaps from node j, Gamma_j is the squared
    product of (1+|z_l|)/|z_j-z_l| over the other nodes; empty sums and
    products (d = 1) give 0 and 1.
    """
    w = np.atleast_1d(np.asarray(z, dtype=complex))
    d = len(w)
    gaps = np.abs(w[:, None] - w[None, :])
    if d > 1 and gaps[~np.eye(d, dtype=bool)].min() < min_gap:
        raise NearCoincidentNodesError("near-coincident nodes: separation below threshold")

    delta = np.zeros(d)
    gamma = np.ones(d)
    for j in range(d):
        others = [l for l in range(d) if l != j]
        if others:
            delta[j] = float(np.sum(1.0 / gaps[j, others]))
            gamma[j] = float(
                np.prod((1.0 + np.abs(w[others])) / gaps[j, others]) ** 2
            )
    amp_bounds = (1.0 + 2.0 * (1.0 + np.abs(w)) * delta) * gamma
    node_bounds = (1.0 + np.abs(w)) * gamma

    matrix = confluent_vandermonde(w)
    inverse = np.linalg.inv(matrix)
    row_norms = np.abs(inverse).sum(axis=1)
    return JacobianBoundReport(
        delta=delta,
        gamma=gamma,
        amplitude_row_bounds=amp_bounds,
        node_row_bounds=node_bounds,
        empirical_amplitude_row_norms=row_norms[:d],
        empirical_node_row_norms=row_norms[d:],
        condition_number=float(np.linalg.cond(matrix)),
    )


def predicted_condition_numbers(
    geometry: ClusterGeometry, omega: float
) -> list[tuple[float, float]]:
    """Per-node (node factor, amplitude factor) error-amplification scaling
    shapes, with all proportionality constants set to one.

    Cluster nodes amplify like (omega tau h)^{-2p+2} / omega for nodes and
    (omega tau h)^{-2p+1} for amplitudes; the rest sit at the 1/omega and 1
    baselines.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    p = geometry.p
    srf_gap = omega * geometry.tau * geometry.h
    cluster_node = (1.0 / omega) * srf_gap ** (-2 * p + 2)
    cluster_amp = srf_gap ** (-2 * p + 1)
    in_cluster = np.zeros(geometry.d, dtype=bool)
    in_cluster[geometry.cluster_slice] = True
    return [
        (cluster_node, cluster_amp) if in_cluster[j] else (1.0 / omega, 1.0)
        for j in range(geometry.d)
    ]
