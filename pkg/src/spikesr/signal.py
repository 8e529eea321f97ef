"""Spike-train signal model: clustered node layouts, spectral sampling, and
shift/scale normalization.

A spike train is a finite sum of weighted point masses sum_j a_j delta(x - x_j)
with complex amplitudes and strictly increasing real nodes.  Its transform
is evaluated with the convention F(s) = sum_j a_j exp(-2 pi i s x_j), and the
unit-rate measurement sequence is m_k = F(-k) = sum_j a_j exp(2 pi i x_j k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpikeTrain",
    "ClusterGeometry",
    "SpectralSamples",
    "fourier_at",
    "clean_spectrum",
    "sample_spectrum",
    "moments",
    "standard_cluster_geometry",
    "make_clustered_nodes",
    "validate_cluster",
    "shift",
    "scale",
]


def _frozen_1d(values, dtype) -> np.ndarray:
    out = np.atleast_1d(np.asarray(values, dtype=dtype)).copy()
    if out.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SpikeTrain:
    """Weighted point masses at strictly increasing real positions."""

    amplitudes: np.ndarray
    nodes: np.ndarray

    def __post_init__(self):
        amps = _frozen_1d(self.amplitudes, complex)
        nodes = _frozen_1d(self.nodes, float)
        if len(amps) != len(nodes):
            raise ValueError("amplitudes and nodes must have equal length")
        if len(nodes) == 0:
            raise ValueError("a spike train needs at least one node")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "nodes", nodes)

    @property
    def d(self) -> int:
        return len(self.nodes)

    @property
    def sup_norm(self) -> float:
        """max(||a||_inf, ||x||_inf), the norm used to compare signals."""
        return float(max(np.abs(self.amplitudes).max(), np.abs(self.nodes).max()))

    def to_json_dict(self) -> dict:
        return {
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "nodes": [float(x) for x in self.nodes],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SpikeTrain":
        amps = [complex(re, im) for re, im in obj["amplitudes"]]
        return cls(amplitudes=np.array(amps), nodes=np.array(obj["nodes"], dtype=float))


@dataclass(frozen=True)
class ClusterGeometry:
    """Parameters of a clustered node configuration.

    p of the d nodes (indices kappa..kappa+p-1, 1-based) form a cluster of
    extent at most h with pairwise gaps at least tau*h; every pair involving a
    node outside the cluster is separated by at least eta*T and at most T.
    """

    p: int
    d: int
    h: float
    T: float
    tau: float
    eta: float
    kappa: int = 1

    def __post_init__(self):
        if not (2 <= self.p <= self.d):
            raise ValueError("cluster size p must satisfy 2 <= p <= d")
        if not (0 < self.h <= self.T):
            raise ValueError("cluster extent h must satisfy 0 < h <= T")
        if not (0 < self.tau <= 1):
            raise ValueError("tau must lie in (0, 1]")
        if not (0 < self.eta <= 1):
            raise ValueError("eta must lie in (0, 1]")
        if not (1 <= self.kappa <= self.d - self.p + 1):
            raise ValueError("kappa must index a contiguous cluster inside the node vector")

    @property
    def cluster_slice(self) -> slice:
        """0-based slice selecting the cluster nodes."""
        return slice(self.kappa - 1, self.kappa - 1 + self.p)


@dataclass(frozen=True)
class SpectralSamples:
    """Equispaced unit-rate spectral measurements with a recorded noise level.

    values[k] approximates m_k = F(-k); noise_bound is the requested bound on
    |values[k] - m_k| and actual_noise the measured maximum deviation (when the
    clean samples were known at construction).
    """

    values: np.ndarray
    count: int
    noise_bound: float
    actual_noise: float

    def __post_init__(self):
        vals = _frozen_1d(self.values, complex)
        if len(vals) != self.count:
            raise ValueError("count does not match the number of values")
        if self.noise_bound < 0 or self.actual_noise < 0:
            raise ValueError("noise magnitudes must be nonnegative")
        object.__setattr__(self, "values", vals)

    def to_json_dict(self) -> dict:
        return {
            "values": [[float(v.real), float(v.imag)] for v in self.values],
            "noise_bound": float(self.noise_bound),
            "actual_noise": float(self.actual_noise),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SpectralSamples":
        vals = np.array([complex(re, im) for re, im in obj["values"]])
        return cls(
            values=vals,
            count=len(vals),
            noise_bound=float(obj["noise_bound"]),
            actual_noise=float(obj["actual_noise"]),
        )


def fourier_at(train: SpikeTrain, s):
    """Evaluate F(s) = sum_j a_j exp(-2 pi i s x_j) at scalar or array s."""
    s_arr = np.asarray(s, dtype=float)
    phases = np.exp(-2j * np.pi * np.multiply.outer(s_arr, train.nodes))
    out = phases @ train.amplitudes
    return complex(out) if s_arr.ndim == 0 else out


def clean_spectrum(train: SpikeTrain, count: int) -> np.ndarray:
    """Noiseless unit-rate samples m_k = F(-k), k = 0..count-1."""
    if count < 1:
        raise ValueError("need at least one sample")
    k = np.arange(count)
    return np.exp(2j * np.pi * np.multiply.outer(k, train.nodes)) @ train.amplitudes


def sample_spectrum(
    train: SpikeTrain,
    count: int,
    noise_bound: float,
    rng_seed,
    noise_kind: str = "disk",
) -> SpectralSamples:
    """Noisy unit-rate samples values[k] = m_k + n_k with |n_k| <= noise_bound.

    noise_kind "disk" draws n_k = r exp(i theta) with r uniform on
    [0, noise_bound] and theta uniform on [0, 2 pi); "real" draws n_k uniform
    on [-noise_bound, noise_bound].  Deterministic given rng_seed.
    """
    if noise_bound < 0:
        raise ValueError("noise_bound must be nonnegative")
    clean = clean_spectrum(train, count)
    if noise_bound == 0:
        noise = np.zeros(count, dtype=complex)
    else:
        rng = np.random.default_rng(rng_seed)
        if noise_kind == "disk":
            radius = rng.uniform(0.0, noise_bound, count)
            theta = rng.uniform(0.0, 2.0 * np.pi, count)
            noise = radius * np.exp(1j * theta)
        elif noise_kind == "real":
            noise = rng.uniform(-noise_bound, noise_bound, count).astype(complex)
        else:
            raise ValueError(f"unknown noise_kind {noise_kind!r}")
    actual = float(np.abs(noise).max()) if count else 0.0
    return SpectralSamples(
        values=clean + noise,
        count=count,
        noise_bound=float(noise_bound),
        actual_noise=actual,
    )


def moments(train: SpikeTrain, count: int) -> np.ndarray:
    """Algebraic moments m_k = sum_j a_j x_j^k for k = 0..count-1."""
    if count < 1:
        raise ValueError("need at least one moment")
    k = np.arange(count)
    powers = np.power.outer(train.nodes, k).T  # count x d
    return powers @ train.amplitudes


def standard_cluster_geometry(p: int, d: int, h: float) -> ClusterGeometry:
    """Geometry of the standard experiment layout on [0, pi].

    The cluster occupies [0, h] with p equispaced nodes; the d-p remaining
    nodes split the rest of [0, pi] evenly, which gives T = pi,
    tau = 1/(p-1) and eta = (pi - h) / (pi (d - p + 1)).
    """
    if h >= math.pi:
        raise ValueError("cluster extent must be below pi")
    return ClusterGeometry(
        p=p,
        d=d,
        h=h,
        T=math.pi,
        tau=1.0 / (p - 1),
        eta=(math.pi - h) / (math.pi * (d - p + 1)),
        kappa=1,
    )


def make_clustered_nodes(geometry: ClusterGeometry) -> np.ndarray:
    """Node vector of the standard clustered layout on [0, pi].

    Cluster nodes sit at (j-1) h/(p-1) for j = 1..p; the remaining nodes are
    equispaced over the rest of the interval.  Requires kappa == 1 (the layout
    places the cluster first) and h < pi so the vector is strictly increasing.
    """
    if geometry.kappa != 1:
        raise ValueError("the standard layout places the cluster at the start (kappa == 1)")
    p, d, h = geometry.p, geometry.d, geometry.h
    if h >= math.pi:
        raise ValueError("cluster extent must be below pi")
    step = h / (p - 1)
    cluster = step * np.arange(p)
    rest_gap = (math.pi - (p - 1) * step) / (d - p + 1)
    rest = (p - 1) * step + rest_gap * np.arange(1, d - p + 1)
    nodes = np.concatenate([cluster, rest])
    if not np.all(np.diff(nodes) > 0):
        raise ValueError("layout parameters do not give strictly increasing nodes")
    return nodes


def validate_cluster(nodes, geometry: ClusterGeometry, rtol: float = 1e-9) -> bool:
    """Check the pairwise-distance conditions of a clustered configuration.

    Cluster pairs must satisfy tau h <= |x_j - x_k| <= h and every pair with at
    least one non-cluster node must satisfy eta T <= |x_l - x_j| <= T.  A
    relative slack rtol absorbs floating-point boundary cases.
    """
    x = np.asarray(nodes, dtype=float)
    if len(x) != geometry.d:
        return False
    in_cluster = np.zeros(len(x), dtype=bool)
    in_cluster[geometry.cluster_slice] = True
    lo_c, hi_c = geometry.tau * geometry.h, geometry.h
    lo_n, hi_n = geometry.eta * geometry.T, geometry.T
    for j in range(len(x)):
        for k in range(j + 1, len(x)):
            gap = abs(x[k] - x[j])
            if in_cluster[j] and in_cluster[k]:
                lo, hi = lo_c, hi_c
            else:
                lo, hi = lo_n, hi_n
            slack = rtol * max(1.0, hi)
            if not (lo - slack <= gap <= hi + slack):
                return False
    return True


def shift(train: SpikeTrain, alpha: float) -> SpikeTrain:
    """Translate every node by -alpha; amplitudes are unchanged."""
    return SpikeTrain(amplitudes=train.amplitudes, nodes=train.nodes - alpha)


def scale(train: SpikeTrain, T: float) -> SpikeTrain:
    """Divide every node by T > 0; amplitudes are unchanged."""
    if T <= 0:
        raise ValueError("scale factor must be positive")
    return SpikeTrain(amplitudes=train.amplitudes, nodes=train.nodes / T)
