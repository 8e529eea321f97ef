"""Matrix Pencil recovery of spike parameters from noisy unit-rate spectra.

Given samples values[k] ~ sum_j a_j exp(2 pi i x_j k), the noiseless numbers
z_j = exp(2 pi i x_j) are the rank-reducing values of the pencil formed by the
two row-shifted blocks of the sample Hankel matrix.  With noise, both blocks
are first projected onto their rank-d dominant subspaces and the reduced d x d
pencil is solved instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EigenFailureError, RankDeficiencyError
from .signal import SpectralSamples, SpikeTrain

__all__ = [
    "RecoveryResult",
    "build_hankel",
    "hankel_up",
    "hankel_down",
    "default_pencil_param",
    "mp_recover",
]


@dataclass(frozen=True)
class RecoveryResult:
    """Estimated signal plus diagnostics of the pencil solve.

    Node estimates live in (-1/2, 1/2] (principal angles of the recovered
    eigenvalues divided by 2 pi).  sigma_upper / sigma_lower are the d retained
    singular values of the two Hankel blocks; eigenvalues are the raw pencil
    eigenvalues before angle extraction.
    """

    estimate: SpikeTrain
    pencil_param: int
    sigma_upper: np.ndarray
    sigma_lower: np.ndarray
    eigenvalues: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "nodes": [float(x) for x in self.estimate.nodes],
            "amplitudes": [
                [float(a.real), float(a.imag)] for a in self.estimate.amplitudes
            ],
            "L": int(self.pencil_param),
            "sigma_A": [float(s) for s in self.sigma_upper],
            "sigma_B": [float(s) for s in self.sigma_lower],
        }


def _sample_values(samples) -> np.ndarray:
    if isinstance(samples, SpectralSamples):
        return samples.values
    return np.atleast_1d(np.asarray(samples, dtype=complex))


def build_hankel(samples, pencil_param: int) -> np.ndarray:
    """(L+1) x (N-L) Hankel matrix H[i, j] = values[i + j]."""
    values = _sample_values(samples)
    n = len(values)
    if not 1 <= pencil_param <= n - 1:
        raise ValueError(f"pencil parameter must lie in [1, {n - 1}]")
    idx = np.add.outer(np.arange(pencil_param + 1), np.arange(n - pencil_param))
    return values[idx]


def hankel_up(hankel: np.ndarray) -> np.ndarray:
    """The block with the last row deleted."""
    return hankel[:-1, :]


def hankel_down(hankel: np.ndarray) -> np.ndarray:
    """The block with the first row deleted."""
    return hankel[1:, :]


def default_pencil_param(count: int) -> int:
    """ceil(N / 2), the pencil parameter used throughout the experiments."""
    if count < 3:
        raise ValueError("need at least 3 samples")
    return -(-count // 2)


def mp_recover(
    samples,
    d: int,
    pencil_param: Optional[int] = None,
    rank_tol: float = 1e-13,
) -> RecoveryResult:
    """Recover d nodes and amplitudes from N >= 2d unit-rate samples.

    The two shifted Hankel blocks are reduced by rank-d truncated SVDs, the
    d x d pencil is solved through the inverse of its diagonal side, and the
    node amplitudes are fitted by least squares on the N x d Fourier
    Vandermonde of the recovered angles.  Nodes are returned sorted ascending.

    Raises RankDeficiencyError when a retained singular value of the lower
    block falls under rank_tol times its largest one, and EigenFailureError
    when the eigenvalue solve fails or yields coincident nodes.
    """
    values = _sample_values(samples)
    n = len(values)
    if d < 1:
        raise ValueError("model order d must be at least 1")
    if n < 2 * d:
        raise ValueError(f"need at least 2 d = {2 * d} samples, got {n}")
    L = default_pencil_param(n) if pencil_param is None else pencil_param
    if not d <= L <= n - d:
        raise ValueError(f"pencil parameter must lie in [{d}, {n - d}]")

    hankel = build_hankel(values, L)
    upper = hankel_up(hankel)
    lower = hankel_down(hankel)

    u1, s1, v1h = np.linalg.svd(upper, full_matrices=False)
    u2, s2, v2h = np.linalg.svd(lower, full_matrices=False)
    u1, s1, v1h = u1[:, :d], s1[:d], v1h[:d]
    u2, s2, v2h = u2[:, :d], s2[:d], v2h[:d]

    if s2[-1] < rank_tol * s2[0]:
        raise RankDeficiencyError(
            "rank deficiency: truncated spectrum of the lower block is unsafe to invert"
        )

    # Reduced pencil: project the upper block onto the lower block's subspaces;
    # the lower block itself reduces to its diagonal singular-value matrix.
    reduced_upper = ((u2.conj().T @ u1) * s1) @ (v1h @ v2h.conj().T)
    try:
        eigs = np.linalg.eigvals(reduced_upper / s2[:, None])
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigen failure: {exc}") from exc
    # The pencil orientation is fixed by exact recovery on noiseless data:
    # the eigenvalues above converge to 1/z_j, so invert.
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 1.0 / eigs

    nodes = np.angle(z) / (2.0 * np.pi)
    order = np.argsort(nodes, kind="stable")
    nodes = nodes[order]
    z = z[order]
    if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0):
        raise EigenFailureError("eigen failure: recovered nodes are not distinct")

    vand = np.exp(2j * np.pi * np.multiply.outer(np.arange(n), nodes))
    amps, *_ = np.linalg.lstsq(vand, values, rcond=None)

    return RecoveryResult(
        estimate=SpikeTrain(amplitudes=amps, nodes=nodes),
        pencil_param=L,
        sigma_upper=s1.copy(),
        sigma_lower=s2.copy(),
        eigenvalues=z,
    )
