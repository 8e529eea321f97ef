"""Worst-case cluster perturbations: signals that move nodes and amplitudes as
far as the noise level permits while barely changing the spectrum.

The construction recenters the cluster, keeps its first 2p-1 power moments,
bumps the last one by epsilon, and re-solves the moment system of order p.
The resulting signal matches the original everywhere outside the cluster and
deviates from it spectrally by an amount proportional to epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateSystemError,
    EpsilonTooLargeError,
    RepeatedRootsError,
)
from .prony import prony_map, prony_solve
from .signal import ClusterGeometry, SpikeTrain, fourier_at

__all__ = [
    "WorstCaseReport",
    "worst_case_signal",
    "verify_spectral_deviation",
    "displacement_scaling_probe",
]


@dataclass(frozen=True)
class WorstCaseReport:
    """Perturbed signal plus measured deviations from the source signal.

    moment_match_error is the worst mismatch of the centered-cluster moments
    of orders 0..2p-2; last_moment_delta the change in the order-(2p-1) moment
    (equal to the requested epsilon up to roundoff); the displacements are
    maxima over the cluster; spectral_deviation is the maximum transform
    difference over a frequency grid.
    """

    perturbed: SpikeTrain
    moment_match_error: float
    last_moment_delta: float
    node_displacement: float
    amplitude_displacement: float
    spectral_deviation: float

    def to_json_dict(self) -> dict:
        return {
            "perturbed": self.perturbed.to_json_dict(),
            "moment_match_error": float(self.moment_match_error),
            "last_moment_delta": float(self.last_moment_delta),
            "node_displacement": float(self.node_displacement),
            "amplitude_displacement": float(self.amplitude_displacement),
            "spectral_deviation": float(self.spectral_deviation),
        }


def verify_spectral_deviation(
    original: SpikeTrain,
    perturbed: SpikeTrain,
    omega: float,
    grid_points: int,
) -> float:
    """Maximum of |F_perturbed(s) - F_original(s)| over an equispaced grid on
    [-omega, omega]."""
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    grid = np.linspace(-omega, omega, grid_points)
    return float(np.abs(fourier_at(perturbed, grid) - fourier_at(original, grid)).max())


def worst_case_signal(
    train: SpikeTrain,
    geometry: ClusterGeometry,
    epsilon: float,
    omega: float | None = None,
    grid_points: int = 1001,
    imag_tol: float = 1e-9,
) -> WorstCaseReport:
    """Build the worst-case perturbation of the cluster part of a signal.

    The cluster amplitudes must be real (the construction solves a real moment
    system).  Steps: center the cluster at the midpoint of its extreme nodes,
    compute its first 2p power moments, add epsilon to the last one, re-solve
    the moment system of order p, and splice the perturbed cluster back while
    leaving the non-cluster part untouched.

    Raises EpsilonTooLargeError when the perturbed system has complex or
    coincident nodes (imaginary parts above imag_tol survive the snap), or
    when the displaced cluster would break the global node ordering.

    The spectral deviation in the report is measured on [-omega, omega] with
    omega defaulting to 1/h.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    p = geometry.p
    if train.d != geometry.d:
        raise ValueError("signal size does not match the geometry")
    sl = geometry.cluster_slice
    omega_eff = (1.0 / geometry.h) if omega is None else float(omega)

    cluster_amps = train.amplitudes[sl]
    if np.abs(cluster_amps.imag).max() > 1e-12 * max(1.0, np.abs(cluster_amps).max()):
        raise ValueError("cluster amplitudes must be real")
    amps_c = cluster_amps.real.astype(float)
    nodes_c = train.nodes[sl]

    if epsilon == 0:
        return WorstCaseReport(
            perturbed=train,
            moment_match_error=0.0,
            last_moment_delta=0.0,
            node_displacement=0.0,
            amplitude_displacement=0.0,
            spectral_deviation=0.0,
        )

    center = 0.5 * (nodes_c[0] + nodes_c[-1])
    centered = nodes_c - center
    g = prony_map(amps_c, centered, 2 * p).real
    g_bumped = g.copy()
    g_bumped[2 * p - 1] += epsilon

    try:
        sol = prony_solve(g_bumped.astype(complex), p)
    except (DegenerateSystemError, RepeatedRootsError) as exc:
        raise EpsilonTooLargeError(f"epsilon too large: {exc}") from exc

    node_scale = max(1.0, np.abs(sol.nodes).max())
    if np.abs(sol.nodes.imag).max() > imag_tol * node_scale:
        raise EpsilonTooLargeError(
            "epsilon too large: perturbed moment system has complex nodes"
        )
    new_nodes = np.sort(sol.nodes.real)
    if np.min(np.diff(new_nodes)) <= imag_tol * node_scale:
        raise EpsilonTooLargeError(
            "epsilon too large: perturbed nodes coincide after the real snap"
        )
    order = np.argsort(sol.nodes.real)
    new_amps = sol.amplitudes[order].real

    spliced_nodes = train.nodes.copy()
    spliced_amps = train.amplitudes.copy()
    spliced_nodes[sl] = new_nodes + center
    spliced_amps[sl] = new_amps
    if not np.all(np.diff(spliced_nodes) > 0):
        raise EpsilonTooLargeError(
            "epsilon too large: displaced cluster breaks the node ordering"
        )
    perturbed = SpikeTrain(amplitudes=spliced_amps, nodes=spliced_nodes)

    new_moments = prony_map(new_amps, new_nodes, 2 * p).real
    return WorstCaseReport(
        perturbed=perturbed,
        moment_match_error=float(np.abs(new_moments[: 2 * p - 1] - g[: 2 * p - 1]).max()),
        last_moment_delta=float(new_moments[2 * p - 1] - g[2 * p - 1]),
        node_displacement=float(np.abs(new_nodes - centered).max()),
        amplitude_displacement=float(np.abs(new_amps - amps_c).max()),
        spectral_deviation=verify_spectral_deviation(
            train, perturbed, omega_eff, grid_points
        ),
    )


def _alternating_amplitudes(d: int) -> np.ndarray:
    return np.array([(-1.0) ** j for j in range(d)])


def displacement_scaling_probe(
    p: int,
    d: int,
    h_values: Sequence[float],
    omega: float,
    epsilon_rule: Callable[[float], float] | float = 0.02,
) -> list[tuple[float, float, float]]:
    """Displacement amplification of the worst-case construction across cluster sizes.

    For each h the centered cluster is blown up by omega (p equispaced nodes
    spanning omega*h, alternating unit amplitudes; any extra d-p nodes sit far
    to the right and stay untouched) and perturbed with
    epsilon = epsilon_rule(h), which defaults to c (omega tau h)^{2p-1} with a
    small constant c to stay inside the solvable regime.

    Returns one (srf, node_displacement/epsilon, amplitude_displacement/epsilon)
    row per h, where srf = 1/(omega tau h).  On a log-log scale the node column
    grows with slope 2p-2 and the amplitude column with slope 2p-1.
    """
    if d < p:
        raise ValueError("d must be at least p")
    tau = 1.0 / (p - 1)
    if callable(epsilon_rule):
        rule = epsilon_rule
    else:
        coeff = float(epsilon_rule)

        def rule(h: float) -> float:
            return coeff * (omega * tau * h) ** (2 * p - 1)

    rows = []
    for h in h_values:
        extent = omega * h
        gap = tau * extent
        cluster = -extent / 2.0 + gap * np.arange(p)
        spectators = extent / 2.0 + (1.0 + extent) * np.arange(1, d - p + 1)
        nodes = np.concatenate([cluster, spectators])
        train = SpikeTrain(amplitudes=_alternating_amplitudes(d), nodes=nodes)
        span = max(nodes[-1] - nodes[0], extent)
        geometry = ClusterGeometry(
            p=p, d=d, h=extent, T=span, tau=tau, eta=min(1.0, extent / span), kappa=1
        )
        eps = rule(h)
        report = worst_case_signal(train, geometry, eps, omega=1.0, grid_points=3)
        srf = 1.0 / (omega * tau * h)
        rows.append(
            (srf, report.node_displacement / eps, report.amplitude_displacement / eps)
        )
    return rows
