"""Mean-curvature checks: divergence-form residual and the circular-arc profile.

A graph of constant mean curvature H over a strip of width d (n = 2) is a
circular arc of radius 1 / (2H); it exists only while the arc can span the
strip, i.e. |H| * d < 1. The arc profile is the analytic benchmark for the
iterated solver on strip truncations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import flux_divergence
from .domain import GridField
from .errors import InvalidArc


def mc_divergence_residual(u: GridField, H: GridField, n: int = 2) -> GridField:
    """div(grad u / sqrt(1 + |grad u|^2)) - n * H on interior nodes.

    Fluxes are built on cell faces (normal component by compact differences,
    transverse by averaging), so the operator degenerates to the 5-point
    Laplacian when the gradient is small.
    """
    div = flux_divergence(u, face_scale=lambda w2: 1.0 / np.sqrt(1.0 + w2))
    out = np.zeros(u.grid.shape)
    out[1:-1, 1:-1] = div.values[1:-1, 1:-1] - n * H.values[1:-1, 1:-1]
    return u.grid.field(out)


@dataclass(frozen=True)
class ArcSolution:
    """Arc profile u(y) spanning y in [-d/2, d/2] with curvature datum H."""

    d: float
    H: float
    n: int = 2

    @property
    def valid(self) -> bool:
        return self.n * abs(self.H) * self.d / 2.0 < 1.0

    @property
    def radius(self) -> float:
        if self.H == 0.0:
            return math.inf
        return 1.0 / (self.n * self.H)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.H == 0.0:
            return np.zeros_like(y)
        hh = self.H
        return (np.sqrt(1.0 - hh * hh * self.d * self.d) - np.sqrt(1.0 - 4.0 * hh * hh * y * y)) / (
            2.0 * hh
        )

    def slope(self, y):
        y = np.asarray(y, dtype=float)
        if self.H == 0.0:
            return np.zeros_like(y)
        return 2.0 * self.H * y / np.sqrt(1.0 - 4.0 * self.H * self.H * y * y)


def arc_solution(d: float, H: float) -> ArcSolution:
    """Analytic solution of (u' / sqrt(1 + u'^2))' = 2H, u(+-d/2) = 0 (n = 2).

    Raises InvalidArc when the arc cannot span the strip (|H| * d >= 1).
    """
    if d <= 0:
        raise ValueError("strip width must be positive")
    sol = ArcSolution(d=float(d), H=float(H))
    if not sol.valid:
        raise InvalidArc(f"no arc of curvature {H} spans a strip of width {d}")
    return sol
