"""Continuous domains (rectangles, truncated strips) and their uniform grids.

Coordinates: rectangles live on [0, a] x [0, b]; a strip truncation of width d
and half-length n lives on [-n, n] x (-d/2, d/2), so the bounded direction is
centred on y = 0. Grids are uniform with the same spacing on both axes, and
every type here is immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpacingTooCoarse

RECTANGLE = "rectangle"
STRIP = "strip-truncation"


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class Domain:
    """A rectangle a x b or a truncated strip [-n_trunc, n_trunc] x (-d/2, d/2)."""

    kind: str
    a: float = 0.0
    b: float = 0.0
    d: float = 0.0
    n_trunc: float = 0.0
    n: int = 2

    def __post_init__(self):
        if self.kind == RECTANGLE:
            if self.a <= 0 or self.b <= 0:
                raise ValueError("rectangle extents must be strictly positive")
        elif self.kind == STRIP:
            if self.d <= 0 or self.n_trunc <= 0:
                raise ValueError("strip width and half-length must be strictly positive")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def rectangle(cls, a: float, b: float) -> "Domain":
        return cls(kind=RECTANGLE, a=float(a), b=float(b))

    @classmethod
    def strip_truncation(cls, d: float, n_trunc: float) -> "Domain":
        return cls(kind=STRIP, d=float(d), n_trunc=float(n_trunc))

    @property
    def extents(self) -> tuple[float, float]:
        """(x extent, y extent) of the bounding box."""
        if self.kind == RECTANGLE:
            return (self.a, self.b)
        return (2.0 * self.n_trunc, self.d)

    @property
    def origin(self) -> tuple[float, float]:
        if self.kind == RECTANGLE:
            return (0.0, 0.0)
        return (-self.n_trunc, -self.d / 2.0)

    def slab_diameter(self) -> float:
        """Smallest gap between two parallel lines enclosing the domain."""
        if self.kind == RECTANGLE:
            return min(self.a, self.b)
        return self.d

    def volume(self) -> float:
        ex, ey = self.extents
        return ex * ey


def domain_constants(domain: Domain) -> dict:
    """Measure, slab diameter and the two Poincaré constants of the domain.

    kappa_volumetric = (|domain| / omega_n)^(1/n), kappa_slab = delta / sqrt(2).
    """
    vol = domain.volume()
    delta = domain.slab_diameter()
    n = domain.n
    kappa_vol = (vol / unit_ball_volume(n)) ** (1.0 / n)
    kappa_slab = delta / math.sqrt(2.0)
    return {
        "volume": vol,
        "slab_diameter": delta,
        "kappa_volumetric": kappa_vol,
        "kappa_slab": kappa_slab,
    }


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid over a Domain with a boundary/interior node mask.

    Node counts are rounded so the realized extents are integer multiples of
    the spacing; realized extents (not the requested ones) feed every norm.
    """

    domain: Domain
    h: float
    nx: int
    ny: int
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def extent_x(self) -> float:
        return (self.nx - 1) * self.h

    @property
    def extent_y(self) -> float:
        return (self.ny - 1) * self.h

    @property
    def area(self) -> float:
        """Realized discrete domain measure."""
        return self.extent_x * self.extent_y

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def interior_mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[1:-1, 1:-1] = True
        return m

    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask()

    def quad_weights(self) -> np.ndarray:
        """Trapezoidal nodal weights: h^2 inside, halved per boundary axis."""
        wx = np.full(self.nx, self.h)
        wx[0] = wx[-1] = self.h / 2.0
        wy = np.full(self.ny, self.h)
        wy[0] = wy[-1] = self.h / 2.0
        return np.outer(wx, wy)

    def field(self, values) -> "GridField":
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.shape}")
        return GridField(self, _readonly(values.copy()))

    def field_from(self, fn) -> "GridField":
        """Sample fn(x, y) at the nodes (fn must accept numpy arrays)."""
        X, Y = self.meshgrid()
        return self.field(np.broadcast_to(np.asarray(fn(X, Y), dtype=float), self.shape))

    def constant(self, c: float) -> "GridField":
        return self.field(np.full(self.shape, float(c)))

    def zeros(self) -> "GridField":
        return self.constant(0.0)

    def vector_field(self, vx, vy) -> "VectorField":
        vx = np.asarray(vx, dtype=float)
        vy = np.asarray(vy, dtype=float)
        if vx.shape != self.shape or vy.shape != self.shape:
            raise ValueError("component shapes must match the grid")
        return VectorField(self, _readonly(vx.copy()), _readonly(vy.copy()))


def build_grid(domain: Domain, h: float) -> Grid:
    """Uniform grid with spacing h; node counts rounded to fit the extents."""
    if h <= 0:
        raise ValueError("spacing must be positive")
    ex, ey = domain.extents
    if h > min(ex, ey) / 2.0:
        raise SpacingTooCoarse(f"h = {h} exceeds half the smallest extent {min(ex, ey)}")
    nx = int(round(ex / h)) + 1
    ny = int(round(ey / h)) + 1
    if nx < 3 or ny < 3:
        raise SpacingTooCoarse(f"grid {nx}x{ny} has fewer than 3 nodes on an axis")
    ox, oy = domain.origin
    x = ox + h * np.arange(nx)
    y = oy + h * np.arange(ny)
    return Grid(domain=domain, h=float(h), nx=nx, ny=ny, x=_readonly(x), y=_readonly(y))


@dataclass(frozen=True)
class GridField:
    """One scalar value per grid node."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def boundary_values(self) -> np.ndarray:
        return self.values[self.grid.boundary_mask()]

    def is_conforming(self, bc: "BoundarySpec | None" = None, tol: float = 0.0) -> bool:
        """True when the boundary entries equal the prescribed ones (zero by default)."""
        target = 0.0 if bc is None or bc.kind == HOMOGENEOUS else bc.phi.values[self.grid.boundary_mask()]
        return bool(np.max(np.abs(self.boundary_values() - target)) <= tol)

    def with_values(self, values) -> "GridField":
        return self.grid.field(values)


@dataclass(frozen=True)
class VectorField:
    """Two components per grid node (n = 2)."""

    grid: Grid
    vx: np.ndarray = field(repr=False)
    vy: np.ndarray = field(repr=False)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)


HOMOGENEOUS = "homogeneous"
PRESCRIBED = "prescribed"


@dataclass(frozen=True)
class BoundarySpec:
    """Zero or prescribed boundary values for the Dirichlet problems."""

    kind: str = HOMOGENEOUS
    phi: GridField | None = None

    def __post_init__(self):
        if self.kind not in (HOMOGENEOUS, PRESCRIBED):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == PRESCRIBED and self.phi is None:
            raise ValueError("prescribed boundary needs a phi field")

    @classmethod
    def homogeneous(cls) -> "BoundarySpec":
        return cls(kind=HOMOGENEOUS)

    @classmethod
    def prescribed(cls, phi: GridField) -> "BoundarySpec":
        return cls(kind=PRESCRIBED, phi=phi)

    def values_on(self, grid: Grid) -> np.ndarray:
        """Full-shape array whose boundary entries are the prescribed values."""
        out = np.zeros(grid.shape)
        if self.kind == PRESCRIBED:
            if self.phi.grid.shape != grid.shape:
                raise ValueError("boundary field lives on a different grid")
            mask = grid.boundary_mask()
            out[mask] = self.phi.values[mask]
        return out
