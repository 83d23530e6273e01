"""Group algebra of the Heisenberg group in flat (x, y, t) coordinates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RejectedInput


@dataclass(frozen=True)
class GroupContext:
    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise RejectedInput(f"n must be a positive integer, got {self.n!r}")

    @property
    def Q(self) -> int:
        """Homogeneous dimension."""
        return 2 * self.n + 2


@dataclass(frozen=True)
class HeisenbergPoint:
    z: np.ndarray
    t: float

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float).reshape(-1)
        if z.size < 2 or z.size % 2:
            raise RejectedInput(f"z must have even length 2n >= 2, got {z.size}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.z.size // 2

    @property
    def x(self) -> np.ndarray:
        return self.z[: self.n]

    @property
    def y(self) -> np.ndarray:
        return self.z[self.n:]

    @classmethod
    def from_xyt(cls, x, y, t: float) -> HeisenbergPoint:
        return cls(np.concatenate([np.atleast_1d(x), np.atleast_1d(y)]).astype(float), t)

    @classmethod
    def identity(cls, n: int = 1) -> HeisenbergPoint:
        return cls(np.zeros(2 * n), 0.0)

    def as_tuple(self) -> tuple[float, ...]:
        return (*map(float, self.z), self.t)


def perp(z: np.ndarray) -> np.ndarray:
    """z⊥ = (y, −x) along the last axis."""
    z = np.asarray(z, dtype=float)
    n = z.shape[-1] // 2
    return np.concatenate([z[..., n:], -z[..., :n]], axis=-1)


def _same_dim(a: HeisenbergPoint, b: HeisenbergPoint) -> None:
    if a.n != b.n:
        raise RejectedInput(f"dimension mismatch: n={a.n} vs n={b.n}")


def group_mul(a: HeisenbergPoint, b: HeisenbergPoint) -> HeisenbergPoint:
    _same_dim(a, b)
    twist = 0.5 * (float(a.x @ b.y) - float(b.x @ a.y))
    return HeisenbergPoint(a.z + b.z, a.t + b.t + twist)


def group_inv(g: HeisenbergPoint) -> HeisenbergPoint:
    return HeisenbergPoint(-g.z, -g.t)


def dilate(g: HeisenbergPoint, lam: float) -> HeisenbergPoint:
    if not lam > 0:
        raise RejectedInput(f"dilation factor must be positive, got {lam!r}")
    return HeisenbergPoint(lam * g.z, lam * lam * g.t)


def inversion_map(g: HeisenbergPoint) -> HeisenbergPoint:
    """(x, y, t) -> (y, x, -t)."""
    return HeisenbergPoint.from_xyt(g.y, g.x, -g.t)


def translate_graph(u, g0: HeisenbergPoint):
    """Left-translate the graph of ``u`` by ``g0``.

    The result lives over the disk centered at z0 and is sampled on a grid
    with the same spacing and node offsets as ``u``.
    """
    from .graph import DiskGraph

    if not isinstance(u, DiskGraph):
        raise RejectedInput("translate_graph expects a DiskGraph")
    if g0.n != 1:
        raise RejectedInput("grid graphs are only supported for n = 1")
    x0, y0 = float(g0.z[0]), float(g0.z[1])
    cx, cy = u.center
    new_center = (cx + x0, cy + y0)
    X, Y = u.node_coords(new_center)
    # sample u at z' - z0 by bilinear interpolation on its own grid
    w = u.interpolate(X - x0, Y - y0)
    # z'-z0-c_u is the offset from the old center; affine part uses z' - z0
    dx, dy = X - x0, Y - y0
    affine = 0.5 * (x0 * dy - dx * y0)
    values = g0.t + w + affine
    tr = u.trace
    # outside the disk u equals its affine trace; push it through the same map
    trace = type(tr)(
        c0=g0.t + tr.c0 + 0.5 * (x0 * cy - cx * y0),
        ax=tr.ax - 0.5 * y0,
        ay=tr.ay + 0.5 * x0,
    )
    return DiskGraph(values=values, R=u.R, center=new_center, n=u.n, trace=trace)
