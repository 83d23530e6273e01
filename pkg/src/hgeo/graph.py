"""Sampled graphs over a Euclidean disk in the n = 1 slice."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import RejectedInput


@dataclass(frozen=True)
class AffineTrace:
    """Affine data c0 + ax*(x - cx) + ay*(y - cy) held by a graph off its disk.

    Graphs in the competitor class vanish off the disk (all zero). Left
    translates of such graphs pick up an affine trace.
    """

    c0: float = 0.0
    ax: float = 0.0
    ay: float = 0.0

    def __call__(self, dx, dy):
        return self.c0 + self.ax * dx + self.ay * dy

    @property
    def is_zero(self) -> bool:
        return self.c0 == 0.0 and self.ax == 0.0 and self.ay == 0.0


@lru_cache(maxsize=16)
def _unit_cell_fraction(N: int, sub: int) -> np.ndarray:
    # fraction of each grid cell of [-1,1]^2 lying in the open unit disk
    h = 2.0 / N
    off = (np.arange(sub) + 0.5) / sub
    edges = -1.0 + h * np.arange(N)
    pts = (edges[:, None] + h * off[None, :]).ravel()
    inside = (pts[:, None] ** 2 + pts[None, :] ** 2) < 1.0
    f = inside.reshape(N, sub, N, sub).mean(axis=(1, 3))
    f.setflags(write=False)
    return f


@dataclass(frozen=True)
class DiskGraph:
    """Node values of u on the (N+1) x (N+1) grid covering the disk's bounding box.

    ``values[i, j]`` sits at (cx - R + i h, cy - R + j h). Nodes off the open
    disk carry the trace (zero for the competitor class).
    """

    values: np.ndarray
    R: float
    center: tuple[float, float] = (0.0, 0.0)
    n: int = 1
    trace: AffineTrace = field(default_factory=AffineTrace)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 3:
            raise RejectedInput("values must be a square (N+1)x(N+1) array")
        if not self.R > 0:
            raise RejectedInput("R must be positive")
        if self.n != 1:
            raise RejectedInput("grid graphs are only supported for n = 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    # geometry -----------------------------------------------------------
    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    def node_coords(self, center: tuple[float, float] | None = None):
        cx, cy = self.center if center is None else center
        off = -self.R + self.h * np.arange(self.N + 1)
        return np.meshgrid(cx + off, cy + off, indexing="ij")

    def offsets(self):
        off = -self.R + self.h * np.arange(self.N + 1)
        return np.meshgrid(off, off, indexing="ij")

    @property
    def inside(self) -> np.ndarray:
        dx, dy = self.offsets()
        return np.hypot(dx, dy) < self.R * (1.0 - 1e-12)

    def cell_fraction(self, sub: int = 16) -> np.ndarray:
        return _unit_cell_fraction(self.N, sub)

    def cell_centers(self):
        cx, cy = self.center
        mid = -self.R + self.h * (np.arange(self.N) + 0.5)
        return np.meshgrid(cx + mid, cy + mid, indexing="ij")

    def trace_values(self) -> np.ndarray:
        dx, dy = self.offsets()
        return self.trace(dx, dy) * np.ones_like(dx)

    # constructors -------------------------------------------------------
    @classmethod
    def sample(cls, func: Callable, N: int, R: float,
               center: tuple[float, float] = (0.0, 0.0)) -> DiskGraph:
        """Sample ``func(dx, dy)`` (offsets from the center) inside the disk, zero outside."""
        if N < 2:
            raise RejectedInput("N must be at least 2")
        off = -R + (2.0 * R / N) * np.arange(N + 1)
        dx, dy = np.meshgrid(off, off, indexing="ij")
        inside = np.hypot(dx, dy) < R * (1.0 - 1e-12)
        vals = np.zeros_like(dx)
        vals[inside] = np.asarray(func(dx[inside], dy[inside]), dtype=float)
        return cls(values=vals, R=R, center=center)

    @classmethod
    def from_radial(cls, f: Callable, N: int, R: float) -> DiskGraph:
        return cls.sample(lambda dx, dy: f(np.hypot(dx, dy)), N, R)

    def with_values(self, values: np.ndarray) -> DiskGraph:
        return DiskGraph(values=values, R=self.R, center=self.center, n=self.n, trace=self.trace)

    # class checks -------------------------------------------------------
    def is_admissible(self, atol: float = 0.0) -> bool:
        """Nonnegative and zero off the disk."""
        if not self.trace.is_zero:
            return False
        v = self.values
        return bool(np.all(v >= -atol) and np.all(np.abs(v[~self.inside]) <= atol))

    # evaluation ---------------------------------------------------------
    def interpolate(self, xq, yq) -> np.ndarray:
        """Bilinear interpolation; points beyond the grid box get the trace."""
        cx, cy = self.center
        xq = np.asarray(xq, dtype=float)
        yq = np.asarray(yq, dtype=float)
        s = (xq - cx + self.R) / self.h
        t = (yq - cy + self.R) / self.h
        N = self.N
        # snap values within rounding of a node onto it
        s = np.where(np.abs(s - np.round(s)) < 1e-9, np.round(s), s)
        t = np.where(np.abs(t - np.round(t)) < 1e-9, np.round(t), t)
        ok = (s >= 0) & (s <= N) & (t >= 0) & (t <= N)
        i = np.clip(np.floor(s).astype(int), 0, N - 1)
        j = np.clip(np.floor(t).astype(int), 0, N - 1)
        a = np.clip(s - i, 0.0, 1.0)
        b = np.clip(t - j, 0.0, 1.0)
        V = self.values
        out = ((1 - a) * (1 - b) * V[i, j] + a * (1 - b) * V[i + 1, j]
               + (1 - a) * b * V[i, j + 1] + a * b * V[i + 1, j + 1])
        return np.where(ok, out, self.trace(xq - cx, yq - cy))

    # io -----------------------------------------------------------------
    def header(self) -> dict:
        return {
            "n": self.n,
            "R": self.R,
            "h": self.h,
            "N": self.N,
            "center": list(self.center),
            "trace": [self.trace.c0, self.trace.ax, self.trace.ay],
        }

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        X, Y = self.node_coords()
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "u"])
            for x, y, u in zip(X.ravel(), Y.ravel(), self.values.ravel()):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(u))])
        path.with_suffix(".json").write_text(json.dumps(self.header(), indent=2))

    @classmethod
    def from_csv(cls, path: str | Path) -> DiskGraph:
        path = Path(path)
        head = json.loads(path.with_suffix(".json").read_text())
        N = int(head["N"])
        with path.open() as fh:
            rows = list(csv.reader(fh))[1:]
        vals = np.array([float(r[2]) for r in rows]).reshape(N + 1, N + 1)
        return cls(values=vals, R=float(head["R"]), center=tuple(head["center"]),
                   n=int(head["n"]), trace=AffineTrace(*map(float, head["trace"])))


def inversion_graph(u: DiskGraph) -> DiskGraph:
    """Image of the graph of u under (x, y, t) -> (y, x, -t): the graph of -u(y, x)."""
    cx, cy = u.center
    tr = u.trace
    return DiskGraph(values=-u.values.T, R=u.R, center=(cy, cx), n=u.n,
                     trace=AffineTrace(-tr.c0, -tr.ay, -tr.ax))
