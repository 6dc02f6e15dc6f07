from __future__ import annotations

import itertools
import logging
import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import model_validator
from pydantic.dataclasses import dataclass
from typing_extensions import Self

from .model import TessellationModel, hyperplane_normals

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """
    Axis-aligned box [lower, upper]. Degenerate boxes are allowed; a single point meets no
    hyperplane with probability one.

    Args:
        lower (tuple[float, ...]): Lower corner.
        upper (tuple[float, ...]): Upper corner.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @model_validator(mode="after")
    def check_corners(self) -> Self:
        if len(self.lower) != len(self.upper) or len(self.lower) < 2:
            raise ValueError("Window corners must have the same dimension, at least 2.")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("Lower corner must not exceed the upper corner.")
        return self

    @classmethod
    def from_bounds(cls, bounds: Sequence[float]) -> Window:
        """
        Window from a flat ``(x0, y0, ..., x1, y1, ...)`` sequence, as given on the command line.
        """
        if len(bounds) % 2:
            raise ValueError("Window bounds need an even number of coordinates.")
        half = len(bounds) // 2
        return cls(
            lower=tuple(float(b) for b in bounds[:half]),
            upper=tuple(float(b) for b in bounds[half:]),
        )

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.lower) + np.array(self.upper)) / 2

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lower, self.upper))), dtype=float)

    def projection(self, normal: np.ndarray) -> tuple[float, float]:
        """
        Interval of offsets t for which the hyperplane <x, normal> = t meets the window.
        """
        values = self.corners() @ normal
        return float(values.min()), float(values.max())

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(
            np.all(point >= np.array(self.lower) - tol)
            and np.all(point <= np.array(self.upper) + tol)
        )


@dataclass(frozen=True)
class Segment:
    """
    Piece of a hyperplane <x, n_family> = offset inside a window.

    Args:
        family (int): Index j of the hyperplane family, counted from 1.
        offset (float): Signed offset along the family normal.
        vertices (tuple[tuple[float, ...], ...]): Points where the hyperplane crosses the window's
            edges; the two endpoints in the plane, the polygon in cyclic order in space.
    """

    family: int
    offset: float
    vertices: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class WindowTessellation:
    window: Window
    segments: tuple[Segment, ...]

    def family_offsets(self, family: int) -> np.ndarray:
        return np.array([s.offset for s in self.segments if s.family == family])


def _box_edges(corners: np.ndarray) -> list[tuple[int, int]]:
    # box edges join corners that differ in exactly one coordinate
    return [
        (a, b)
        for a, b in itertools.combinations(range(len(corners)), 2)
        if np.count_nonzero(corners[a] != corners[b]) == 1
    ]


def _clip(
    window: Window,
    corners: np.ndarray,
    edges: list[tuple[int, int]],
    normal: np.ndarray,
    offset: float,
) -> tuple[tuple[float, ...], ...]:
    values = corners @ normal - offset
    points = []
    for a, b in edges:
        va, vb = values[a], values[b]
        if va == 0:
            points.append(corners[a])
        if va * vb < 0:
            t = va / (va - vb)
            points.append(corners[a] + t * (corners[b] - corners[a]))
        elif vb == 0:
            points.append(corners[b])

    if not points:
        return ()
    unique = np.unique(np.round(np.array(points), 12), axis=0)
    if window.dimension == 3 and len(unique) > 2:
        centroid = unique.mean(axis=0)
        e1 = unique[0] - centroid
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(normal, e1)
        angles = np.arctan2((unique - centroid) @ e2, (unique - centroid) @ e1)
        unique = unique[np.argsort(angles)]
    return tuple(tuple(float(c) for c in p) for p in unique)


def sample_window_tessellation(
    model: TessellationModel, window: Window, seed: int
) -> WindowTessellation:
    """
    Realization of the hyperplane process restricted to ``window``. Family j consists of the
    hyperplanes orthogonal to n_j; their offsets form a Poisson process of intensity gamma * q_j
    on the projection interval of the window onto n_j.

    Args:
        model (TessellationModel): The model.
        window (Window): Observation window.
        seed (int): Seed for the realization.

    Returns:
        WindowTessellation: Clipped hyperplane pieces, tagged with family and offset.
    """
    if window.dimension != model.dimension:
        raise ValueError(
            f"Window has dimension {window.dimension}, model has {model.dimension}."
        )
    rng = np.random.Generator(np.random.Philox(seed))
    normals = hyperplane_normals(model)
    corners = window.corners()
    edges = _box_edges(corners)
    segments = []
    for j, (normal, weight) in enumerate(zip(normals, model.weights), start=1):
        lo, hi = window.projection(normal)
        count = rng.poisson(model.intensity * weight * (hi - lo))
        offsets = np.sort(rng.uniform(lo, hi, size=count))
        for t in offsets:
            vertices = _clip(window, corners, edges, normal, float(t))
            if vertices:
                segments.append(Segment(family=j, offset=float(t), vertices=vertices))
    logger.debug("window tessellation with %i pieces", len(segments))
    return WindowTessellation(window=window, segments=tuple(segments))


def chord(window: Window, point: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
    """
    Parameter range [t0, t1] for which point + t * direction stays in the window.
    """
    t0, t1 = -math.inf, math.inf
    for p, u, lo, hi in zip(point, direction, window.lower, window.upper):
        if u == 0:
            continue
        a, b = (lo - p) / u, (hi - p) / u
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    return t0, t1


def count_crossings(
    model: TessellationModel, tessellation: WindowTessellation
) -> tuple[np.ndarray, np.ndarray]:
    """
    Counts crossings of the hyperplanes with the line through the window centre along each u_i.

    Returns:
        tuple[np.ndarray, np.ndarray]: Crossing counts and chord lengths, one entry per direction.
    """
    normals = hyperplane_normals(model)
    center = tessellation.window.center
    counts = np.zeros(model.dimension)
    lengths = np.zeros(model.dimension)
    for i, u in enumerate(model.directions):
        t0, t1 = chord(tessellation.window, center, u)
        lengths[i] = t1 - t0
        for j, normal in enumerate(normals, start=1):
            slope = float(u @ normal)
            if slope == 0:
                continue
            t = (tessellation.family_offsets(j) - float(center @ normal)) / slope
            counts[i] += np.count_nonzero((t >= t0) & (t <= t1))
    return counts, lengths


def crossing_rates(
    model: TessellationModel,
    window: Window,
    seed: int,
    realizations: int = 1,
    tessellations: Optional[Sequence[WindowTessellation]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Estimates the edge rates gamma_{L_i} as the number of hyperplane crossings per unit length
    along lines in direction u_i, pooled over independent window realizations.

    Args:
        model (TessellationModel): The model.
        window (Window): Observation window.
        seed (int): Seed of the first realization; realization r uses ``seed + r``.
        realizations (int, optional): Number of realizations. Defaults to 1.
        tessellations (Sequence[WindowTessellation], optional): Precomputed realizations to use
            instead of sampling. Defaults to None.

    Returns:
        tuple[np.ndarray, np.ndarray]: Rate estimates and their Poisson standard errors.
    """
    if tessellations is None:
        tessellations = [
            sample_window_tessellation(model, window, seed + r) for r in range(realizations)
        ]
    counts = np.zeros(model.dimension)
    lengths = np.zeros(model.dimension)
    for tess in tessellations:
        c, length = count_crossings(model, tess)
        counts += c
        lengths += length
    if np.any(lengths <= 0):
        raise ValueError("Window is too thin to estimate crossing rates.")
    return counts / lengths, np.sqrt(counts) / lengths


def segments_frame(tessellation: WindowTessellation) -> pd.DataFrame:
    """
    Table of the pieces of a tessellation. Planar pieces get endpoint columns x0, y0, x1, y1;
    in higher dimension the vertices are joined as ``x,y,z;x,y,z;...``.
    """
    if tessellation.window.dimension == 2:
        rows = [
            (s.family, s.offset, *s.vertices[0], *s.vertices[-1])
            for s in tessellation.segments
        ]
        return pd.DataFrame(rows, columns=["family", "offset", "x0", "y0", "x1", "y1"])
    rows = [
        (s.family, s.offset, ";".join(",".join(repr(c) for c in v) for v in s.vertices))
        for s in tessellation.segments
    ]
    return pd.DataFrame(rows, columns=["family", "offset", "vertices"])
