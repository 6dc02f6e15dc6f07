from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .errors import UndefinedShapeError, UnsupportedDimensionError
from .model import TessellationModel, direction_sine
from .sampler import TypicalCell

CellLike = Union[TypicalCell, Sequence[float], np.ndarray]


class SizeFunctional(str, Enum):
    """
    Size functionals of a typical cell. Values are the command-line tokens.
    """

    EDGE_PRODUCT_AREA = "area"
    GEOMETRIC_AREA = "geom-area"
    HALF_PERIMETER = "half-perimeter"
    VOLUME = "volume"
    SURFACE_AREA = "surface-area"
    TOTAL_EDGE_LENGTH = "edge-length"

    @property
    def token(self) -> str:
        return self.value

    def supports(self, dimension: int) -> bool:
        if self in _PLANAR:
            return dimension == 2
        if self is SizeFunctional.VOLUME:
            return dimension >= 3
        return dimension == 3


_PLANAR = frozenset(
    {
        SizeFunctional.EDGE_PRODUCT_AREA,
        SizeFunctional.GEOMETRIC_AREA,
        SizeFunctional.HALF_PERIMETER,
    }
)


def parse_functional(token: str) -> SizeFunctional:
    """
    Maps a command-line token such as ``half-perimeter`` to its functional.

    Raises:
        ValueError: If the token is unknown.
    """
    try:
        return SizeFunctional(token)
    except ValueError:
        known = ", ".join(f.value for f in SizeFunctional)
        raise ValueError(f"Unknown size functional {token!r}; expected one of {known}.")


def applicable_functionals(dimension: int) -> list[SizeFunctional]:
    """
    Functionals defined in ``dimension``, in declaration order.
    """
    return [f for f in SizeFunctional if f.supports(dimension)]


def _edges(cell: CellLike) -> np.ndarray:
    if isinstance(cell, TypicalCell):
        return cell.as_array()
    return np.asarray(cell, dtype=float)


def sigma(cell: CellLike) -> float:
    """
    Scale-invariant deviation from the cube, d * min / sum of the edge lengths. Equals 1 exactly
    when all edges are equal and 0 when some but not all edges vanish.

    Args:
        cell (TypicalCell | Sequence[float]): Edge lengths.

    Raises:
        UndefinedShapeError: If every edge length is zero.

    Returns:
        float: Value in [0, 1].
    """
    x = _edges(cell)
    total = x.sum()
    if total == 0:
        raise UndefinedShapeError("sigma is not defined for a cell that is a single point.")
    return float(min(1.0, x.size * x.min() / total))


def tau(cell: CellLike) -> float:
    """
    Largest edge length.
    """
    return float(_edges(cell).max())


def size(
    cell: CellLike, f: SizeFunctional, model: Optional[TessellationModel] = None
) -> float:
    """
    Size of a cell under the functional ``f``.

    Args:
        cell (TypicalCell | Sequence[float]): Edge lengths.
        f (SizeFunctional): Size functional.
        model (TessellationModel, optional): Needed for ``GEOMETRIC_AREA``, which uses the angle
            between the directions. Defaults to None.

    Raises:
        UnsupportedDimensionError: If ``f`` is not defined in the cell's dimension.

    Returns:
        float: The size.
    """
    return float(size_array(_edges(cell)[np.newaxis, :], f, model)[0])


def sigma_array(cells: np.ndarray) -> np.ndarray:
    """
    Row-wise ``sigma`` of an (n, d) array of positive edge lengths.
    """
    cells = np.asarray(cells)
    return np.minimum(1.0, cells.shape[1] * cells.min(axis=1) / cells.sum(axis=1))


def tau_array(cells: np.ndarray) -> np.ndarray:
    return np.asarray(cells).max(axis=1)


def size_array(
    cells: np.ndarray, f: SizeFunctional, model: Optional[TessellationModel] = None
) -> np.ndarray:
    """
    Row-wise size of an (n, d) array of edge lengths under ``f``.
    """
    cells = np.asarray(cells, dtype=float)
    d = cells.shape[1]
    if not f.supports(d):
        raise UnsupportedDimensionError(f"{f.value} is not defined for d = {d}.")

    if f is SizeFunctional.EDGE_PRODUCT_AREA:
        return cells[:, 0] * cells[:, 1]
    if f is SizeFunctional.GEOMETRIC_AREA:
        if model is None:
            raise ValueError("geom-area needs the model for the angle between directions.")
        return cells[:, 0] * cells[:, 1] * direction_sine(model)
    if f is SizeFunctional.HALF_PERIMETER:
        return cells[:, 0] + cells[:, 1]
    if f is SizeFunctional.VOLUME:
        return cells.prod(axis=1)
    x, y, z = cells[:, 0], cells[:, 1], cells[:, 2]
    if f is SizeFunctional.SURFACE_AREA:
        return 2 * (x * y + y * z + z * x)
    # four parallel edges per direction
    return 4 * (x + y + z)
