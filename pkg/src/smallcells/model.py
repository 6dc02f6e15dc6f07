from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from pydantic import field_validator, model_validator
from pydantic.dataclasses import dataclass
from typing_extensions import Self

from .errors import ModelValidationError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12
DET_TOL = 1e-9


@dataclass(frozen=True)
class DirectionAtom:
    """
    One atom of the directional distribution: a line direction and its weight.

    Args:
        direction (tuple[float, ...]): Unit vector u_i in R^d. Lists are converted to tuples.
        weight (float): Weight q_i in [0, 1].
    """

    direction: tuple[float, ...]
    weight: float

    @field_validator("direction")
    @classmethod
    def check_unit(cls, direction: tuple[float, ...]) -> tuple[float, ...]:
        if len(direction) == 0:
            raise ModelValidationError("Direction must have at least one coordinate.")
        norm = math.sqrt(sum(c * c for c in direction))
        if abs(norm - 1) > NORM_TOL:
            raise ModelValidationError(
                f"Direction {direction} is not a unit vector (norm {norm!r})."
            )
        return direction

    @field_validator("weight")
    @classmethod
    def check_weight(cls, weight: float) -> float:
        if not 0 <= weight <= 1:
            raise ModelValidationError(f"Weight {weight} must lie in [0, 1].")
        return weight


@dataclass(frozen=True)
class TessellationModel:
    """
    A stationary Poisson hyperplane tessellation whose directional distribution is concentrated on
    d atoms. In the plane this is a Poisson line tessellation with two families of lines, whose
    typical cell is a parallelogram.

    Args:
        dimension (int): Ambient dimension d, at least 2.
        intensity (float): Intensity gamma > 0.
        atoms (tuple[DirectionAtom, ...]): Exactly d atoms with linearly independent directions and
            weights summing to one.
    """

    dimension: int
    intensity: float
    atoms: tuple[DirectionAtom, ...]

    @field_validator("intensity")
    @classmethod
    def check_intensity(cls, intensity: float) -> float:
        if not (math.isfinite(intensity) and intensity > 0):
            raise ModelValidationError(f"Intensity must be positive, got {intensity}.")
        return intensity

    @model_validator(mode="after")
    def check_atoms(self) -> Self:
        if self.dimension < 2:
            raise ModelValidationError("Dimension must be at least 2.")
        if len(self.atoms) != self.dimension:
            raise ModelValidationError(
                f"Expected {self.dimension} atoms, got {len(self.atoms)}."
            )
        if any(len(a.direction) != self.dimension for a in self.atoms):
            raise ModelValidationError(
                f"Every direction must have {self.dimension} coordinates."
            )
        total = math.fsum(a.weight for a in self.atoms)
        if abs(total - 1) > WEIGHT_SUM_TOL:
            raise ModelValidationError(f"Weights must sum to 1, got {total!r}.")
        det = np.linalg.det(np.array([a.direction for a in self.atoms]))
        if abs(det) <= DET_TOL:
            raise ModelValidationError(
                f"Directions are linearly dependent (|det| = {abs(det):.3g})."
            )
        return self

    @property
    def directions(self) -> np.ndarray:
        """
        (d, d) array whose row i is u_i.
        """
        return np.array([a.direction for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=float)

    def with_intensity(self, intensity: float) -> TessellationModel:
        return TessellationModel(
            dimension=self.dimension, intensity=intensity, atoms=self.atoms
        )

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "gamma": float(self.intensity),
            "atoms": [
                {"direction": [float(c) for c in a.direction], "weight": float(a.weight)}
                for a in self.atoms
            ],
        }


@dataclass(frozen=True)
class EdgeRates:
    """
    Exponential rates of the typical cell's edge lengths, one per direction.

    Args:
        rates (tuple[float, ...]): Positive rates gamma_{L_1}, ..., gamma_{L_d}.
    """

    rates: tuple[float, ...]

    @field_validator("rates")
    @classmethod
    def check_positive(cls, rates: tuple[float, ...]) -> tuple[float, ...]:
        if len(rates) == 0:
            raise ValueError("Edge rates must not be empty.")
        if any(not (math.isfinite(r) and r > 0) for r in rates):
            raise ValueError(f"Edge rates must be positive and finite, got {rates}.")
        return rates

    @property
    def dimension(self) -> int:
        return len(self.rates)

    def as_array(self) -> np.ndarray:
        return np.array(self.rates, dtype=float)


def standard_model(dimension: int = 2) -> TessellationModel:
    """
    The study's reference models on the coordinate axes with unit edge rates: gamma = 2, q = 1/2
    in the plane, and gamma = 3 with weights 1/3 in space.

    Args:
        dimension (int, optional): 2 or 3. Defaults to 2.

    Raises:
        UnsupportedDimensionError: For any other dimension.

    Returns:
        TessellationModel: The standard model.
    """
    if dimension not in (2, 3):
        raise UnsupportedDimensionError(
            f"Standard models exist for d = 2 and d = 3, not d = {dimension}."
        )
    axes = np.eye(dimension)
    return TessellationModel(
        dimension=dimension,
        intensity=float(dimension),
        atoms=tuple(
            DirectionAtom(direction=tuple(float(c) for c in row), weight=1 / dimension)
            for row in axes
        ),
    )


def planar_model(gamma: float, q: float, angle: float = math.pi / 2) -> TessellationModel:
    """
    Two-atom planar model with u_1 = (1, 0) of weight q and u_2 at ``angle`` radians from u_1
    with weight 1 - q.
    """
    if not 0 < angle < math.pi:
        raise ModelValidationError("Angle between the atoms must lie in (0, pi).")
    return TessellationModel(
        dimension=2,
        intensity=gamma,
        atoms=(
            DirectionAtom(direction=(1.0, 0.0), weight=q),
            DirectionAtom(direction=(math.cos(angle), math.sin(angle)), weight=1 - q),
        ),
    )


def hyperplane_normals(model: TessellationModel) -> np.ndarray:
    """
    Unit normals of the hyperplanes H_1, ..., H_d, where H_j is spanned by every direction except
    u_{d-j+1}. Row j of the result is n_{j+1}. Signs are arbitrary.

    Args:
        model (TessellationModel): The model.

    Returns:
        np.ndarray: (d, d) array of unit normals.
    """
    u = model.directions
    d = model.dimension
    normals = np.empty((d, d))
    for j in range(d):
        excluded = d - 1 - j
        spanning = np.delete(u, excluded, axis=0)
        # orthonormal basis of H_j, then the component of the excluded direction orthogonal to it
        basis, _ = np.linalg.qr(spanning.T)
        v = u[excluded] - basis @ (basis.T @ u[excluded])
        normals[j] = v / np.linalg.norm(v)
    return normals


def edge_rates(model: TessellationModel) -> EdgeRates:
    """
    Exponential rates of the typical cell's edges,
    gamma_{L_i} = gamma * sum_j q_j |<u_i, n_j>|.

    Args:
        model (TessellationModel): The model.

    Returns:
        EdgeRates: One rate per direction.
    """
    cosines = np.abs(model.directions @ hyperplane_normals(model).T)
    rates = model.intensity * (cosines @ model.weights)
    logger.debug("edge rates %s for gamma=%s", rates, model.intensity)
    return EdgeRates(rates=tuple(float(r) for r in rates))


def intersection_angle(model: TessellationModel) -> float:
    """
    Angle alpha between L_1 and the normal of L_2 for a planar model, in radians.
    """
    _require_planar(model)
    u = model.directions
    normal = np.array([-u[1][1], u[1][0]])
    return float(math.acos(min(1.0, abs(float(u[0] @ normal)))))


def reduction_transform(model: TessellationModel) -> np.ndarray:
    """
    Linear map f carrying the planar model onto the standard model (gamma = 2, q = 1/2, coordinate
    axes): f sends u_i to gamma_{L_i} e_i, so an edge of length X_i along u_i becomes an edge of
    length gamma_{L_i} X_i along e_i, which is unit-rate exponential.

    Args:
        model (TessellationModel): A planar model.

    Raises:
        UnsupportedDimensionError: If the model is not planar.

    Returns:
        np.ndarray: Invertible (2, 2) matrix.
    """
    _require_planar(model)
    rates = edge_rates(model).as_array()
    # columns of u_matrix are the directions, so f @ u_matrix = diag(rates)
    u_matrix = model.directions.T
    return np.diag(rates) @ np.linalg.inv(u_matrix)


def pushforward_rates(model: TessellationModel, transform: np.ndarray) -> EdgeRates:
    """
    Edge rates of the image of the typical cell under ``transform``. The edge along u_i is mapped
    to an edge along f u_i whose length scales by |f u_i|.
    """
    rates = edge_rates(model).as_array()
    stretch = np.linalg.norm(np.asarray(transform) @ model.directions.T, axis=0)
    return EdgeRates(rates=tuple(float(r) for r in rates / stretch))


def transform_cells(
    cells: np.ndarray, model: TessellationModel, transform: np.ndarray
) -> np.ndarray:
    """
    Edge lengths of sampled cells after applying a linear map to the tessellation.

    Args:
        cells (np.ndarray): (n, d) edge lengths in the model's direction order.
        model (TessellationModel): Model the cells were sampled from.
        transform (np.ndarray): (d, d) linear map.

    Returns:
        np.ndarray: (n, d) transformed edge lengths.
    """
    stretch = np.linalg.norm(np.asarray(transform) @ model.directions.T, axis=0)
    return np.asarray(cells) * stretch


def reduced_model(model: TessellationModel) -> TessellationModel:
    """
    The model reached by ``reduction_transform``.
    """
    _require_planar(model)
    return standard_model(2)


def direction_sine(model: TessellationModel) -> float:
    """
    |det| of the direction matrix; for a planar model this is sin of the angle between u_1 and u_2.
    """
    return float(abs(np.linalg.det(model.directions)))


def _require_planar(model: TessellationModel) -> None:
    if model.dimension != 2:
        raise UnsupportedDimensionError(
            f"Operation is only defined for planar models, got d = {model.dimension}."
        )


def model_from_directions(
    gamma: float, directions: Sequence[Sequence[float]], weights: Sequence[float]
) -> TessellationModel:
    """
    Builds a model from raw direction rows and weights.
    """
    if len(directions) != len(weights):
        raise ModelValidationError("Need one weight per direction.")
    return TessellationModel(
        dimension=len(directions),
        intensity=gamma,
        atoms=tuple(
            DirectionAtom(direction=tuple(float(c) for c in u), weight=float(w))
            for u, w in zip(directions, weights)
        ),
    )
