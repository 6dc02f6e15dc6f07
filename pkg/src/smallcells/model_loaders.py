import os
import pathlib
import re
from typing import Union

from .errors import ModelFileError
from .model import DirectionAtom, TessellationModel

_ATOM_KEY = re.compile(r"^atom\.(\d+)\.(direction|weight)$")


def load_model(fpath: Union[str, pathlib.Path]) -> TessellationModel:
    """
    Given a file path, loads a tessellation model from a plain-text ``key=value`` description.
    Recognised keys are ``dimension``, ``gamma``, ``atom.<i>.direction`` (comma-separated reals)
    and ``atom.<i>.weight``, with atoms numbered from 1. Blank lines and lines starting with ``#``
    are ignored.

    Args:
        fpath (str | pathlib.Path): Path to the model file.

    Raises:
        FileNotFoundError: If fpath is invalid.
        ModelFileError: If a line is malformed, a key is unknown, duplicated or missing, or the
            atoms are not numbered 1..d.
        ValueError: If the described model violates the model invariants.

    Returns:
        TessellationModel: The described model.
    """
    if not os.path.isfile(fpath):
        raise FileNotFoundError(f"File with path {fpath} cannot be found")

    entries: dict[str, str] = {}
    with pathlib.Path(fpath).open(encoding="utf8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ModelFileError(f"Line {lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in entries:
                raise ModelFileError(f"Line {lineno}: duplicate key {key!r}")
            entries[key] = value

    if not entries:
        raise ModelFileError("Model file cannot be empty")

    try:
        dimension = int(_pop_required(entries, "dimension"))
        gamma = float(_pop_required(entries, "gamma"))
    except ValueError as e:
        if isinstance(e, ModelFileError):
            raise
        raise ModelFileError(f"Could not parse dimension or gamma: {e}")

    directions: dict[int, tuple[float, ...]] = {}
    weights: dict[int, float] = {}
    for key, value in entries.items():
        match = _ATOM_KEY.match(key)
        if match is None:
            raise ModelFileError(f"Unknown key {key!r}")
        index, field = int(match.group(1)), match.group(2)
        try:
            if field == "direction":
                directions[index] = tuple(float(c) for c in value.split(","))
            else:
                weights[index] = float(value)
        except ValueError:
            raise ModelFileError(f"Could not parse {key}={value!r}")

    expected = set(range(1, dimension + 1))
    if set(directions) != expected or set(weights) != expected:
        raise ModelFileError(
            f"Atoms must be numbered 1..{dimension}, each with a direction and a weight."
        )

    return TessellationModel(
        dimension=dimension,
        intensity=gamma,
        atoms=tuple(
            DirectionAtom(direction=directions[i], weight=weights[i])
            for i in sorted(expected)
        ),
    )


def dump_model(model: TessellationModel, fpath: Union[str, pathlib.Path]) -> None:
    """
    Writes ``model`` in the format read by ``load_model``.
    """
    lines = [f"dimension={model.dimension}", f"gamma={float(model.intensity)!r}"]
    for i, atom in enumerate(model.atoms, start=1):
        lines.append(f"atom.{i}.direction=" + ",".join(repr(float(c)) for c in atom.direction))
        lines.append(f"atom.{i}.weight={float(atom.weight)!r}")
    pathlib.Path(fpath).write_text("\n".join(lines) + "\n", encoding="utf8")


def _pop_required(entries: dict[str, str], key: str) -> str:
    if key not in entries:
        raise ModelFileError(f"Missing required key {key!r}")
    return entries.pop(key)
