from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd

from crossflow.config.schema import (
    CSV_FLOAT_FORMAT,
    OCCUPANCY_COLUMNS,
    SNAPSHOT_1D_COLUMNS,
    SNAPSHOT_2D_COLUMNS,
)
from crossflow.lattice.state import LatticeState, Species
from crossflow.pde.fields import DensityField1D

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_SYMBOLS = {int(Species.EMPTY): ".", int(Species.RED): "R", int(Species.BLUE): "B"}


def lattice_to_text(state: LatticeState) -> str:
    """One character per cell (``.``, ``R``, ``B``); the first line is the top row ``j = n - 1``."""
    grid = np.asarray(state.grid)
    rows = ("".join(_SYMBOLS[int(v)] for v in grid[:, j]) for j in range(state.n - 1, -1, -1))
    return "\n".join(rows) + "\n"


def occupancy_frame(state: LatticeState) -> pd.DataFrame:
    """Occupied cells as ``(i, j, species)`` rows ordered by ``i`` then ``j``."""
    grid = np.asarray(state.grid)
    i, j = np.nonzero(grid)
    species = np.where(grid[i, j] == Species.RED, "R", "B")
    return pd.DataFrame({"i": i, "j": j, "species": species}, columns=list(OCCUPANCY_COLUMNS))


def write_lattice_snapshot(state: LatticeState, out_dir: PathLike, stem: str) -> list[Path]:
    out = Path(out_dir)
    text_path = out / f"{stem}.txt"
    csv_path = out / f"{stem}_occupancy.csv"
    text_path.write_text(lattice_to_text(state), encoding="utf-8")
    occupancy_frame(state).to_csv(csv_path, index=False)
    return [text_path, csv_path]


def field_frame(state: Any) -> pd.DataFrame:
    """Cell-center table of a density field, row-major over ``(i, j)``."""
    r = np.asarray(state.r)
    b = np.asarray(state.b)
    if isinstance(state, DensityField1D):
        x = state.grid.cell_centers()
        data = {"x": x, "r": r, "b": b, "rho": r + b}
        return pd.DataFrame(data, columns=list(SNAPSHOT_1D_COLUMNS))
    x, y = state.grid.mesh()
    data = {"x": x.ravel(), "y": y.ravel(), "r": r.ravel(), "b": b.ravel(), "rho": (r + b).ravel()}
    return pd.DataFrame(data, columns=list(SNAPSHOT_2D_COLUMNS))


def write_field_csv(state: Any, path: PathLike) -> Path:
    path = Path(path)
    field_frame(state).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def write_pgm(values: np.ndarray, path: PathLike) -> Path:
    """Binary greyscale image (P5, 8-bit) mapping ``[0, 1]`` linearly to ``[0, 255]``.

    ``values[i, j]`` is drawn with ``i`` along the image width and the
    largest ``j`` on the top row.
    """
    a = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    pixels = np.rint(a.T[::-1, :] * 255.0).astype(np.uint8)
    height, width = pixels.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
    return path


def write_field_snapshot(state: Any, out_dir: PathLike, stem: str, *, images: bool = True) -> list[Path]:
    out = Path(out_dir)
    written = [write_field_csv(state, out / f"{stem}.csv")]
    if images and np.ndim(state.r) == 2:
        written.append(write_pgm(state.r, out / f"{stem}_r.pgm"))
        written.append(write_pgm(state.b, out / f"{stem}_b.pgm"))
    return written


def _jsonable(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_manifest(manifest: dict[str, Any], path: PathLike) -> Path:
    """JSON with sorted keys; non-finite floats are written as ``null``."""
    path = Path(path)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Wrote manifest %s.", path)
    return path
