from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from crossflow.config.schema import CSV_FLOAT_FORMAT, DIAGNOSTICS_COLUMNS


@dataclass
class DiagnosticsSeries:
    """Time series of run diagnostics (ordered by strictly increasing time).

    Fixed columns come first in the order of ``DIAGNOSTICS_COLUMNS``; any
    extra observable (e.g. ``exit_flux``) is appended in first-seen order.
    Values never reported are written as NaN.
    """

    times: list[float] = field(default_factory=list)
    rows: list[dict[str, Optional[float]]] = field(default_factory=list)

    def append(self, t: float, values: dict[str, Optional[float]]) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(
                f"Diagnostics times must be strictly increasing: {t} after {self.times[-1]}."
            )
        self.times.append(float(t))
        self.rows.append(dict(values))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def extra_columns(self) -> list[str]:
        out: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in DIAGNOSTICS_COLUMNS and key not in out:
                    out.append(key)
        return out

    @property
    def columns(self) -> list[str]:
        return list(DIAGNOSTICS_COLUMNS) + self.extra_columns

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return np.asarray(self.times, dtype=float)
        return np.array(
            [np.nan if row.get(name) is None else float(row[name]) for row in self.rows],
            dtype=float,
        )

    def last(self, name: str) -> float:
        if not self.rows:
            raise ValueError("Diagnostics series is empty.")
        return float(self.column(name)[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: self.column(name) for name in self.columns}, columns=self.columns)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
