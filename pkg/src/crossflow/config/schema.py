from __future__ import annotations

import re

# Output table headers (column order is part of the file contract)
DIAGNOSTICS_COLUMNS = (
    "t",
    "M_r",
    "M_b",
    "entropy",
    "lyapunov",
    "segregation",
    "anisotropy",
    "pert_l2",
)
RASTER_COLUMNS = ("r", "b", "hyperbolic", "in_D", "max_growth", "argmax_k")
SNAPSHOT_2D_COLUMNS = ("x", "y", "r", "b", "rho")
SNAPSHOT_1D_COLUMNS = ("x", "r", "b", "rho")
OCCUPANCY_COLUMNS = ("i", "j", "species")
CONVERGENCE_COLUMNS = ("n", "h", "l1_error")

CSV_FLOAT_FORMAT = "%.17g"

# Numerical tolerances
BOUNDS_TOL = 1e-8
COMPARTMENT_TOL = 1e-12
HYPERBOLIC_TOL = 1e-12
XI_ETA_TOL = 1e-12
LOG_FLOOR = 1e-12
ANISOTROPY_ZERO = 1e-14
CONSERVATION_TOL = 1e-10
C_SAFE = 0.4

# Scenario keys: lower-case snake identifiers
_VALID_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def is_valid_key(name: str) -> bool:
    return bool(_VALID_KEY_RE.match(name))


def normalize_key(raw: str) -> str:
    """
    Normalizes a raw config key: strip, lower-case, spaces/dashes -> underscore.
    Example: " Snapshot-Every " -> "snapshot_every"
    """
    s = raw.strip().lower()
    s = re.sub(r"[\s\-]+", "_", s)
    s = re.sub(r"_+", "_", s)
    return s.strip("_")
