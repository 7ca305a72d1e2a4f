"""Schema-checked readers for the solver's CSV files.

The solver package documents one header per file kind; everything here
validates that header verbatim and hands back float columns. No quantity
is ever re-derived from another.
"""
import csv
from pathlib import Path

import numpy as np

# header rows as written by the solver package, keyed by schema name
SCHEMAS = {
    "timeseries": ("t", "max_rho", "min_rho", "mass", "linf_grad_s",
                   "n_x", "dt"),
    "profile": ("x", "rho", "s", "grad_s"),
    "profile_radial": ("r", "rho", "s", "grad_s"),
    "convergence": ("dx", "e1", "order"),
    "eps_sweep": ("eps", "dist_f_rhoF_l2", "dist_rho_rho0_l1"),
    "stationary": ("x_rescaled", "eps_rho_eps"),
    "ftilde": ("v", "ftilde"),
    "selfsim": ("tau", "l1_to_final"),
}


class SchemaError(ValueError):
    """CSV file is missing, empty, or its header does not match."""


def _parse_cell(cell: str) -> float:
    if cell == "":
        return float("nan")
    return float(cell)


def read_table(path, schema: str) -> dict[str, np.ndarray]:
    """Read a CSV file into named columns after validating its header.

    `schema` names an entry of SCHEMAS; "profile" accepts the radial
    variant too (first column r instead of x).
    """
    path = Path(path)
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}")
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise SchemaError(f"{path}: file is empty")
    header = tuple(rows[0])
    expected = [SCHEMAS[schema]]
    if schema == "profile":
        expected.append(SCHEMAS["profile_radial"])
    if header not in expected:
        want = " or ".join(",".join(h) for h in expected)
        raise SchemaError(f"{path}: header {','.join(header)!r} does not "
                          f"match the {schema} schema ({want})")
    body = [row for row in rows[1:] if row]
    if not body:
        raise SchemaError(f"{path}: no data rows")
    bad = [row for row in body if len(row) != len(header)]
    if bad:
        raise SchemaError(f"{path}: row with {len(bad[0])} cells, "
                          f"expected {len(header)}")
    columns = {}
    for i, name in enumerate(header):
        try:
            columns[name] = np.array([_parse_cell(row[i]) for row in body])
        except ValueError as exc:
            raise SchemaError(f"{path}: column {name!r}: {exc}") from exc
    return columns


__all__ = ["SCHEMAS", "SchemaError", "read_table"]
