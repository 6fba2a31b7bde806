"""Plain-text data emission: field dumps, cut lines, schlieren data, reports.

Everything is written with 17 significant digits and fixed ordering, so a
rerun of the same configuration produces byte-identical files.  Rendering
is left to external tools.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from . import recovery
from .errors import ConfigurationError
from .mesh_solver import Field
from .physics import EosParams

_FMT = "%.17g"


def _fmt(value) -> str:
    return _FMT % float(value)


def write_field(field: Field, eos: EosParams, path) -> None:
    """Cell table `x y rho u v p D mx my E`, j-outer / i-inner order.

    The header line carries `# nx ny xmin xmax ymin ymax t gamma`.
    """
    grid = field.grid
    prim = recovery.recover_primitives(field.interior, eos)
    cons = field.interior
    xs = grid.centers_x()
    ys = grid.centers_y()
    header = " ".join(
        ["#", str(grid.n_x), str(grid.n_y)]
        + [_fmt(v) for v in (grid.x_min, grid.x_max, grid.y_min, grid.y_max, field.time, eos.gamma_adiabatic)]
    )
    lines = [header]
    for j in range(grid.n_y):
        for i in range(grid.n_x):
            values = (xs[i], ys[j], *prim[i, j], *cons[i, j])
            lines.append(" ".join(_fmt(v) for v in values))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def read_field(path):
    """Parse a write_field file back into (meta dict, data array (n, 10))."""
    with open(path) as handle:
        header = handle.readline().split()
        data = np.loadtxt(handle, ndmin=2)
    meta = {
        "n_x": int(header[1]),
        "n_y": int(header[2]),
        "x_min": float(header[3]),
        "x_max": float(header[4]),
        "y_min": float(header[5]),
        "y_max": float(header[6]),
        "time": float(header[7]),
        "gamma": float(header[8]),
    }
    return meta, data


def write_cuts(field: Field, eos: EosParams, path, rays=("y-axis", "diagonal")) -> None:
    """Density profiles along the y-axis and the diagonal y = x.

    Two `coord value` blocks; the coordinate is the signed distance from the
    origin along the ray (y itself on the axis, sqrt(2) x on the diagonal).
    Profiles are taken from the cells nearest each ray.
    """
    grid = field.grid
    prim = recovery.recover_primitives(field.interior, eos)
    rho = prim[..., 0]
    xs = grid.centers_x()
    ys = grid.centers_y()
    blocks = []
    for ray in rays:
        if ray == "y-axis":
            col = int(np.argmin(np.abs(xs - 1e-15)))  # ties go to the positive side
            coords, values = ys, rho[col, :]
        elif ray == "diagonal":
            if grid.n_x != grid.n_y:
                raise ConfigurationError("diagonal cut needs a square grid")
            coords, values = math.sqrt(2.0) * xs, np.diagonal(rho)
        else:
            raise ConfigurationError(f"unknown cut ray {ray!r}")
        lines = [f"# cut: {ray}"]
        lines += [f"{_fmt(c)} {_fmt(v)}" for c, v in zip(coords, values)]
        blocks.append("\n".join(lines))
    with open(path, "w") as handle:
        handle.write("\n\n".join(blocks) + "\n")


def write_schlieren(field: Field, eos: EosParams, path) -> None:
    """`x y ln_rho ln_p grad_rho_mag` with centered-difference gradients.

    One-sided differences are used on the boundary rows and columns.
    """
    grid = field.grid
    prim = recovery.recover_primitives(field.interior, eos)
    rho = prim[..., 0]
    pres = prim[..., 3]
    grad_x, grad_y = np.gradient(rho, grid.dx, grid.dy)
    grad_mag = np.sqrt(grad_x * grad_x + grad_y * grad_y)
    ln_rho = np.log(rho)
    ln_p = np.log(pres)
    xs = grid.centers_x()
    ys = grid.centers_y()
    lines = ["# x y ln_rho ln_p grad_rho_mag"]
    for j in range(grid.n_y):
        for i in range(grid.n_x):
            lines.append(
                " ".join(_fmt(v) for v in (xs[i], ys[j], ln_rho[i, j], ln_p[i, j], grad_mag[i, j]))
            )
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def write_report(entries: Mapping, path) -> None:
    """Flat `key = value` report in insertion order."""
    lines = []
    for key, value in entries.items():
        if isinstance(value, float):
            lines.append(f"{key} = {_fmt(value)}")
        else:
            lines.append(f"{key} = {value}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
