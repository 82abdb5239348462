"""Field file formats: QF1 binary, CSV and legacy-VTK structured points.

QF1 layout: one ASCII header line

    QF1 <nx> <ny> <nz> <components> <ox> <oy> <oz> <h>\\n

followed by little-endian float64 samples, z outermost and x innermost,
components interleaved per voxel.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FormatError
from .grid import Domain, Field, Grid

MAGIC = "QF1"


def _to_file_order(values: np.ndarray) -> np.ndarray:
    # (nx, ny, nz, c) -> (nz, ny, nx, c)
    return np.ascontiguousarray(values.transpose(2, 1, 0, 3))


def write_field(field: Field, path) -> None:
    g = field.grid
    header = "%s %d %d %d %d %r %r %r %r\n" % (
        MAGIC, *g.dims, field.components, *g.origin, g.spacing,
    )
    payload = _to_file_order(field.values).astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def read_field(path, domain: Domain | None = None) -> Field:
    """Read a QF1 file.

    Without ``domain`` the field is attached to a full-grid custom domain
    centered on the lattice.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing QF1 header line")
    try:
        parts = raw[:nl].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: header is not ASCII") from exc
    if len(parts) != 9 or parts[0] != MAGIC:
        raise FormatError(f"{path}: bad magic or header field count")
    try:
        dims = tuple(int(p) for p in parts[1:4])
        comps = int(parts[4])
        origin = tuple(float(p) for p in parts[5:8])
        h = float(parts[8])
    except ValueError as exc:
        raise FormatError(f"{path}: unparsable header") from exc
    if comps not in (1, 3, 4) or min(dims) < 1:
        raise FormatError(f"{path}: invalid dims {dims} or component count {comps}")
    payload = raw[nl + 1 :]
    expected = int(np.prod(dims)) * comps * 8
    if len(payload) != expected:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype="<f8").reshape(dims[2], dims[1], dims[0], comps)
    values = data.transpose(2, 1, 0, 3).astype(float)
    grid = Grid(dims, origin, h)
    if domain is None:
        mid = np.asarray(origin) + h * (np.asarray(dims) - 1) / 2
        domain = Domain(grid, np.ones(dims, dtype=bool), mid, "custom")
        # a full box is trivially star-shaped about its center
    elif domain.grid != grid:
        raise FormatError(f"{path}: grid in file does not match the supplied domain")
    return Field(domain, values, np.ones(dims, dtype=bool) if domain.mask.all() else None)


def write_csv(field: Field, path, region=None) -> None:
    """Write ``x,y,z,c0[,c1,...]`` rows for voxels in ``region`` (default: support)."""
    region = field.support if region is None else np.asarray(region) & field.support
    pts = field.grid.coords[region]
    vals = field.values[region]
    cols = ["x", "y", "z"] + [f"c{i}" for i in range(field.components)]
    np.savetxt(path, np.hstack([pts, vals]), delimiter=",", header=",".join(cols), comments="", fmt="%.17g")


def write_vtk(field: Field, path, name: str = "field") -> None:
    """Legacy-VTK ASCII STRUCTURED_POINTS export (point data on voxel centers)."""
    g = field.grid
    vals = np.where(field.support[..., None], field.values, 0.0)
    ordered = _to_file_order(vals).reshape(-1, field.components)
    directory = os.path.dirname(os.path.abspath(os.fspath(path)))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w") as fp:
        fp.write("# vtk DataFile Version 3.0\n")
        fp.write(f"{name}\n")
        fp.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fp.write("DIMENSIONS %d %d %d\n" % g.dims)
        fp.write("ORIGIN %.17g %.17g %.17g\n" % g.origin)
        fp.write("SPACING %.17g %.17g %.17g\n" % ((g.spacing,) * 3))
        fp.write("POINT_DATA %d\n" % g.size)
        if field.components == 3:
            fp.write(f"VECTORS {name} double\n")
        else:
            fp.write(f"SCALARS {name} double {field.components}\nLOOKUP_TABLE default\n")
        for row in ordered:
            fp.write(" ".join("%.12e" % v for v in row) + "\n")
