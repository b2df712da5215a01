"""Artifact serialization: CSV tables, binary snapshot archives, manifests.

All files are written atomically (temp file + rename).  Floats in CSV are
printed with 17 significant digits so repeated runs compare byte-for-byte.

Binary snapshot format (little-endian):
    magic   4 bytes  b"SMDA"
    version u32      1
    nsnap   u32      number of snapshots
    ndim    u32      grid rank (1 or 2)
    dims    u32[ndim]
    complex u32      0 real payload, 1 interleaved re/im
    axes    f64[dims[0]] ... f64[dims[ndim-1]]
    per snapshot: time f64, payload f64[prod(dims) * (2 if complex else 1)]
"""

import json
import os
import struct
import tempfile

import numpy as np

_MAGIC = b"SMDA"
_VERSION = 1


def fmt(x):
    return f"{float(x):.17g}"


def _atomic_write(path, data, mode="w"):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_field_csv(path, snapshots):
    """Long-format snapshot table; 1D complex fields get Re/Im columns."""
    first = snapshots[0]
    is_complex = np.iscomplexobj(first.values)
    rows = []
    if len(first.grid) == 1:
        header = ["t", "x", "re_u", "im_u"] if is_complex else ["t", "x", "u"]
        for snap in snapshots:
            x = snap.grid[0]
            for i in range(x.size):
                if is_complex:
                    rows.append((snap.time, x[i], snap.values[i].real, snap.values[i].imag))
                else:
                    rows.append((snap.time, x[i], snap.values[i]))
    else:
        header = ["t", "x", "z", "u"]
        for snap in snapshots:
            x, z = snap.grid
            for i in range(x.size):
                for j in range(z.size):
                    rows.append((snap.time, x[i], z[j], snap.values[i, j]))
    write_csv(path, header, rows)


def write_field_bin(path, snapshots):
    first = snapshots[0]
    is_complex = np.iscomplexobj(first.values)
    dims = first.values.shape
    parts = [
        _MAGIC,
        struct.pack("<III", _VERSION, len(snapshots), len(dims)),
        struct.pack(f"<{len(dims)}I", *dims),
        struct.pack("<I", 1 if is_complex else 0),
    ]
    for axis in first.grid:
        parts.append(np.asarray(axis, dtype="<f8").tobytes())
    for snap in snapshots:
        parts.append(struct.pack("<d", snap.time))
        if is_complex:
            buf = np.empty(snap.values.size * 2)
            buf[0::2] = snap.values.real.ravel()
            buf[1::2] = snap.values.imag.ravel()
            parts.append(buf.astype("<f8").tobytes())
        else:
            parts.append(np.asarray(snap.values, dtype="<f8").tobytes())
    _atomic_write(path, b"".join(parts), mode="wb")


def read_field_bin(path):
    """Inverse of write_field_bin; returns a list of GridField."""
    from .dns import GridField

    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a snapshot archive (bad magic)")
    version, nsnap, ndim = struct.unpack_from("<III", data, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported version {version}")
    offset = 16
    dims = struct.unpack_from(f"<{ndim}I", data, offset)
    offset += 4 * ndim
    (is_complex,) = struct.unpack_from("<I", data, offset)
    offset += 4
    axes = []
    for d in dims:
        axes.append(np.frombuffer(data, dtype="<f8", count=d, offset=offset).copy())
        offset += 8 * d
    count = int(np.prod(dims))
    snapshots = []
    for _ in range(nsnap):
        (time,) = struct.unpack_from("<d", data, offset)
        offset += 8
        n_vals = count * (2 if is_complex else 1)
        payload = np.frombuffer(data, dtype="<f8", count=n_vals, offset=offset)
        offset += 8 * n_vals
        if is_complex:
            values = (payload[0::2] + 1j * payload[1::2]).reshape(dims)
        else:
            values = payload.copy().reshape(dims)
        snapshots.append(GridField(tuple(axes), values, time))
    return snapshots


def write_corrections_csv(path, corrections):
    write_csv(
        path,
        ["t", "iterations", "pre_rel_err", "post_rel_err"],
        [(c.t, str(c.iterations), c.pre_rel_err, c.post_rel_err) for c in corrections],
    )


def write_manifest(path, manifest):
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    with open(path) as handle:
        return json.load(handle)
