"""Run directory layout and the snapshot binary format.

A run directory holds config.echo (resolved config, the hashed bytes),
series.csv (one row per diagnostic sample), snapshots/t_<index>.bin,
and manifest.json.  All files are written atomically (write to a
temporary sibling, then rename) so a crashed run never leaves a
half-written artifact that parses.

Snapshot format, little-endian throughout: a 32-byte header (magic
"XNLS", uint32 n, float64 l, float64 t, 8 pad bytes), then a uint64
element count n*n, then the complex64 samples row-major.
"""

import csv
import io
import json
import os
import struct
import time
import uuid

import numpy as np

from .errors import XnlsError
from .evolution import SERIES_COLUMNS
from .grid import Field2D, GridSpec

MAGIC = b"XNLS"
_HEADER = struct.Struct("<4sIdd8x")
ARTIFACT_VERSION = "1.0"


def _atomic_write(path, data):
    tmp = f"{path}.tmp.{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def snapshot_bytes(t, u):
    buf = io.BytesIO()
    buf.write(_HEADER.pack(MAGIC, u.grid.n, u.grid.l, float(t)))
    buf.write(struct.pack("<Q", u.grid.n**2))
    buf.write(np.ascontiguousarray(u.values, dtype=np.complex64).tobytes())
    return buf.getvalue()


def write_snapshot(path, t, u):
    _atomic_write(path, snapshot_bytes(t, u))


def read_snapshot(path):
    """Returns (t, Field2D); complex64 payload widened to complex128."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise XnlsError(f"truncated snapshot header in {path}")
        magic, n, l, t = _HEADER.unpack(head)
        if magic != MAGIC:
            raise XnlsError(f"bad snapshot magic {magic!r} in {path}")
        (count,) = struct.unpack("<Q", fh.read(8))
        if count != n * n:
            raise XnlsError(
                f"snapshot length prefix {count} inconsistent with n={n} in {path}"
            )
        data = np.frombuffer(fh.read(8 * count), dtype="<c8")
        if data.size != count:
            raise XnlsError(f"truncated snapshot payload in {path}")
    grid = GridSpec(int(n), float(l))
    return float(t), Field2D(grid, data.astype(np.complex128).reshape(n, n))


def write_series(path, series):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    for row in series.as_rows():
        writer.writerow([repr(float(x)) for x in row])
    _atomic_write(path, buf.getvalue())


def read_series(path):
    """series.csv back as a dict of column name to float array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SERIES_COLUMNS:
            raise XnlsError(f"unexpected series.csv columns in {path}: {header}")
        rows = [[float(x) for x in row] for row in reader]
    cols = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(SERIES_COLUMNS))
    return {name: cols[:, i] for i, name in enumerate(SERIES_COLUMNS)}


class RunDirectory:
    """Filesystem handle for one run; creation resolves the layout."""

    def __init__(self, root):
        self.root = root
        self.snapshot_dir = os.path.join(root, "snapshots")

    @classmethod
    def create(cls, root, cfg):
        rd = cls(root)
        os.makedirs(rd.snapshot_dir, exist_ok=True)
        _atomic_write(os.path.join(root, "config.echo"), cfg.canonical_toml())
        return rd

    def snapshot_path(self, index):
        return os.path.join(self.snapshot_dir, f"t_{index}.bin")

    def snapshot_sink(self):
        def sink(index, t, u):
            write_snapshot(self.snapshot_path(index), t, u)

        return sink

    def write_series(self, series):
        write_series(os.path.join(self.root, "series.csv"), series)

    def read_series(self):
        return read_series(os.path.join(self.root, "series.csv"))

    def snapshots(self):
        """All (t, field) pairs in index order."""
        if not os.path.isdir(self.snapshot_dir):
            raise XnlsError(f"run directory {self.root} has no snapshots")
        names = os.listdir(self.snapshot_dir)
        indexed = []
        for name in names:
            if name.startswith("t_") and name.endswith(".bin"):
                indexed.append((int(name[2:-4]), name))
        if not indexed:
            raise XnlsError(f"run directory {self.root} has no snapshots")
        out = []
        for _, name in sorted(indexed):
            out.append(read_snapshot(os.path.join(self.snapshot_dir, name)))
        return out

    def config_echo(self):
        with open(os.path.join(self.root, "config.echo")) as fh:
            return fh.read()

    def write_manifest(self, cfg, suites=None, run_id=None):
        manifest = {
            "run_id": run_id or uuid.uuid4().hex,
            "config_hash": cfg.digest(),
            "artifact_version": ARTIFACT_VERSION,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "suites": suites or {},
        }
        _atomic_write(
            os.path.join(self.root, "manifest.json"),
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )
        return manifest

    def read_manifest(self):
        with open(os.path.join(self.root, "manifest.json")) as fh:
            return json.load(fh)


def write_json(path, payload):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
