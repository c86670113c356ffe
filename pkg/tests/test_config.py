import hashlib
import os

import numpy as np
import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from conftest import gaussian
from xnls.config import (
    ExperimentConfig,
    apply_overrides,
    grid_of,
    initial_field,
    load,
    resolve,
    sim_config,
)
from xnls.errors import ConfigError, XnlsError
from xnls.evolution import SERIES_COLUMNS, SimConfig, evolve
from xnls.grid import Field2D, GridSpec
from xnls.rundir import (
    MAGIC,
    RunDirectory,
    read_series,
    read_snapshot,
    snapshot_bytes,
    write_json,
    write_series,
    write_snapshot,
)


class TestResolve:
    def test_empty_uses_defaults(self):
        cfg = resolve({})
        assert cfg["grid"]["n"] == 256
        assert cfg["time"]["dt"] == 1e-3
        assert cfg["initial"]["family"] == "gaussian"

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            resolve({"grids": {}})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            resolve({"grid": {"m": 64}})

    def test_type_errors(self):
        with pytest.raises(ConfigError, match=r"\[grid\] n"):
            resolve({"grid": {"n": "big"}})
        with pytest.raises(ConfigError, match=r"\[time\] dt"):
            resolve({"time": {"dt": "fast"}})
        with pytest.raises(ConfigError, match=r"\[virial\] radii"):
            resolve({"virial": {"radii": 2.0}})

    def test_int_promotes_to_float(self):
        cfg = resolve({"time": {"dt": 1}})
        assert cfg["time"]["dt"] == 1.0
        assert isinstance(cfg["time"]["dt"], float)

    def test_semantic_errors(self):
        with pytest.raises(ConfigError, match=r"\[time\] dt"):
            resolve({"time": {"dt": -1.0}})
        with pytest.raises(ConfigError, match="t_end"):
            resolve({"time": {"dt": 0.1, "t_end": 0.01}})
        with pytest.raises(ConfigError, match="family"):
            resolve({"initial": {"family": "soliton"}})
        with pytest.raises(ConfigError, match="needs a path"):
            resolve({"initial": {"family": "file"}})
        with pytest.raises(ConfigError, match="variant"):
            resolve({"orlicz": {"variant": "M"}})
        with pytest.raises(ConfigError, match="multiple"):
            resolve({"output": {"snapshot_every": 30},
                     "diagnostics": {"series_every": 20}})
        with pytest.raises(ConfigError, match="pairs"):
            resolve({"diagnostics": {"pairs": [[4.0]]}})

    def test_canonical_toml_round_trip(self):
        cfg = resolve({"grid": {"n": 64}, "initial": {"amplitude": 0.3}})
        text = cfg.canonical_toml()
        again = resolve(tomllib.loads(text))
        assert again == cfg
        assert again.digest() == cfg.digest()

    def test_digest_tracks_content(self):
        a = resolve({})
        b = resolve({"grid": {"n": 128}})
        assert a.digest() != b.digest()
        assert a.digest() == resolve({}).digest()

    def test_sim_config_mapping(self):
        cfg = resolve({"grid": {"n": 64, "l": 20.0}})
        sim = sim_config(cfg)
        assert isinstance(sim, SimConfig)
        assert sim.grid == grid_of(cfg) == GridSpec(64, 20.0)
        assert sim.virial_r == (2.0, 4.0)
        assert sim.output_every == 500


class TestLoadAndOverrides:
    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load(tmp_path / "nope.toml")

    def test_load_parse_error(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[grid\nn = 64\n")
        with pytest.raises(ConfigError, match="parse error"):
            load(p)

    def test_load_round_trip(self, tmp_path):
        p = tmp_path / "ok.toml"
        p.write_text("[grid]\nn = 64\n\n[time]\ndt = 0.01\nt_end = 0.5\n")
        cfg = load(p)
        assert cfg["grid"]["n"] == 64
        assert cfg["time"]["dt"] == 0.01

    def test_overrides_applied(self):
        raw = apply_overrides({}, ["grid.n=64", "initial.family='zero'"])
        cfg = resolve(raw)
        assert cfg["grid"]["n"] == 64
        assert cfg["initial"]["family"] == "zero"

    def test_override_errors(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["grid.n"])
        with pytest.raises(ConfigError, match="section.key"):
            apply_overrides({}, ["n=64"])
        with pytest.raises(ConfigError, match="cannot parse"):
            apply_overrides({}, ["initial.family=zero"])  # bare word


class TestInitialField:
    def test_zero(self):
        cfg = resolve({"grid": {"n": 64, "l": 20.0},
                       "initial": {"family": "zero"}})
        u = initial_field(cfg)
        assert np.all(u.values == 0)

    def test_gaussian_amplitude(self):
        cfg = resolve({"grid": {"n": 64, "l": 20.0},
                       "initial": {"amplitude": 0.3, "width": 2.0}})
        u = initial_field(cfg)
        center = u.values[32, 32]
        assert center == pytest.approx(0.3, rel=1e-12)

    def test_moser_and_profile(self):
        cfg = resolve({"grid": {"n": 128, "l": 10.0},
                       "initial": {"family": "moser", "alpha": 4.0,
                                   "amplitude": 1.0}})
        with pytest.warns(UserWarning):
            u = initial_field(cfg)
        assert np.max(np.abs(u.values)) == pytest.approx(
            np.sqrt(4.0 / (2 * np.pi)), rel=1e-12
        )
        cfg2 = resolve({"grid": {"n": 128, "l": 10.0},
                        "initial": {"family": "profile", "alpha": 4.0,
                                    "delta": 0.25, "amplitude": 2.0}})
        with pytest.warns(UserWarning):
            v = initial_field(cfg2)
        assert np.max(np.abs(v.values)) > 0

    def test_file_round_trip(self, tmp_path):
        g = GridSpec(64, 20.0)
        u = gaussian(g, c=0.4)
        path = str(tmp_path / "init.bin")
        write_snapshot(path, 0.0, u)
        cfg = resolve({"grid": {"n": 64, "l": 20.0},
                       "initial": {"family": "file", "path": path}})
        v = initial_field(cfg)
        # complex64 storage: about seven decimal digits survive
        assert np.allclose(v.values, u.values, atol=1e-6)

    def test_file_grid_mismatch(self, tmp_path):
        path = str(tmp_path / "init.bin")
        write_snapshot(path, 0.0, gaussian(GridSpec(32, 20.0)))
        cfg = resolve({"grid": {"n": 64, "l": 20.0},
                       "initial": {"family": "file", "path": path}})
        with pytest.raises(ConfigError, match="grid"):
            initial_field(cfg)


class TestSnapshotFormat:
    def test_round_trip(self, tmp_path):
        g = GridSpec(64, 20.0)
        u = Field2D(g, gaussian(g, c=0.7).values * np.exp(0.3j))
        path = str(tmp_path / "t_0.bin")
        write_snapshot(path, 1.25, u)
        t, v = read_snapshot(path)
        assert t == 1.25
        assert v.grid == g
        assert np.allclose(v.values, u.values, atol=1e-6)

    def test_header_layout(self):
        g = GridSpec(16, 4.0)
        data = snapshot_bytes(0.5, Field2D.zero(g))
        assert data[:4] == MAGIC
        # 32-byte header + 8-byte count + n*n complex64
        assert len(data) == 32 + 8 + 16 * 16 * 8

    def test_tampered_magic(self, tmp_path):
        g = GridSpec(16, 4.0)
        data = bytearray(snapshot_bytes(0.0, Field2D.zero(g)))
        data[:4] = b"NOPE"
        path = tmp_path / "bad.bin"
        path.write_bytes(bytes(data))
        with pytest.raises(XnlsError, match="magic"):
            read_snapshot(path)

    def test_truncated_payload(self, tmp_path):
        g = GridSpec(16, 4.0)
        data = snapshot_bytes(0.0, Field2D.zero(g))
        path = tmp_path / "trunc.bin"
        path.write_bytes(data[:-16])
        with pytest.raises(XnlsError, match="truncated"):
            read_snapshot(path)

    def test_count_mismatch(self, tmp_path):
        import struct

        g = GridSpec(16, 4.0)
        data = bytearray(snapshot_bytes(0.0, Field2D.zero(g)))
        data[32:40] = struct.pack("<Q", 100)
        path = tmp_path / "count.bin"
        path.write_bytes(bytes(data))
        with pytest.raises(XnlsError, match="length prefix"):
            read_snapshot(path)


def short_series(grid):
    cfg = SimConfig(grid=grid, dt=1e-3, t_end=0.02, virial_r=(2.0,),
                    series_every=10, output_every=10, boundary_threshold=1.0)
    return evolve(gaussian(grid, c=0.3), cfg)


class TestSeriesAndRunDirectory:
    def test_series_round_trip(self, grid64, tmp_path):
        series = short_series(grid64)
        path = str(tmp_path / "series.csv")
        write_series(path, series)
        cols = read_series(path)
        assert set(cols) == set(SERIES_COLUMNS)
        assert np.array_equal(cols["mass"], series.columns["mass"])

    def test_series_header_exact(self, grid64, tmp_path):
        path = tmp_path / "series.csv"
        write_series(str(path), short_series(grid64))
        header = path.read_text().splitlines()[0]
        assert header == ",".join(SERIES_COLUMNS)

    def test_wrong_columns_rejected(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("t,mass\n0.0,1.0\n")
        with pytest.raises(XnlsError, match="columns"):
            read_series(str(path))

    def test_run_directory_layout(self, grid64, tmp_path):
        cfg = resolve({"grid": {"n": 64, "l": 20.0}})
        rd = RunDirectory.create(str(tmp_path / "run"), cfg)
        series = short_series(grid64)
        rd.write_series(series)
        for i, t in ((0, 0.0), (1, 0.01), (2, 0.02), (10, 0.1)):
            write_snapshot(rd.snapshot_path(i), t, gaussian(grid64, c=0.1))
        snaps = rd.snapshots()
        # numeric index order: t_10 comes after t_2
        assert [t for t, _ in snaps] == [0.0, 0.01, 0.02, 0.1]
        assert rd.read_series()["t"][0] == 0.0

    def test_missing_snapshots_error(self, tmp_path):
        rd = RunDirectory(str(tmp_path / "empty"))
        with pytest.raises(XnlsError, match="no snapshots"):
            rd.snapshots()

    def test_manifest_hash_matches_echo(self, tmp_path):
        cfg = resolve({"grid": {"n": 64, "l": 20.0}})
        rd = RunDirectory.create(str(tmp_path / "run"), cfg)
        manifest = rd.write_manifest(cfg, suites={"evolve": "ok"}, run_id="r1")
        assert manifest["run_id"] == "r1"
        echo_hash = hashlib.sha256(rd.config_echo().encode()).hexdigest()
        assert manifest["config_hash"] == cfg.digest() == echo_hash
        assert rd.read_manifest() == manifest

    def test_no_temp_files_left(self, grid64, tmp_path):
        cfg = resolve({"grid": {"n": 64, "l": 20.0}})
        rd = RunDirectory.create(str(tmp_path / "run"), cfg)
        rd.write_series(short_series(grid64))
        rd.write_manifest(cfg)
        leftovers = [
            name
            for root, _, names in os.walk(str(tmp_path))
            for name in names
            if ".tmp." in name
        ]
        assert leftovers == []

    def test_write_json(self, tmp_path):
        import json

        path = tmp_path / "report.json"
        write_json(str(path), {"b": 1, "a": [1.5, 2.0]})
        assert json.loads(path.read_text()) == {"b": 1, "a": [1.5, 2.0]}
