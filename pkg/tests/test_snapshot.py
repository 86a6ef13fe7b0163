"""快照文件格式"""

import struct

import numpy as np
import pytest

from fluid.grid import VoxelState, grid_checksum
from simulation.snapshot import (
    SNAPSHOT_MAGIC,
    Snapshot,
    SnapshotError,
    field_ranges,
    grid_arrays,
    read_snapshot,
    snapshot_name,
    snapshot_paths,
    write_snapshot,
)


def make_snapshot(grid, step=7, time=7e-5) -> Snapshot:
    arrays = grid_arrays(grid.read)
    header = {
        "dims": list(grid.dims),
        "h": grid.h,
        "origin": grid.origin.tolist(),
        "time": time,
        "step": step,
        "ambient": {"pressure": grid.ambient_p, "temperature": grid.ambient_t, "pres": grid.ambient.pres},
        "constants": {"mu": 1.8e-5, "k_thermal": 0.026, "c_v": 717.5, "r_gas": 287.0,
                      "k_gladstone": 2.26e-4, "gravity": [0.0, 0.0, 0.0], "hydrostatic": True},
        "fields": list(arrays),
        "ranges": field_ranges(arrays),
    }
    return Snapshot(header=header, arrays=arrays)


@pytest.fixture
def disturbed(small_grid):
    small_grid.set_cell((2, 3, 4), VoxelState(rho=3.0, v=(3.0, 4.0, 0.0), n_int=4e5, temp=557.5, pres=4.8e5))
    small_grid.read.pv[0, 0, 0] = 0.0
    return small_grid


@pytest.mark.parametrize("compress", [False, True])
def test_write_read_preserves_arrays(tmp_path, disturbed, compress):
    snap = make_snapshot(disturbed)
    path = write_snapshot(tmp_path / "snap.bsnp", snap, compress=compress)
    back = read_snapshot(path)
    assert back.dims == disturbed.dims
    assert back.step == 7 and back.time == 7e-5
    for name, array in snap.arrays.items():
        np.testing.assert_array_equal(back.arrays[name], array)
        assert back.arrays[name].dtype == array.dtype
    assert not list(tmp_path.glob("*.tmp"))


def test_prefix_layout(tmp_path, disturbed):
    path = write_snapshot(tmp_path / "snap.bsnp", make_snapshot(disturbed), compress=True)
    data = path.read_bytes()
    magic, version, flags, header_len = struct.unpack_from("<4sIIQ", data)
    assert magic == SNAPSHOT_MAGIC == b"BSNP"
    assert version == 1
    assert flags == 1
    assert data[20:20 + header_len].startswith(b"{")


def test_rebuilt_grid_matches(tmp_path, disturbed):
    path = write_snapshot(tmp_path / "snap.bsnp", make_snapshot(disturbed))
    grid = read_snapshot(path).to_grid()
    assert grid_checksum(grid) == grid_checksum(disturbed)
    np.testing.assert_array_equal(grid.write.rho, grid.read.rho)


def test_derived_fields(disturbed):
    snap = make_snapshot(disturbed)
    assert snap.field("speed")[2, 3, 4] == pytest.approx(5.0)
    assert snap.field("vy")[2, 3, 4] == 4.0
    assert snap.field("overpressure")[2, 3, 4] == pytest.approx(4.8e5 - disturbed.ambient.pres)
    assert snap.header["ranges"]["speed"] == [0.0, 5.0]
    with pytest.raises(KeyError):
        snap.field("vorticity")


def test_reading_selected_fields(tmp_path, disturbed):
    path = write_snapshot(tmp_path / "snap.bsnp", make_snapshot(disturbed))
    back = read_snapshot(path, fields=["pres"])
    assert list(back.arrays) == ["pres"]


def test_truncated_and_foreign_files(tmp_path, disturbed):
    path = write_snapshot(tmp_path / "snap.bsnp", make_snapshot(disturbed))
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(SnapshotError, match="truncated block"):
        read_snapshot(path)
    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(SnapshotError, match="bad magic"):
        read_snapshot(path)
    path.write_bytes(data[:3])
    with pytest.raises(SnapshotError, match="too short"):
        read_snapshot(path)
    assert issubclass(SnapshotError, OSError)


def test_snapshot_names_sort_by_step(tmp_path, disturbed):
    snap = make_snapshot(disturbed)
    for step in (100, 5, 20):
        write_snapshot(tmp_path / snapshot_name(step), snap)
    assert snapshot_name(5) == "snap_0000005.bsnp"
    assert [p.name for p in snapshot_paths(tmp_path)] == [snapshot_name(s) for s in (5, 20, 100)]
