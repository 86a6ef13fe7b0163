"""网格体素化与部分体积"""

import numpy as np
import pytest

from solids.mesh import MeshError
from solids.shapes import box, build_shape, icosphere
from solids.voxelizer import GridSpec, free_fraction, occupancy, occupied_volume, surface_shell, voxelize


def test_aligned_box_fills_whole_voxels():
    mesh = box((2.0, 2.0, 2.0)).translated((2.0, 2.0, 2.0))
    occ = occupancy(mesh, GridSpec((5, 5, 5), 1.0))
    expected = np.zeros((5, 5, 5))
    expected[1:3, 1:3, 1:3] = 1.0
    np.testing.assert_array_equal(occ, expected)


def test_half_covered_voxels():
    # 盒子 x ∈ [0.5, 2.5]，两端体素各覆盖一半
    mesh = box((2.0, 1.0, 1.0)).translated((1.5, 0.5, 0.5))
    occ = occupancy(mesh, GridSpec((3, 1, 1), 1.0), samples=4)
    np.testing.assert_allclose(occ[:, 0, 0], [0.5, 1.0, 0.5])


def test_sphere_volume_is_recovered():
    radius = 1.5
    mesh = icosphere(radius, subdivisions=4).translated((2.0, 2.0, 2.0))
    occ = occupancy(mesh, GridSpec((16, 16, 16), 0.25))
    assert occupied_volume(occ, 0.25) == pytest.approx(mesh.signed_volume, rel=0.02)


def test_shift_by_one_voxel_shifts_occupancy_exactly():
    # 顶点 x 坐标保持在 [8, 16) 内，平移 1 m 不引入舍入
    mesh = icosphere(3.0, subdivisions=3).translated((11.5, 10.0, 10.0))
    spec = GridSpec((20, 20, 20), 1.0)
    occ = occupancy(mesh, spec)
    shifted = occupancy(mesh.translated((1.0, 0.0, 0.0)), spec)
    assert occ.any()
    np.testing.assert_array_equal(shifted[1:], occ[:-1])
    np.testing.assert_array_equal(shifted[0], 0.0)


@pytest.mark.parametrize("kind", ["sphere", "cylinder", "torus", "wedge"])
def test_equal_volume_shapes_voxelize_to_their_volume(kind):
    mesh = build_shape(kind, center=(14.0, 14.0, 14.0), volume=1000.0)
    occ = occupancy(mesh, GridSpec((28, 28, 28), 1.0))
    assert occupied_volume(occ, 1.0) == pytest.approx(1000.0, rel=0.03)


def test_origin_offset_is_honoured():
    mesh = box((1.0, 1.0, 1.0)).translated((10.5, 0.5, 0.5))
    occ = occupancy(mesh, GridSpec((2, 1, 1), 1.0, origin=(10.0, 0.0, 0.0)))
    np.testing.assert_array_equal(occ[:, 0, 0], [1.0, 0.0])


def test_mesh_outside_grid_leaves_no_trace():
    mesh = box((1.0, 1.0, 1.0)).translated((50.0, 50.0, 50.0))
    assert not occupancy(mesh, GridSpec((4, 4, 4), 1.0)).any()


def test_free_fraction_sums_bodies_and_zeroes_slivers():
    a = np.full((2, 1, 1), 0.5)
    b = np.array([0.45, 0.2]).reshape(2, 1, 1)
    free = free_fraction([a, b], (2, 1, 1), zero_threshold=0.1)
    np.testing.assert_allclose(free[:, 0, 0], [0.0, 0.3])


def test_voxelize_validates_mesh():
    with pytest.raises(MeshError, match="inside-out"):
        voxelize(box().flipped().translated((1.0, 1.0, 1.0)), GridSpec((2, 2, 2), 1.0))


def test_voxelize_returns_free_fraction():
    mesh = box((2.0, 2.0, 2.0)).translated((2.0, 2.0, 2.0))
    free = voxelize(mesh, GridSpec((5, 5, 5), 1.0))
    assert free[2, 2, 2] == 1.0
    assert free[1, 1, 1] == 0.0


def test_surface_shell_surrounds_solid():
    solid = np.zeros((5, 5, 5), dtype=bool)
    solid[2, 2, 2] = True
    shell = surface_shell(solid)
    assert np.count_nonzero(shell) == 26
    assert not shell[2, 2, 2]
    assert not surface_shell(np.zeros((3, 3, 3), dtype=bool)).any()
