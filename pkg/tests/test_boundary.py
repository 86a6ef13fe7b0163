"""边界条件、剪枝与线程数解析"""

import numpy as np
import pytest

from fluid.boundary import FREE, HARD, BoundarySpec, ghost_value, update_active_set
from fluid.constants import ATM
from fluid.grid import VoxelFlag, VoxelState
from fluid.parallel import DETERMINISTIC_ENV, WORKERS_ENV, SlabExecutor, deterministic_mode, resolve_workers, row_slabs


def test_free_face_ghost_reads_ambient(small_grid, consts):
    small_grid.set_cell((0, 3, 3), VoxelState(rho=5.0, v=(-20.0, 1.0, 0.0), n_int=3e5, temp=418.1, pres=6e5))
    ghost = ghost_value(small_grid, (0, 3, 3), (-1, 0, 0), BoundarySpec(), consts)
    assert ghost.flag == VoxelFlag.FREE_BOUNDARY
    assert ghost.pres == small_grid.ambient.pres
    assert ghost.v == (0.0, 0.0, 0.0)


def test_hard_face_ghost_mirrors_normal_velocity(small_grid, consts):
    small_grid.set_cell((0, 3, 3), VoxelState(rho=5.0, v=(-20.0, 1.0, 2.0), n_int=3e5, temp=418.1, pres=6e5))
    ghost = ghost_value(small_grid, (0, 3, 3), (-1, 0, 0), BoundarySpec.closed_box(), consts)
    assert ghost.flag == VoxelFlag.HARD_BOUNDARY
    assert ghost.v == (20.0, 1.0, 2.0)
    assert ghost.pres == 6e5


def test_solid_neighbor_acts_as_hard_wall(small_grid, consts):
    small_grid.read.pv[4, 3, 3] = 0.0
    ghost = ghost_value(small_grid, (3, 3, 3), (1, 0, 0), BoundarySpec(), consts)
    assert ghost.flag == VoxelFlag.HARD_BOUNDARY


def test_open_neighbor_is_not_a_boundary(small_grid, consts):
    with pytest.raises(ValueError, match="not a boundary"):
        ghost_value(small_grid, (3, 3, 3), (1, 0, 0), BoundarySpec(), consts)


def test_boundary_settings_validation():
    with pytest.raises(ValueError, match="free or hard"):
        BoundarySpec(faces={"x_min": "sticky"})
    with pytest.raises(ValueError, match="unknown boundary face"):
        BoundarySpec(faces={"w_min": FREE})
    spec = BoundarySpec(faces={"z_min": HARD})
    assert spec.face(2, 0) == HARD
    assert spec.face(2, 1) == FREE
    assert spec.has_free_faces
    assert not BoundarySpec.closed_box().has_free_faces


def test_active_set_is_disturbance_plus_halo(small_grid):
    small_grid.read.pres[6, 6, 6] = 2.0 * ATM
    active = update_active_set(small_grid, BoundarySpec(halo=2))
    # 压差出现在 (6,6,6) 及其六个邻居上
    assert active[6, 6, 6]
    assert active[6, 6, 9]
    assert not active[6, 6, 10]
    assert not active[0, 0, 0]


def test_force_active_and_solids(small_grid):
    force = np.zeros(small_grid.dims, dtype=bool)
    force[0, 0, 0] = True
    force[1, 1, 1] = True
    small_grid.read.pv[1, 1, 1] = 0.0
    active = update_active_set(small_grid, BoundarySpec(), force_active=force)
    assert active[0, 0, 0]
    assert not active[1, 1, 1]
    assert np.count_nonzero(active) == 1


def test_pruning_disabled_activates_all_fluid(small_grid):
    small_grid.read.pv[2, 2, 2] = 0.0
    active = update_active_set(small_grid, BoundarySpec(prune_enabled=False))
    assert np.count_nonzero(active) == small_grid.cell_count - 1


def test_resolve_workers_precedence(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert resolve_workers(2) == 2
    assert resolve_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "many")
    assert resolve_workers() == 1
    monkeypatch.delenv(WORKERS_ENV)
    assert resolve_workers() >= 1
    assert resolve_workers(0) == 1


def test_deterministic_mode_reads_env(monkeypatch):
    assert not deterministic_mode()
    monkeypatch.setenv(DETERMINISTIC_ENV, "1")
    assert deterministic_mode()


@pytest.mark.parametrize("rows,workers", [(10, 3), (2, 8), (7, 1)])
def test_row_slabs_cover_rows_once(rows, workers):
    slabs = row_slabs(rows, workers)
    covered = np.concatenate([np.arange(rows)[s] for s in slabs])
    np.testing.assert_array_equal(covered, np.arange(rows))
    assert len(slabs) <= workers


def test_slab_executor_propagates_errors():
    def fail(rows):
        if rows.start > 0:
            raise RuntimeError("boom")

    with SlabExecutor(2) as pool:
        with pytest.raises(RuntimeError, match="boom"):
            pool.map_rows(fail, 8)
