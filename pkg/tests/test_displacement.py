"""内部部分体积、活塞压缩与体素合并"""

import numpy as np
import pytest

from fluid.constants import ATM
from fluid.grid import VoxelState, sync_state_equations, total_mass
from solids.displacement import (
    DisplacementState,
    adiabatic_compress,
    apply_displacement,
    merge_nonzero_to_zero,
    merge_zero_to_nonzero,
    piston_axis,
    publish_volumes,
    schedule_displacement,
)
from helpers import make_grid


def test_adiabatic_compression_keeps_mass(consts):
    cell = sync_state_equations(VoxelState(rho=1.2, n_int=consts.c_v * 290.0), consts)
    squeezed = adiabatic_compress(cell, 1.0, 0.5, consts)
    assert squeezed.rho * 0.5 == pytest.approx(cell.rho * 1.0)
    assert squeezed.pres / cell.pres == pytest.approx(2.0 ** consts.gamma, rel=1e-12)
    assert squeezed.temp / cell.temp == pytest.approx(2.0 ** (consts.gamma - 1.0), rel=1e-12)
    assert squeezed.partial_volume == 0.5


def test_adiabatic_compression_needs_positive_volumes(consts):
    cell = sync_state_equations(VoxelState(rho=1.2, n_int=2e5), consts)
    with pytest.raises(ValueError, match="positive volumes"):
        adiabatic_compress(cell, 1.0, 0.0, consts)


def test_zero_to_nonzero_split():
    va1, vb1, dva, dvb = merge_zero_to_nonzero(0.5, 1.0, 1.0)
    assert va1 == pytest.approx(1.0 / 3.0)
    assert vb1 == pytest.approx(2.0 / 3.0)
    assert dva == pytest.approx(1.0 / 6.0)
    assert dvb == pytest.approx(1.0 / 3.0)
    assert va1 + vb1 == pytest.approx(1.0)


def test_nonzero_to_zero_turns_lost_kinetic_energy_into_heat(consts):
    a = VoxelState(rho=1.0, v=(10.0, 0.0, 0.0), n_int=1000.0)
    b = VoxelState(rho=1.0, v=(0.0, 0.0, 0.0), n_int=1000.0)
    merged, vb1, dvb = merge_nonzero_to_zero(a, 1.0, b, 1.0, 1.0, consts)
    assert merged.v == pytest.approx((5.0, 0.0, 0.0))
    assert merged.n_int == pytest.approx(1012.5)
    assert merged.rho == pytest.approx(1.0)
    assert vb1 == 2.0
    assert dvb == -1.0


def test_piston_axis_picks_dominant_component():
    assert piston_axis((0.1, -3.0, 2.0)) == (1, -3.0)


def _piston_grid(consts):
    grid = make_grid((6, 1, 1), 1.0, consts)
    state = DisplacementState.from_free_fraction(np.ones(grid.dims))
    return grid, state


def test_piston_partial_entry_compresses_cell(consts):
    grid, state = _piston_grid(consts)
    mass = total_mass(grid)
    new_free = np.ones(grid.dims)
    new_free[5, 0, 0] = 0.5
    schedule_displacement(grid, state, new_free, (-10.0, 0.0, 0.0), consts)
    assert state.busy
    assert state.rate[5, 0, 0] == pytest.approx(10.0)

    # 速率 h²·|v|/h³ = 10 /s，每步 0.1，5 步排空
    updated = [apply_displacement(grid, state, 0.01, consts) for _ in range(6)]
    assert updated == [1, 1, 1, 1, 1, 0]
    assert not state.busy
    assert grid.read.pv[5, 0, 0] == 0.5
    assert grid.read.pres[5, 0, 0] == pytest.approx(ATM * 2.0 ** consts.gamma, rel=1e-9)
    assert grid.read.pres[4, 0, 0] == grid.ambient.pres
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)


def test_piston_closing_cell_merges_forward_and_drains(consts):
    grid, state = _piston_grid(consts)
    mass = total_mass(grid)
    new_free = np.ones(grid.dims)
    new_free[5, 0, 0] = 0.0
    schedule_displacement(grid, state, new_free, (-10.0, 0.0, 0.0), consts)
    assert state.counters["closed"] == 1
    assert state.v_int[4, 0, 0] == 2.0
    assert grid.read.rho[5, 0, 0] == 0.0
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)

    for _ in range(12):
        apply_displacement(grid, state, 0.01, consts)
    assert not state.busy
    assert grid.read.pv[4, 0, 0] == 1.0
    assert grid.read.pres[4, 0, 0] == pytest.approx(ATM * 2.0 ** consts.gamma, rel=1e-9)
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)


def test_opening_cell_shares_neighbor_fluid(consts):
    grid = make_grid((6, 1, 1), 1.0, consts)
    free = np.ones(grid.dims)
    free[5, 0, 0] = 0.0
    state = DisplacementState.from_free_fraction(free)
    publish_volumes(grid, state)
    mass = total_mass(grid)

    schedule_displacement(grid, state, np.ones(grid.dims), (10.0, 0.0, 0.0), consts)
    assert state.counters["opened"] == 1
    assert state.v_int[4, 0, 0] == pytest.approx(0.5)
    assert state.v_int[5, 0, 0] == pytest.approx(0.5)
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)

    for _ in range(8):
        apply_displacement(grid, state, 0.01, consts)
    expected = ATM * 2.0 ** -consts.gamma
    assert grid.read.pres[4, 0, 0] == pytest.approx(expected, rel=1e-9)
    assert grid.read.pres[5, 0, 0] == pytest.approx(expected, rel=1e-9)
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)


def test_opening_cell_uses_new_target_of_changing_neighbor(consts):
    grid = make_grid((6, 1, 1), 1.0, consts)
    free = np.ones(grid.dims)
    free[4, 0, 0] = 0.0
    state = DisplacementState.from_free_fraction(free)
    publish_volumes(grid, state)
    mass = total_mass(grid)

    # 4 打开的同一次体素化中，后方的 5 被压到一半
    new_free = np.ones(grid.dims)
    new_free[5, 0, 0] = 0.5
    schedule_displacement(grid, state, new_free, (-10.0, 0.0, 0.0), consts)
    assert state.v_int[4, 0, 0] == pytest.approx(2.0 / 3.0)
    assert state.v_int[5, 0, 0] == pytest.approx(1.0 / 3.0)

    for _ in range(8):
        apply_displacement(grid, state, 0.01, consts)
    assert not state.busy
    expected = ATM * (2.0 / 3.0) ** consts.gamma
    assert grid.read.pres[4, 0, 0] == pytest.approx(expected, rel=1e-9)
    assert grid.read.pres[5, 0, 0] == pytest.approx(expected, rel=1e-9)
    assert total_mass(grid) == pytest.approx(mass, rel=1e-12)


def test_pure_rotation_drains_in_one_step(consts):
    grid, state = _piston_grid(consts)
    new_free = np.ones(grid.dims)
    new_free[2, 0, 0] = 0.5
    schedule_displacement(grid, state, new_free, (0.0, 0.0, 0.0), consts)
    assert np.isinf(state.rate[2, 0, 0])
    assert state.counters["rotation_drains"] == 1
    assert apply_displacement(grid, state, 1e-4, consts) == 1
    assert not state.busy
    assert grid.read.pres[2, 0, 0] == pytest.approx(ATM * 2.0 ** consts.gamma, rel=1e-9)
