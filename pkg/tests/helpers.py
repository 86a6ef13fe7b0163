"""测试辅助函数"""

import numpy as np

from fluid.boundary import BoundarySpec
from fluid.constants import ATM, PhysicalConstants
from fluid.grid import FluidGrid, init_ambient, state_from_pressure_temperature


def make_grid(dims, h, consts: PhysicalConstants, pres: float = ATM, temp: float = 290.0) -> FluidGrid:
    grid = FluidGrid(dims, h, consts=consts)
    return init_ambient(grid, pres, temp, consts)


def set_region(grid: FluidGrid, mask: np.ndarray, pres: float, temp: float, consts: PhysicalConstants):
    """把 mask 内的体素设为给定压力与温度 (read 缓冲区，状态方程同步)"""
    rho, n_int = state_from_pressure_temperature(pres, temp, consts)
    f = grid.read
    f.rho[mask] = rho
    f.n_int[mask] = n_int
    f.sync(consts)
    grid.write.copy_from(f)


def centered_ball(grid: FluidGrid, radius: float) -> np.ndarray:
    """以网格中心为球心的体素掩码"""
    centers = grid.cell_centers()
    middle = grid.origin + 0.5 * np.asarray(grid.dims) * grid.h
    dist = np.sqrt(sum((centers[a] - middle[a]) ** 2 for a in range(3)))
    return dist <= radius


def closed_box(**kwargs) -> BoundarySpec:
    kwargs.setdefault("prune_enabled", False)
    return BoundarySpec.closed_box(**kwargs)
