"""流体核心模块 - 体素网格、边界条件与时间积分"""

from .constants import ATM, BOLTZMANN, PhysicalConstants
from .grid import (
    FluidGrid,
    GridFields,
    VoxelFlag,
    VoxelState,
    init_ambient,
    state_from_pressure_temperature,
    sync_state_equations,
    total_energy,
    total_mass,
    total_momentum,
)
from .boundary import FREE, HARD, INNER, BoundarySpec, update_active_set
from .integrator import StepContext, StepDiagnostics, step

__all__ = [
    'ATM',
    'BOLTZMANN',
    'PhysicalConstants',
    'FluidGrid',
    'GridFields',
    'VoxelFlag',
    'VoxelState',
    'init_ambient',
    'state_from_pressure_temperature',
    'sync_state_equations',
    'total_energy',
    'total_mass',
    'total_momentum',
    'FREE',
    'HARD',
    'INNER',
    'BoundarySpec',
    'update_active_set',
    'StepContext',
    'StepDiagnostics',
    'step',
]
