"""
装药 - 爆炸区域的初始化与触发条件

触发方式:
- immediate: 模拟开始时点火
- at_time: 到达指定时间点火
- temperature: 装药外侧相邻体素温度超过阈值时点火 (连锁引爆)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import ndimage

from fluid.constants import PhysicalConstants
from fluid.grid import FluidGrid, state_from_pressure_temperature
from .mesh import TriangleMesh
from .voxelizer import DEFAULT_SAMPLES, occupancy

logger = logging.getLogger(__name__)

# 占据比例超过此值的体素获得完整的装药状态
IGNITION_OCCUPANCY = 0.5


class TriggerKind(str, Enum):
    IMMEDIATE = "immediate"
    AT_TIME = "at_time"
    TEMPERATURE = "temperature"


@dataclass
class Trigger:
    """点火条件"""
    kind: TriggerKind = TriggerKind.IMMEDIATE
    time: float = 0.0               # at_time: 点火时刻 (s)
    temperature: float = 0.0        # temperature: 阈值 (K)

    def __post_init__(self):
        self.kind = TriggerKind(self.kind)
        if self.kind == TriggerKind.AT_TIME and self.time < 0.0:
            raise ValueError("trigger time must be non-negative")
        if self.kind == TriggerKind.TEMPERATURE and not self.temperature > 0.0:
            raise ValueError("trigger temperature must be positive")

    @classmethod
    def parse(cls, text: str) -> "Trigger":
        """
        解析触发描述: "immediate" | "at_time:0.005" | "temperature:800"
        """
        text = text.strip().lower()
        if text in ("", "immediate"):
            return cls()
        kind, _, value = text.partition(":")
        if kind == TriggerKind.AT_TIME.value:
            return cls(TriggerKind.AT_TIME, time=float(value))
        if kind == TriggerKind.TEMPERATURE.value:
            return cls(TriggerKind.TEMPERATURE, temperature=float(value))
        raise ValueError(f"unknown trigger '{text}'")

    def describe(self) -> str:
        if self.kind == TriggerKind.AT_TIME:
            return f"at_time:{self.time!r}"
        if self.kind == TriggerKind.TEMPERATURE:
            return f"temperature:{self.temperature!r}"
        return "immediate"


@dataclass
class Charge:
    """装药区域"""
    name: str
    mesh: TriangleMesh
    p0: float                                   # 初始压力 (Pa)
    t0: float                                   # 初始温度 (K)
    trigger: Trigger = field(default_factory=Trigger)
    outward_velocity: float = 0.0               # 可选的初始径向速度 (m/s)
    ignited: bool = False
    ignition_time: Optional[float] = None
    region: Optional[np.ndarray] = None         # 缓存: 占据比例 > ½ 的体素

    def __post_init__(self):
        if not self.p0 > 0.0:
            raise ValueError(f"charge '{self.name}': P0 must be positive")
        if not self.t0 > 0.0:
            raise ValueError(f"charge '{self.name}': T0 must be positive")

    def compute_region(self, grid, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
        """装药体素掩码 (占据比例 > ½)，结果缓存"""
        if self.region is None or self.region.shape != tuple(grid.dims):
            self.region = occupancy(self.mesh, grid, samples) > IGNITION_OCCUPANCY
        return self.region


def trigger_satisfied(charge: Charge, grid: FluidGrid, time: float) -> bool:
    """
    判断点火条件

    Args:
        charge: 装药
        grid: 流体网格
        time: 当前模拟时间 (s)
    """
    if charge.ignited:
        return False
    trig = charge.trigger
    if trig.kind == TriggerKind.IMMEDIATE:
        return True
    if trig.kind == TriggerKind.AT_TIME:
        return time >= trig.time
    region = charge.compute_region(grid)
    if not region.any():
        return False
    shell = ndimage.binary_dilation(region, structure=ndimage.generate_binary_structure(3, 1)) & ~region
    shell &= grid.read.pv > 0.0
    return bool(np.any(grid.read.temp[shell] > trig.temperature))


def ignite_region(
    grid: FluidGrid,
    mask: np.ndarray,
    p0: float,
    t0: float,
    consts: PhysicalConstants,
    center: Optional[np.ndarray] = None,
    outward_velocity: float = 0.0,
) -> int:
    """
    把掩码内的流体体素设为 (P0, T0)，密度与内能由状态方程确定

    Args:
        grid: 流体网格 (写 read 缓冲区)
        mask: 布尔掩码
        p0, t0: 初始压力与温度
        consts: 物理常数
        center: 径向速度的中心 (outward_velocity > 0 时使用)
        outward_velocity: 径向速度大小 (m/s)，0 表示速度不变

    Returns:
        被点火的体素数
    """
    f = grid.read
    cells = mask & (f.pv > 0.0)
    rho, n_int = state_from_pressure_temperature(p0, t0, consts)
    f.rho[cells] = rho
    f.n_int[cells] = n_int
    if outward_velocity > 0.0 and center is not None:
        centers = grid.cell_centers()[:, cells]
        offset = centers - np.asarray(center, dtype=np.float64).reshape(3, 1)
        length = np.linalg.norm(offset, axis=0)
        unit = np.divide(offset, length, out=np.zeros_like(offset), where=length > 0.0)
        f.vel[:, cells] = outward_velocity * unit
    f.sync(consts, mask=cells)
    return int(np.count_nonzero(cells))


def ignite_charge(
    grid: FluidGrid,
    charge: Charge,
    consts: PhysicalConstants,
    time: float = 0.0,
) -> FluidGrid:
    """
    点火: 占据比例 > ½ 的体素获得 P0、T0，速度不变 (除非配置了径向速度)

    与固体重叠的体素被跳过并给出警告
    """
    region = charge.compute_region(grid)
    overlap = int(np.count_nonzero(region & (grid.read.pv <= 0.0)))
    if overlap:
        logger.warning(f"装药 '{charge.name}' 有 {overlap} 个体素与固体重叠，已跳过")
    center = charge.mesh.vertices.mean(axis=0)
    count = ignite_region(
        grid, region, charge.p0, charge.t0, consts,
        center=center, outward_velocity=charge.outward_velocity,
    )
    charge.ignited = True
    charge.ignition_time = float(time)
    logger.info(
        f"装药 '{charge.name}' 点火: t={time:.6g} s, {count} 个体素, "
        f"P0={charge.p0:.4g} Pa, T0={charge.t0:.4g} K"
    )
    return grid
