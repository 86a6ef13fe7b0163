"""
体素网格数据模型 - 双缓冲的逐体素流体状态与状态方程

所有量存储在体素中心 (非交错网格)，假设在体素内为常数
"""

import hashlib
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence, Tuple

import numpy as np

from .constants import ATM, PhysicalConstants

logger = logging.getLogger(__name__)


class VoxelFlag(IntEnum):
    """体素标志"""
    INTERIOR = 0
    FREE_BOUNDARY = 1
    HARD_BOUNDARY = 2
    PRUNED = 3


@dataclass
class VoxelState:
    """单个体素的状态"""
    rho: float = 0.0                                    # 密度 (kg/m³)
    v: Tuple[float, float, float] = (0.0, 0.0, 0.0)     # 速度 (m/s)
    n_int: float = 0.0                                  # 单位质量内能 N (J/kg)
    temp: float = 0.0                                   # 温度 (K)
    pres: float = 0.0                                   # 压力 (Pa)
    partial_volume: float = 1.0                         # 非固体占比 [0, 1]
    flag: VoxelFlag = VoxelFlag.INTERIOR

    @property
    def total_energy(self) -> float:
        """单位质量总能 E = N + ½|v|² (派生量)"""
        vx, vy, vz = self.v
        return self.n_int + 0.5 * (vx * vx + vy * vy + vz * vz)


def sync_state_equations(cell: VoxelState, consts: PhysicalConstants) -> VoxelState:
    """
    由状态方程同步温度和压力

    T = N / c_V，P = ρ·R·T

    Args:
        cell: 体素状态 (要求 rho ≥ 0, N ≥ 0)
        consts: 物理常数

    Returns:
        同步后的新体素状态
    """
    temp = cell.n_int / consts.c_v
    pres = cell.rho * consts.r_gas * temp
    return VoxelState(
        rho=cell.rho,
        v=tuple(cell.v),
        n_int=cell.n_int,
        temp=temp,
        pres=pres,
        partial_volume=cell.partial_volume,
        flag=cell.flag,
    )


def state_from_pressure_temperature(
    pres, temp, consts: PhysicalConstants
) -> Tuple[np.ndarray, np.ndarray]:
    """
    由压力和温度反求密度与内能

    Returns:
        (rho, n_int)
    """
    rho = np.asarray(pres, dtype=np.float64) / (consts.r_gas * np.asarray(temp, dtype=np.float64))
    n_int = consts.c_v * np.asarray(temp, dtype=np.float64)
    return rho, n_int


def sound_speed(temp, consts: PhysicalConstants) -> np.ndarray:
    """理想气体声速 c = sqrt(γ R T)"""
    return np.sqrt(consts.gamma * consts.r_gas * np.maximum(temp, 0.0))


@dataclass
class GridFields:
    """一份完整的网格场 (双缓冲中的一个缓冲区)"""
    rho: np.ndarray
    vel: np.ndarray         # (3, nx, ny, nz)
    n_int: np.ndarray
    temp: np.ndarray
    pres: np.ndarray
    pv: np.ndarray          # 部分体积 (内部部分体积，供流体使用)
    flags: np.ndarray       # uint8, VoxelFlag

    SCALARS = ("rho", "n_int", "temp", "pres", "pv")

    @classmethod
    def empty(cls, dims: Sequence[int]) -> "GridFields":
        shape = tuple(int(d) for d in dims)
        return cls(
            rho=np.zeros(shape),
            vel=np.zeros((3,) + shape),
            n_int=np.zeros(shape),
            temp=np.zeros(shape),
            pres=np.zeros(shape),
            pv=np.ones(shape),
            flags=np.zeros(shape, dtype=np.uint8),
        )

    def copy_from(self, other: "GridFields"):
        """逐数组复制 (不重新分配内存)"""
        for name in self.SCALARS:
            np.copyto(getattr(self, name), getattr(other, name))
        np.copyto(self.vel, other.vel)
        np.copyto(self.flags, other.flags)

    def copy(self) -> "GridFields":
        return GridFields(
            rho=self.rho.copy(),
            vel=self.vel.copy(),
            n_int=self.n_int.copy(),
            temp=self.temp.copy(),
            pres=self.pres.copy(),
            pv=self.pv.copy(),
            flags=self.flags.copy(),
        )

    def sync(self, consts: PhysicalConstants, mask: Optional[np.ndarray] = None):
        """
        对整个缓冲区 (或 mask 选中的体素) 应用状态方程

        Args:
            consts: 物理常数
            mask: 可选布尔掩码
        """
        temp = self.n_int / consts.c_v
        pres = self.rho * consts.r_gas * temp
        if mask is None:
            self.temp[...] = temp
            self.pres[...] = pres
        else:
            self.temp[mask] = temp[mask]
            self.pres[mask] = pres[mask]


class FluidGrid:
    """
    规则立方体素网格

    双缓冲:
    - read 缓冲区供所有读取者并发读取
    - write 缓冲区每个体素每趟只由一个工作者写入
    - swap() 是串行屏障
    """

    def __init__(
        self,
        dims: Sequence[int],
        h: float,
        origin: Sequence[float] = (0.0, 0.0, 0.0),
        ambient_p: float = ATM,
        ambient_t: float = 290.0,
        consts: Optional[PhysicalConstants] = None,
    ):
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or min(dims) <= 0:
            raise ValueError(f"dims must be 3 positive integers, got {dims}")
        if not h > 0.0:
            raise ValueError(f"voxel width h must be positive, got {h}")

        self.dims = dims
        self.h = float(h)
        self.origin = np.asarray(origin, dtype=np.float64)
        self.ambient_p = float(ambient_p)
        self.ambient_t = float(ambient_t)

        self._read = GridFields.empty(dims)
        self._write = GridFields.empty(dims)
        self.ambient = self.synced_ambient(consts or PhysicalConstants())

    @property
    def read(self) -> GridFields:
        return self._read

    @property
    def write(self) -> GridFields:
        return self._write

    @property
    def cell_count(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    @property
    def extent(self) -> np.ndarray:
        """网格覆盖的空间范围 (origin, origin + dims·h)"""
        return np.stack([self.origin, self.origin + np.asarray(self.dims) * self.h])

    def swap(self):
        """交换读写缓冲区"""
        self._read, self._write = self._write, self._read

    def begin_write(self):
        """把 read 复制到 write，未被更新的体素 (剪枝/固体) 保持原值"""
        self._write.copy_from(self._read)

    def ambient_state(self, consts: PhysicalConstants) -> Tuple[float, float]:
        """环境空气的 (rho, N)"""
        rho, n_int = state_from_pressure_temperature(self.ambient_p, self.ambient_t, consts)
        return float(rho), float(n_int)

    def synced_ambient(self, consts: PhysicalConstants) -> VoxelState:
        """
        经状态方程同步后的环境体素

        自由边界的幽灵体素使用这里的值，与 init_ambient 填充的体素逐位相同
        """
        rho, n_int = self.ambient_state(consts)
        return sync_state_equations(VoxelState(rho=rho, n_int=n_int), consts)

    def cell(self, idx: Tuple[int, int, int]) -> VoxelState:
        """读取单个体素 (read 缓冲区)"""
        f = self._read
        i, j, k = idx
        return VoxelState(
            rho=float(f.rho[i, j, k]),
            v=tuple(float(c) for c in f.vel[:, i, j, k]),
            n_int=float(f.n_int[i, j, k]),
            temp=float(f.temp[i, j, k]),
            pres=float(f.pres[i, j, k]),
            partial_volume=float(f.pv[i, j, k]),
            flag=VoxelFlag(int(f.flags[i, j, k])),
        )

    def set_cell(self, idx: Tuple[int, int, int], state: VoxelState):
        """写入单个体素 (read 缓冲区，用于初始化与测试)"""
        f = self._read
        i, j, k = idx
        f.rho[i, j, k] = state.rho
        f.vel[:, i, j, k] = state.v
        f.n_int[i, j, k] = state.n_int
        f.temp[i, j, k] = state.temp
        f.pres[i, j, k] = state.pres
        f.pv[i, j, k] = state.partial_volume
        f.flags[i, j, k] = int(state.flag)

    def cell_centers(self) -> np.ndarray:
        """所有体素中心坐标，形状 (3, nx, ny, nz)"""
        axes = [self.origin[a] + (np.arange(self.dims[a]) + 0.5) * self.h for a in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"))

    def to_index_coordinates(self, points: np.ndarray) -> np.ndarray:
        """
        世界坐标转换为体素中心索引坐标 (体素中心为整数)

        Args:
            points: (n, 3) 世界坐标

        Returns:
            (3, n) 索引坐标，供三线性插值使用
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return ((points - self.origin) / self.h - 0.5).T

    def contains(self, points: np.ndarray) -> np.ndarray:
        """点是否在网格范围内 (含边界)"""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo, hi = self.extent
        return np.all((points >= lo) & (points <= hi), axis=1)

    def clamp_inside(self, points: np.ndarray) -> np.ndarray:
        """把点限制在网格范围内"""
        lo, hi = self.extent
        return np.clip(points, lo, hi)


def init_ambient(
    grid: FluidGrid, pres: float, temp: float, consts: PhysicalConstants
) -> FluidGrid:
    """
    用环境空气初始化整个网格

    Args:
        grid: 流体网格
        pres: 环境压力 (Pa)，必须为正
        temp: 环境温度 (K)，必须为正
        consts: 物理常数

    Returns:
        同一个网格对象 (read/write 缓冲区都被初始化)
    """
    if not pres > 0.0:
        raise ValueError(f"ambient pressure must be positive, got {pres}")
    if not temp > 0.0:
        raise ValueError(f"ambient temperature must be positive, got {temp}")

    grid.ambient_p = float(pres)
    grid.ambient_t = float(temp)
    grid.ambient = grid.synced_ambient(consts)
    rho, n_int = grid.ambient.rho, grid.ambient.n_int

    f = grid.read
    f.rho.fill(rho)
    f.vel.fill(0.0)
    f.n_int.fill(n_int)
    f.pv.fill(1.0)
    f.flags.fill(int(VoxelFlag.INTERIOR))
    # P 和 T 由状态方程同步，保证与 rho/N 完全一致 (同步幂等)
    f.sync(consts)
    grid.write.copy_from(f)
    return grid


def total_mass(grid: FluidGrid) -> float:
    """总质量 Σ rho·pv·h³ (固定求和顺序)"""
    f = grid.read
    return float(np.sum(f.rho * f.pv) * grid.cell_volume)


def total_energy(grid: FluidGrid) -> float:
    """总能量 Σ rho·pv·(N + ½|v|²)·h³"""
    f = grid.read
    kinetic = 0.5 * np.sum(f.vel * f.vel, axis=0)
    return float(np.sum(f.rho * f.pv * (f.n_int + kinetic)) * grid.cell_volume)


def total_momentum(grid: FluidGrid) -> np.ndarray:
    """总动量 Σ rho·pv·v·h³ (3 分量)"""
    f = grid.read
    mass = f.rho * f.pv
    return np.array([np.sum(mass * f.vel[a]) for a in range(3)]) * grid.cell_volume


def grid_checksum(grid: FluidGrid) -> str:
    """read 缓冲区的内容摘要，用于验证后处理不修改流体状态"""
    digest = hashlib.sha256()
    f = grid.read
    for name in GridFields.SCALARS:
        digest.update(np.ascontiguousarray(getattr(f, name)).tobytes())
    digest.update(np.ascontiguousarray(f.vel).tobytes())
    digest.update(np.ascontiguousarray(f.flags).tobytes())
    return digest.hexdigest()
