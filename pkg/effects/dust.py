"""
粉尘元粒子 - 每个元粒子代表一团高斯分布的同质球形尘粒

- 中心像单个尘粒一样运动: 斯托克斯阻力 dv/dt = (v_f − v)/τ，τ = ρ_d·d²/(18μ)，加重力
- 方差按布朗扩散增长: σ² += 2·D·dt，D = k_B·T/(3πμd)
- 生成: 超压超过阈值的表面体素按用户速率产生，粒径服从对数正态分布
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from fluid.boundary import HARD, BoundarySpec
from fluid.constants import BOLTZMANN, PhysicalConstants
from .sampling import trilinear_weighted
from .tracers import freeze_outside, sample_flow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DustConfig:
    """粉尘生成参数"""
    rate: float = 0.0                       # 每个表面体素每秒生成的元粒子数
    threshold: float = 0.1 * 101325.0       # 超压阈值 (Pa)
    median_diameter: float = 10e-6          # 粒径中位数 (m)
    sigma_log: float = 0.7                  # ln(d) 的标准差
    particle_density: float = 2600.0        # 尘粒材料密度 (kg/m³)
    weight: float = 1e6                     # 每个元粒子代表的尘粒数

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError("dust rate must be non-negative")
        if not self.median_diameter > 0.0:
            raise ValueError("dust median diameter must be positive")
        if self.sigma_log < 0.0:
            raise ValueError("dust sigma_log must be non-negative")
        if not self.particle_density > 0.0:
            raise ValueError("dust particle density must be positive")


@dataclass
class DustCloud:
    """一组粉尘元粒子"""
    centers: np.ndarray         # (n, 3) m
    velocities: np.ndarray      # (n, 3) m/s
    variance: np.ndarray        # (n,) m²
    diameter: np.ndarray        # (n,) m
    weight: np.ndarray          # (n,)
    frozen: np.ndarray          # (n,) bool

    def __len__(self) -> int:
        return len(self.centers)

    @classmethod
    def empty(cls) -> "DustCloud":
        return cls(
            centers=np.zeros((0, 3)),
            velocities=np.zeros((0, 3)),
            variance=np.zeros(0),
            diameter=np.zeros(0),
            weight=np.zeros(0),
            frozen=np.zeros(0, dtype=bool),
        )

    def extend(self, other: "DustCloud"):
        for name in ("centers", "velocities", "variance", "diameter", "weight", "frozen"):
            setattr(self, name, np.concatenate([getattr(self, name), getattr(other, name)]))

    def arrays(self) -> dict:
        return {
            "centers": self.centers,
            "velocities": self.velocities,
            "variance": self.variance,
            "diameter": self.diameter,
            "weight": self.weight,
            "frozen": self.frozen,
        }

    @classmethod
    def from_arrays(cls, data: dict) -> "DustCloud":
        return cls(
            centers=data["centers"].reshape(-1, 3),
            velocities=data["velocities"].reshape(-1, 3),
            variance=data["variance"],
            diameter=data["diameter"],
            weight=data["weight"],
            frozen=data["frozen"].astype(bool),
        )


def relaxation_time(diameter, mu: float, particle_density: float):
    """斯托克斯弛豫时间 τ = ρ_d·d²/(18μ)"""
    return particle_density * np.asarray(diameter) ** 2 / (18.0 * mu)


def diffusion_coefficient(temp, diameter, mu: float):
    """斯托克斯-爱因斯坦扩散系数 D = k_B·T/(3πμd)"""
    return BOLTZMANN * np.asarray(temp) / (3.0 * np.pi * mu * np.asarray(diameter))


def surface_sources(grid, boundary: Optional[BoundarySpec] = None) -> np.ndarray:
    """
    粉尘可能起飞的表面体素: 与固体相邻或位于硬边界面上的流体体素
    """
    pv = grid.read.pv
    fluid = pv > 0.0
    solid = ~fluid
    near_solid = ndimage.binary_dilation(solid, structure=ndimage.generate_binary_structure(3, 1)) & fluid
    if boundary is not None:
        for axis in range(3):
            for side, index in ((0, 0), (1, -1)):
                if boundary.face(axis, side) != HARD:
                    continue
                sl = [slice(None)] * 3
                sl[axis] = index
                near_solid[tuple(sl)] |= fluid[tuple(sl)]
    return near_solid


def spawn_dust(
    grid,
    sources: np.ndarray,
    config: DustConfig,
    dt: float,
    rng: np.random.Generator,
) -> DustCloud:
    """
    在超压超过阈值的表面体素上生成元粒子

    Args:
        grid: 流体网格 (只读)
        sources: 表面体素掩码
        config: 生成参数
        dt: 时间步长
        rng: 带种子的随机数发生器

    Returns:
        新生成的元粒子 (可能为空)
    """
    if config.rate <= 0.0:
        return DustCloud.empty()
    f = grid.read
    swept = sources & (f.pres - grid.ambient.pres > config.threshold)
    cells = np.argwhere(swept)
    if len(cells) == 0:
        return DustCloud.empty()
    counts = rng.poisson(config.rate * dt, size=len(cells))
    total = int(counts.sum())
    if total == 0:
        return DustCloud.empty()

    cells = np.repeat(cells, counts, axis=0)
    centers = grid.origin + (cells + rng.random((total, 3))) * grid.h
    diameter = config.median_diameter * np.exp(config.sigma_log * rng.standard_normal(total))
    vel, _ = trilinear_weighted(grid, f.vel, f.pv, centers)
    logger.debug(f"{len(np.unique(cells, axis=0))} 个表面体素生成 {total} 个粉尘元粒子")
    return DustCloud(
        centers=centers,
        velocities=vel.T.copy(),
        variance=np.zeros(total),
        diameter=diameter,
        weight=np.full(total, config.weight),
        frozen=np.zeros(total, dtype=bool),
    )


def advect_dust(
    cloud: DustCloud,
    grid,
    dt: float,
    consts: PhysicalConstants,
    particle_density: float = 2600.0,
    gravity: Optional[Sequence[float]] = None,
) -> DustCloud:
    """
    推进粉尘元粒子一个时间步 (原地更新)

    阻力方程在步内把流体速度视为常数，用指数积分精确求解:
        v' = u + (v − u)·e^(−dt/τ)，u = v_f + τ·g

    Args:
        cloud: 元粒子
        grid: 流体网格 (只读)
        dt: 时间步长
        consts: 物理常数 (μ 与默认重力)
        particle_density: 尘粒材料密度
        gravity: 重力加速度 (None 时取 consts.gravity)
    """
    if len(cloud) == 0:
        return cloud
    g = np.asarray(consts.gravity if gravity is None else gravity, dtype=np.float64)
    moving = ~cloud.frozen
    if not moving.any():
        return cloud

    pos = cloud.centers[moving]
    vel = cloud.velocities[moving]
    d = cloud.diameter[moving]
    v_fluid, temp = sample_flow(grid, pos)

    tau = relaxation_time(d, consts.mu, particle_density)[:, None]
    terminal = v_fluid + tau * g
    decay = np.exp(-dt / tau)
    span = -np.expm1(-dt / tau) * tau
    cloud.centers[moving] = pos + terminal * dt + (vel - terminal) * span
    cloud.velocities[moving] = terminal + (vel - terminal) * decay
    cloud.variance[moving] += 2.0 * diffusion_coefficient(temp, d, consts.mu) * dt

    escaped = freeze_outside(grid, cloud.centers, cloud.frozen)
    if escaped.any():
        cloud.velocities[escaped] = 0.0
    return cloud
