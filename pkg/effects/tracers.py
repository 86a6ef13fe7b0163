"""
示踪粒子 - 无质量粒子随流体运动，记录火球位置与温度

热浮力由流体方程本身产生，粒子上不另加浮力
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from solids.mesh import MeshError, TriangleMesh
from .blackbody import BlackbodyPalette
from .sampling import trilinear_weighted

logger = logging.getLogger(__name__)

# 每批拒绝采样的候选点数与批数上限
REJECTION_BATCH = 4096
MAX_REJECTION_BATCHES = 256


@dataclass
class TracerSet:
    """一组示踪粒子 (结构数组)"""
    positions: np.ndarray                   # (n, 3) m
    temperature: Optional[np.ndarray] = None    # (n,) K
    frozen: Optional[np.ndarray] = None         # (n,) 离开网格后冻结
    ids: Optional[np.ndarray] = None            # (n,) 稳定编号

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        n = len(self.positions)
        if self.temperature is None:
            self.temperature = np.zeros(n)
        if self.frozen is None:
            self.frozen = np.zeros(n, dtype=bool)
        if self.ids is None:
            self.ids = np.arange(n, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.positions)

    @classmethod
    def empty(cls) -> "TracerSet":
        return cls(np.zeros((0, 3)))

    def extend(self, other: "TracerSet"):
        offset = int(self.ids.max()) + 1 if len(self) else 0
        self.positions = np.concatenate([self.positions, other.positions])
        self.temperature = np.concatenate([self.temperature, other.temperature])
        self.frozen = np.concatenate([self.frozen, other.frozen])
        self.ids = np.concatenate([self.ids, other.ids + offset])

    def arrays(self) -> dict:
        return {
            "positions": self.positions,
            "temperature": self.temperature,
            "frozen": self.frozen,
            "ids": self.ids,
        }

    @classmethod
    def from_arrays(cls, data: dict) -> "TracerSet":
        return cls(
            positions=data["positions"],
            temperature=data["temperature"],
            frozen=data["frozen"].astype(bool),
            ids=data["ids"],
        )


def seed_tracers(mesh: TriangleMesh, count: int, rng: np.random.Generator) -> TracerSet:
    """
    在网格内部均匀拒绝采样

    Args:
        mesh: 闭合网格 (通常为装药形状)
        count: 粒子数
        rng: 带种子的随机数发生器

    Raises:
        MeshError: 退化或非闭合网格，或拒绝采样达到批数上限仍不够 count 个点
    """
    if count < 0:
        raise ValueError(f"tracer count must be non-negative, got {count}")
    if count == 0:
        return TracerSet.empty()
    mesh.validate_closed()
    lo, hi = mesh.bounds
    if not np.all(hi > lo):
        raise MeshError(f"mesh '{mesh.name}' has a flat bounding box")

    accepted = []
    total = 0
    for _ in range(MAX_REJECTION_BATCHES):
        if total >= count:
            break
        candidates = lo + (hi - lo) * rng.random((REJECTION_BATCH, 3))
        inside = candidates[mesh.contains(candidates)]
        accepted.append(inside)
        total += len(inside)
    if total < count:
        raise MeshError(
            f"mesh '{mesh.name}' accepted {total} of {count} tracer samples "
            f"after {MAX_REJECTION_BATCHES * REJECTION_BATCH} candidates"
        )
    positions = np.concatenate(accepted)[:count]
    logger.debug(f"在 '{mesh.name}' 内部播撒 {count} 个示踪粒子")
    return TracerSet(positions)


def sample_flow(grid, points: np.ndarray):
    """按部分体积加权插值的 (速度 (n, 3), 温度 (n,))"""
    f = grid.read
    vel, _ = trilinear_weighted(grid, f.vel, f.pv, points)
    temp, _ = trilinear_weighted(grid, f.temp, f.pv, points)
    return vel.T, temp


def freeze_outside(grid, positions: np.ndarray, frozen: np.ndarray) -> np.ndarray:
    """把离开网格的粒子夹到边界并标记冻结，返回新冻结粒子的掩码"""
    outside = ~grid.contains(positions) & ~frozen
    if outside.any():
        positions[outside] = grid.clamp_inside(positions[outside])
        frozen |= outside
    return outside


def advect_tracers(tracers: TracerSet, grid, dt: float) -> TracerSet:
    """
    前向欧拉推进: x += v(x)·dt，随后重新插值温度

    Args:
        tracers: 粒子组 (原地更新)
        grid: 流体网格 (只读)
        dt: 时间步长
    """
    if len(tracers) == 0:
        return tracers
    moving = ~tracers.frozen
    if moving.any():
        vel, _ = sample_flow(grid, tracers.positions[moving])
        tracers.positions[moving] += vel * dt
        escaped = freeze_outside(grid, tracers.positions, tracers.frozen)
        if escaped.any():
            logger.debug(f"{int(np.count_nonzero(escaped))} 个示踪粒子离开网格，已冻结")
    _, tracers.temperature = sample_flow(grid, tracers.positions)
    return tracers


def tracer_colors(tracers: TracerSet, palette=None) -> np.ndarray:
    """示踪粒子的黑体颜色 (n, 4)"""
    palette = palette or BlackbodyPalette()
    return palette.color(tracers.temperature)
