"""
体积折射光线步进

- 折射率由 Dale-Gladstone 定律给出: η = 1 + m·k·ρ (m 为夸张倍数，默认 1)
- 密度三线性插值，折射率变化超过阈值时按斯涅尔定律弯折光线，
  以归一化的密度梯度作为界面法线
- 全反射时光线被反射
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .camera import Camera
from .sampling import trilinear, trilinear_gradient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefractionConfig:
    """光线步进参数"""
    step: Optional[float] = None            # 步长 (m)，None 表示 h/4
    bend_threshold: float = 1e-6            # 触发弯折的折射率变化
    exaggeration: float = 1.0               # 折射率夸张倍数
    smoothing: float = 0.0                  # 密度场高斯平滑 σ (体素)，0 表示关闭
    max_steps: int = 100000

    def __post_init__(self):
        if self.step is not None and not self.step > 0.0:
            raise ValueError("ray step must be positive")
        if self.bend_threshold < 0.0:
            raise ValueError("bend threshold must be non-negative")
        if not self.exaggeration > 0.0:
            raise ValueError("index exaggeration must be positive")
        if self.smoothing < 0.0:
            raise ValueError("gradient smoothing must be non-negative")


def gladstone_index(rho, k: float, exaggeration: float = 1.0):
    """η = 1 + m·k·ρ"""
    return 1.0 + exaggeration * k * np.asarray(rho, dtype=np.float64)


class DensityVolume:
    """
    折射用的密度体 (与流体网格同构的只读副本)

    平滑在构造时做一次，步进过程中只做插值
    """

    def __init__(self, rho: np.ndarray, h: float, origin, k: float, config: RefractionConfig = RefractionConfig()):
        self.dims = tuple(int(d) for d in rho.shape)
        self.h = float(h)
        self.origin = np.asarray(origin, dtype=np.float64)
        self.k = float(k)
        self.config = config
        rho = np.asarray(rho, dtype=np.float64)
        if config.smoothing > 0.0:
            rho = ndimage.gaussian_filter(rho, sigma=config.smoothing, mode="nearest")
        self.rho = rho

    @classmethod
    def from_grid(cls, grid, k: float, config: RefractionConfig = RefractionConfig()) -> "DensityVolume":
        return cls(grid.read.rho.copy(), grid.h, grid.origin, k, config)

    @property
    def extent(self) -> np.ndarray:
        return np.stack([self.origin, self.origin + np.asarray(self.dims) * self.h])

    @property
    def step(self) -> float:
        return self.config.step if self.config.step is not None else 0.25 * self.h

    def contains(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.extent
        return np.all((points >= lo) & (points <= hi), axis=1)

    def index(self, points: np.ndarray) -> np.ndarray:
        return gladstone_index(trilinear(self, self.rho, points), self.k, self.config.exaggeration)

    def normal(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(单位密度梯度 (n, 3), 梯度是否非零 (n,))"""
        grad = trilinear_gradient(self, self.rho, points)
        length = np.linalg.norm(grad, axis=1, keepdims=True)
        valid = length[:, 0] > 0.0
        unit = np.divide(grad, length, out=np.zeros_like(grad), where=length > 0.0)
        return unit, valid


def refract_direction(direction: np.ndarray, normal: np.ndarray, eta_from, eta_to) -> np.ndarray:
    """
    向量形式的斯涅尔定律 (法线方向任意，内部统一为迎着光线)

    Args:
        direction: (n, 3) 单位入射方向
        normal: (n, 3) 单位界面法线
        eta_from, eta_to: 入射侧与出射侧折射率

    Returns:
        (n, 3) 单位出射方向；全反射时为反射方向
    """
    d = np.atleast_2d(direction)
    n = np.atleast_2d(normal).copy()
    cos_i = -np.sum(n * d, axis=1)
    flip = cos_i < 0.0
    n[flip] = -n[flip]
    cos_i = np.abs(cos_i)
    ratio = np.asarray(eta_from, dtype=np.float64) / np.asarray(eta_to, dtype=np.float64)
    ratio = np.broadcast_to(ratio, cos_i.shape)
    sin2_t = ratio ** 2 * (1.0 - cos_i ** 2)
    total = sin2_t > 1.0
    cos_t = np.sqrt(np.maximum(0.0, 1.0 - sin2_t))
    out = ratio[:, None] * d + (ratio * cos_i - cos_t)[:, None] * n
    reflected = d + 2.0 * cos_i[:, None] * n
    out = np.where(total[:, None], reflected, out)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _entry_distance(origins: np.ndarray, directions: np.ndarray, extent: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """光线与包围盒的进入/离开距离 (slab 法)，不相交时 t_in > t_out"""
    lo, hi = extent
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t0 = (lo - origins) * inv
        t1 = (hi - origins) * inv
    t_near = np.where(np.isnan(t0), -np.inf, np.minimum(t0, t1))
    t_far = np.where(np.isnan(t1), np.inf, np.maximum(t0, t1))
    return np.maximum(t_near.max(axis=1), 0.0), t_far.min(axis=1)


@dataclass
class RayBatch:
    """一批光线的步进结果"""
    positions: np.ndarray       # (n, 3) 离开体积时的位置
    directions: np.ndarray      # (n, 3) 离开时的方向
    bends: np.ndarray           # (n,) 弯折次数
    reflections: np.ndarray     # (n,) 全反射次数
    path: Optional[np.ndarray] = None   # 单条光线时的采样点 (k, 3)


def trace_rays(
    volume: DensityVolume,
    origins: np.ndarray,
    directions: np.ndarray,
    record_path: bool = False,
) -> RayBatch:
    """
    成批步进光线穿过密度体

    进入体积后第一个采样点的折射率作为参考值，之后每步比较，
    变化超过阈值就在当前点弯折并更新参考值。

    Args:
        volume: 密度体
        origins: (n, 3)
        directions: (n, 3) 单位方向
        record_path: 记录第一条光线的采样点
    """
    pos = np.array(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.array(directions, dtype=np.float64).reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    n = len(pos)
    bends = np.zeros(n, dtype=np.int64)
    reflections = np.zeros(n, dtype=np.int64)

    t_in, t_out = _entry_distance(pos, dirs, volume.extent)
    alive = t_in <= t_out
    pos[alive] += t_in[alive, None] * dirs[alive]
    pos[alive] = np.clip(pos[alive], *volume.extent)
    eta_ref = np.ones(n)
    if alive.any():
        eta_ref[alive] = volume.index(pos[alive])
    path = [pos[0].copy()] if record_path and n else None
    step = volume.step
    cfg = volume.config

    for _ in range(cfg.max_steps):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        pos[idx] += step * dirs[idx]
        inside = volume.contains(pos[idx])
        alive[idx[~inside]] = False
        idx = idx[inside]
        if record_path and n and alive[0]:
            path.append(pos[0].copy())
        if idx.size == 0:
            continue
        eta = volume.index(pos[idx])
        jump = np.abs(eta - eta_ref[idx]) > cfg.bend_threshold
        if not jump.any():
            continue
        sel = idx[jump]
        normal, valid = volume.normal(pos[sel])
        # 采样点已越过梯度区时，依次取本步中点与上一个采样点的梯度
        for back in (0.5, 1.0):
            missing = ~valid
            if not missing.any():
                break
            retry = pos[sel[missing]] - back * step * dirs[sel[missing]]
            normal[missing], valid[missing] = volume.normal(retry)
        sel, normal, eta_new = sel[valid], normal[valid], eta[jump][valid]
        if sel.size == 0:
            continue
        new_dirs = refract_direction(dirs[sel], normal, eta_ref[sel], eta_new)
        reflected = np.sum(new_dirs * normal, axis=1) * np.sum(dirs[sel] * normal, axis=1) < 0.0
        dirs[sel] = new_dirs
        bends[sel] += 1
        reflections[sel[reflected]] += 1
        # 全反射后光线留在原介质中
        eta_ref[sel[~reflected]] = eta_new[~reflected]
    else:
        logger.warning(f"{int(np.count_nonzero(alive))} 条光线达到最大步数 {cfg.max_steps}")

    return RayBatch(
        positions=pos,
        directions=dirs,
        bends=bends,
        reflections=reflections,
        path=None if path is None else np.asarray(path),
    )


def refract_ray(volume: DensityVolume, origin, direction) -> RayBatch:
    """单条光线，附带采样路径"""
    return trace_rays(volume, np.asarray(origin)[None], np.asarray(direction)[None], record_path=True)


def checkerboard(directions: np.ndarray, cells: int = 24) -> np.ndarray:
    """按方向的方位角/仰角取棋盘格背景 (n,) ∈ {0.2, 0.9}"""
    azimuth = np.arctan2(directions[:, 1], directions[:, 0])
    elevation = np.arcsin(np.clip(directions[:, 2], -1.0, 1.0))
    a = np.floor(azimuth / (2.0 * np.pi) * 2 * cells).astype(np.int64)
    e = np.floor(elevation / np.pi * cells).astype(np.int64)
    return np.where((a + e) % 2 == 0, 0.9, 0.2)


def render_refraction(volume: DensityVolume, camera: Camera, cells: int = 24) -> np.ndarray:
    """
    每像素一条光线穿过密度体，出射方向查棋盘格背景

    Returns:
        (H, W) 灰度图 ∈ [0, 1]
    """
    origins, dirs = camera.rays()
    batch = trace_rays(volume, origins, dirs)
    bent = int(np.count_nonzero(batch.bends))
    logger.info(f"折射渲染: {len(dirs)} 条光线，其中 {bent} 条发生弯折")
    return checkerboard(batch.directions, cells).reshape(camera.height, camera.width)
