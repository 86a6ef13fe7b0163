"""
针孔相机 - 生成像素光线与点投影
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass
class Camera:
    """针孔相机 (竖直视场角)"""
    position: Sequence[float]
    look_at: Sequence[float]
    up: Sequence[float] = (0.0, 0.0, 1.0)
    fov: float = 45.0           # 竖直视场角 (度)
    width: int = 320
    height: int = 240

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.look_at = np.asarray(self.look_at, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)
        if not 0.0 < self.fov < 180.0:
            raise ValueError(f"camera fov must be in (0, 180), got {self.fov}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("camera image size must be positive")
        forward = self.look_at - self.position
        if not np.linalg.norm(forward) > 0.0:
            raise ValueError("camera position and look_at coincide")
        if np.linalg.norm(np.cross(forward, self.up)) == 0.0:
            raise ValueError("camera up vector is parallel to the view direction")

    @property
    def basis(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(前, 右, 上) 单位向量"""
        forward = self.look_at - self.position
        forward = forward / np.linalg.norm(forward)
        right = np.cross(forward, self.up)
        right /= np.linalg.norm(right)
        return forward, right, np.cross(right, forward)

    @property
    def focal(self) -> float:
        """像素单位的焦距"""
        return 0.5 * self.height / np.tan(np.radians(self.fov) / 2.0)

    def rays(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        每个像素中心一条光线，按行优先排列

        Returns:
            (起点 (H·W, 3), 单位方向 (H·W, 3))
        """
        forward, right, up = self.basis
        ys, xs = np.mgrid[0:self.height, 0:self.width]
        x = (xs.ravel() + 0.5) - 0.5 * self.width
        y = (ys.ravel() + 0.5) - 0.5 * self.height
        dirs = self.focal * forward[None] + x[:, None] * right[None] - y[:, None] * up[None]
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        origins = np.broadcast_to(self.position, dirs.shape).copy()
        return origins, dirs

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        点投影到图像平面

        Returns:
            (像素坐标 (n, 2) 浮点 x/y, 深度 (n,))；深度 ≤ 0 的点在相机后方
        """
        forward, right, up = self.basis
        rel = np.atleast_2d(np.asarray(points, dtype=np.float64)) - self.position
        depth = rel @ forward
        safe = np.where(depth > 0.0, depth, 1.0)
        px = 0.5 * self.width + self.focal * (rel @ right) / safe
        py = 0.5 * self.height - self.focal * (rel @ up) / safe
        return np.stack([px, py], axis=1), depth
