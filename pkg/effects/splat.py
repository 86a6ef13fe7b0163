"""
粒子泼溅 - 把粒子投影为二维高斯斑点，由远到近做 alpha 混合
"""

import logging
from typing import Optional, Union

import numpy as np

from .camera import Camera

logger = logging.getLogger(__name__)

# 高斯斑点的截断半径 (σ 的倍数)
FOOTPRINT_SIGMAS = 3.0


def splat_particles(
    positions: np.ndarray,
    colors: np.ndarray,
    camera: Camera,
    radius: Union[float, np.ndarray],
    background: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    泼溅渲染

    Args:
        positions: (n, 3) 世界坐标
        colors: (n, 4) RGBA ∈ [0, 1]
        camera: 相机
        radius: 斑点的世界尺寸 σ (m)，标量或 (n,)
        background: (H, W, 3) 背景，默认黑色

    Returns:
        (H, W, 3) float64 图像
    """
    h, w = camera.height, camera.width
    image = np.zeros((h, w, 3)) if background is None else np.array(background, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) == 0:
        return image

    colors = np.asarray(colors, dtype=np.float64).reshape(-1, 4)
    radius = np.broadcast_to(np.asarray(radius, dtype=np.float64), (len(positions),))
    pixels, depth = camera.project(positions)
    visible = np.flatnonzero(depth > 0.0)
    # 由远到近
    order = visible[np.argsort(-depth[visible], kind="stable")]
    focal = camera.focal

    for i in order:
        alpha0 = colors[i, 3]
        if alpha0 <= 0.0:
            continue
        sigma = max(radius[i] * focal / depth[i], 0.5)
        reach = FOOTPRINT_SIGMAS * sigma
        cx, cy = pixels[i]
        x0, x1 = int(max(np.floor(cx - reach), 0)), int(min(np.ceil(cx + reach), w))
        y0, y1 = int(max(np.floor(cy - reach), 0)), int(min(np.ceil(cy + reach), h))
        if x0 >= x1 or y0 >= y1:
            continue
        ys, xs = np.mgrid[y0:y1, x0:x1]
        r2 = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2
        alpha = alpha0 * np.exp(-0.5 * r2 / sigma ** 2)[..., None]
        patch = image[y0:y1, x0:x1]
        image[y0:y1, x0:x1] = patch * (1.0 - alpha) + colors[i, :3] * alpha
    return image


def dust_colors(count: int, gray: float = 0.55, opacity: float = 0.35) -> np.ndarray:
    """粉尘统一使用灰色"""
    colors = np.empty((count, 4))
    colors[:, :3] = gray
    colors[:, 3] = opacity
    return colors
