"""
三线性插值 - 在体素中心网格上对任意点采样

体素中心为插值节点，超出网格的点夹到边界上。
常数场与线性场的插值是精确的。
"""

from typing import Tuple

import numpy as np
from scipy import ndimage

_CORNERS = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])


def cell_and_relative_position(grid, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    点所在插值单元的下角索引与单元内相对位置

    Args:
        grid: 带 dims/h/origin 的网格
        points: (n, 3) 世界坐标

    Returns:
        (i0 (n, 3) int, frac (n, 3) ∈ [0, 1])
    """
    dims = np.asarray(grid.dims)
    u = index_coordinates(grid, points).T
    i0 = np.minimum(np.floor(u).astype(np.int64), np.maximum(dims - 2, 0))
    frac = u - i0
    return i0, frac


def _corner_weights(frac: np.ndarray) -> np.ndarray:
    """八个角点的权重 (8, n)"""
    w = np.empty((8, len(frac)))
    for c, (a, b, d) in enumerate(_CORNERS):
        wx = frac[:, 0] if a else 1.0 - frac[:, 0]
        wy = frac[:, 1] if b else 1.0 - frac[:, 1]
        wz = frac[:, 2] if d else 1.0 - frac[:, 2]
        w[c] = wx * wy * wz
    return w


def _corner_index(i0: np.ndarray, dims) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """八个角点的索引 (各为 (8, n))，单层网格方向上角点重合"""
    upper = np.asarray(dims) - 1
    idx = np.minimum(i0[None, :, :] + _CORNERS[:, None, :], upper)
    return idx[..., 0], idx[..., 1], idx[..., 2]


def index_coordinates(grid, points: np.ndarray) -> np.ndarray:
    """世界坐标 → 夹在网格内的体素中心索引坐标 (3, n)"""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    dims = np.asarray(grid.dims)
    u = (points - np.asarray(grid.origin)) / grid.h - 0.5
    return np.clip(u, 0.0, dims - 1).T


def trilinear(grid, field: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    三线性插值 (scipy.ndimage.map_coordinates, order=1)

    Args:
        grid: 网格
        field: (nx, ny, nz) 或 (c, nx, ny, nz)
        points: (n, 3)

    Returns:
        (n,) 或 (c, n)
    """
    coords = index_coordinates(grid, points)
    if field.ndim == 3:
        return ndimage.map_coordinates(field, coords, order=1, mode="nearest")
    return np.stack([ndimage.map_coordinates(c, coords, order=1, mode="nearest") for c in field])


def trilinear_weighted(
    grid, field: np.ndarray, weight: np.ndarray, points: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    按权重场 (如部分体积) 加权的三线性插值: Σ w·g·f / Σ w·g

    Returns:
        (插值结果, 总权重)；总权重为 0 时结果为 0
    """
    i0, frac = cell_and_relative_position(grid, points)
    w = _corner_weights(frac)
    ix, iy, iz = _corner_index(i0, grid.dims)
    g = w * weight[ix, iy, iz]
    total = np.sum(g, axis=0)
    safe = np.where(total > 0.0, total, 1.0)
    if field.ndim == 3:
        value = np.sum(g * field[ix, iy, iz], axis=0) / safe
        return np.where(total > 0.0, value, 0.0), total
    value = np.sum(g[None] * field[:, ix, iy, iz], axis=1) / safe
    return np.where(total > 0.0, value, 0.0), total


def trilinear_gradient(grid, field: np.ndarray, points: np.ndarray) -> np.ndarray:
    """三线性插值函数的解析梯度 (n, 3)"""
    i0, frac = cell_and_relative_position(grid, points)
    ix, iy, iz = _corner_index(i0, grid.dims)
    values = field[ix, iy, iz]                          # (8, n)
    grad = np.zeros((len(frac), 3))
    for c, corner in enumerate(_CORNERS):
        for axis in range(3):
            dw = 1.0 if corner[axis] else -1.0
            for other in range(3):
                if other == axis:
                    continue
                f = frac[:, other]
                dw = dw * (f if corner[other] else 1.0 - f)
            grad[:, axis] += dw * values[c]
    return grad / grid.h
