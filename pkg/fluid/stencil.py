"""
中心差分算子 - 在计算窗口上求梯度、散度、拉普拉斯和速度梯度张量

每个算子接受加过一层幽灵体素的数组和行切片 (第 0 轴)，
便于按 x 方向分块并行。固体邻居 (部分体积为 0) 按硬边界镜像读取。
"""

from typing import List, Tuple

import numpy as np

from .boundary import WindowFaces, pad_scalar, pad_vector


class StencilWindow:
    """
    计算窗口上的差分算子集合

    Args:
        pv: 窗口内的部分体积 (nx, ny, nz)
        faces: 窗口六个面的处理方式
        h: 体素宽度 (m)
    """

    def __init__(self, pv: np.ndarray, faces: WindowFaces, h: float):
        self.shape = pv.shape
        self.faces = faces
        self.h = float(h)
        pv_pad = pad_scalar(pv, faces, 1.0)
        self.pv_pad = pv_pad
        # open[axis][side]: 该方向的邻居是否为流体
        self.open: List[Tuple[np.ndarray, np.ndarray]] = [
            (self._shift(pv_pad, axis, -1) > 0.0, self._shift(pv_pad, axis, 1) > 0.0)
            for axis in range(3)
        ]

    @property
    def rows(self) -> int:
        return self.shape[0]

    def pad(self, x: np.ndarray, ambient: float) -> np.ndarray:
        return pad_scalar(x, self.faces, ambient)

    def pad_vec(self, v: np.ndarray) -> np.ndarray:
        return pad_vector(v, self.faces)

    def _shift(self, padded: np.ndarray, axis: int, offset: int) -> np.ndarray:
        """padded 的内部区域沿 axis 平移 offset 后的视图 (不复制)"""
        lead = padded.ndim - 3
        index = [slice(None)] * lead + [slice(1, n + 1) for n in self.shape]
        index[lead + axis] = slice(1 + offset, 1 + offset + self.shape[axis])
        return padded[tuple(index)]

    @staticmethod
    def _rows(x: np.ndarray, rows: slice) -> np.ndarray:
        lead = x.ndim - 3
        return x[(slice(None),) * lead + (rows,)]

    def center(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        return self._rows(self._shift(padded, 0, 0), rows)

    def neighbors(
        self, padded: np.ndarray, axis: int, rows: slice = slice(None)
    ) -> Tuple[np.ndarray, np.ndarray]:
        """标量场沿 axis 的 (负向, 正向) 邻居，固体邻居读作中心值"""
        c = self.center(padded, rows)
        lo = self._rows(self._shift(padded, axis, -1), rows)
        hi = self._rows(self._shift(padded, axis, 1), rows)
        open_lo, open_hi = (self._rows(m, rows) for m in self.open[axis])
        return np.where(open_lo, lo, c), np.where(open_hi, hi, c)

    def vector_neighbors(
        self, padded: np.ndarray, axis: int, rows: slice = slice(None)
    ) -> Tuple[np.ndarray, np.ndarray]:
        """向量场沿 axis 的邻居，固体邻居读作法向分量取反的镜像"""
        c = self.center(padded, rows)
        mirror = c.copy()
        mirror[axis] = -mirror[axis]
        lo = self._rows(self._shift(padded, axis, -1), rows)
        hi = self._rows(self._shift(padded, axis, 1), rows)
        open_lo, open_hi = (self._rows(m, rows) for m in self.open[axis])
        return np.where(open_lo, lo, mirror), np.where(open_hi, hi, mirror)

    def gradient(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """∇x，形状 (3, r, ny, nz)"""
        parts = []
        for axis in range(3):
            lo, hi = self.neighbors(padded, axis, rows)
            parts.append((hi - lo) / (2.0 * self.h))
        return np.stack(parts)

    def laplacian(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """∇²x"""
        c = self.center(padded, rows)
        total = np.zeros(c.shape)
        for axis in range(3):
            lo, hi = self.neighbors(padded, axis, rows)
            total += hi + lo - 2.0 * c
        return total / (self.h * self.h)

    def divergence(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """∇·v"""
        total = None
        for axis in range(3):
            lo, hi = self.vector_neighbors(padded, axis, rows)
            term = (hi[axis] - lo[axis]) / (2.0 * self.h)
            total = term if total is None else total + term
        return total

    def vector_laplacian(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """逐分量 ∇²v，形状 (3, r, ny, nz)"""
        c = self.center(padded, rows)
        total = np.zeros(c.shape)
        for axis in range(3):
            lo, hi = self.vector_neighbors(padded, axis, rows)
            total += hi + lo - 2.0 * c
        return total / (self.h * self.h)

    def jacobian(self, padded: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """速度梯度张量 J[i, j] = ∂v_i/∂x_j，形状 (3, 3, r, ny, nz)"""
        columns = []
        for axis in range(3):
            lo, hi = self.vector_neighbors(padded, axis, rows)
            columns.append((hi - lo) / (2.0 * self.h))
        return np.stack(columns, axis=1)


def viscous_stress(jac: np.ndarray, mu: float) -> np.ndarray:
    """
    粘性应力张量 τ = μ(∇v + ∇vᵀ) − (2μ/3)(∇·v)·I

    Args:
        jac: 速度梯度张量 (3, 3, ...)
        mu: 粘性系数

    Returns:
        对称张量 (3, 3, ...)
    """
    tau = mu * (jac + np.swapaxes(jac, 0, 1))
    div = jac[0, 0] + jac[1, 1] + jac[2, 2]
    for axis in range(3):
        tau[axis, axis] -= (2.0 * mu / 3.0) * div
    return tau
