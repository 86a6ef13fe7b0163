"""
网格体素化 - 超采样点包含测试求每个体素的占据比例

每个体素取 samples³ 个采样点，沿 +z 方向做射线穿越计数:
三角形在 xy 平面光栅化到采样列上，交点按外法线 z 分量记 ±1，
沿 z 累加后得到每个采样点的环绕数 (1 = 在网格内)。
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .mesh import TriangleMesh

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 4
DEFAULT_ZERO_THRESHOLD = 0.1


@dataclass(frozen=True)
class GridSpec:
    """体素化目标网格"""
    dims: Tuple[int, int, int]
    h: float
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @classmethod
    def of(cls, grid) -> "GridSpec":
        """从任何带 dims/h/origin 属性的对象 (如 FluidGrid) 构造"""
        return cls(
            tuple(int(d) for d in grid.dims),
            float(grid.h),
            tuple(float(o) for o in np.asarray(grid.origin).ravel()),
        )


def _top_left(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """边上的点归属规则: 共享边的两个三角形中恰好一个包含它"""
    return (dy > 0.0) | ((dy == 0.0) & (dx < 0.0))


def occupancy(
    mesh: TriangleMesh,
    grid,
    samples: int = DEFAULT_SAMPLES,
) -> np.ndarray:
    """
    每个体素被网格占据的比例 ∈ [0, 1]

    Args:
        mesh: 闭合流形网格 (外法线)
        grid: GridSpec 或 FluidGrid
        samples: 每个方向的采样数

    Returns:
        (nx, ny, nz) 占据比例
    """
    spec = grid if isinstance(grid, GridSpec) else GridSpec.of(grid)
    dims = np.asarray(spec.dims)
    occ = np.zeros(spec.dims)
    if mesh.triangle_count == 0:
        return occ

    # 采样坐标: 采样点位于整数位置
    s = int(samples)
    verts = (mesh.vertices - np.asarray(spec.origin)) / spec.h * s - 0.5

    lo_vox = np.clip(np.floor((verts.min(axis=0) + 0.5) / s).astype(int), 0, dims)
    hi_vox = np.clip(np.floor((verts.max(axis=0) + 0.5) / s).astype(int) + 1, 0, dims)
    if np.any(hi_vox <= lo_vox):
        return occ
    lo_s = lo_vox * s
    n_s = (hi_vox - lo_vox) * s

    # crossings[i, j, k]: 第 k 个采样点 (含) 以下新增的穿越数
    crossings = np.zeros(tuple(n_s), dtype=np.int32)
    corners = verts[mesh.triangles]
    for tri in corners:
        a, b, c = tri
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 == 0.0:
            continue
        # 外法线 z 分量 < 0: 沿 +z 进入网格
        sign = 1 if area2 < 0.0 else -1
        if area2 < 0.0:
            b, c = c, b
            area2 = -area2

        x_min = max(int(np.ceil(min(a[0], b[0], c[0]))), lo_s[0])
        x_max = min(int(np.floor(max(a[0], b[0], c[0]))), lo_s[0] + n_s[0] - 1)
        y_min = max(int(np.ceil(min(a[1], b[1], c[1]))), lo_s[1])
        y_max = min(int(np.floor(max(a[1], b[1], c[1]))), lo_s[1] + n_s[1] - 1)
        if x_max < x_min or y_max < y_min:
            continue
        px, py = np.meshgrid(
            np.arange(x_min, x_max + 1, dtype=np.float64),
            np.arange(y_min, y_max + 1, dtype=np.float64),
            indexing="ij",
        )

        inside = np.ones(px.shape, dtype=bool)
        weights = []
        for p, q in ((a, b), (b, c), (c, a)):
            dx, dy = q[0] - p[0], q[1] - p[1]
            w = dx * (py - p[1]) - dy * (px - p[0])
            inside &= (w > 0.0) | ((w == 0.0) & _top_left(np.asarray(dx), np.asarray(dy)))
            weights.append(w)
        if not inside.any():
            continue

        # 重心坐标插值交点高度: w_bc 对应 a，w_ca 对应 b，w_ab 对应 c
        w_ab, w_bc, w_ca = weights
        z = (w_bc * a[2] + w_ca * b[2] + w_ab * c[2]) / area2
        ix = px[inside].astype(int) - lo_s[0]
        iy = py[inside].astype(int) - lo_s[1]
        k = np.ceil(z[inside]).astype(int) - lo_s[2]
        below = k < 0
        k[below] = 0
        keep = k < n_s[2]
        np.add.at(crossings, (ix[keep], iy[keep], k[keep]), sign)

    winding = np.cumsum(crossings, axis=2)
    inside = (winding > 0).astype(np.float64)
    nx, ny, nz = hi_vox - lo_vox
    counts = inside.reshape(nx, s, ny, s, nz, s).sum(axis=(1, 3, 5))
    occ[lo_vox[0]:hi_vox[0], lo_vox[1]:hi_vox[1], lo_vox[2]:hi_vox[2]] = counts / float(s ** 3)
    return occ


def free_fraction(occupancies: Iterable[np.ndarray], dims: Sequence[int], zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> np.ndarray:
    """
    多个物体合并后的非固体比例 max(0, 1 − Σ占据)，低于阈值置零

    Args:
        occupancies: 各物体的占据比例
        dims: 网格维度
        zero_threshold: 小于此值的部分体积设为 0
    """
    total = np.zeros(tuple(int(d) for d in dims))
    for occ in occupancies:
        total += occ
    free = np.maximum(0.0, 1.0 - total)
    free[free < zero_threshold] = 0.0
    return free


def voxelize(
    mesh: TriangleMesh,
    grid,
    samples: int = DEFAULT_SAMPLES,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    validate: bool = True,
) -> np.ndarray:
    """
    网格转换为每个体素的非固体比例 (1 = 完全在所有固体之外)

    Args:
        mesh: 闭合流形网格
        grid: GridSpec 或 FluidGrid
        samples: 每个方向的采样数 (默认 4)
        zero_threshold: 部分体积置零阈值 (默认 0.1)
        validate: 是否先做流形检查

    Raises:
        MeshError: 非流形网格 (指出问题边)
    """
    if validate:
        mesh.validate_closed()
    spec = grid if isinstance(grid, GridSpec) else GridSpec.of(grid)
    occ = occupancy(mesh, spec, samples)
    return free_fraction([occ], spec.dims, zero_threshold)


def occupied_volume(occ: np.ndarray, h: float) -> float:
    """Σ 占据比例·h³"""
    return float(np.sum(occ) * h ** 3)


def surface_shell(solid: np.ndarray, width: int = 1, structure: Optional[np.ndarray] = None) -> np.ndarray:
    """
    固体外侧 width 层流体体素 (粉尘生成面、运动物体附近的强制活跃区)

    Args:
        solid: 布尔固体掩码
        width: 层数
    """
    if not solid.any() or width <= 0:
        return np.zeros(solid.shape, dtype=bool)
    structure = np.ones((3, 3, 3), dtype=bool) if structure is None else structure
    grown = ndimage.binary_dilation(solid, structure=structure, iterations=width)
    return grown & ~solid
