"""
边界条件 - 自由边界、硬边界与剪枝

- 自由边界: 外侧邻居读作环境空气，冲击波可以离开体积
- 硬边界: 外侧邻居为镜像，法向速度取反 (面上法向速度为零)，其余属性不变
- 剪枝: 邻域压差与速度都低于阈值的体素不参与计算
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .constants import PhysicalConstants
from .grid import FluidGrid, GridFields, VoxelFlag, VoxelState

logger = logging.getLogger(__name__)

FREE = "free"
HARD = "hard"
INNER = "inner"     # 计算窗口的内部截断面 (不是真实边界)

FACE_NAMES = ("x_min", "x_max", "y_min", "y_max", "z_min", "z_max")


def _default_faces() -> Dict[str, str]:
    return {name: FREE for name in FACE_NAMES}


@dataclass
class BoundarySpec:
    """边界配置"""
    faces: Dict[str, str] = field(default_factory=_default_faces)
    prune_enabled: bool = True
    prune_threshold: float = 10.0       # 压差阈值 (Pa)
    velocity_threshold: float = 1e-3    # 速度阈值 (m/s)
    halo: int = 4                       # 活跃集膨胀宽度 (体素)

    def __post_init__(self):
        faces = _default_faces()
        faces.update(self.faces)
        for name, kind in faces.items():
            if name not in FACE_NAMES:
                raise ValueError(f"unknown boundary face '{name}'")
            if kind not in (FREE, HARD):
                raise ValueError(f"boundary face '{name}' must be free or hard, got '{kind}'")
        self.faces = faces
        if self.prune_threshold < 0.0:
            raise ValueError("prune_threshold must be non-negative")
        if self.velocity_threshold < 0.0:
            raise ValueError("velocity_threshold must be non-negative")
        if self.halo < 0:
            raise ValueError("halo must be non-negative")

    def face(self, axis: int, side: int) -> str:
        """side: 0 为负方向面，1 为正方向面"""
        return self.faces[FACE_NAMES[2 * axis + side]]

    @property
    def has_free_faces(self) -> bool:
        return any(kind == FREE for kind in self.faces.values())

    @classmethod
    def closed_box(cls, **kwargs) -> "BoundarySpec":
        """六个面全部为硬边界"""
        return cls(faces={name: HARD for name in FACE_NAMES}, **kwargs)


def ghost_value(
    grid: FluidGrid,
    idx: Tuple[int, int, int],
    neighbor_offset: Tuple[int, int, int],
    spec: BoundarySpec,
    consts: PhysicalConstants,
) -> VoxelState:
    """
    计算单个边界邻居 (幽灵体素) 的读取值

    Args:
        grid: 流体网格
        idx: 当前体素索引
        neighbor_offset: 指向邻居的单位偏移，如 (1, 0, 0)
        spec: 边界配置
        consts: 物理常数

    Returns:
        邻居应当呈现的体素状态
    """
    offset = np.asarray(neighbor_offset, dtype=int)
    if np.abs(offset).sum() != 1:
        raise ValueError(f"neighbor_offset must be a unit face offset, got {neighbor_offset}")
    axis = int(np.flatnonzero(offset)[0])
    side = 1 if offset[axis] > 0 else 0
    cell = grid.cell(idx)
    nbr = np.asarray(idx) + offset

    outside = nbr[axis] < 0 or nbr[axis] >= grid.dims[axis]
    if outside:
        kind = spec.face(axis, side)
    else:
        if grid.read.pv[tuple(nbr)] > 0.0:
            raise ValueError(f"neighbor {tuple(nbr)} is an open fluid voxel, not a boundary")
        kind = HARD

    if kind == FREE:
        amb = grid.synced_ambient(consts)
        return VoxelState(
            rho=amb.rho,
            v=(0.0, 0.0, 0.0),
            n_int=amb.n_int,
            temp=amb.temp,
            pres=amb.pres,
            partial_volume=1.0,
            flag=VoxelFlag.FREE_BOUNDARY,
        )

    # 硬边界: 镜像，法向分量取反，切向分量不变
    v = list(cell.v)
    v[axis] = -v[axis]
    return VoxelState(
        rho=cell.rho,
        v=tuple(v),
        n_int=cell.n_int,
        temp=cell.temp,
        pres=cell.pres,
        partial_volume=cell.partial_volume,
        flag=VoxelFlag.HARD_BOUNDARY,
    )


@dataclass(frozen=True)
class WindowFaces:
    """
    计算窗口六个面的处理方式

    窗口贴着网格外表面时沿用边界配置，否则为 INNER (按边缘值复制)
    """
    kinds: Tuple[Tuple[str, str], Tuple[str, str], Tuple[str, str]]

    @classmethod
    def for_window(
        cls, spec: BoundarySpec, lo: Sequence[int], hi: Sequence[int], dims: Sequence[int]
    ) -> "WindowFaces":
        kinds = []
        for axis in range(3):
            low = spec.face(axis, 0) if lo[axis] == 0 else INNER
            high = spec.face(axis, 1) if hi[axis] == dims[axis] else INNER
            kinds.append((low, high))
        return cls(tuple(kinds))


def _ghost_slab(padded: np.ndarray, axis: int, side: int, leading: int = 0) -> tuple:
    index = [slice(None)] * padded.ndim
    index[leading + axis] = 0 if side == 0 else -1
    return tuple(index)


def pad_scalar(x: np.ndarray, faces: WindowFaces, ambient: float) -> np.ndarray:
    """
    标量场加一层幽灵体素

    Args:
        x: (nx, ny, nz) 标量场
        faces: 窗口各面的处理方式
        ambient: 自由边界上的环境值

    Returns:
        (nx+2, ny+2, nz+2) 数组
    """
    padded = np.pad(x, 1, mode="edge")
    for axis in range(3):
        for side in range(2):
            if faces.kinds[axis][side] == FREE:
                padded[_ghost_slab(padded, axis, side)] = ambient
    return padded


def pad_vector(v: np.ndarray, faces: WindowFaces) -> np.ndarray:
    """
    向量场 (3, nx, ny, nz) 加一层幽灵体素

    自由边界的幽灵速度为零，硬边界镜像并把法向分量取反
    """
    padded = np.pad(v, ((0, 0), (1, 1), (1, 1), (1, 1)), mode="edge")
    for axis in range(3):
        for side in range(2):
            kind = faces.kinds[axis][side]
            slab = _ghost_slab(padded, axis, side, leading=1)
            if kind == FREE:
                padded[slab] = 0.0
            elif kind == HARD:
                comp = (axis,) + slab[1:]
                padded[comp] = -padded[comp]
    return padded


def neighbor_pressure_jump(
    fields: GridFields, spec: BoundarySpec, ambient_p: float
) -> np.ndarray:
    """
    每个体素与六个邻居的最大压差 |ΔP|

    固体邻居按镜像处理 (压差为零)
    """
    dims = fields.pres.shape
    faces = WindowFaces.for_window(spec, (0, 0, 0), dims, dims)
    pres = pad_scalar(fields.pres, faces, ambient_p)
    pv = pad_scalar(fields.pv, faces, 1.0)
    center = pres[1:-1, 1:-1, 1:-1]
    jump = np.zeros(dims)
    for axis in range(3):
        for shift in (0, 2):
            index = [slice(1, -1)] * 3
            index[axis] = slice(shift, shift + dims[axis])
            nbr = pres[tuple(index)]
            open_nbr = pv[tuple(index)] > 0.0
            diff = np.where(open_nbr, np.abs(nbr - center), 0.0)
            np.maximum(jump, diff, out=jump)
    return jump


def update_active_set(
    grid: FluidGrid,
    spec: BoundarySpec,
    force_active: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    更新活跃集 (剪枝优化)

    体素被剪枝当且仅当六个邻居压差都小于阈值且速度小于阈值；
    被扰动的体素向外膨胀 halo 层 (不小于每步的模板半径)；阈值低于
    格式在波前外产生的前驱扰动时，剪枝与不剪枝的结果一致

    Args:
        grid: 流体网格 (状态方程已同步)
        spec: 边界配置
        force_active: 可选的强制活跃掩码 (如运动物体附近)

    Returns:
        活跃体素布尔掩码
    """
    fields = grid.read
    fluid = fields.pv > 0.0
    if not spec.prune_enabled:
        return fluid.copy()

    jump = neighbor_pressure_jump(fields, spec, grid.ambient.pres)
    speed = np.sqrt(np.sum(fields.vel * fields.vel, axis=0))
    disturbed = fluid & ((jump >= spec.prune_threshold) | (speed >= spec.velocity_threshold))

    if spec.halo > 0 and disturbed.any():
        structure = np.ones((3, 3, 3), dtype=bool)
        active = ndimage.binary_dilation(disturbed, structure=structure, iterations=spec.halo)
    else:
        active = disturbed
    if force_active is not None:
        active = active | force_active
    return active & fluid


def active_indices(active: np.ndarray) -> np.ndarray:
    """活跃体素索引，按 C 顺序排序 (确定性)"""
    return np.argwhere(active)


def apply_flags(fields: GridFields, active: np.ndarray, spec: BoundarySpec):
    """根据活跃集和部分体积刷新体素标志"""
    flags = np.full(fields.pv.shape, int(VoxelFlag.PRUNED), dtype=np.uint8)
    flags[active] = int(VoxelFlag.INTERIOR)

    free_layer = np.zeros(fields.pv.shape, dtype=bool)
    for axis in range(3):
        for side in range(2):
            if spec.face(axis, side) == FREE:
                index = [slice(None)] * 3
                index[axis] = 0 if side == 0 else -1
                free_layer[tuple(index)] = True
    flags[active & free_layer] = int(VoxelFlag.FREE_BOUNDARY)
    flags[fields.pv <= 0.0] = int(VoxelFlag.HARD_BOUNDARY)
    fields.flags[...] = flags
