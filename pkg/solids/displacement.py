"""
固体 → 流体耦合 - 内部部分体积与活塞模型

物体进入体素时当作沿主轴运动的活塞绝热压缩流体:
- 体素化给出瞬时非固体比例 V_inst
- 流体使用滞后的内部部分体积 V_int，按 h²·|v_p| 的速率向 V_inst 靠拢
- 每次变化用绝热关系 P₂/P₁ = (ρ₂/ρ₁)^γ 更新体素状态
- 体积从 0 变为非零或从非零变为 0 时与主轴方向的邻居合并处理
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from fluid.constants import PhysicalConstants
from fluid.grid import FluidGrid, VoxelState, sync_state_equations

logger = logging.getLogger(__name__)

# 小于此值的剩余体积差视为排空 (体积比例)
DRAIN_EPSILON = 1e-12


def adiabatic_compress(cell: VoxelState, v1: float, v2: float, consts: PhysicalConstants) -> VoxelState:
    """
    绝热压缩/膨胀 V₁ → V₂

    ρ₂ = ρ₁V₁/V₂，T₂/T₁ = (ρ₂/ρ₁)^(γ−1) (即 P₂/P₁ = (ρ₂/ρ₁)^γ)，随后同步状态方程

    Raises:
        ValueError: V₁ 或 V₂ 不为正 (零体积需走合并流程)
    """
    if not (v1 > 0.0 and v2 > 0.0):
        raise ValueError(f"adiabatic compression needs positive volumes, got {v1} -> {v2}")
    ratio = v1 / v2
    temp = cell.temp * ratio ** (consts.gamma - 1.0)
    compressed = VoxelState(
        rho=cell.rho * ratio,
        v=tuple(cell.v),
        n_int=consts.c_v * temp,
        partial_volume=v2,
        flag=cell.flag,
    )
    return sync_state_equations(compressed, consts)


def _compress_arrays(rho, n_int, v1, v2, consts: PhysicalConstants):
    """adiabatic_compress 的数组版本 (返回新的 rho, N)"""
    ratio = v1 / v2
    temp = (n_int / consts.c_v) * ratio ** (consts.gamma - 1.0)
    return rho * ratio, consts.c_v * temp


def merge_zero_to_nonzero(v_a2: float, v_b1: float, v_b2: float) -> Tuple[float, float, float, float]:
    """
    体素 A 从 0 打开 (V_A1 = 0, V_A2 > 0)，与邻居 B 视为一个大体素

    初始内部体积满足 Ṽ_A1 + Ṽ_B1 = V_B1 且 Ṽ_A1·V_B2 = Ṽ_B1·V_A2

    Returns:
        (Ṽ_A1, Ṽ_B1, ΔV_A, ΔV_B)，体积以体素体积为单位
    """
    total = v_a2 + v_b2
    if not total > 0.0:
        return 0.0, v_b1, v_a2, v_b2 - v_b1
    va1 = v_a2 * v_b1 / total
    vb1 = v_b2 * v_b1 / total
    return va1, vb1, v_a2 - va1, v_b2 - vb1


def merge_nonzero_to_zero(a: VoxelState, v_a1: float, b: VoxelState, v_b1: float, v_b2: float,
                          consts: PhysicalConstants) -> Tuple[VoxelState, float, float]:
    """
    体素 A 被完全占据 (V_A2 = 0)，其流体并入邻居 B

    质量加权平均，损失的动能转为内能；ρ_B' 取合并后的平均密度

    Returns:
        (合并后的 B 状态, Ṽ_B1, ΔV_B)
    """
    m_a = a.rho * v_a1
    m_b = b.rho * v_b1
    mass = m_a + m_b
    if not mass > 0.0:
        return b, v_b1, v_b2 - v_b1
    va = np.asarray(a.v)
    vb = np.asarray(b.v)
    v_new = (m_a * va + m_b * vb) / mass
    kinetic_lost = 0.5 * m_a * va.dot(va) + 0.5 * m_b * vb.dot(vb) - 0.5 * mass * v_new.dot(v_new)
    n_new = (m_a * a.n_int + m_b * b.n_int + kinetic_lost) / mass
    vb1 = v_a1 + v_b1
    merged = sync_state_equations(
        VoxelState(rho=mass / vb1, v=tuple(v_new), n_int=n_new, partial_volume=vb1, flag=b.flag),
        consts,
    )
    return merged, vb1, v_b2 - vb1


def piston_axis(velocity: Sequence[float]) -> Tuple[int, float]:
    """活塞主轴 (速度分量绝对值最大的轴) 与该轴上的有符号速度"""
    v = np.asarray(velocity, dtype=np.float64)
    axis = int(np.argmax(np.abs(v)))
    return axis, float(v[axis])


@dataclass
class DisplacementState:
    """
    内部部分体积状态

    v_int 是流体实际使用的部分体积，target 是它正在靠拢的值，
    rate 是排空速率 (体积比例/秒，inf 表示一步完成)
    """
    v_inst: np.ndarray
    v_int: np.ndarray
    target: np.ndarray
    rate: np.ndarray
    counters: Dict[str, int] = field(default_factory=lambda: {
        "rotation_drains": 0,
        "opened": 0,
        "closed": 0,
        "orphan_merges": 0,
    })

    @classmethod
    def from_free_fraction(cls, free: np.ndarray) -> "DisplacementState":
        return cls(
            v_inst=free.copy(),
            v_int=free.copy(),
            target=free.copy(),
            rate=np.zeros(free.shape),
        )

    @property
    def pending(self) -> np.ndarray:
        """尚未排空的体积差 (体积比例)"""
        return self.target - self.v_int

    @property
    def busy(self) -> bool:
        return bool(np.any(self.target != self.v_int))


def _open_neighbor(state: DisplacementState, idx: np.ndarray, axis: int, step: int) -> Optional[Tuple[int, ...]]:
    """沿 axis 方向 step (±1) 的第一个内部体积非零的体素"""
    dims = state.v_int.shape
    pos = idx.copy()
    while True:
        pos[axis] += step
        if pos[axis] < 0 or pos[axis] >= dims[axis]:
            return None
        if state.v_int[tuple(pos)] > 0.0:
            return tuple(int(p) for p in pos)


def schedule_displacement(
    grid: FluidGrid,
    state: DisplacementState,
    new_free: np.ndarray,
    velocity: Sequence[float],
    consts: PhysicalConstants,
) -> DisplacementState:
    """
    根据新的体素化结果安排内部部分体积的变化

    Args:
        grid: 流体网格 (合并时直接修改 read 缓冲区)
        state: 内部部分体积状态
        new_free: 新的瞬时非固体比例
        velocity: 物体速度 v_p (取主轴分量)
        consts: 物理常数

    Returns:
        同一状态对象
    """
    changed = np.argwhere(new_free != state.v_inst)
    if changed.size == 0:
        return state
    axis, v_axis = piston_axis(velocity)
    speed = abs(v_axis)
    sign = 1 if v_axis >= 0.0 else -1
    h = grid.h
    if speed > 0.0:
        rate = speed / h                  # h²·|v_p| / h³
    else:
        rate = np.inf
        state.counters["rotation_drains"] += len(changed)
        logger.debug(f"主轴速度为 0，{len(changed)} 个体素的体积变化在一步内完成")

    f = grid.read
    for idx in changed:
        a = tuple(int(i) for i in idx)
        v_a1 = state.v_int[a]
        v_a2 = float(new_free[a])

        if v_a1 <= 0.0 and v_a2 > 0.0:
            # 0 → 非零: 与后方的邻居合并
            b = _open_neighbor(state, idx, axis, -sign)
            if b is None:
                b = _open_neighbor(state, idx, axis, sign)
            state.counters["opened"] += 1
            if b is None:
                state.counters["orphan_merges"] += 1
                rho, n_int = grid.ambient.rho, grid.ambient.n_int
                state.v_int[a] = v_a2
                _set_cell(grid, a, rho, (0.0, 0.0, 0.0), n_int, consts)
            else:
                va1, vb1, _, _ = merge_zero_to_nonzero(v_a2, state.v_int[b], float(new_free[b]))
                _set_cell(grid, a, f.rho[b], tuple(f.vel[:, b[0], b[1], b[2]]), f.n_int[b], consts)
                state.v_int[a] = va1
                state.v_int[b] = vb1
                state.rate[b] = max(state.rate[b], rate)
        elif v_a1 > 0.0 and v_a2 <= 0.0:
            # 非零 → 0: 流体并入前方的邻居
            b = _open_neighbor(state, idx, axis, sign)
            state.counters["closed"] += 1
            if b is None or b == a:
                b = _open_neighbor(state, idx, axis, -sign)
                state.counters["orphan_merges"] += 1
                logger.debug(f"体素 {a} 前方没有开放体素，质量并入反方向的 {b}")
            if b is not None:
                merged, vb1, _ = merge_nonzero_to_zero(
                    grid.cell(a), v_a1, grid.cell(b), state.v_int[b], float(new_free[b]), consts
                )
                _set_cell(grid, b, merged.rho, merged.v, merged.n_int, consts)
                state.v_int[b] = vb1
                state.rate[b] = max(state.rate[b], rate)
            state.v_int[a] = 0.0
            _set_cell(grid, a, 0.0, (0.0, 0.0, 0.0), 0.0, consts)

        state.target[a] = v_a2
        state.rate[a] = rate

    state.v_inst = new_free.copy()
    publish_volumes(grid, state)
    return state


def _set_cell(grid: FluidGrid, idx, rho: float, v, n_int: float, consts: PhysicalConstants):
    f = grid.read
    f.rho[idx] = rho
    f.vel[(slice(None),) + tuple(idx)] = v
    f.n_int[idx] = n_int
    f.temp[idx] = n_int / consts.c_v
    f.pres[idx] = rho * consts.r_gas * f.temp[idx]


def publish_volumes(grid: FluidGrid, state: DisplacementState):
    """内部部分体积写入两个缓冲区"""
    grid.read.pv[...] = state.v_int
    grid.write.pv[...] = state.v_int


def apply_displacement(
    grid: FluidGrid,
    state: DisplacementState,
    dt: float,
    consts: PhysicalConstants,
) -> int:
    """
    按排空速率推进内部部分体积，并对体素做绝热压缩/膨胀

    Args:
        grid: 流体网格 (修改 read 缓冲区)
        state: 内部部分体积状态
        dt: 时间步长
        consts: 物理常数

    Returns:
        本步被更新的体素数
    """
    pending = state.target - state.v_int
    moving = np.abs(pending) > 0.0
    if not moving.any():
        return 0

    step = np.minimum(np.abs(pending), state.rate * dt) * np.sign(pending)
    v1 = state.v_int
    v2 = np.where(moving, v1 + step, v1)
    done = moving & (np.abs(state.target - v2) <= DRAIN_EPSILON)
    v2 = np.where(done, state.target, v2)

    f = grid.read
    compress = moving & (v1 > 0.0) & (v2 > 0.0)
    if compress.any():
        rho, n_int = _compress_arrays(f.rho[compress], f.n_int[compress], v1[compress], v2[compress], consts)
        f.rho[compress] = rho
        f.n_int[compress] = n_int
        f.sync(consts, mask=compress)

    state.v_int = v2
    state.rate[done] = 0.0
    publish_volumes(grid, state)
    return int(np.count_nonzero(moving))
