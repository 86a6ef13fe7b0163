"""
显式积分器 - 两阶段 (非对流 + 对流) 时间步进与供体-受体迎风输运

每个时间步:
1. 用动量方程的非对流项求加速度 ã
2. 暂定速度 ṽ = v + Δt·ã，平均速度 v̄ = (ṽ + v)/2
3. 用能量方程的非对流项 (以 v̄ 代替流体速度) 更新内能 N
4. 用 v̄ 求面速度，供体-受体方法求新密度
5. 随质量输运动量 (ṽ) 与总能 N + ½|ṽ|²，按新质量缩放
6. 状态方程同步 T、P

步骤 3 的功项写成通量散度 −∇·(P v̄) + ∇·(τ·v̄) 减去动能增量 v̄·f_s，
步骤 5 输运总能再扣除新动能，硬边界封闭时 Σ ρ(N + ½|v|²) 不变
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .boundary import BoundarySpec, WindowFaces, apply_flags, update_active_set
from .constants import PhysicalConstants
from .grid import FluidGrid, VoxelState, sound_speed
from .parallel import SlabExecutor
from .stencil import StencilWindow, viscous_stress

logger = logging.getLogger(__name__)

# 一个时间步内体素值依赖的最远邻居距离 (体素)
REACH = 4

# CFL 警告: 首次出现以及之后每 100 次
CFL_WARN_EVERY = 100


@dataclass
class StepDiagnostics:
    """积分诊断计数"""
    steps: int = 0
    energy_clamps: int = 0          # N < 0 被钳制为 0 的次数
    mass_clamps: int = 0            # 新质量 ≤ 0 被清空的次数
    stranded_momentum: int = 0      # 被清空体素仍有流入动量的次数
    cfl_violations: int = 0
    max_speed: float = 0.0
    max_pressure: float = 0.0
    max_cfl: float = 0.0
    active_cells: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "StepDiagnostics":
        diag = cls()
        for key, value in data.items():
            if hasattr(diag, key):
                setattr(diag, key, type(getattr(diag, key))(value))
        return diag


@dataclass
class StepContext:
    """单步积分所需的上下文"""
    dt: float
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    active: Optional[np.ndarray] = None             # 活跃体素掩码
    force_active: Optional[np.ndarray] = None       # 强制活跃掩码 (运动物体附近)
    diagnostics: StepDiagnostics = field(default_factory=StepDiagnostics)
    executor: Optional[SlabExecutor] = None

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def active_set(self) -> np.ndarray:
        """活跃体素索引 (n, 3)，C 顺序"""
        if self.active is None:
            return np.zeros((0, 3), dtype=int)
        return np.argwhere(self.active)

    def slabs(self) -> SlabExecutor:
        if self.executor is None:
            self.executor = SlabExecutor(1)
        return self.executor


@dataclass
class Window:
    """
    计算窗口 - 活跃集包围盒向外扩展 REACH 层

    数组是 read 缓冲区的视图，不可写
    """
    lo: Tuple[int, int, int]
    hi: Tuple[int, int, int]
    rho: np.ndarray
    vel: np.ndarray
    n_int: np.ndarray
    temp: np.ndarray
    pres: np.ndarray
    pv: np.ndarray
    mask: np.ndarray                # 窗口内需要写回的体素
    ambient: VoxelState
    stencil: StencilWindow

    @property
    def index(self) -> Tuple[slice, slice, slice]:
        return tuple(slice(a, b) for a, b in zip(self.lo, self.hi))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))


def window_from_bounds(
    grid: FluidGrid,
    lo: Sequence[int],
    hi: Sequence[int],
    spec: BoundarySpec,
    mask: Optional[np.ndarray] = None,
) -> Window:
    """按给定包围盒 [lo, hi) 截取计算窗口"""
    lo = tuple(int(a) for a in lo)
    hi = tuple(int(b) for b in hi)
    index = tuple(slice(a, b) for a, b in zip(lo, hi))
    f = grid.read
    pv = f.pv[index]
    faces = WindowFaces.for_window(spec, lo, hi, grid.dims)
    if mask is None:
        mask = pv > 0.0
    return Window(
        lo=lo,
        hi=hi,
        rho=f.rho[index],
        vel=f.vel[(slice(None),) + index],
        n_int=f.n_int[index],
        temp=f.temp[index],
        pres=f.pres[index],
        pv=pv,
        mask=mask,
        ambient=grid.ambient,
        stencil=StencilWindow(pv, faces, grid.h),
    )


def extract_window(
    grid: FluidGrid, active: np.ndarray, spec: BoundarySpec, reach: int = REACH
) -> Optional[Window]:
    """活跃集的计算窗口，活跃集为空时返回 None"""
    idx = np.argwhere(active)
    if idx.size == 0:
        return None
    dims = np.asarray(grid.dims)
    lo = np.maximum(idx.min(axis=0) - reach, 0)
    hi = np.minimum(idx.max(axis=0) + 1 + reach, dims)
    index = tuple(slice(a, b) for a, b in zip(lo, hi))
    return window_from_bounds(grid, lo, hi, spec, mask=active[index])


def _surface_force(
    window: Window,
    pres_pad: np.ndarray,
    vel_pad: np.ndarray,
    div_pad: np.ndarray,
    consts: PhysicalConstants,
    rows: slice,
) -> np.ndarray:
    """单位体积的面力 f_s = −∇P + (μ/3)∇(∇·v) + μ∇²v"""
    st = window.stencil
    return (
        -st.gradient(pres_pad, rows)
        + (consts.mu / 3.0) * st.gradient(div_pad, rows)
        + consts.mu * st.vector_laplacian(vel_pad, rows)
    )


def _acceleration(window: Window, force: np.ndarray, consts: PhysicalConstants, rows: slice) -> np.ndarray:
    """
    a = f + f_s/ρ，ρ = 0 的体素加速度为 0

    consts.hydrostatic 为真时环境大气是静力平衡的参考状态 (其压强梯度
    与 ρ_amb·g 抵消)，重力只作用于与环境的密度差: f = g·(1 − ρ_amb/ρ)。
    静止的环境体素保持不动，热气体 (ρ < ρ_amb) 上浮。为假时 f = g。
    """
    rho = window.rho[rows]
    filled = rho > 0.0
    safe_rho = np.where(filled, rho, 1.0)
    gravity = np.asarray(consts.gravity).reshape(3, 1, 1, 1)
    if consts.hydrostatic:
        gravity = gravity * (1.0 - window.ambient.rho / safe_rho)
    accel = gravity + force / safe_rho
    return np.where(filled, accel, 0.0)


def _window_acceleration(window: Window, ctx: StepContext) -> Tuple[np.ndarray, np.ndarray]:
    """窗口内的 (加速度, 面力)"""
    st = window.stencil
    slabs = ctx.slabs()
    pres_pad = st.pad(window.pres, window.ambient.pres)
    vel_pad = st.pad_vec(window.vel)

    div = np.empty(window.shape)

    def stage_div(rows: slice):
        div[rows] = st.divergence(vel_pad, rows)

    slabs.map_rows(stage_div, st.rows)
    div_pad = st.pad(div, 0.0)

    accel = np.empty((3,) + window.shape)
    force = np.empty((3,) + window.shape)

    def stage_accel(rows: slice):
        force[:, rows] = _surface_force(window, pres_pad, vel_pad, div_pad, ctx.consts, rows)
        accel[:, rows] = _acceleration(window, force[:, rows], ctx.consts, rows)

    slabs.map_rows(stage_accel, st.rows)
    return accel, force


def non_convective_acceleration(
    grid: FluidGrid,
    idx: Tuple[int, int, int],
    consts: PhysicalConstants,
    spec: Optional[BoundarySpec] = None,
) -> np.ndarray:
    """
    单个体素的非对流加速度 (动量方程前四项，不含对流项)

    Args:
        grid: 流体网格
        idx: 体素索引
        consts: 物理常数
        spec: 边界配置 (默认全自由边界)

    Returns:
        加速度 (3,) m/s²
    """
    spec = spec or BoundarySpec()
    idx = np.asarray(idx, dtype=int)
    lo = np.maximum(idx - 2, 0)
    hi = np.minimum(idx + 3, grid.dims)
    window = window_from_bounds(grid, lo, hi, spec)
    accel, _ = _window_acceleration(window, StepContext(dt=1.0, consts=consts, boundary=spec))
    local = tuple(idx - lo)
    return accel[(slice(None),) + local].copy()


@dataclass
class NonConvectiveResult:
    """非对流阶段的结果 (窗口坐标)"""
    window: Optional[Window]
    v_tilde: Optional[np.ndarray] = None     # 暂定速度 ṽ
    v_bar: Optional[np.ndarray] = None       # 平均速度 v̄
    n_int: Optional[np.ndarray] = None       # 非对流更新后的 N


def step_non_convective(grid: FluidGrid, ctx: StepContext) -> NonConvectiveResult:
    """
    非对流阶段 (步骤 1-3)

    Args:
        grid: 状态方程已同步的网格
        ctx: 步进上下文 (ctx.active 为 None 时先更新活跃集)

    Returns:
        NonConvectiveResult，活跃集为空时 window 为 None
    """
    if ctx.active is None:
        ctx.active = update_active_set(grid, ctx.boundary, ctx.force_active)
    window = extract_window(grid, ctx.active, ctx.boundary)
    if window is None:
        return NonConvectiveResult(window=None)

    consts = ctx.consts
    dt = ctx.dt
    st = window.stencil
    slabs = ctx.slabs()

    accel, force = _window_acceleration(window, ctx)
    v_tilde = window.vel + dt * accel
    v_bar = 0.5 * (v_tilde + window.vel)

    vel_pad = st.pad_vec(window.vel)
    vbar_pad = st.pad_vec(v_bar)
    temp_pad = st.pad(window.temp, window.ambient.temp)
    work_pad = st.pad(window.pres, window.ambient.pres)[np.newaxis] * vbar_pad
    stress_work = np.empty((3,) + window.shape)

    def stage_stress(rows: slice):
        tau = viscous_stress(st.jacobian(vel_pad, rows), consts.mu)
        stress_work[:, rows] = np.einsum("ij...,i...->j...", tau, v_bar[:, rows])

    slabs.map_rows(stage_stress, st.rows)
    stress_pad = st.pad_vec(stress_work)
    n_new = np.empty(window.shape)

    def stage_energy(rows: slice):
        # 动能增量 ρ v̄·(ṽ − v) 中面力部分从内能扣除
        kinetic = np.sum(v_bar[:, rows] * force[:, rows], axis=0)
        heat = (
            consts.k_thermal * st.laplacian(temp_pad, rows)
            - st.divergence(work_pad, rows)
            + st.divergence(stress_pad, rows)
            - kinetic
        )
        rho = window.rho[rows]
        filled = rho > 0.0
        dn = np.where(filled, dt * heat / np.where(filled, rho, 1.0), 0.0)
        n_new[rows] = window.n_int[rows] + dn

    slabs.map_rows(stage_energy, st.rows)

    negative = n_new < 0.0
    clamps = int(np.count_nonzero(negative & window.mask))
    if clamps:
        ctx.diagnostics.energy_clamps += clamps
        logger.debug(f"内能为负，钳制 {clamps} 个体素")
    n_new[negative] = 0.0

    return NonConvectiveResult(window=window, v_tilde=v_tilde, v_bar=v_bar, n_int=n_new)


@dataclass
class FaceFlux:
    """一个面上从 i 流向 j 的输运量 (按体素体积归一化)"""
    mass: float                 # kg/m³
    momentum: np.ndarray        # (3,) kg/(m²·s)
    energy: float               # J/m³


def face_flux(u, open_fraction, rho_l, rho_r, vt_l, vt_r, n_l, n_r, dt: float, h: float):
    """
    供体-受体面通量 (逐元素)

    u > 0 时左侧为供体，u < 0 时右侧为供体，u == 0 不输运。
    正的质量表示从左流向右。

    Returns:
        (mass, momentum, energy)
    """
    forward = u > 0.0
    mass = dt * u * open_fraction * np.where(forward, rho_l, rho_r) / h
    momentum = mass * np.where(forward, vt_l, vt_r)
    energy = mass * np.where(forward, n_l, n_r)
    return mass, momentum, energy


def donor_acceptor_flux(
    grid: FluidGrid,
    idx_i: Tuple[int, int, int],
    idx_j: Tuple[int, int, int],
    v_bar: np.ndarray,
    dt: float,
    v_tilde: Optional[np.ndarray] = None,
    n_int: Optional[np.ndarray] = None,
) -> FaceFlux:
    """
    体素 i 与其面邻居 j 之间的供体-受体输运

    Args:
        grid: 流体网格
        idx_i, idx_j: 相邻的两个体素
        v_bar: 平均速度场 (3, nx, ny, nz)
        dt: 时间步长
        v_tilde: 被输运的速度场 (默认 read 缓冲区速度)
        n_int: 被输运的内能场 (默认 read 缓冲区内能)

    Returns:
        FaceFlux，质量为正表示从 i 流向 j
    """
    f = grid.read
    offset = np.asarray(idx_j) - np.asarray(idx_i)
    if np.abs(offset).sum() != 1:
        raise ValueError(f"{tuple(idx_j)} is not a face neighbor of {tuple(idx_i)}")
    axis = int(np.flatnonzero(offset)[0])
    direction = float(offset[axis])
    i, j = tuple(idx_i), tuple(idx_j)
    v_tilde = f.vel if v_tilde is None else v_tilde
    n_int = f.n_int if n_int is None else n_int

    u = 0.5 * (v_bar[(axis,) + i] + v_bar[(axis,) + j]) * direction
    open_fraction = min(f.pv[i], f.pv[j])
    mass, momentum, energy = face_flux(
        u, open_fraction,
        f.rho[i], f.rho[j],
        v_tilde[(slice(None),) + i], v_tilde[(slice(None),) + j],
        n_int[i], n_int[j],
        dt, grid.h,
    )
    return FaceFlux(mass=float(mass), momentum=np.asarray(momentum, dtype=np.float64), energy=float(energy))


def _face_pair(padded: np.ndarray, axis: int, shape: Tuple[int, int, int]):
    """相邻体素对 (左, 右) 视图，沿 axis 共 n+1 个面 (含窗口两侧的幽灵面)"""
    lead = padded.ndim - 3
    left = [slice(None)] * lead + [slice(1, n + 1) for n in shape]
    right = list(left)
    left[lead + axis] = slice(0, shape[axis] + 1)
    right[lead + axis] = slice(1, shape[axis] + 2)
    return padded[tuple(left)], padded[tuple(right)]


def _axis_fluxes(window: Window, nc: NonConvectiveResult, ctx: StepContext):
    """
    三个方向的面通量，每个面只计算一次

    Returns:
        每个方向一个 (质量, 动量, 内能, 动能) 元组，动能按供体的 ½|ṽ|² 随质量输运
    """
    st = window.stencil
    amb = window.ambient
    rho_pad = st.pad(window.rho, amb.rho)
    n_pad = st.pad(nc.n_int, amb.n_int)
    vt_pad = st.pad_vec(nc.v_tilde)
    vb_pad = st.pad_vec(nc.v_bar)
    ke_pad = 0.5 * np.sum(vt_pad * vt_pad, axis=0)
    pv_pad = st.pv_pad
    slabs = ctx.slabs()

    fluxes = []
    for axis in range(3):
        rho_l, rho_r = _face_pair(rho_pad, axis, window.shape)
        n_l, n_r = _face_pair(n_pad, axis, window.shape)
        vt_l, vt_r = _face_pair(vt_pad, axis, window.shape)
        vb_l, vb_r = _face_pair(vb_pad, axis, window.shape)
        pv_l, pv_r = _face_pair(pv_pad, axis, window.shape)
        ke_l, ke_r = _face_pair(ke_pad, axis, window.shape)

        face_shape = rho_l.shape
        mass = np.empty(face_shape)
        momentum = np.empty((3,) + face_shape)
        energy = np.empty(face_shape)
        kinetic = np.empty(face_shape)

        def stage_faces(rows: slice):
            u = 0.5 * (vb_l[axis, rows] + vb_r[axis, rows])
            m, p, e = face_flux(
                u, np.minimum(pv_l[rows], pv_r[rows]),
                rho_l[rows], rho_r[rows],
                vt_l[:, rows], vt_r[:, rows],
                n_l[rows], n_r[rows],
                ctx.dt, st.h,
            )
            mass[rows] = m
            momentum[:, rows] = p
            energy[rows] = e
            kinetic[rows] = m * np.where(u > 0.0, ke_l[rows], ke_r[rows])

        slabs.map_rows(stage_faces, face_shape[0])
        fluxes.append((mass, momentum, energy, kinetic))
    return fluxes


def _gather(face: np.ndarray, axis: int, rows: slice) -> np.ndarray:
    """体素的净流入 = 左面通量 − 右面通量"""
    lead = face.ndim - 3
    n = face.shape[lead + axis] - 1
    left = [slice(None)] * face.ndim
    right = [slice(None)] * face.ndim
    left[lead + axis] = slice(0, n)
    right[lead + axis] = slice(1, n + 1)
    inflow = face[tuple(left)] - face[tuple(right)]
    return inflow[(slice(None),) * lead + (rows,)]


def _deposit_residual(
    cells: np.ndarray,
    residual: np.ndarray,
    mass_faces: Sequence[np.ndarray],
    q_new: np.ndarray,
    n_new: np.ndarray,
    receivers: np.ndarray,
) -> int:
    """
    把清空体素剩余的能量 (含流入动量的动能) 按流出质量分给受体邻居

    Args:
        cells: 被清空的体素掩码 (窗口坐标)
        residual: 每个体素剩余的 Q'·E (J/m³)
        mass_faces: 三个方向的面质量通量
        q_new: 新质量 ρ'·pv
        n_new: 新内能，原地累加
        receivers: 可以接收能量的体素

    Returns:
        没有受体、能量未能放置的体素数
    """
    shape = q_new.shape
    unplaced = 0
    for cell in map(tuple, np.argwhere(cells)):
        if residual[cell] == 0.0:
            continue
        shares = []
        for axis in range(3):
            faces = mass_faces[axis]
            for side in (-1, 1):
                face = list(cell)
                face[axis] += 1 if side > 0 else 0
                outflow = side * faces[tuple(face)]
                nbr = list(cell)
                nbr[axis] += side
                nbr = tuple(nbr)
                if outflow > 0.0 and 0 <= nbr[axis] < shape[axis] and receivers[nbr]:
                    shares.append((nbr, outflow))
        total = sum(outflow for _, outflow in shares)
        if total <= 0.0:
            unplaced += 1
            continue
        for nbr, outflow in shares:
            n_new[nbr] += residual[cell] * (outflow / total) / q_new[nbr]
    return unplaced


def step_convective(grid: FluidGrid, ctx: StepContext, nc: NonConvectiveResult) -> FluidGrid:
    """
    对流阶段 (步骤 4-6) 并交换缓冲区

    新质量 Q' = Q + Σ面通量，动量与总能随质量输运后除以 Q'
    (等价于按 ρ_t/ρ_{t+Δt} 缩放)，新内能为总能减去新动能。
    Q' ≤ 0 的体素清空并计数，其剩余能量 (含流入动量的动能)
    作为内能交给接收它流出质量的邻居。

    Args:
        grid: 流体网格
        ctx: 步进上下文
        nc: step_non_convective 的结果

    Returns:
        交换缓冲区后的同一网格
    """
    grid.begin_write()
    active = ctx.active if ctx.active is not None else np.zeros(grid.dims, dtype=bool)
    window = nc.window

    if window is not None:
        fluxes = _axis_fluxes(window, nc, ctx)
        shape = window.shape
        rho_new = np.empty(shape)
        vel_new = np.empty((3,) + shape)
        n_new = np.empty(shape)
        q_cells = np.empty(shape)
        residual = np.empty(shape)
        emptied = np.zeros(shape, dtype=bool)
        stranded = np.zeros(shape, dtype=bool)

        def stage_cells(rows: slice):
            pv = window.pv[rows]
            rho = window.rho[rows]
            vt = nc.v_tilde[:, rows]
            d_mass = sum(_gather(fluxes[a][0], a, rows) for a in range(3))
            d_mom = sum(_gather(fluxes[a][1], a, rows) for a in range(3))
            d_total = sum(_gather(fluxes[a][2] + fluxes[a][3], a, rows) for a in range(3))

            q = rho * pv
            q_new = q + d_mass
            empty = q_new <= 0.0
            q_safe = np.where(empty, 1.0, q_new)
            pv_safe = np.where(pv > 0.0, pv, 1.0)
            e_old = nc.n_int[rows] + 0.5 * np.sum(vt * vt, axis=0)

            vel = vt + (d_mom - vt * d_mass) / q_safe
            e_new = e_old + (d_total - e_old * d_mass) / q_safe
            rho_new[rows] = np.where(empty, 0.0, np.maximum(rho + d_mass / pv_safe, 0.0))
            vel_new[:, rows] = np.where(empty, 0.0, vel)
            n_new[rows] = np.where(empty, 0.0, e_new - 0.5 * np.sum(vel * vel, axis=0))
            q_cells[rows] = q_new
            residual[rows] = np.where(empty, q * e_old + d_total, 0.0)
            emptied[rows] = empty
            stranded[rows] = empty & np.any(d_mom != 0.0, axis=0)

        ctx.slabs().map_rows(stage_cells, shape[0])

        mask = window.mask
        lost_cells = emptied & mask
        lost = int(np.count_nonzero(lost_cells))
        if lost:
            unplaced = _deposit_residual(
                lost_cells, residual, [f[0] for f in fluxes], q_cells, n_new, mask & ~emptied
            )
            ctx.diagnostics.mass_clamps += lost
            ctx.diagnostics.stranded_momentum += int(np.count_nonzero(stranded & mask))
            logger.debug(f"新质量非正，清空 {lost} 个体素 ({unplaced} 个没有受体)")

        negative = (n_new < 0.0) & mask
        if negative.any():
            ctx.diagnostics.energy_clamps += int(np.count_nonzero(negative))
            n_new[negative] = 0.0

        w = grid.write
        index = window.index
        w.rho[index][mask] = rho_new[mask]
        w.n_int[index][mask] = n_new[mask]
        for a in range(3):
            w.vel[(a,) + index][mask] = vel_new[a][mask]
        w.sync(ctx.consts, mask=active)

    apply_flags(grid.write, active, ctx.boundary)
    grid.swap()
    return grid


def check_cfl(grid: FluidGrid, ctx: StepContext) -> float:
    """
    计算 max(|v| + c)·Δt/h 并在超过 1 时警告

    Returns:
        活跃集上的 CFL 数
    """
    if ctx.active is None or not ctx.active.any():
        return 0.0
    f = grid.read
    mask = ctx.active
    speed = np.sqrt(np.sum(f.vel[:, mask] ** 2, axis=0))
    cfl = float(np.max(speed + sound_speed(f.temp[mask], ctx.consts)) * ctx.dt / grid.h)
    diag = ctx.diagnostics
    diag.max_cfl = max(diag.max_cfl, cfl)
    if cfl > 1.0:
        diag.cfl_violations += 1
        if diag.cfl_violations == 1 or diag.cfl_violations % CFL_WARN_EVERY == 0:
            logger.warning(
                f"CFL 数 {cfl:.3f} > 1 (第 {diag.steps} 步, 累计 {diag.cfl_violations} 次)，时间步长可能过大"
            )
    return cfl


def update_diagnostics(grid: FluidGrid, ctx: StepContext):
    """刷新最大速度、最大压力与活跃体素数"""
    diag = ctx.diagnostics
    mask = ctx.active
    if mask is None or not mask.any():
        diag.active_cells = 0
        return
    f = grid.read
    diag.active_cells = int(np.count_nonzero(mask))
    speed = np.sqrt(np.sum(f.vel[:, mask] ** 2, axis=0))
    diag.max_speed = float(np.max(speed))
    diag.max_pressure = float(np.max(f.pres[mask]))


def step(grid: FluidGrid, ctx: StepContext) -> FluidGrid:
    """
    完整的一个时间步: 活跃集 → 非对流 → 对流 → 状态方程，缓冲区恰好交换一次

    Args:
        grid: 流体网格
        ctx: 步进上下文

    Returns:
        同一网格 (read 缓冲区为新状态)
    """
    ctx.active = update_active_set(grid, ctx.boundary, ctx.force_active)
    check_cfl(grid, ctx)
    nc = step_non_convective(grid, ctx)
    step_convective(grid, ctx, nc)
    ctx.diagnostics.steps += 1
    update_diagnostics(grid, ctx)
    return grid
