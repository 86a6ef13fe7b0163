"""
两阶段显式积分器

激波管对照解见 riemann.py；守恒、对称、剪枝与线程数无关性在小网格上验证
"""

import time

import numpy as np
import pytest

from fluid.boundary import HARD, BoundarySpec
from fluid.constants import ATM, PhysicalConstants
from fluid.grid import FluidGrid, sound_speed, total_energy, total_mass
from fluid.integrator import (
    NonConvectiveResult,
    StepContext,
    StepDiagnostics,
    donor_acceptor_flux,
    extract_window,
    non_convective_acceleration,
    step,
    step_convective,
    step_non_convective,
)
from fluid.parallel import SlabExecutor
from helpers import centered_ball, closed_box, make_grid, set_region
from riemann import GasState, exact_profile, shock_position, star_state


def _run(grid: FluidGrid, ctx: StepContext, steps: int) -> FluidGrid:
    for _ in range(steps):
        step(grid, ctx)
    return grid


# ---------------------------------------------------------------- 非对流加速度

def test_uniform_field_has_no_acceleration(small_grid, consts):
    accel = non_convective_acceleration(small_grid, (5, 5, 5), consts)
    np.testing.assert_array_equal(accel, 0.0)


def test_pressure_gradient_acceleration(consts):
    grid = make_grid((5, 5, 5), 1.0, consts)
    f = grid.read
    f.rho[...] = 1.2
    f.pres[1, 2, 2] = ATM - 100.0
    f.pres[3, 2, 2] = ATM + 100.0
    accel = non_convective_acceleration(grid, (2, 2, 2), consts)
    assert accel[0] == pytest.approx(-200.0 / 2.0 / 1.2)
    assert accel[1] == 0.0 and accel[2] == 0.0


def test_absolute_gravity_accelerates_uniform_air():
    consts = PhysicalConstants(hydrostatic=False)
    grid = make_grid((5, 5, 5), 1.0, consts)
    accel = non_convective_acceleration(grid, (2, 2, 2), consts)
    np.testing.assert_allclose(accel, (0.0, 0.0, -9.81))


def test_hydrostatic_gravity_keeps_ambient_at_rest():
    consts = PhysicalConstants()
    grid = make_grid((6, 6, 6), 1.0, consts)
    ctx = StepContext(dt=1e-3, consts=consts, boundary=BoundarySpec(prune_enabled=False))
    _run(grid, ctx, 5)
    np.testing.assert_array_equal(grid.read.vel, 0.0)
    np.testing.assert_array_equal(grid.read.pres, grid.ambient.pres)


def test_hot_gas_rises_under_hydrostatic_gravity():
    consts = PhysicalConstants()
    grid = make_grid((6, 6, 6), 1.0, consts)
    hot = np.zeros(grid.dims, dtype=bool)
    hot[2:4, 2:4, 2:4] = True
    # 等压加热: 密度降低，压力不变
    set_region(grid, hot, ATM, 600.0, consts)
    accel = non_convective_acceleration(grid, (2, 2, 2), consts)
    assert accel[2] > 0.0


def test_empty_cell_has_zero_acceleration(small_grid, consts):
    small_grid.read.rho[5, 5, 5] = 0.0
    small_grid.read.pres[6, 5, 5] = 2.0 * ATM
    np.testing.assert_array_equal(non_convective_acceleration(small_grid, (5, 5, 5), consts), 0.0)


def test_compression_heats(consts):
    grid = make_grid((7, 3, 3), 1.0, consts)
    # 1D 压缩: v_x = −c·x
    x = np.arange(7, dtype=np.float64) - 3.0
    grid.read.vel[0] = (-10.0 * x)[:, None, None]
    spec = BoundarySpec(faces={"y_min": HARD, "y_max": HARD, "z_min": HARD, "z_max": HARD}, prune_enabled=False)
    ctx = StepContext(dt=1e-4, consts=consts, boundary=spec)
    nc = step_non_convective(grid, ctx)
    assert nc.n_int[3, 1, 1] > grid.read.n_int[3, 1, 1]


# ---------------------------------------------------------------- 供体-受体通量

def test_donor_is_upwind_cell(consts):
    grid = make_grid((4, 1, 1), 1.0, consts)
    grid.read.rho[:, 0, 0] = [1.0, 2.0, 3.0, 4.0]
    v_bar = np.zeros((3, 4, 1, 1))
    v_bar[0] = 10.0
    forward = donor_acceptor_flux(grid, (1, 0, 0), (2, 0, 0), v_bar, dt=0.01)
    assert forward.mass == pytest.approx(0.01 * 10.0 * 2.0)
    v_bar[0] = -10.0
    backward = donor_acceptor_flux(grid, (1, 0, 0), (2, 0, 0), v_bar, dt=0.01)
    assert backward.mass == pytest.approx(-0.01 * 10.0 * 3.0)


def test_flux_is_antisymmetric(consts):
    grid = make_grid((4, 1, 1), 1.0, consts)
    grid.read.rho[:, 0, 0] = [1.0, 2.0, 3.0, 4.0]
    rng = np.random.default_rng(3)
    v_bar = rng.normal(size=(3, 4, 1, 1))
    ij = donor_acceptor_flux(grid, (1, 0, 0), (2, 0, 0), v_bar, dt=0.01)
    ji = donor_acceptor_flux(grid, (2, 0, 0), (1, 0, 0), v_bar, dt=0.01)
    assert ij.mass == -ji.mass
    np.testing.assert_array_equal(ij.momentum, -ji.momentum)
    assert ij.energy == -ji.energy


def test_zero_face_velocity_transfers_nothing(consts):
    grid = make_grid((2, 1, 1), 1.0, consts)
    v_bar = np.zeros((3, 2, 1, 1))
    v_bar[0, 0] = 5.0
    v_bar[0, 1] = -5.0
    flux = donor_acceptor_flux(grid, (0, 0, 0), (1, 0, 0), v_bar, dt=0.01)
    assert flux.mass == 0.0
    assert flux.energy == 0.0


def test_flux_rejects_non_neighbors(small_grid):
    with pytest.raises(ValueError, match="face neighbor"):
        donor_acceptor_flux(small_grid, (0, 0, 0), (1, 1, 0), np.zeros((3,) + small_grid.dims), dt=0.01)


def test_step_context_rejects_bad_dt(consts):
    with pytest.raises(ValueError, match="dt"):
        StepContext(dt=0.0, consts=consts)


# ---------------------------------------------------------------- 守恒与对称

def _closed_blast(consts) -> FluidGrid:
    grid = make_grid((16, 16, 16), 0.5, consts)
    set_region(grid, centered_ball(grid, 1.5), 10.0 * ATM, 1000.0, consts)
    return grid


def test_closed_box_conserves_mass(consts):
    grid = _closed_blast(consts)
    mass0 = total_mass(grid)
    ctx = StepContext(dt=5e-5, consts=consts, boundary=closed_box())
    _run(grid, ctx, 100)
    assert ctx.diagnostics.mass_clamps == 0
    assert abs(total_mass(grid) - mass0) <= 1e-9 * mass0


def test_closed_box_conserves_total_energy(consts):
    grid = _closed_blast(consts)
    energy0 = total_energy(grid)
    ctx = StepContext(dt=5e-5, consts=consts, boundary=closed_box())
    _run(grid, ctx, 100)
    assert ctx.diagnostics.energy_clamps == 0
    assert grid.read.vel.any()
    assert abs(total_energy(grid) - energy0) <= 1e-6 * energy0


def test_emptied_cell_hands_its_energy_to_the_acceptor(consts):
    grid = make_grid((5, 1, 1), 1.0, consts)
    f = grid.read
    f.rho[:, 0, 0] = [1.0, 0.001, 1.0, 1.0, 1.0]
    f.sync(consts)
    grid.write.copy_from(f)

    ctx = StepContext(dt=0.01, consts=consts, boundary=closed_box())
    ctx.active = np.ones(grid.dims, dtype=bool)
    window = extract_window(grid, ctx.active, ctx.boundary)
    v_tilde = np.zeros((3,) + grid.dims)
    v_tilde[0, :, 0, 0] = [0.0, 100.0, 400.0, 0.0, 0.0]
    nc = NonConvectiveResult(window, v_tilde, v_tilde.copy(), window.n_int.copy())
    energy0 = float(np.sum(f.rho * (f.n_int + 0.5 * np.sum(v_tilde * v_tilde, axis=0))))
    n_ambient = float(f.n_int[4, 0, 0])

    # 体素 2 流出 2.0 kg/m³，只流入 0.0025 kg/m³
    step_convective(grid, ctx, nc)
    assert grid.read.rho[2, 0, 0] == 0.0
    assert ctx.diagnostics.mass_clamps == 1
    assert ctx.diagnostics.stranded_momentum == 1
    assert ctx.diagnostics.energy_clamps == 0
    assert total_energy(grid) == pytest.approx(energy0, rel=1e-12)
    # 体素 2 的剩余能量只记到受体 3 上
    assert grid.read.n_int[4, 0, 0] == n_ambient
    assert 0.0 < grid.read.n_int[3, 0, 0] < n_ambient


def test_wall_reflects_normal_velocity(consts):
    grid = make_grid((8, 1, 1), 1.0, consts)
    grid.read.vel[0] = 50.0
    ctx = StepContext(dt=1e-4, consts=consts, boundary=closed_box())
    _run(grid, ctx, 20)
    # 气体堆积在 +x 壁面
    assert grid.read.pres[-1, 0, 0] > grid.read.pres[0, 0, 0]


def test_spherical_blast_stays_symmetric(consts):
    grid = make_grid((15, 15, 15), 0.5, consts)
    set_region(grid, centered_ball(grid, 1.6), 5.0 * ATM, 1500.0, consts)
    ctx = StepContext(dt=5e-5, consts=consts, boundary=BoundarySpec(prune_enabled=False))
    _run(grid, ctx, 30)
    pres = grid.read.pres
    scale = np.max(np.abs(pres))
    for image in (pres[::-1], pres[:, ::-1], pres[:, :, ::-1],
                  pres.transpose(1, 0, 2), pres.transpose(2, 1, 0), pres.transpose(1, 2, 0)):
        assert np.max(np.abs(image - pres)) <= 1e-6 * scale


def test_result_independent_of_worker_count(consts):
    results = []
    for workers in (1, 3):
        grid = make_grid((14, 10, 10), 0.5, consts)
        set_region(grid, centered_ball(grid, 1.2), 8.0 * ATM, 1200.0, consts)
        with SlabExecutor(workers) as pool:
            ctx = StepContext(dt=5e-5, consts=consts, boundary=BoundarySpec(), executor=pool)
            _run(grid, ctx, 12)
        results.append(grid.read)
    for name in ("rho", "n_int", "temp", "pres", "vel", "flags"):
        np.testing.assert_array_equal(getattr(results[0], name), getattr(results[1], name))


def _pruning_pair(consts, dims, steps, **spec):
    grids = []
    active = []
    for prune in (False, True):
        grid = make_grid(dims, 0.5, consts)
        set_region(grid, centered_ball(grid, 1.0), 3.0 * ATM, 600.0, consts)
        ctx = StepContext(dt=2e-4, consts=consts, boundary=BoundarySpec(prune_enabled=prune, **spec))
        step(grid, ctx)
        active.append(ctx.diagnostics.active_cells)
        _run(grid, ctx, steps - 1)
        grids.append(grid.read)
    return grids, active


def test_pruning_matches_unpruned_run(consts):
    # 阈值低于格式的前驱扰动: 被剪枝的体素在不剪枝的运行中也不变
    (full, pruned), active = _pruning_pair(
        consts, (20, 20, 20), 15, prune_threshold=1e-9, velocity_threshold=1e-12
    )
    assert active[1] < active[0]
    for name in ("pres", "rho", "n_int"):
        a, b = getattr(full, name), getattr(pruned, name)
        assert np.max(np.abs(a - b) / np.abs(a)) <= 1e-12
    assert np.max(np.abs(full.vel - pruned.vel)) <= 1e-12 * np.max(np.abs(full.vel))


def test_default_pruning_error_stays_below_threshold(consts):
    (full, pruned), active = _pruning_pair(consts, (20, 20, 20), 15)
    assert active[1] < active[0]
    threshold = BoundarySpec().prune_threshold
    assert np.max(np.abs(full.pres - pruned.pres)) <= 2.0 * threshold


def test_pruning_speeds_up_early_steps(consts):
    elapsed = []
    for prune in (False, True):
        grid = make_grid((48, 48, 48), 0.5, consts)
        set_region(grid, centered_ball(grid, 1.0), 3.0 * ATM, 600.0, consts)
        ctx = StepContext(dt=1e-4, consts=consts, boundary=BoundarySpec(prune_enabled=prune))
        start = time.perf_counter()
        _run(grid, ctx, 4)
        elapsed.append(time.perf_counter() - start)
    assert elapsed[0] >= 2.0 * elapsed[1]


def test_ambient_grid_is_fully_pruned(small_grid, consts):
    ctx = StepContext(dt=1e-3, consts=consts)
    before = small_grid.read.copy()
    step(small_grid, ctx)
    assert ctx.diagnostics.active_cells == 0
    np.testing.assert_array_equal(small_grid.read.pres, before.pres)
    np.testing.assert_array_equal(small_grid.read.rho, before.rho)


def test_cfl_violation_is_counted(consts):
    grid = make_grid((6, 6, 6), 0.01, consts)
    set_region(grid, centered_ball(grid, 0.02), 2.0 * ATM, 290.0, consts)
    ctx = StepContext(dt=1e-4, consts=consts, boundary=BoundarySpec(prune_enabled=False))
    step(grid, ctx)
    assert ctx.diagnostics.cfl_violations == 1
    assert ctx.diagnostics.max_cfl > 1.0


def test_diagnostics_round_trip():
    diag = StepDiagnostics(steps=4, energy_clamps=1, max_speed=2.5)
    assert StepDiagnostics.from_dict(diag.to_dict()) == diag


# ---------------------------------------------------------------- 激波管

def test_riemann_reference_matches_textbook_star_state():
    p_star, u_star = star_state(GasState(1.0, 0.0, 1.0), GasState(0.125, 0.0, 0.1), 1.4)
    assert p_star == pytest.approx(0.30313, abs=1e-4)
    assert u_star == pytest.approx(0.92745, abs=1e-4)


def test_sod_shock_tube_matches_exact_solution(consts):
    cells, h = 400, 0.0025
    x0, t_end, dt = 0.5, 5e-4, 1e-6
    left = GasState(1.0, 0.0, ATM)
    right = GasState(0.125, 0.0, 0.1 * ATM)

    grid = make_grid((cells, 1, 1), h, consts)
    x = (np.arange(cells) + 0.5) * h
    for mask, gas in ((x < x0, left), (x >= x0, right)):
        region = np.zeros(grid.dims, dtype=bool)
        region[mask, 0, 0] = True
        set_region(grid, region, gas.p, gas.p / (gas.rho * consts.r_gas), consts)

    ctx = StepContext(dt=dt, consts=consts, boundary=closed_box())
    _run(grid, ctx, int(round(t_end / dt)))

    rho = grid.read.rho[:, 0, 0]
    pres = grid.read.pres[:, 0, 0]
    exact_rho, _, exact_p = exact_profile(x, x0, t_end, left, right, consts.gamma)

    l1 = np.mean(np.abs(rho - exact_rho)) / np.mean(exact_rho)
    assert l1 < 0.05

    # 激波位置: 从右端向左第一个越过激波前后密度中点的体素
    shock = shock_position(x0, t_end, left, right, consts.gamma)
    post = exact_rho[np.searchsorted(x, shock) - 5]
    crossing = x[np.flatnonzero(rho > 0.5 * (post + right.rho))[-1]]
    assert abs(crossing - shock) <= 3 * h

    p_star, _ = star_state(left, right, consts.gamma)
    plateau = (exact_p == p_star)
    inner = plateau & (np.abs(x - shock) > 15 * h)
    assert np.mean(pres[inner]) == pytest.approx(p_star, rel=0.05)


# ---------------------------------------------------------------- 平面波

def _driven_channel(consts, cells: int, h: float, driver: int, pres: float, temp: float) -> FluidGrid:
    grid = make_grid((cells, 1, 1), h, consts)
    region = np.zeros(grid.dims, dtype=bool)
    region[:driver] = True
    set_region(grid, region, pres, temp, consts)
    return grid


def _pressure_history(grid: FluidGrid, ctx: StepContext, cells, steps: int) -> np.ndarray:
    """每步之后给定体素的超压 (steps, len(cells))"""
    history = np.empty((steps, len(cells)))
    for n in range(steps):
        step(grid, ctx)
        history[n] = grid.read.pres[list(cells), 0, 0] - grid.ambient.pres
    return history


def test_hard_wall_reflection_ratio(consts):
    grid = _driven_channel(consts, 200, 0.05, 40, 5.0 * ATM, 600.0)
    ctx = StepContext(dt=2e-5, consts=consts, boundary=closed_box())
    history = _pressure_history(grid, ctx, (160, 199), 1000)
    incident, wall = history[:, 0], history[:, 1]

    # 入射峰值只取激波到达壁面之前
    arrival = int(np.argmax(wall > 0.1 * ATM))
    assert 0 < arrival
    ratio = wall.max() / incident[:arrival].max()
    assert 1.8 <= ratio <= 8.0


def test_shock_reaches_near_cells_first(consts):
    grid = _driven_channel(consts, 60, 0.1, 10, 5.0 * ATM, 600.0)
    ctx = StepContext(dt=2e-5, consts=consts, boundary=closed_box())
    # 距高压区 5 与 10 个体素
    history = _pressure_history(grid, ctx, (14, 19), 300)
    risen = history > 0.1 * ATM
    assert risen[:, 0].any() and risen[:, 1].any()
    assert np.argmax(risen[:, 0]) < np.argmax(risen[:, 1])
    assert not risen[0, 1]


def _upwind_peaks(profile: np.ndarray, courant: float, cells, steps: int) -> np.ndarray:
    """一阶迎风标量输运下给定体素的峰值"""
    phi = profile.copy()
    peaks = np.zeros(len(cells))
    for _ in range(steps):
        phi[1:] -= courant * (phi[1:] - phi[:-1])
        peaks = np.maximum(peaks, phi[list(cells)])
    return peaks


def test_acoustic_pulse_decays_less_than_upwind_advection(consts):
    cells, center, width, dt = 120, 40, 3.0, 5e-4
    x = np.arange(cells, dtype=np.float64)
    bump = np.exp(-0.5 * ((x - center) / width) ** 2)
    pres = ATM + 2000.0 * bump
    # 等熵扰动，分裂为左右两个行波
    temp = 290.0 * (pres / ATM) ** ((consts.gamma - 1.0) / consts.gamma)
    grid = make_grid((cells, 1, 1), 1.0, consts)
    set_region(grid, np.ones(grid.dims, dtype=bool), pres, temp, consts)

    sites, steps = (60, 80), 320
    ctx = StepContext(dt=dt, consts=consts, boundary=closed_box())
    peaks = _pressure_history(grid, ctx, sites, steps).max(axis=0)
    assert ctx.diagnostics.energy_clamps == 0

    courant = float(sound_speed(290.0, consts)) * dt / grid.h
    reference = _upwind_peaks(bump, courant, sites, steps)
    assert peaks[1] / peaks[0] > reference[1] / reference[0]


# ---------------------------------------------------------------- 障碍与地面

def _plane_grid(consts, dims, h: float) -> FluidGrid:
    """x-z 平面网格 (y 方向一层)"""
    return make_grid((dims[0], 1, dims[1]), h, consts)


def _plane_history(grid: FluidGrid, ctx: StepContext, cells, steps: int) -> np.ndarray:
    """每步之后 x-z 平面上给定体素 (i, k) 的超压 (steps, len(cells))"""
    ix = [i for i, _ in cells]
    iz = [k for _, k in cells]
    history = np.empty((steps, len(cells)))
    for n in range(steps):
        step(grid, ctx)
        history[n] = grid.read.pres[ix, 0, iz] - grid.ambient.pres
    return history


def test_wave_crests_wall_before_reaching_ground_behind_it(consts):
    grid = _plane_grid(consts, (60, 30), 0.1)
    driver = np.zeros(grid.dims, dtype=bool)
    driver[:10] = True
    set_region(grid, driver, 5.0 * ATM, 600.0, consts)
    # 1 m 高的墙，x ∈ [2.5, 2.7) m
    grid.read.pv[25:27, :, :10] = 0.0
    grid.write.pv[25:27, :, :10] = 0.0

    ctx = StepContext(dt=2e-5, consts=consts, boundary=closed_box())
    # 墙顶上方与墙后地面
    history = _plane_history(grid, ctx, ((25, 13), (31, 0)), 600)
    risen = history > 0.1 * ATM
    assert risen[:, 0].any() and risen[:, 1].any()
    crest = int(np.argmax(risen[:, 0]))
    assert crest < int(np.argmax(risen[:, 1]))
    assert not risen[crest, 1]


def _charge_plane(consts, height_cells: int, center_z: float) -> FluidGrid:
    """80 × height_cells 的 x-z 平面，x = 2 m 处半径 0.3 m 的高压柱"""
    grid = _plane_grid(consts, (80, height_cells), 0.05)
    x, _, z = grid.cell_centers()
    ball = (x - 2.0) ** 2 + (z - center_z) ** 2 <= 0.3 ** 2
    set_region(grid, ball, 10.0 * ATM, 1500.0, consts)
    return grid


def test_ground_reflection_roughly_doubles_incident_peak(consts):
    steps = 600
    # 地面上方 1.5 m 的装药，测点在地面体素，水平偏移 0.5 m
    grounded = _charge_plane(consts, 60, 1.5)
    ctx = StepContext(dt=1e-5, consts=consts, boundary=closed_box())
    merged = _plane_history(grounded, ctx, ((50, 0),), steps).max()

    # 同样距离，但装药与测点都远离所有墙面
    free_air = _charge_plane(consts, 120, 4.5)
    ctx = StepContext(dt=1e-5, consts=consts, boundary=closed_box())
    incident = _plane_history(free_air, ctx, ((50, 60),), steps).max()

    assert incident > 0.0
    assert merged >= 1.8 * incident
