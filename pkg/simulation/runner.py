"""
模拟驱动 - 流固耦合主循环、快照与续算

每一步的顺序:
1. 流体载荷作用到刚体 (受力场按间隔导出)
2. 位移超过阈值的运动物体重新体素化，安排内部部分体积的变化
3. 部分体积排空 (绝热压缩/膨胀)
4. 流体积分一步
5. 数值检查
6. 点火条件
7. 示踪粒子与粉尘
8. 冲击波离开自由边界后切换到慢速时间步
"""

import json
import logging
import os
import time as wallclock
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage

from effects.dust import DustCloud, advect_dust, spawn_dust, surface_sources
from effects.tracers import TracerSet, advect_tracers, sample_flow, seed_tracers
from fluid.boundary import FREE, BoundarySpec
from fluid.grid import FluidGrid, init_ambient, total_energy, total_mass
from fluid.integrator import StepContext, StepDiagnostics
from fluid.integrator import step as fluid_step
from fluid.parallel import WORKERS_ENV, SlabExecutor, deterministic_mode
from solids.charge import ignite_charge, trigger_satisfied
from solids.coupling import apply_fluid_forces, compute_body_load
from solids.displacement import (
    DisplacementState,
    apply_displacement,
    publish_volumes,
    schedule_displacement,
)
from solids.force_export import ForceRecorder
from solids.mesh import TriangleMesh
from solids.rigid_body import RigidBody
from solids.voxelizer import free_fraction, occupancy

from .scenario import Scenario, ScenarioError, load_raw, save_raw
from .snapshot import (
    Snapshot,
    SnapshotError,
    field_ranges,
    grid_arrays,
    read_snapshot,
    snapshot_name,
    snapshot_paths,
    write_snapshot,
)

logger = logging.getLogger(__name__)

SCENARIO_FILE = "scenario.json"
SUMMARY_FILE = "run.json"

# 运动物体周围强制活跃的体素层数
FORCE_ACTIVE_WIDTH = 2

NUMERIC_FIELDS = ("rho", "vel", "n_int", "temp", "pres")
DISPLACEMENT_ARRAYS = ("v_inst", "v_int", "target", "rate")


class NumericalAbort(RuntimeError):
    """流体状态出现 NaN/Inf"""

    def __init__(self, step: int, time: float, field: str, index: Sequence[int]):
        self.step = int(step)
        self.time = float(time)
        self.field = field
        self.index = tuple(int(i) for i in index)
        super().__init__(
            f"non-finite {field} at voxel {self.index} after step {self.step} (t={self.time:.6g} s)"
        )


@dataclass
class RegimeState:
    """时间步长状态: 冲击波离开自由边界后切换为慢速步长"""
    slow: bool = False
    wave_seen: bool = False
    quiet: int = 0
    switch_step: Optional[int] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "RegimeState":
        return cls(
            slow=bool(data.get("slow", False)),
            wave_seen=bool(data.get("wave_seen", False)),
            quiet=int(data.get("quiet", 0)),
            switch_step=data.get("switch_step"),
        )


def check_finite(grid: FluidGrid, step: int, time: float):
    """
    检查 read 缓冲区

    Raises:
        NumericalAbort: 第一个非有限值所在的字段与体素
    """
    f = grid.read
    for name in NUMERIC_FIELDS:
        bad = ~np.isfinite(getattr(f, name))
        if bad.any():
            index = np.argwhere(bad)[0]
            if name == "vel":
                index = index[1:]
            raise NumericalAbort(step, time, name, index)


def boundary_overpressure(grid: FluidGrid, boundary: BoundarySpec) -> float:
    """自由边界面上流体体素的最大 |P − P_amb|，没有自由面时为 0"""
    f = grid.read
    peak = 0.0
    for axis in range(3):
        for side, index in ((0, 0), (1, -1)):
            if boundary.face(axis, side) != FREE:
                continue
            sl = [slice(None)] * 3
            sl[axis] = index
            sl = tuple(sl)
            fluid = f.pv[sl] > 0.0
            if fluid.any():
                over = np.abs(f.pres[sl][fluid] - grid.ambient.pres)
                peak = max(peak, float(over.max()))
    return peak


def choose_workers(explicit: Optional[int], scenario: Scenario, user_default: Optional[int] = None) -> Optional[int]:
    """
    线程数优先级: 显式参数 > BLASTSIM_WORKERS > 场景文件 > 用户设置 > CPU 核数

    返回 None 时由 resolve_workers 读取环境变量或 CPU 核数
    """
    if explicit is not None:
        return explicit
    if os.environ.get(WORKERS_ENV):
        return None
    if scenario.run.workers is not None:
        return scenario.run.workers
    return user_default


def build_bodies(scenario: Scenario, h: float) -> List[RigidBody]:
    """场景中的物体 → 刚体 (受力网格细分到体素宽度以下)"""
    bodies = []
    for cfg in scenario.bodies:
        density = cfg.density
        if cfg.mass is None and density is None:
            density = 1000.0
        body = RigidBody.from_world_mesh(
            cfg.name, cfg.mesh, mass=cfg.mass, density=density,
            movable=cfg.movable, velocity=cfg.velocity,
        )
        body.prepare_force_mesh(h, cfg.refine)
        bodies.append(body)
    return bodies


class Simulation:
    """
    一次模拟运行

    output_dir 为 None 时不写任何文件 (测试与交互使用)
    """

    def __init__(
        self,
        scenario: Scenario,
        output_dir=None,
        workers: Optional[int] = None,
        restore: Optional[Snapshot] = None,
        default_workers: Optional[int] = None,
    ):
        if deterministic_mode() and "seed" not in scenario.raw.get("run", {}):
            raise ScenarioError(["run/seed: deterministic mode requires an explicit seed"])

        self.scenario = scenario
        self.consts = scenario.constants
        self.boundary = scenario.boundary
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.executor = SlabExecutor(choose_workers(workers, scenario, default_workers))
        self.rng = np.random.default_rng(scenario.run.seed)

        self.bodies = build_bodies(scenario, scenario.grid.h)
        self.charges = [c.to_charge() for c in scenario.charges]
        self.tracers = TracerSet.empty()
        self.dust = DustCloud.empty()
        self.regime = RegimeState()
        self.time = 0.0
        self.step_count = 0
        self.dt = scenario.time.dt
        self.ctx = StepContext(self.dt, self.consts, self.boundary, executor=self.executor)

        self.on_snapshot: Optional[Callable[[Path], None]] = None
        self.snapshots_written: List[Path] = []
        self._sources: Optional[np.ndarray] = None
        self._force_active: Optional[np.ndarray] = None
        self._recorder: Optional[ForceRecorder] = None
        self._writer: Optional[ThreadPoolExecutor] = None
        self._pending: List[Future] = []
        self._last_snapshot: Optional[int] = None
        self._opened_before = False
        self._resumed = restore is not None

        if restore is None:
            self._initialize()
        else:
            self._restore(restore)

    # ========== 初始化与续算 ==========

    def _initialize(self):
        sc = self.scenario
        g, amb = sc.grid, sc.ambient
        self.grid = FluidGrid(g.dims, g.h, g.origin, amb.pressure, amb.temperature, self.consts)
        init_ambient(self.grid, amb.pressure, amb.temperature, self.consts)

        for body in self.bodies:
            body.mark_voxelized(occupancy(body.world_mesh(), self.grid, sc.run.samples))
        self.displacement = DisplacementState.from_free_fraction(self._free_fraction())
        publish_volumes(self.grid, self.displacement)

        self._check_triggers()
        if sc.tracers.count > 0:
            self.tracers = seed_tracers(self._tracer_mesh(), sc.tracers.count, self.rng)
            _, self.tracers.temperature = sample_flow(self.grid, self.tracers.positions)
        logger.info(
            f"模拟已初始化: {g.dims} 体素, {len(self.bodies)} 个物体, "
            f"{len(self.charges)} 个装药, {len(self.tracers)} 个示踪粒子"
        )

    def _restore(self, snap: Snapshot):
        sc = self.scenario
        if tuple(snap.dims) != tuple(sc.grid.dims) or snap.h != sc.grid.h:
            raise SnapshotError(
                f"snapshot grid {snap.dims} h={snap.h} does not match scenario grid "
                f"{sc.grid.dims} h={sc.grid.h}"
            )
        state = snap.state
        arrays = snap.arrays
        self.grid = snap.to_grid()
        self.time = snap.time
        self.step_count = snap.step
        self._last_snapshot = snap.step
        self.dt = float(state["dt"])
        self.ctx.dt = self.dt
        self.regime = RegimeState.from_dict(state["regime"])
        self.ctx.diagnostics = StepDiagnostics.from_dict(state["diagnostics"])

        for body in self.bodies:
            body.load_state(state["bodies"][body.name])
            mesh = body.mesh.transformed(body.voxel_orientation, body.voxel_position)
            body.occupancy = occupancy(mesh, self.grid, sc.run.samples)

        self.displacement = DisplacementState(
            *(arrays[f"displacement.{name}"] for name in DISPLACEMENT_ARRAYS),
            counters={k: int(v) for k, v in state["displacement"].items()},
        )
        for charge in self.charges:
            saved = state["charges"][charge.name]
            charge.ignited = bool(saved["ignited"])
            charge.ignition_time = saved["ignition_time"]

        self.tracers = TracerSet.from_arrays(self._prefixed(arrays, "tracers."))
        self.dust = DustCloud.from_arrays(self._prefixed(arrays, "dust."))
        self.rng.bit_generator.state = state["rng"]
        logger.info(f"从快照续算: 第 {self.step_count} 步, t={self.time:.6g} s")

    @staticmethod
    def _prefixed(arrays: Dict[str, np.ndarray], prefix: str) -> Dict[str, np.ndarray]:
        return {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}

    @classmethod
    def resume(
        cls,
        run_dir,
        snapshot=None,
        overrides: Sequence[str] = (),
        workers: Optional[int] = None,
        default_workers: Optional[int] = None,
    ) -> "Simulation":
        """
        从运行目录续算

        Args:
            run_dir: 之前的输出目录 (含 scenario.json 与快照)
            snapshot: 指定快照文件，默认取步数最大的一个
            overrides: 场景覆盖项 (例如延长 time/t_total)
            workers: 工作线程数

        Raises:
            FileNotFoundError: 目录中没有 scenario.json
            SnapshotError: 没有可用快照或快照与场景不符
        """
        run_dir = Path(run_dir)
        scenario_path = run_dir / SCENARIO_FILE
        if not scenario_path.exists():
            raise FileNotFoundError(f"{run_dir}: missing {SCENARIO_FILE}, not a run directory")
        scenario = load_raw(scenario_path, overrides)
        if snapshot is None:
            paths = snapshot_paths(run_dir)
            if not paths:
                raise SnapshotError(f"{run_dir}: no snapshots to resume from")
            snapshot = paths[-1]
        return cls(
            scenario, output_dir=run_dir, workers=workers,
            restore=read_snapshot(snapshot), default_workers=default_workers,
        )

    # ========== 几何辅助 ==========

    def _free_fraction(self) -> np.ndarray:
        return free_fraction(
            [b.occupancy for b in self.bodies], self.grid.dims, self.scenario.run.zero_threshold
        )

    def _tracer_mesh(self) -> TriangleMesh:
        wanted = self.scenario.tracers.charge
        for charge in self.charges:
            if not wanted or charge.name == wanted:
                return charge.mesh
        raise ScenarioError([f"tracers/charge: no charge named '{wanted}'"])

    def _force_active_mask(self) -> Optional[np.ndarray]:
        """运动物体周围的体素保持活跃"""
        movable = [b for b in self.bodies if b.movable]
        if not movable:
            return None
        if self._force_active is None:
            mask = np.zeros(self.grid.dims, dtype=bool)
            structure = np.ones((3, 3, 3), dtype=bool)
            for body in movable:
                solid = body.occupancy > 0.0
                if solid.any():
                    mask |= ndimage.binary_dilation(solid, structure=structure, iterations=FORCE_ACTIVE_WIDTH)
            self._force_active = mask
        return self._force_active

    # ========== 单步 ==========

    def step(self):
        """推进一个耦合步"""
        grid, consts, dt = self.grid, self.consts, self.dt

        record = self._recorder is not None and self._recorder.due(self.step_count)
        for body in self.bodies:
            if not (body.movable or record):
                continue
            load = compute_body_load(grid, body)
            if record:
                self._recorder.record(body.name, self.time, load.forces)
            apply_fluid_forces(grid, body, dt, consts.gravity, load)

        self._revoxelize()
        if self.displacement.busy and apply_displacement(grid, self.displacement, dt, consts):
            self._sources = None

        self.ctx.force_active = self._force_active_mask()
        fluid_step(grid, self.ctx)
        self.step_count += 1
        self.time += dt
        check_finite(grid, self.step_count, self.time)

        self._check_triggers()
        self._advance_particles(dt)
        self._update_regime()

    def _revoxelize(self):
        run = self.scenario.run
        moved = False
        for body in self.bodies:
            if not body.movable or not body.needs_revoxelize(self.grid.h, run.revoxelize_fraction):
                continue
            body.mark_voxelized(occupancy(body.world_mesh(), self.grid, run.samples))
            schedule_displacement(self.grid, self.displacement, self._free_fraction(), body.velocity, self.consts)
            moved = True
        if moved:
            self._sources = None
            self._force_active = None

    def _check_triggers(self):
        for charge in self.charges:
            if trigger_satisfied(charge, self.grid, self.time):
                ignite_charge(self.grid, charge, self.consts, self.time)

    def _advance_particles(self, dt: float):
        if len(self.tracers):
            advect_tracers(self.tracers, self.grid, dt)
        cfg = self.scenario.dust
        if len(self.dust):
            advect_dust(self.dust, self.grid, dt, self.consts, cfg.particle_density)
        if cfg.rate > 0.0:
            if self._sources is None:
                self._sources = surface_sources(self.grid, self.boundary)
            born = spawn_dust(self.grid, self._sources, cfg, dt, self.rng)
            if len(born):
                self.dust.extend(born)

    def _update_regime(self):
        reg = self.regime
        if reg.slow or not self.boundary.has_free_faces:
            return
        if not all(c.ignited for c in self.charges):
            return
        if boundary_overpressure(self.grid, self.boundary) > self.boundary.prune_threshold:
            reg.wave_seen = True
            reg.quiet = 0
            return
        if not reg.wave_seen:
            return
        reg.quiet += 1
        if reg.quiet >= self.scenario.time.quiet_steps:
            reg.slow = True
            reg.switch_step = self.step_count
            self.dt = self.scenario.time.slow_dt
            self.ctx.dt = self.dt
            logger.info(
                f"冲击波已离开计算域 (第 {self.step_count} 步, t={self.time:.6g} s)，"
                f"时间步长切换为 {self.dt:.4g} s"
            )

    # ========== 快照 ==========

    def snapshot(self) -> Snapshot:
        """当前状态的独立副本"""
        arrays = grid_arrays(self.grid.read)
        header = {
            "format": "blastsim-snapshot",
            "scenario": self.scenario.name,
            "dims": list(self.grid.dims),
            "h": self.grid.h,
            "origin": self.grid.origin.tolist(),
            "time": self.time,
            "step": self.step_count,
            "ambient": {
                "pressure": self.grid.ambient_p,
                "temperature": self.grid.ambient_t,
                "pres": self.grid.ambient.pres,
            },
            "constants": self.consts.to_dict(),
            "fields": list(arrays),
            "ranges": field_ranges(arrays),
            "state": {
                "dt": self.dt,
                "regime": self.regime.to_dict(),
                "diagnostics": self.ctx.diagnostics.to_dict(),
                "bodies": {b.name: b.state_dict() for b in self.bodies},
                "charges": {
                    c.name: {"ignited": c.ignited, "ignition_time": c.ignition_time}
                    for c in self.charges
                },
                "displacement": dict(self.displacement.counters),
                "rng": self.rng.bit_generator.state,
            },
        }
        for name in DISPLACEMENT_ARRAYS:
            arrays[f"displacement.{name}"] = getattr(self.displacement, name).copy()
        for name, value in self.tracers.arrays().items():
            arrays[f"tracers.{name}"] = value.copy()
        for name, value in self.dust.arrays().items():
            arrays[f"dust.{name}"] = value.copy()
        return Snapshot(header=header, arrays=arrays)

    def write_snapshot(self) -> Path:
        """
        写出当前步的快照

        非确定性模式下由后台线程写入 (数据已是独立副本)
        """
        if self.output_dir is None:
            raise RuntimeError("simulation has no output directory")
        path = self.output_dir / snapshot_name(self.step_count)
        snap = self.snapshot()
        compress = self.scenario.output.compress
        if self._writer is None:
            write_snapshot(path, snap, compress)
            self._snapshot_done(path)
        else:
            self._pending.append(self._writer.submit(self._write_in_background, path, snap, compress))
        self._last_snapshot = self.step_count
        return path

    def _write_in_background(self, path: Path, snap: Snapshot, compress: bool):
        # 完成通知在任务内部发出，flush 返回时已全部送达
        write_snapshot(path, snap, compress)
        self._snapshot_done(path)

    def _snapshot_done(self, path: Path):
        self.snapshots_written.append(path)
        logger.debug(f"快照已写入: {path}")
        if self.on_snapshot is not None:
            self.on_snapshot(path)

    def _flush_snapshots(self):
        pending, self._pending = self._pending, []
        for future in pending:
            future.result()

    # ========== 运行 ==========

    def statistics(self) -> dict:
        diag = self.ctx.diagnostics
        return {
            "step": self.step_count,
            "time": self.time,
            "dt": self.dt,
            "slow": self.regime.slow,
            "active_cells": diag.active_cells,
            "max_pressure": diag.max_pressure,
            "max_speed": diag.max_speed,
            "max_cfl": diag.max_cfl,
            "mass": total_mass(self.grid),
            "energy": total_energy(self.grid),
            "ignited": sum(c.ignited for c in self.charges),
            "tracers": len(self.tracers),
            "dust": len(self.dust),
        }

    def _open_output(self):
        if self.output_dir is None:
            return
        self.output_dir.mkdir(parents=True, exist_ok=True)
        append = self._resumed or self._opened_before
        if not append:
            save_raw(self.scenario, self.output_dir / SCENARIO_FILE)
        self._recorder = ForceRecorder(self.output_dir, every=self.scenario.output.force_every)
        for body in self.bodies:
            self._recorder.open(body.name, body.force_mesh.triangle_count, append=append)
        if not deterministic_mode():
            self._writer = ThreadPoolExecutor(max_workers=1, thread_name_prefix="snapshot")
        self._opened_before = True

    def _close_output(self):
        try:
            self._flush_snapshots()
        finally:
            if self._writer is not None:
                self._writer.shutdown(wait=True)
                self._writer = None
            if self._recorder is not None:
                self._recorder.close()
                self._recorder = None

    def _finished(self, end_time: float, target_step: Optional[int]) -> bool:
        if target_step is not None and self.step_count >= target_step:
            return True
        return self.time >= end_time - 1e-6 * self.dt

    def run(
        self,
        steps: Optional[int] = None,
        until: Optional[float] = None,
        progress: Optional[Callable[[dict], None]] = None,
        should_stop: Optional[Callable[[], bool]] = None,
    ) -> dict:
        """
        运行到 until (默认 t_total) 或再走 steps 步，先到者为准

        Args:
            steps: 最多再走的步数
            until: 结束时间 (s)
            progress: 每步之后调用，参数为 statistics()
            should_stop: 返回 True 时提前结束 (仍写最终快照)

        Returns:
            运行摘要 (同时写入 run.json)

        Raises:
            NumericalAbort: 出现 NaN/Inf
        """
        end_time = self.scenario.time.t_total if until is None else float(until)
        target_step = None if steps is None else self.step_count + int(steps)
        every = self.scenario.output.snapshot_every
        start_step = self.step_count
        started = wallclock.perf_counter()

        self._open_output()
        try:
            if self.output_dir is not None and not self._resumed and self.step_count == 0:
                self.write_snapshot()
            while not self._finished(end_time, target_step):
                if should_stop is not None and should_stop():
                    logger.info(f"运行在第 {self.step_count} 步被请求停止")
                    break
                self.step()
                if self.output_dir is not None and self.step_count % every == 0:
                    self.write_snapshot()
                if progress is not None:
                    progress(self.statistics())
            if self.output_dir is not None and self._last_snapshot != self.step_count:
                self.write_snapshot()
        finally:
            self._close_output()

        summary = self.summary(self.step_count - start_step, wallclock.perf_counter() - started)
        if self.output_dir is not None:
            (self.output_dir / SUMMARY_FILE).write_text(json.dumps(summary, indent=2), encoding="utf-8")
        logger.info(
            f"运行结束: {summary['steps_run']} 步, t={self.time:.6g} s, 耗时 {summary['wall_time']:.2f} s"
        )
        return summary

    def summary(self, steps_run: int, wall_time: float) -> dict:
        stats = self.statistics()
        stats.update({
            "scenario": self.scenario.name,
            "steps_run": int(steps_run),
            "wall_time": float(wall_time),
            "regime": self.regime.to_dict(),
            "diagnostics": self.ctx.diagnostics.to_dict(),
            "displacement": dict(self.displacement.counters),
            "charges": {c.name: c.ignition_time for c in self.charges},
            "bodies": {b.name: b.state_dict() for b in self.bodies},
            "snapshots": [p.name for p in self.snapshots_written],
        })
        return stats

    def close(self):
        self._close_output()
        self.executor.shutdown()
