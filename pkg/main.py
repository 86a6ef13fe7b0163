#!/usr/bin/env python3
"""
BlastSim 爆炸模拟器

主入口文件

使用方法:
    python main.py run scenarios/barrier.ini --t-total 0.005
    python main.py resume output/barrier
    python main.py slice output/barrier/snap_0000100.bsnp --field pres --axis z --index 25
    python main.py render-refraction output/barrier/snap_0000100.bsnp --exaggeration 10
    python main.py render-particles output/fireball/snap_0001000.bsnp
    python main.py validate scenarios/city.ini
    python main.py probe output/barrier --index 25,25,25

退出码:
    0 成功, 1 配置错误, 2 数值异常 (NaN/Inf), 3 读写错误
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

# 确保能找到本地模块
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
from PySide6.QtCore import QCoreApplication

from effects.blackbody import BlackbodyPalette
from effects.camera import Camera
from effects.refraction import DensityVolume, RefractionConfig, render_refraction
from effects.splat import dust_colors, splat_particles
from effects.tracers import TracerSet, tracer_colors
from fluid.constants import PhysicalConstants
from simulation.runner import NumericalAbort, Simulation
from simulation.scenario import Scenario, ScenarioError, load_scenario
from simulation.snapshot import Snapshot, read_snapshot, snapshot_paths
from simulation.worker import SimulationWorker
from utils.image_saver import AXES, COLORMAPS, SLICE_FIELDS, ImageSaver
from utils.log import setup_logging
from utils.settings import get_settings

logger = logging.getLogger("blastsim")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


# ========== 参数解析 ==========

def _vector(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 components, got '{text}'")
    return values


def _index(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected i,j,k, got '{text}'")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected i,j,k, got '{text}'")
    return values


def _add_overrides(parser: argparse.ArgumentParser):
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="GROUP/KEY=VALUE",
                        help="override a scenario value (repeatable)")
    parser.add_argument("--dt", type=float, help="time step (s)")
    parser.add_argument("--t-total", type=float, help="simulated duration (s)")
    parser.add_argument("--seed", type=int, help="random seed for tracers and dust")


def _add_camera(parser: argparse.ArgumentParser):
    parser.add_argument("--camera", type=_vector, help="camera position x,y,z (default: in front of the grid)")
    parser.add_argument("--look-at", type=_vector, help="look-at point x,y,z (default: grid centre)")
    parser.add_argument("--fov", type=float, default=45.0, help="vertical field of view (degrees)")
    parser.add_argument("--width", type=int, default=320)
    parser.add_argument("--height", type=int, default=240)
    parser.add_argument("--output", help="output directory (default: next to the snapshot)")
    parser.add_argument("--name", help="output file name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blastsim", description="Voxel-grid explosion simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario")
    p.add_argument("scenario", help="scenario INI file")
    _add_overrides(p)
    p.add_argument("--output", help="run directory")
    p.add_argument("--workers", type=int, help="worker threads")
    p.add_argument("--steps", type=int, help="stop after this many steps")
    p.add_argument("--remember", action="store_true", help="store output root and workers as user defaults")

    p = sub.add_parser("resume", help="continue a run from its latest snapshot")
    p.add_argument("run_dir", help="run directory")
    p.add_argument("--snapshot", help="resume from this snapshot instead of the latest")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="GROUP/KEY=VALUE")
    p.add_argument("--t-total", type=float, help="new simulated duration (s)")
    p.add_argument("--workers", type=int)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("slice", help="export a colour-mapped slice of a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--field", default="pres", choices=SLICE_FIELDS)
    p.add_argument("--axis", default="z", choices=list(AXES))
    p.add_argument("--index", type=int, help="layer index (default: middle)")
    p.add_argument("--colormap", default="jet", choices=list(COLORMAPS))
    p.add_argument("--min", dest="vmin", type=float, help="colour scale minimum")
    p.add_argument("--max", dest="vmax", type=float, help="colour scale maximum")
    p.add_argument("--output", help="output directory (default: <run>/slices)")
    p.add_argument("--name", help="output file name")

    p = sub.add_parser("render-refraction", help="ray-march a snapshot's density field against a checkerboard")
    p.add_argument("snapshot")
    _add_camera(p)
    p.add_argument("--exaggeration", type=float, default=1.0, help="refractive index exaggeration (e.g. 10)")
    p.add_argument("--step", type=float, help="ray step (m, default h/4)")
    p.add_argument("--bend-threshold", type=float, default=1e-6)
    p.add_argument("--smoothing", type=float, default=0.0, help="density smoothing sigma (voxels)")
    p.add_argument("--cells", type=int, default=24, help="checkerboard cells per half turn")

    p = sub.add_parser("render-particles", help="splat tracers and dust from a snapshot")
    p.add_argument("snapshot")
    _add_camera(p)
    p.add_argument("--tracer-radius", type=float, help="tracer splat size (m, default h/2)")
    p.add_argument("--dust-radius", type=float, help="base dust splat size (m, default h/2)")

    p = sub.add_parser("validate", help="check a scenario file and report every problem")
    p.add_argument("scenario")
    _add_overrides(p)

    p = sub.add_parser("probe", help="print a voxel's time series across a run's snapshots")
    p.add_argument("run_dir")
    p.add_argument("--index", type=_index, required=True, help="voxel index i,j,k")
    p.add_argument("--fields", default="pres,temp,rho,speed", help="comma-separated fields")
    return parser


def scenario_overrides(args) -> List[str]:
    """简写参数 → 覆盖项 (追加在 --set 之后，优先级更高)"""
    overrides = list(args.overrides)
    if getattr(args, "dt", None) is not None:
        overrides.append(f"time/dt={args.dt!r}")
    if getattr(args, "t_total", None) is not None:
        overrides.append(f"time/t_total={args.t_total!r}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"run/seed={args.seed}")
    return overrides


# ========== 子命令 ==========

def run_worker(simulation: Simulation, steps: Optional[int]) -> dict:
    """在 QThread 中运行模拟，主线程运行 QCoreApplication 事件循环"""
    app = QCoreApplication.instance() or QCoreApplication(sys.argv[:1])
    worker = SimulationWorker(simulation, steps)
    worker.statistics_updated.connect(
        lambda s: logger.info(
            f"step {s['step']}  t={s['time']:.6g} s  dt={s['dt']:.3g}  "
            f"active={s['active_cells']}  Pmax={s['max_pressure']:.4g} Pa"
        )
    )
    worker.error_occurred.connect(lambda message: logger.error(message))
    worker.finished.connect(app.quit)
    worker.start()
    app.exec()
    worker.wait()
    if worker.error is not None:
        raise worker.error
    return worker.summary or {}


def _run_directory(args, scenario: Scenario) -> Path:
    if args.output:
        return Path(args.output)
    if scenario.output.directory:
        return Path(scenario.output.directory)
    return Path(get_settings().run_directory(scenario.name))


def cmd_run(args) -> int:
    overrides = scenario_overrides(args)
    if args.output:
        overrides.append(f"output/directory={args.output}")
    scenario = load_scenario(args.scenario, overrides)
    settings = get_settings()
    run_dir = _run_directory(args, scenario)
    simulation = Simulation(
        scenario, output_dir=run_dir, workers=args.workers, default_workers=settings.workers,
    )
    summary = run_worker(simulation, args.steps)
    if args.remember:
        settings.output_root = str(run_dir.resolve().parent)
        if args.workers is not None:
            settings.workers = args.workers
        logger.info(f"默认设置已保存: {settings.get_settings_file_path()}")
    print(f"{run_dir}: {summary.get('step', 0)} steps, t={summary.get('time', 0.0):.6g} s")
    return EXIT_OK


def cmd_resume(args) -> int:
    overrides = list(args.overrides)
    if args.t_total is not None:
        overrides.append(f"time/t_total={args.t_total!r}")
    simulation = Simulation.resume(
        args.run_dir, snapshot=args.snapshot, overrides=overrides,
        workers=args.workers, default_workers=get_settings().workers,
    )
    summary = run_worker(simulation, args.steps)
    print(f"{args.run_dir}: {summary.get('step', 0)} steps, t={summary.get('time', 0.0):.6g} s")
    return EXIT_OK


def _saver(args, snapshot_path: str, default_subdir: str) -> ImageSaver:
    directory = args.output or str(Path(snapshot_path).parent / default_subdir)
    saver = ImageSaver()
    if not saver.set_save_dir(directory):
        raise OSError(f"cannot create output directory {directory}")
    return saver


def cmd_slice(args) -> int:
    snapshot = read_snapshot(args.snapshot)
    axis = AXES.index(args.axis)
    index = snapshot.dims[axis] // 2 if args.index is None else args.index
    saver = _saver(args, args.snapshot, "slices")
    path = saver.save_slice(snapshot, args.field, axis, index, args.colormap, args.vmin, args.vmax, args.name)
    print(path)
    return EXIT_OK


def default_camera(snapshot: Snapshot, args) -> Camera:
    """默认相机: 位于网格 −y 方向外侧，看向网格中心"""
    extent = np.asarray(snapshot.dims, dtype=np.float64) * snapshot.h
    center = snapshot.origin + 0.5 * extent
    size = float(extent.max())
    position = args.camera if args.camera is not None else center + np.array([0.0, -2.0 * size, 0.5 * size])
    look_at = args.look_at if args.look_at is not None else center
    return Camera(position, look_at, fov=args.fov, width=args.width, height=args.height)


def cmd_render_refraction(args) -> int:
    snapshot = read_snapshot(args.snapshot)
    consts = PhysicalConstants.from_dict(snapshot.header["constants"])
    config = RefractionConfig(
        step=args.step, bend_threshold=args.bend_threshold,
        exaggeration=args.exaggeration, smoothing=args.smoothing,
    )
    volume = DensityVolume(snapshot.field("rho"), snapshot.h, snapshot.origin, consts.k_gladstone, config)
    image = render_refraction(volume, default_camera(snapshot, args), args.cells)
    saver = _saver(args, args.snapshot, "renders")
    text = {"render": "refraction", "time": repr(snapshot.time), "exaggeration": repr(args.exaggeration)}
    print(saver.save_gray(image, args.name, text))
    return EXIT_OK


def cmd_render_particles(args) -> int:
    snapshot = read_snapshot(args.snapshot)
    arrays = snapshot.arrays
    half = 0.5 * snapshot.h
    tracer_radius = args.tracer_radius if args.tracer_radius is not None else half
    dust_radius = args.dust_radius if args.dust_radius is not None else half

    tracers = TracerSet(
        positions=arrays["tracers.positions"],
        temperature=arrays["tracers.temperature"],
    )
    dust_pos = arrays["dust.centers"].reshape(-1, 3)
    positions = np.concatenate([dust_pos, tracers.positions])
    colors = np.concatenate([dust_colors(len(dust_pos)), tracer_colors(tracers, BlackbodyPalette())])
    radius = np.concatenate([
        dust_radius + np.sqrt(arrays["dust.variance"]),
        np.full(len(tracers), tracer_radius),
    ])
    image = splat_particles(positions, colors, default_camera(snapshot, args), radius)
    saver = _saver(args, args.snapshot, "renders")
    text = {
        "render": "particles",
        "time": repr(snapshot.time),
        "tracers": str(len(tracers)),
        "dust": str(len(dust_pos)),
    }
    print(saver.save_rgb(image, args.name, text))
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario, scenario_overrides(args))
    g, t = scenario.grid, scenario.time
    print(
        f"{scenario.name}: ok - grid {g.dims[0]}x{g.dims[1]}x{g.dims[2]} h={g.h} m, "
        f"dt={t.dt} s, t_total={t.t_total} s ({scenario.total_steps_fast} steps at dt), "
        f"{len(scenario.charges)} charge(s), {len(scenario.bodies)} body(ies)"
    )
    return EXIT_OK


SERIES_BLOCKS = {
    "speed": ("vel",), "vx": ("vel",), "vy": ("vel",), "vz": ("vel",), "overpressure": ("pres",),
}


def cmd_series(args) -> int:
    fields = [f.strip() for f in args.fields.split(",") if f.strip()]
    unknown = [f for f in fields if f not in SLICE_FIELDS]
    if unknown:
        raise ValueError(f"unknown series field(s): {', '.join(unknown)}")
    paths = snapshot_paths(args.run_dir)
    if not paths:
        raise FileNotFoundError(f"{args.run_dir}: no snapshots")
    blocks = sorted({b for f in fields for b in SERIES_BLOCKS.get(f, (f,))})
    i, j, k = args.index
    print(",".join(["step", "time"] + fields))
    for path in paths:
        snapshot = read_snapshot(path, fields=blocks)
        dims = snapshot.dims
        if not (0 <= i < dims[0] and 0 <= j < dims[1] and 0 <= k < dims[2]):
            raise ValueError(f"voxel index {args.index} outside grid {dims}")
        values = [repr(float(snapshot.field(f)[i, j, k])) for f in fields]
        print(",".join([str(snapshot.step), repr(snapshot.time)] + values))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "resume": cmd_resume,
    "slice": cmd_slice,
    "render-refraction": cmd_render_refraction,
    "render-particles": cmd_render_particles,
    "validate": cmd_validate,
    "probe": cmd_series,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数，返回退出码"""
    args = build_parser().parse_args(argv)
    setup_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        return COMMANDS[args.command](args)
    except NumericalAbort as e:
        print(f"error: numerical abort: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ScenarioError as e:
        print("error: invalid scenario:", file=sys.stderr)
        for line in e.errors:
            print(f"  {line}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
