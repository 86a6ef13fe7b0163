"""
场景配置 - Qt INI 场景文件的读取、命令行覆盖与一次性完整校验

文件结构 (QSettings IniFormat):

    [grid]          dims=51,51,51  h=0.2  origin=0,0,0
    [time]          dt=1e-5  t_total=0.025  dt_slow=  quiet_steps=10
    [ambient]       pressure_atm=1  temperature=290
    [constants]     mu= k_thermal= c_v= r_gas= k_gladstone= gravity=0,0,-9.81  hydrostatic=true
    [boundary]      x_min=free ... z_max=hard  prune=true  prune_threshold=10
                    velocity_threshold=1e-3  halo=4
    [charges]       size=1  1\\shape=sphere  1\\center=..  1\\volume=0.52
                    1\\p0_atm=1000  1\\t0=2900  1\\trigger=immediate
    [bodies]        size=1  1\\mesh=meshes/wall.mesh  1\\movable=false  1\\density=2400
    [tracers]       count=0  charge=<装药名>
    [dust]          rate=0  threshold_atm=0.1  median_diameter=1e-5  sigma_log=0.7
    [refraction]    step=  bend_threshold=1e-6  exaggeration=1  smoothing=0
    [output]        directory=   snapshot_every=10  force_every=1  compress=false
    [run]           seed=0  workers=  samples=4  zero_threshold=0.1  revoxelize_fraction=0.25

网格文件路径相对于场景文件所在目录解析。
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from PySide6.QtCore import QSettings

from effects.dust import DustConfig
from effects.refraction import RefractionConfig
from fluid.boundary import FACE_NAMES, FREE, HARD, BoundarySpec
from fluid.constants import ATM, PhysicalConstants
from solids.charge import IGNITION_OCCUPANCY, Charge, Trigger
from solids.mesh import MeshError, TriangleMesh, load_mesh
from solids.shapes import SHAPES, build_shape
from solids.voxelizer import GridSpec, occupancy

logger = logging.getLogger(__name__)

ARRAY_GROUPS = ("charges", "bodies")
SCALAR_GROUPS = (
    "scenario", "grid", "time", "ambient", "constants", "boundary",
    "tracers", "dust", "refraction", "output", "run",
)

# 场景的原始键值: {"grid": {"dims": "51,51,51"}, "charges": [{"shape": "sphere"}, ...]}
RawConfig = Dict[str, Any]


class ScenarioError(ValueError):
    """场景配置错误，携带全部问题 (每条为 "路径: 信息")"""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


# ========== 配置数据类 ==========

@dataclass
class GridConfig:
    dims: Tuple[int, int, int]
    h: float
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def extent(self) -> np.ndarray:
        origin = np.asarray(self.origin)
        return np.stack([origin, origin + np.asarray(self.dims) * self.h])


@dataclass
class TimeConfig:
    dt: float
    t_total: float
    dt_slow: Optional[float] = None     # None 表示 5·dt
    quiet_steps: int = 10               # 判定冲击波离开所需的连续平静步数

    @property
    def slow_dt(self) -> float:
        return self.dt_slow if self.dt_slow is not None else 5.0 * self.dt


@dataclass
class AmbientConfig:
    pressure: float = ATM
    temperature: float = 290.0


@dataclass
class ChargeConfig:
    name: str
    mesh: TriangleMesh
    p0: float
    t0: float
    trigger: Trigger = field(default_factory=Trigger)
    outward_velocity: float = 0.0

    def to_charge(self) -> Charge:
        return Charge(
            name=self.name, mesh=self.mesh, p0=self.p0, t0=self.t0,
            trigger=self.trigger, outward_velocity=self.outward_velocity,
        )


@dataclass
class BodyConfig:
    name: str
    mesh: TriangleMesh
    mass: Optional[float] = None
    density: Optional[float] = None
    movable: bool = False
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    refine: bool = True


@dataclass
class TracerConfig:
    count: int = 0
    charge: str = ""                    # 在该装药形状内播撒，空表示第一个装药


@dataclass
class OutputConfig:
    directory: str = ""                 # 空表示 <设置中的输出根目录>/<场景名>
    snapshot_every: int = 10            # 每隔多少步写一次快照
    force_every: int = 1                # 受力场导出间隔 (步)
    compress: bool = False


@dataclass
class RunConfig:
    seed: int = 0
    workers: Optional[int] = None
    samples: int = 4                    # 体素化每方向采样数
    zero_threshold: float = 0.1
    revoxelize_fraction: float = 0.25


@dataclass
class Scenario:
    """完整场景"""
    name: str
    grid: GridConfig
    time: TimeConfig
    ambient: AmbientConfig = field(default_factory=AmbientConfig)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    charges: List[ChargeConfig] = field(default_factory=list)
    bodies: List[BodyConfig] = field(default_factory=list)
    tracers: TracerConfig = field(default_factory=TracerConfig)
    dust: DustConfig = field(default_factory=DustConfig)
    refraction: RefractionConfig = field(default_factory=RefractionConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunConfig = field(default_factory=RunConfig)
    raw: RawConfig = field(default_factory=dict)
    base_dir: str = "."

    @property
    def total_steps_fast(self) -> int:
        return int(np.ceil(self.time.t_total / self.time.dt - 1e-9))


# ========== INI 读取 ==========

def _text(value: Any) -> str:
    """QSettings 把逗号分隔的值解析为列表，这里统一还原为字符串"""
    if isinstance(value, (list, tuple)):
        return ",".join(str(v).strip() for v in value)
    return "" if value is None else str(value).strip()


def read_ini(path) -> RawConfig:
    """
    读取 INI 场景文件为原始键值

    Raises:
        OSError: 文件不存在
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    settings = QSettings(str(path), QSettings.IniFormat)
    if settings.status() != QSettings.Status.NoError:
        raise ScenarioError([f"{path}: cannot parse INI file"])

    raw: RawConfig = {}
    for group in settings.childGroups():
        if group in ARRAY_GROUPS:
            continue
        settings.beginGroup(group)
        raw[group] = {key: _text(settings.value(key)) for key in settings.childKeys()}
        settings.endGroup()
    for group in ARRAY_GROUPS:
        items = []
        size = settings.beginReadArray(group)
        for i in range(size):
            settings.setArrayIndex(i)
            items.append({key: _text(settings.value(key)) for key in settings.childKeys()})
        settings.endArray()
        raw[group] = items
    # 未知节也保留下来，由校验报告
    for key in settings.childKeys():
        raw.setdefault("", {})[key] = _text(settings.value(key))
    return raw


def apply_overrides(raw: RawConfig, overrides: Sequence[str]) -> List[str]:
    """
    应用命令行覆盖 "group/key=value" 或 "charges/2/key=value" (1 起始)

    Returns:
        无法解析的覆盖项的错误信息
    """
    errors = []
    for item in overrides:
        path, sep, value = item.partition("=")
        parts = [p for p in path.strip().split("/") if p]
        if not sep or len(parts) not in (2, 3):
            errors.append(f"--set {item}: expected group/key=value")
            continue
        if len(parts) == 2:
            group, key = parts
            if group in ARRAY_GROUPS:
                errors.append(f"--set {item}: {group} needs an index, e.g. {group}/1/{key}")
                continue
            raw.setdefault(group, {})[key] = value.strip()
            continue
        group, index, key = parts
        if group not in ARRAY_GROUPS or not index.isdigit() or int(index) < 1:
            errors.append(f"--set {item}: expected {'|'.join(ARRAY_GROUPS)}/<n>/key=value")
            continue
        items = raw.setdefault(group, [])
        while len(items) < int(index):
            items.append({})
        items[int(index) - 1][key] = value.strip()
    return errors


# ========== 解析与校验 ==========

class _Section:
    """带错误收集的取值器"""

    def __init__(self, values: Dict[str, str], path: str, errors: List[str]):
        self.values = values
        self.path = path
        self.errors = errors
        self.used = set()

    def _raw(self, key: str) -> Optional[str]:
        self.used.add(key)
        value = self.values.get(key)
        return value if value not in (None, "") else None

    def error(self, key: str, message: str):
        self.errors.append(f"{self.path}/{key}: {message}")

    def has(self, key: str) -> bool:
        return self._raw(key) is not None

    def text(self, key: str, default: str = "") -> str:
        value = self._raw(key)
        return default if value is None else value

    def number(self, key: str, default: Optional[float] = None, required: bool = False,
               positive: bool = False, non_negative: bool = False) -> Optional[float]:
        value = self._raw(key)
        if value is None:
            if required:
                self.error(key, f"{key} is required")
            return default
        try:
            number = float(value)
        except ValueError:
            self.error(key, f"{key} must be a number, got '{value}'")
            return default
        if not np.isfinite(number):
            self.error(key, f"{key} must be finite")
            return default
        if positive and not number > 0.0:
            self.error(key, f"{key} must be positive")
        elif non_negative and number < 0.0:
            self.error(key, f"{key} must be non-negative")
        return number

    def integer(self, key: str, default: Optional[int] = None, minimum: Optional[int] = None,
                required: bool = False) -> Optional[int]:
        value = self._raw(key)
        if value is None:
            if required:
                self.error(key, f"{key} is required")
            return default
        try:
            number = int(value)
        except ValueError:
            self.error(key, f"{key} must be an integer, got '{value}'")
            return default
        if minimum is not None and number < minimum:
            self.error(key, f"{key} must be >= {minimum}")
        return number

    def flag(self, key: str, default: bool = False) -> bool:
        value = self._raw(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        self.error(key, f"{key} must be true or false, got '{value}'")
        return default

    def vector(self, key: str, length: int = 3, default: Optional[Sequence[float]] = None,
               required: bool = False) -> Optional[Tuple[float, ...]]:
        value = self._raw(key)
        if value is None:
            if required:
                self.error(key, f"{key} is required")
            return None if default is None else tuple(default)
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
        try:
            numbers = tuple(float(p) for p in parts)
        except ValueError:
            self.error(key, f"{key} must be {length} comma-separated numbers, got '{value}'")
            return None if default is None else tuple(default)
        if len(numbers) != length:
            self.error(key, f"{key} must have {length} components, got {len(numbers)}")
            return None if default is None else tuple(default)
        return numbers

    def unknown(self) -> List[str]:
        return sorted(set(self.values) - self.used)


def _check_unknown(section: _Section):
    for key in section.unknown():
        section.error(key, f"unknown key '{key}'")


def _parse_grid(sec: _Section) -> Optional[GridConfig]:
    dims = sec.vector("dims", required=True)
    h = sec.number("h", required=True, positive=True)
    origin = sec.vector("origin", default=(0.0, 0.0, 0.0))
    if dims is not None:
        if any(d != int(d) or d <= 0 for d in dims):
            sec.error("dims", "dims must be positive integers")
            dims = None
    if dims is None or h is None or not h > 0.0:
        return None
    return GridConfig(tuple(int(d) for d in dims), h, origin)


def _parse_time(sec: _Section) -> Optional[TimeConfig]:
    dt = sec.number("dt", required=True, positive=True)
    t_total = sec.number("t_total", required=True, positive=True)
    dt_slow = sec.number("dt_slow", positive=True)
    quiet = sec.integer("quiet_steps", default=10, minimum=1)
    if dt is None or t_total is None or not dt > 0.0 or not t_total > 0.0:
        return None
    if dt_slow is not None and not dt_slow > 0.0:
        dt_slow = None
    return TimeConfig(dt, t_total, dt_slow, quiet)


def _parse_constants(sec: _Section) -> PhysicalConstants:
    defaults = PhysicalConstants()
    values = {}
    for name in ("mu", "k_thermal", "c_v", "r_gas", "k_gladstone"):
        values[name] = sec.number(name, default=getattr(defaults, name), positive=True)
    values["gravity"] = sec.vector("gravity", default=defaults.gravity)
    values["hydrostatic"] = sec.flag("hydrostatic", defaults.hydrostatic)
    try:
        return PhysicalConstants(**values)
    except (TypeError, ValueError) as e:
        sec.errors.append(f"{sec.path}: {e}")
        return defaults


def _parse_boundary(sec: _Section) -> BoundarySpec:
    faces = {}
    for name in FACE_NAMES:
        kind = sec.text(name, FREE).lower()
        if kind not in (FREE, HARD):
            sec.error(name, f"boundary face must be free or hard, got '{kind}'")
            kind = FREE
        faces[name] = kind
    prune = sec.flag("prune", True)
    threshold = sec.number("prune_threshold", 10.0, non_negative=True)
    vthr = sec.number("velocity_threshold", 1e-3, non_negative=True)
    halo = sec.integer("halo", 4, minimum=0)
    try:
        return BoundarySpec(faces, prune, max(threshold, 0.0), max(vthr, 0.0), max(halo, 0))
    except ValueError as e:
        sec.errors.append(f"{sec.path}: {e}")
        return BoundarySpec(faces)


def _parse_mesh(sec: _Section, base_dir: str, name: str) -> Optional[TriangleMesh]:
    """mesh=文件 (可选 offset/scale) 或 shape=基本形体"""
    path = sec.text("mesh")
    shape = sec.text("shape").lower()
    if path and shape:
        sec.error("mesh", "give either mesh or shape, not both")
        return None
    if path:
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        offset = sec.vector("offset", default=(0.0, 0.0, 0.0))
        scale = sec.number("scale", 1.0, positive=True)
        try:
            mesh = load_mesh(full, name=name)
        except OSError as e:
            sec.error("mesh", f"cannot read mesh file '{path}': {e.strerror or e}")
            return None
        except MeshError as e:
            sec.error("mesh", str(e))
            return None
        if scale and scale > 0.0 and scale != 1.0:
            mesh = mesh.scaled(scale, about=(0.0, 0.0, 0.0))
        return mesh.translated(offset)
    if not shape:
        sec.error("shape", "mesh or shape is required")
        return None
    if shape not in SHAPES:
        sec.error("shape", f"unknown shape '{shape}', expected one of {', '.join(SHAPES)}")
        return None
    center = sec.vector("center", required=True)
    volume = sec.number("volume", positive=True)
    size = sec.vector("size")
    radius = sec.number("radius", positive=True)
    height = sec.number("height", positive=True)
    minor = sec.number("minor_radius", positive=True)
    resolution = sec.integer("resolution", 3, minimum=0)
    if center is None:
        return None
    try:
        return build_shape(
            shape, center=center, volume=volume, size=size, radius=radius, height=height,
            minor_radius=minor, resolution=resolution, name=name,
        )
    except (MeshError, ValueError) as e:
        sec.errors.append(f"{sec.path}: {e}")
        return None


def _check_inside(sec: _Section, mesh: TriangleMesh, grid: Optional[GridConfig], what: str):
    if grid is None or mesh is None:
        return
    lo, hi = grid.extent
    bounds = mesh.bounds
    if np.any(bounds[0] < lo) or np.any(bounds[1] > hi):
        sec.errors.append(f"{sec.path}: {what} mesh outside grid bounds")


def _parse_charge(sec: _Section, base_dir: str, grid: Optional[GridConfig], index: int) -> Optional[ChargeConfig]:
    name = sec.text("name", f"charge{index}")
    sec.path = f"{sec.path} ({name})"
    mesh = _parse_mesh(sec, base_dir, name)
    if sec.has("p0") and sec.has("p0_atm"):
        sec.error("p0", "give either p0 (Pa) or p0_atm, not both")
    p0 = sec.number("p0", positive=True)
    if p0 is None:
        p0_atm = sec.number("p0_atm", 1000.0, positive=True)
        p0 = None if p0_atm is None else p0_atm * ATM
    t0 = sec.number("t0", 2900.0, positive=True)
    outward = sec.number("outward_velocity", 0.0, non_negative=True)
    try:
        trigger = Trigger.parse(sec.text("trigger", "immediate"))
    except ValueError as e:
        sec.error("trigger", str(e))
        trigger = None
    if mesh is not None:
        try:
            mesh.validate_closed()
        except MeshError as e:
            sec.errors.append(f"{sec.path}: {e}")
            return None
    _check_inside(sec, mesh, grid, "charge")
    _check_unknown(sec)
    if mesh is None or trigger is None or not (p0 and p0 > 0.0) or not (t0 and t0 > 0.0):
        return None
    return ChargeConfig(name, mesh, p0, t0, trigger, max(outward or 0.0, 0.0))


def _parse_body(sec: _Section, base_dir: str, grid: Optional[GridConfig], index: int) -> Optional[BodyConfig]:
    name = sec.text("name", f"body{index}")
    sec.path = f"{sec.path} ({name})"
    mesh = _parse_mesh(sec, base_dir, name)
    mass = sec.number("mass", positive=True)
    density = sec.number("density", positive=True)
    movable = sec.flag("movable", False)
    velocity = sec.vector("velocity", default=(0.0, 0.0, 0.0))
    refine = sec.flag("refine", True)
    if movable and mass is None and density is None:
        sec.error("mass", "movable body needs mass or density")
    if mesh is not None:
        try:
            mesh.validate_closed()
        except MeshError as e:
            sec.errors.append(f"{sec.path}: {e}")
            return None
    _check_inside(sec, mesh, grid, "body")
    _check_unknown(sec)
    if mesh is None:
        return None
    if mass is None and density is None:
        density = 1000.0    # 不可动物体的质量不参与计算
    return BodyConfig(name, mesh, mass, density, movable, velocity, refine)


def scenario_from_raw(raw: RawConfig, base_dir: str = ".", name: str = "scenario") -> Scenario:
    """
    原始键值 → 场景，报告全部错误

    Raises:
        ScenarioError: 任何结构或物理问题 (每条带配置路径)
    """
    errors: List[str] = []
    for group in raw:
        if group not in SCALAR_GROUPS and group not in ARRAY_GROUPS:
            errors.append(f"{group or '<root>'}: unknown section")

    def section(group: str) -> _Section:
        values = raw.get(group, {})
        return _Section(values if isinstance(values, dict) else {}, group, errors)

    meta = section("scenario")
    name = meta.text("name", name)
    _check_unknown(meta)

    sec = section("grid")
    grid = _parse_grid(sec)
    _check_unknown(sec)

    sec = section("time")
    time = _parse_time(sec)
    _check_unknown(sec)

    sec = section("ambient")
    pressure = sec.number("pressure", positive=True)
    if pressure is None:
        pressure = sec.number("pressure_atm", 1.0, positive=True) * ATM
    ambient = AmbientConfig(pressure, sec.number("temperature", 290.0, positive=True))
    _check_unknown(sec)

    sec = section("constants")
    consts = _parse_constants(sec)
    _check_unknown(sec)

    sec = section("boundary")
    boundary = _parse_boundary(sec)
    _check_unknown(sec)

    charges = []
    for i, values in enumerate(raw.get("charges", []), start=1):
        charge = _parse_charge(_Section(values, f"charges/{i}", errors), base_dir, grid, i)
        if charge is not None:
            charges.append(charge)
    names = [c.name for c in charges]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        errors.append(f"charges: duplicate charge name '{dup}'")

    bodies = []
    for i, values in enumerate(raw.get("bodies", []), start=1):
        body = _parse_body(_Section(values, f"bodies/{i}", errors), base_dir, grid, i)
        if body is not None:
            bodies.append(body)
    names = [b.name for b in bodies]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        errors.append(f"bodies: duplicate body name '{dup}'")

    sec = section("tracers")
    tracers = TracerConfig(sec.integer("count", 0, minimum=0), sec.text("charge"))
    if tracers.count and tracers.count > 0:
        if not raw.get("charges"):
            sec.error("count", "tracers need a charge to seed in")
        elif tracers.charge and tracers.charge not in [c.name for c in charges]:
            sec.error("charge", f"no charge named '{tracers.charge}'")
    _check_unknown(sec)

    sec = section("dust")
    dust_values = dict(
        rate=sec.number("rate", 0.0, non_negative=True),
        threshold=sec.number("threshold_atm", 0.1, non_negative=True) * ATM,
        median_diameter=sec.number("median_diameter", 10e-6, positive=True),
        sigma_log=sec.number("sigma_log", 0.7, non_negative=True),
        particle_density=sec.number("particle_density", 2600.0, positive=True),
        weight=sec.number("weight", 1e6, positive=True),
    )
    try:
        dust = DustConfig(**dust_values)
    except ValueError as e:
        errors.append(f"dust: {e}")
        dust = DustConfig()
    _check_unknown(sec)

    sec = section("refraction")
    try:
        refraction = RefractionConfig(
            step=sec.number("step", positive=True),
            bend_threshold=sec.number("bend_threshold", 1e-6, non_negative=True),
            exaggeration=sec.number("exaggeration", 1.0, positive=True),
            smoothing=sec.number("smoothing", 0.0, non_negative=True),
        )
    except ValueError as e:
        errors.append(f"refraction: {e}")
        refraction = RefractionConfig()
    _check_unknown(sec)

    sec = section("output")
    output = OutputConfig(
        directory=sec.text("directory", ""),
        snapshot_every=sec.integer("snapshot_every", 10, minimum=1),
        force_every=sec.integer("force_every", 1, minimum=1),
        compress=sec.flag("compress", False),
    )
    _check_unknown(sec)

    sec = section("run")
    run = RunConfig(
        seed=sec.integer("seed", 0, minimum=0),
        workers=sec.integer("workers", None, minimum=1),
        samples=sec.integer("samples", 4, minimum=1),
        zero_threshold=sec.number("zero_threshold", 0.1, non_negative=True),
        revoxelize_fraction=sec.number("revoxelize_fraction", 0.25, positive=True),
    )
    _check_unknown(sec)

    if grid is not None and charges and bodies and not errors:
        errors.extend(_overlap_errors(grid, charges, bodies, run.samples))

    if errors or grid is None or time is None:
        raise ScenarioError(errors or ["scenario: incomplete configuration"])
    return Scenario(
        name=name, grid=grid, time=time, ambient=ambient, constants=consts,
        boundary=boundary, charges=charges, bodies=bodies, tracers=tracers,
        dust=dust, refraction=refraction, output=output, run=run,
        raw=raw, base_dir=str(base_dir),
    )


def _overlap_errors(grid: GridConfig, charges: List[ChargeConfig], bodies: List[BodyConfig],
                    samples: int) -> List[str]:
    """装药体素不能完全落在固体里"""
    spec = GridSpec(grid.dims, grid.h, grid.origin)
    solid = np.zeros(grid.dims)
    for body in bodies:
        solid += occupancy(body.mesh, spec, samples)
    errors = []
    for i, charge in enumerate(charges, start=1):
        region = occupancy(charge.mesh, spec, samples) > IGNITION_OCCUPANCY
        overlap = int(np.count_nonzero(region & (solid > 0.5)))
        if overlap:
            errors.append(f"charges/{i} ({charge.name}): charge overlaps solid bodies in {overlap} voxels")
    return errors


def load_scenario(path, overrides: Sequence[str] = ()) -> Scenario:
    """
    读取并校验场景文件

    Args:
        path: INI 文件路径
        overrides: 命令行覆盖项 "group/key=value"

    Raises:
        ScenarioError: 配置错误
        OSError: 文件无法读取
    """
    path = Path(path)
    raw = read_ini(path)
    errors = apply_overrides(raw, overrides)
    if errors:
        raise ScenarioError(errors)
    scenario = scenario_from_raw(raw, base_dir=str(path.parent.resolve()), name=path.stem)
    logger.info(
        f"场景 '{scenario.name}' 已加载: {scenario.grid.dims} 体素, h={scenario.grid.h} m, "
        f"{len(scenario.charges)} 个装药, {len(scenario.bodies)} 个物体"
    )
    return scenario


def save_raw(scenario: Scenario, path):
    """保存原始键值 (续算时重建场景)"""
    data = {"name": scenario.name, "base_dir": scenario.base_dir, "raw": scenario.raw}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def load_raw(path, overrides: Sequence[str] = ()) -> Scenario:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    raw = data["raw"]
    errors = apply_overrides(raw, overrides)
    if errors:
        raise ScenarioError(errors)
    return scenario_from_raw(raw, base_dir=data["base_dir"], name=data["name"])
