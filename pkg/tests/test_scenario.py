"""场景文件读取、命令行覆盖与配置校验"""

import copy

import pytest

from fluid.boundary import FREE, HARD
from fluid.constants import ATM
from simulation.scenario import (
    ScenarioError,
    apply_overrides,
    load_raw,
    load_scenario,
    read_ini,
    save_raw,
    scenario_from_raw,
)
from solids.mesh import save_mesh
from solids.shapes import box

BASE = {
    "grid": {"dims": "10,10,10", "h": "0.5"},
    "time": {"dt": "1e-5", "t_total": "1e-3"},
}

CHARGE = {
    "name": "tnt", "shape": "sphere", "center": "2.5,2.5,2.5",
    "volume": "0.52", "p0_atm": "1000", "t0": "2900",
}

INI_TEXT = """\
; 测试场景
[scenario]
name=wall_test

[grid]
dims=12, 10, 10
h=0.5

[time]
dt=1e-5
t_total=2e-4

[boundary]
z_min=hard
halo=3

[constants]
gravity=0, 0, -9.81
hydrostatic=false

[charges]
size=1
1\\name=charge
1\\shape=sphere
1\\center=1.5, 2.5, 1.5
1\\volume=0.52
1\\trigger=at_time:1e-4

[bodies]
size=1
1\\name=wall
1\\mesh=meshes/wall.mesh
1\\movable=false

[output]
snapshot_every=5
"""


def raw_with(**groups):
    raw = copy.deepcopy(BASE)
    for group, values in groups.items():
        if isinstance(values, list):
            raw[group] = copy.deepcopy(values)
        else:
            raw.setdefault(group, {}).update(values)
    return raw


def errors_of(raw) -> list:
    with pytest.raises(ScenarioError) as info:
        scenario_from_raw(raw)
    return info.value.errors


def test_minimal_scenario_uses_defaults():
    sc = scenario_from_raw(raw_with(), name="mini")
    assert sc.name == "mini"
    assert sc.grid.dims == (10, 10, 10)
    assert sc.ambient.pressure == ATM
    assert sc.ambient.temperature == 290.0
    assert sc.time.slow_dt == pytest.approx(5e-5)
    assert sc.total_steps_fast == 100
    assert all(kind == FREE for kind in sc.boundary.faces.values())
    assert sc.boundary.prune_enabled and sc.boundary.halo == 4
    assert sc.constants.hydrostatic
    assert sc.output.snapshot_every == 10


def test_charge_from_shape():
    sc = scenario_from_raw(raw_with(charges=[CHARGE]))
    charge = sc.charges[0]
    assert charge.name == "tnt"
    assert charge.p0 == pytest.approx(1000.0 * ATM)
    assert charge.mesh.signed_volume == pytest.approx(0.52)
    assert charge.trigger.describe() == "immediate"
    assert charge.to_charge().t0 == 2900.0


def test_all_problems_are_reported_together():
    raw = raw_with(
        grid={"dims": "10,10", "foo": "1"},
        time={"dt": "-1"},
        boundary={"x_min": "sticky"},
    )
    raw["bogus"] = {}
    errors = errors_of(raw)
    assert "grid/dims: dims must have 3 components, got 2" in errors
    assert "grid/foo: unknown key 'foo'" in errors
    assert "time/dt: dt must be positive" in errors
    assert "boundary/x_min: boundary face must be free or hard, got 'sticky'" in errors
    assert "bogus: unknown section" in errors


def test_charge_errors_carry_their_path():
    outside = dict(CHARGE, center="9.0,2.5,2.5")
    errors = errors_of(raw_with(charges=[outside]))
    assert "charges/1 (tnt): charge mesh outside grid bounds" in errors

    bad_trigger = dict(CHARGE, trigger="soon")
    errors = errors_of(raw_with(charges=[bad_trigger]))
    assert any(e.startswith("charges/1 (tnt)/trigger: unknown trigger") for e in errors)

    no_shape = {"name": "x"}
    errors = errors_of(raw_with(charges=[no_shape]))
    assert "charges/1 (x)/shape: mesh or shape is required" in errors


def test_duplicate_names_are_rejected():
    errors = errors_of(raw_with(charges=[CHARGE, dict(CHARGE)]))
    assert "charges: duplicate charge name 'tnt'" in errors


def test_movable_body_needs_mass():
    body = {"name": "crate", "shape": "box", "center": "1,1,1", "size": "0.5,0.5,0.5", "movable": "true"}
    errors = errors_of(raw_with(bodies=[body]))
    assert "bodies/1 (crate)/mass: movable body needs mass or density" in errors


def test_charge_inside_solid_is_rejected():
    body = {"name": "block", "shape": "box", "center": "2.5,2.5,2.5", "size": "2,2,2"}
    errors = errors_of(raw_with(charges=[CHARGE], bodies=[body]))
    assert any("charge overlaps solid bodies" in e for e in errors)


def test_tracers_need_a_charge():
    errors = errors_of(raw_with(tracers={"count": "100"}))
    assert "tracers/count: tracers need a charge to seed in" in errors


def test_constants_section():
    sc = scenario_from_raw(raw_with(constants={"gravity": "0,-1,0", "hydrostatic": "no", "mu": "2e-5"}))
    assert sc.constants.gravity == (0.0, -1.0, 0.0)
    assert not sc.constants.hydrostatic
    assert sc.constants.mu == 2e-5
    errors = errors_of(raw_with(constants={"hydrostatic": "maybe"}))
    assert "constants/hydrostatic: hydrostatic must be true or false, got 'maybe'" in errors


def test_overrides():
    raw = raw_with(charges=[CHARGE])
    errors = apply_overrides(raw, ["time/dt=2e-5", "charges/1/t0=3000", "charges/t0=1", "nonsense"])
    assert raw["time"]["dt"] == "2e-5"
    assert raw["charges"][0]["t0"] == "3000"
    assert len(errors) == 2
    assert errors[0].startswith("--set charges/t0=1: charges needs an index")
    assert errors[1] == "--set nonsense: expected group/key=value"


def test_read_ini_file_with_mesh_reference(tmp_path):
    (tmp_path / "meshes").mkdir()
    save_mesh(box((0.5, 3.0, 3.0)).translated((4.0, 2.5, 2.5)), tmp_path / "meshes" / "wall.mesh")
    path = tmp_path / "wall_test.ini"
    path.write_text(INI_TEXT, encoding="utf-8")

    raw = read_ini(path)
    assert raw["grid"]["dims"] == "12,10,10"
    assert raw["charges"][0]["center"] == "1.5,2.5,1.5"

    sc = load_scenario(path, ["time/t_total=1e-4"])
    assert sc.name == "wall_test"
    assert sc.time.t_total == 1e-4
    assert sc.boundary.faces["z_min"] == HARD
    assert sc.boundary.halo == 3
    assert not sc.constants.hydrostatic
    assert sc.charges[0].trigger.time == 1e-4
    assert sc.bodies[0].mesh.signed_volume == pytest.approx(4.5)
    assert not sc.bodies[0].movable


def test_missing_mesh_file_is_a_config_error(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text(INI_TEXT, encoding="utf-8")
    with pytest.raises(ScenarioError) as info:
        load_scenario(path)
    assert any(e.startswith("bodies/1 (wall)/mesh: cannot read mesh file") for e in info.value.errors)


def test_missing_scenario_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.ini")


def test_raw_round_trip_for_resume(tmp_path):
    sc = scenario_from_raw(raw_with(charges=[CHARGE]), base_dir=str(tmp_path), name="again")
    save_raw(sc, tmp_path / "scenario.json")
    back = load_raw(tmp_path / "scenario.json", ["time/t_total=2e-3"])
    assert back.name == "again"
    assert back.grid == sc.grid
    assert back.time.t_total == 2e-3
    assert back.charges[0].p0 == sc.charges[0].p0
