"""模拟模块 - 场景配置、耦合主循环、快照与工作线程"""

from .scenario import Scenario, ScenarioError, load_raw, load_scenario, save_raw
from .snapshot import Snapshot, SnapshotError, read_snapshot, snapshot_paths, write_snapshot
from .runner import NumericalAbort, Simulation, check_finite
from .worker import SimulationWorker

__all__ = [
    'Scenario',
    'ScenarioError',
    'load_scenario',
    'load_raw',
    'save_raw',
    'Snapshot',
    'SnapshotError',
    'read_snapshot',
    'write_snapshot',
    'snapshot_paths',
    'Simulation',
    'NumericalAbort',
    'check_finite',
    'SimulationWorker',
]
