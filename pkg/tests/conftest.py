"""
测试公共夹具

测试从仓库根目录导入各子包 (与 main.py 的方式一致)
"""

import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from fluid.constants import ATM, PhysicalConstants  # noqa: E402
from fluid.grid import FluidGrid, init_ambient  # noqa: E402


@pytest.fixture
def consts() -> PhysicalConstants:
    """无重力的空气常数"""
    return PhysicalConstants(gravity=(0.0, 0.0, 0.0))


@pytest.fixture
def small_grid(consts) -> FluidGrid:
    """12³ 环境空气网格，h = 0.5 m"""
    grid = FluidGrid((12, 12, 12), 0.5, consts=consts)
    return init_ambient(grid, ATM, 290.0, consts)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """测试不受外部线程数/确定性环境变量影响"""
    monkeypatch.delenv("BLASTSIM_WORKERS", raising=False)
    monkeypatch.delenv("BLASTSIM_DETERMINISTIC", raising=False)
