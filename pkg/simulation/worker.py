"""
模拟工作线程 - 在 QThread 中运行模拟，通过信号报告进度
"""

import logging
import time
from pathlib import Path
from typing import Optional

from PySide6.QtCore import QThread, Signal

from .runner import Simulation

logger = logging.getLogger(__name__)


class SimulationWorker(QThread):
    """
    模拟工作线程

    主循环在线程中推进，统计信息按固定的墙钟间隔发出，
    避免每步都发信号拖慢模拟
    """

    # 信号定义
    run_started = Signal(dict)          # 模拟开始 (初始统计)
    snapshot_written = Signal(str)      # 快照写入完成 (路径)
    statistics_updated = Signal(dict)   # 统计信息更新
    error_occurred = Signal(str)        # 错误发生
    run_finished = Signal(dict)         # 模拟结束 (运行摘要，出错时为空)

    # 统计信息发送间隔 (秒)
    STATS_INTERVAL = 0.5

    def __init__(self, simulation: Simulation, steps: Optional[int] = None, parent=None):
        super().__init__(parent)
        self.simulation = simulation
        self.steps = steps
        self.summary: Optional[dict] = None
        self.error: Optional[BaseException] = None
        self._running = False
        self._last_stats_time = 0.0

    @property
    def is_running(self) -> bool:
        return self._running

    def _on_progress(self, stats: dict):
        now = time.monotonic()
        if now - self._last_stats_time >= self.STATS_INTERVAL:
            self._last_stats_time = now
            self.statistics_updated.emit(stats)

    def _on_snapshot(self, path: Path):
        self.snapshot_written.emit(str(path))

    def _stop_requested(self) -> bool:
        return not self._running

    def run(self):
        """线程主循环"""
        self._running = True
        self.simulation.on_snapshot = self._on_snapshot
        try:
            self.run_started.emit(self.simulation.statistics())
            self.summary = self.simulation.run(
                steps=self.steps,
                progress=self._on_progress,
                should_stop=self._stop_requested,
            )
            self.statistics_updated.emit(self.simulation.statistics())

        except Exception as e:
            self.error = e
            logger.exception("模拟线程异常")
            self.error_occurred.emit(f"模拟线程异常: {e}")

        finally:
            self.simulation.close()
            self._running = False
            self.run_finished.emit(self.summary or {})
            logger.info("模拟线程结束")

    def stop(self, timeout_ms: int = 5000):
        """请求停止 (当前步完成并写出最终快照后退出)"""
        logger.info("请求停止模拟...")
        self._running = False
        self.wait(timeout_ms)
