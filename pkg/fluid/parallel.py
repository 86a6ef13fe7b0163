"""
分块并行 - 沿 x 轴把计算窗口切成若干行块交给线程池

每个行块只做逐元素运算并写入互不重叠的输出区域，
所以结果与工作线程数无关 (逐位相同)。归约不在这里做。
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

WORKERS_ENV = "BLASTSIM_WORKERS"
DETERMINISTIC_ENV = "BLASTSIM_DETERMINISTIC"


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    确定工作线程数

    优先级: 显式参数 > 环境变量 BLASTSIM_WORKERS > CPU 核数

    Args:
        workers: 显式指定的线程数 (None 表示未指定)

    Returns:
        至少为 1 的线程数
    """
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"无法解析 {WORKERS_ENV}={env!r}，使用单线程")
            return 1
    return max(1, os.cpu_count() or 1)


def deterministic_mode() -> bool:
    """BLASTSIM_DETERMINISTIC=1 时禁止未指定种子的运行与后台快照写入"""
    return os.environ.get(DETERMINISTIC_ENV, "0").strip().lower() in ("1", "true", "yes", "on")


def row_slabs(rows: int, workers: int) -> List[slice]:
    """把 [0, rows) 切成不超过 workers 个非空连续块"""
    count = max(1, min(workers, rows))
    bounds = np.linspace(0, rows, count + 1).astype(int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


class SlabExecutor:
    """
    行块执行器

    workers == 1 时直接在调用线程中执行
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = resolve_workers(workers)
        self._pool: Optional[ThreadPoolExecutor] = None
        if self.workers > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="slab")

    def map_rows(self, fn: Callable[[slice], None], rows: int):
        """
        对每个行块调用 fn(rows_slice)，全部完成后返回

        任何一个行块抛出的异常都会在这里重新抛出
        """
        slabs = row_slabs(rows, self.workers)
        if self._pool is None or len(slabs) == 1:
            for sl in slabs:
                fn(sl)
            return
        futures = [self._pool.submit(fn, sl) for sl in slabs]
        for future in futures:
            future.result()

    def shutdown(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown()
        return False
