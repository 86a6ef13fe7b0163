"""
受力场导出 - 每个三角形的力时间序列

文件格式 (小端):
    纯文本头，每行一项，以 "END\\n" 结束:
        BLASTSIM-FORCES 1
        body <名称>
        triangles <m>
        record time:f8 triangle:u4 force:3f8
        endian little
        END
    之后是连续的二进制记录，每条 36 字节:
        time (float64) | triangle (uint32) | fx fy fz (3 × float64)

供外部断裂/有限元程序读取；导出是单向的，碎片不会反过来影响流体。
"""

import logging
from pathlib import Path
from typing import BinaryIO, Dict, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

FORCE_MAGIC = "BLASTSIM-FORCES"
FORCE_VERSION = 1
FORCE_RECORD = np.dtype([("time", "<f8"), ("triangle", "<u4"), ("force", "<f8", (3,))])


def format_header(body: str, triangles: int) -> bytes:
    lines = [
        f"{FORCE_MAGIC} {FORCE_VERSION}",
        f"body {body}",
        f"triangles {int(triangles)}",
        "record time:f8 triangle:u4 force:3f8",
        "endian little",
        "END",
    ]
    return ("\n".join(lines) + "\n").encode("ascii")


def force_records(time: float, forces: np.ndarray) -> np.ndarray:
    """一个时刻的所有三角形记录 (按三角形序号排列)"""
    forces = np.asarray(forces, dtype=np.float64).reshape(-1, 3)
    records = np.empty(len(forces), dtype=FORCE_RECORD)
    records["time"] = time
    records["triangle"] = np.arange(len(forces), dtype=np.uint32)
    records["force"] = forces
    return records


class ForceRecorder:
    """
    受力场记录器 - 每个物体一个文件

    用法与图像保存器一致: 打开目录，按步写入，结束时关闭
    """

    def __init__(self, directory, every: int = 1):
        """
        Args:
            directory: 输出目录
            every: 每隔多少个流体步写一次 (≥ 1)
        """
        if every < 1:
            raise ValueError(f"force export cadence must be >= 1, got {every}")
        self.directory = Path(directory)
        self.every = int(every)
        self._files: Dict[str, BinaryIO] = {}
        self._counts: Dict[str, int] = {}

    def path_for(self, body: str) -> Path:
        return self.directory / f"forces_{body}.bin"

    def open(self, body: str, triangles: int, append: bool = False):
        """
        打开物体的导出文件

        Args:
            body: 物体名称
            triangles: 受力网格三角形数
            append: 续算时追加到已有文件
        """
        if body in self._files:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(body)
        if append and path.exists():
            handle = open(path, "ab")
        else:
            handle = open(path, "wb")
            handle.write(format_header(body, triangles))
        self._files[body] = handle
        self._counts[body] = 0

    def due(self, step: int) -> bool:
        return step % self.every == 0

    def record(self, body: str, time: float, forces: np.ndarray):
        handle = self._files.get(body)
        if handle is None:
            self.open(body, len(forces))
            handle = self._files[body]
        force_records(time, forces).tofile(handle)
        self._counts[body] += 1

    def close(self):
        for body, handle in self._files.items():
            handle.close()
            logger.info(f"物体 '{body}' 受力场已导出 {self._counts[body]} 帧: {self.path_for(body)}")
        self._files.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_force_file(path) -> Tuple[Dict[str, str], np.ndarray]:
    """
    读取受力场文件

    Returns:
        (头部字典, 记录数组 (FORCE_RECORD))

    Raises:
        ValueError: 头部格式错误或记录被截断
    """
    data = Path(path).read_bytes()
    marker = b"\nEND\n"
    end = data.find(marker)
    if end < 0:
        raise ValueError(f"{path}: force file header is not terminated")
    lines = data[:end].decode("ascii").split("\n")
    magic, _, version = lines[0].partition(" ")
    if magic != FORCE_MAGIC:
        raise ValueError(f"{path}: not a force file")
    if int(version) != FORCE_VERSION:
        raise ValueError(f"{path}: unsupported force file version {version}")
    header = {"version": version}
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        header[key] = value
    payload = data[end + len(marker):]
    if len(payload) % FORCE_RECORD.itemsize:
        raise ValueError(f"{path}: truncated force records")
    return header, np.frombuffer(payload, dtype=FORCE_RECORD)


def force_series(records: np.ndarray, triangle: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    受力时间序列

    Args:
        records: read_force_file 返回的记录
        triangle: 三角形序号；None 表示合力

    Returns:
        (时刻 (k,), 力 (k, 3))
    """
    if triangle is not None:
        sel = records[records["triangle"] == triangle]
        return sel["time"].copy(), sel["force"].copy()
    times, inverse = np.unique(records["time"], return_inverse=True)
    total = np.zeros((len(times), 3))
    np.add.at(total, inverse, records["force"])
    return times, total
