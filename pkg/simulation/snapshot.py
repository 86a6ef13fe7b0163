"""
快照 - 自描述的二进制网格状态文件

字节布局 (全部小端):
    偏移  长度  内容
    0     4     魔数 b"BSNP"
    4     4     u32 版本 (1)
    8     4     u32 标志 (bit0 = 数据块 zlib 压缩)
    12    8     u64 头部长度 L
    20    L     UTF-8 JSON 头部
    20+L  ...   数据块，按头部 "blocks" 列表的顺序首尾相接

头部包含网格维度、h、原点、模拟时间、步数、字段列表与取值范围，
以及续算所需的全部状态 (刚体、装药、部分体积、随机数发生器、诊断计数)。
每个数据块记录名称、dtype、形状、偏移与存储长度。
"""

import json
import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from fluid.constants import PhysicalConstants
from fluid.grid import FluidGrid, GridFields

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"BSNP"
SNAPSHOT_VERSION = 1
FLAG_ZLIB = 0x1
_PREFIX = struct.Struct("<4sIIQ")

GRID_FIELDS = ("rho", "vel", "n_int", "temp", "pres", "pv", "flags")


class SnapshotError(IOError):
    """快照文件损坏、截断或版本不支持"""


@dataclass
class Snapshot:
    """内存中的快照: JSON 头部 + 命名数组"""
    header: Dict
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dims(self):
        return tuple(self.header["dims"])

    @property
    def h(self) -> float:
        return float(self.header["h"])

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.header["origin"], dtype=np.float64)

    @property
    def time(self) -> float:
        return float(self.header["time"])

    @property
    def step(self) -> int:
        return int(self.header["step"])

    @property
    def state(self) -> Dict:
        return self.header.get("state", {})

    def field(self, name: str) -> np.ndarray:
        """网格字段或派生字段 (speed, vx, vy, vz, overpressure)"""
        if name in self.arrays:
            return self.arrays[name]
        if name == "speed":
            return np.sqrt(np.sum(self.arrays["vel"] ** 2, axis=0))
        if name in ("vx", "vy", "vz"):
            return self.arrays["vel"]["xyz".index(name[1])]
        if name == "overpressure":
            return self.arrays["pres"] - float(self.header["ambient"]["pres"])
        raise KeyError(f"snapshot has no field '{name}'")

    def to_grid(self) -> FluidGrid:
        """重建流体网格 (read 与 write 缓冲区相同)"""
        consts = PhysicalConstants.from_dict(self.header["constants"])
        amb = self.header["ambient"]
        grid = FluidGrid(self.dims, self.h, self.origin, amb["pressure"], amb["temperature"], consts)
        for name in GRID_FIELDS:
            np.copyto(getattr(grid.read, name), self.arrays[name])
        grid.write.copy_from(grid.read)
        return grid


def field_ranges(arrays: Dict[str, np.ndarray]) -> Dict[str, List[float]]:
    """每个标量字段的 [min, max]，切片导出的默认色标范围"""
    ranges = {}
    for name in ("rho", "n_int", "temp", "pres", "pv"):
        if name in arrays and arrays[name].size:
            ranges[name] = [float(arrays[name].min()), float(arrays[name].max())]
    if "vel" in arrays and arrays["vel"].size:
        speed = np.sqrt(np.sum(arrays["vel"] ** 2, axis=0))
        ranges["speed"] = [float(speed.min()), float(speed.max())]
    return ranges


def grid_arrays(fields: GridFields) -> Dict[str, np.ndarray]:
    """网格字段的独立副本 (后台写入不受下一步计算影响)"""
    return {name: getattr(fields, name).copy() for name in GRID_FIELDS}


def write_snapshot(path, snapshot: Snapshot, compress: bool = False) -> Path:
    """
    写出快照

    Args:
        path: 文件路径
        snapshot: 快照
        compress: 数据块是否 zlib 压缩

    Returns:
        写入的路径
    """
    path = Path(path)
    blocks = []
    payloads = []
    offset = 0
    for name, array in snapshot.arrays.items():
        array = np.asarray(array)
        little = array.astype(array.dtype.newbyteorder("<"), copy=False)
        data = np.ascontiguousarray(little).tobytes()
        stored = zlib.compress(data, 6) if compress else data
        blocks.append({
            "name": name,
            "dtype": little.dtype.str,
            "shape": list(array.shape),
            "offset": offset,
            "nbytes": len(stored),
            "raw_nbytes": len(data),
        })
        payloads.append(stored)
        offset += len(stored)

    header = dict(snapshot.header)
    header["blocks"] = blocks
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    flags = FLAG_ZLIB if compress else 0

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(_PREFIX.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, flags, len(header_bytes)))
        f.write(header_bytes)
        for data in payloads:
            f.write(data)
    tmp.replace(path)
    return path


def read_snapshot(path, fields: Optional[List[str]] = None) -> Snapshot:
    """
    读取快照

    Args:
        path: 文件路径
        fields: 只读取这些数据块 (None 表示全部)

    Raises:
        SnapshotError: 魔数/版本不符或数据被截断
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PREFIX.size:
        raise SnapshotError(f"{path}: file too short for a snapshot")
    magic, version, flags, header_len = _PREFIX.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version}")
    start = _PREFIX.size
    if len(data) < start + header_len:
        raise SnapshotError(f"{path}: truncated header")
    try:
        header = json.loads(data[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SnapshotError(f"{path}: corrupt header ({e})") from e

    base = start + header_len
    arrays = {}
    for block in header.get("blocks", []):
        if fields is not None and block["name"] not in fields:
            continue
        lo = base + block["offset"]
        hi = lo + block["nbytes"]
        if hi > len(data):
            raise SnapshotError(f"{path}: truncated block '{block['name']}'")
        raw = data[lo:hi]
        if flags & FLAG_ZLIB:
            try:
                raw = zlib.decompress(raw)
            except zlib.error as e:
                raise SnapshotError(f"{path}: corrupt block '{block['name']}' ({e})") from e
        if len(raw) != block["raw_nbytes"]:
            raise SnapshotError(f"{path}: block '{block['name']}' has wrong size")
        dtype = np.dtype(block["dtype"])
        array = np.frombuffer(raw, dtype=dtype).reshape(block["shape"])
        arrays[block["name"]] = array.astype(dtype.newbyteorder("="))
    return Snapshot(header=header, arrays=arrays)


def snapshot_paths(directory) -> List[Path]:
    """运行目录中的快照，按步数排序"""
    return sorted(Path(directory).glob("snap_*.bsnp"))


def snapshot_name(step: int) -> str:
    return f"snap_{step:07d}.bsnp"
