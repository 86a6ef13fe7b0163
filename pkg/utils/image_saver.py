"""
图像保存工具 - 快照切片、折射渲染与粒子渲染导出为 PNG

切片导出是纯函数: 同一快照与参数总是得到逐字节相同的 PNG。
PNG 中以 tEXt 块记录字段、切片位置、模拟时间与色标范围。
"""

import logging
import os
import struct
import zlib
from datetime import datetime
from typing import Dict, Optional, Tuple

import cv2
import numpy as np

from simulation.snapshot import Snapshot

logger = logging.getLogger(__name__)

COLORMAPS = {
    "jet": cv2.COLORMAP_JET,
    "inferno": cv2.COLORMAP_INFERNO,
    "viridis": cv2.COLORMAP_VIRIDIS,
    "hot": cv2.COLORMAP_HOT,
    "turbo": cv2.COLORMAP_TURBO,
    "gray": None,
}

SLICE_FIELDS = ("rho", "pres", "overpressure", "temp", "n_int", "pv", "speed", "vx", "vy", "vz")
AXES = "xyz"

# 固体体素在切片中的颜色 (BGR)
SOLID_COLOR = (64, 64, 64)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_IHDR_END = len(_PNG_SIGNATURE) + 25


def to_uint8(values: np.ndarray) -> np.ndarray:
    """[0, 1] 浮点 → uint8"""
    return np.clip(np.asarray(values, dtype=np.float64) * 255.0 + 0.5, 0.0, 255.0).astype(np.uint8)


def normalize(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """线性映射到 [0, 1]，范围退化时全部为 0"""
    span = vmax - vmin
    if not span > 0.0:
        return np.zeros(values.shape)
    return np.clip((values - vmin) / span, 0.0, 1.0)


def slice_plane(volume: np.ndarray, axis: int, index: int) -> np.ndarray:
    """
    取出垂直于 axis 的一层，转为图像方向

    图像列为剩余两轴中的第一轴，行为第二轴 (向上递增)
    """
    if not 0 <= index < volume.shape[axis]:
        raise ValueError(f"slice index {index} out of range for axis {AXES[axis]} (size {volume.shape[axis]})")
    plane = np.take(volume, index, axis=axis)
    return plane.T[::-1]


def render_slice(
    snapshot: Snapshot,
    field: str,
    axis: int,
    index: int,
    colormap: str = "jet",
    vmin: Optional[float] = None,
    vmax: Optional[float] = None,
) -> Tuple[np.ndarray, Dict[str, str]]:
    """
    快照切片 → 伪彩色图像

    Args:
        snapshot: 快照
        field: 字段名 (见 SLICE_FIELDS)
        axis: 切片法向 0/1/2
        index: 层号
        colormap: 色表名 (见 COLORMAPS)
        vmin, vmax: 色标范围，默认取快照头部记录的字段范围

    Returns:
        (BGR uint8 图像, PNG 文本元数据)
    """
    if field not in SLICE_FIELDS:
        raise ValueError(f"unknown slice field '{field}', expected one of {', '.join(SLICE_FIELDS)}")
    if colormap not in COLORMAPS:
        raise ValueError(f"unknown colormap '{colormap}', expected one of {', '.join(COLORMAPS)}")
    if axis not in (0, 1, 2):
        raise ValueError(f"slice axis must be 0, 1 or 2, got {axis}")

    values = slice_plane(snapshot.field(field), axis, index)
    solid = slice_plane(snapshot.field("pv"), axis, index) <= 0.0

    if vmin is None or vmax is None:
        lo, hi = _default_range(snapshot, field, values)
        vmin = lo if vmin is None else vmin
        vmax = hi if vmax is None else vmax

    gray = to_uint8(normalize(values, float(vmin), float(vmax)))
    cmap = COLORMAPS[colormap]
    if cmap is None:
        image = cv2.cvtColor(gray, cv2.COLOR_GRAY2BGR)
    else:
        image = cv2.applyColorMap(gray, cmap)
    image[solid] = SOLID_COLOR

    metadata = {
        "field": field,
        "axis": AXES[axis],
        "index": str(index),
        "step": str(snapshot.step),
        "time": repr(snapshot.time),
        "min": repr(float(vmin)),
        "max": repr(float(vmax)),
        "colormap": colormap,
    }
    return image, metadata


def _default_range(snapshot: Snapshot, field: str, values: np.ndarray) -> Tuple[float, float]:
    """头部记录的整个网格范围，没有记录时取切片自身范围"""
    ranges = snapshot.header.get("ranges", {})
    if field in ranges:
        return float(ranges[field][0]), float(ranges[field][1])
    if field == "overpressure" and "pres" in ranges:
        amb = float(snapshot.header["ambient"]["pres"])
        return float(ranges["pres"][0]) - amb, float(ranges["pres"][1]) - amb
    return float(values.min()), float(values.max())


def _png_chunk(kind: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF)


def encode_png(image: np.ndarray, text: Optional[Dict[str, str]] = None) -> bytes:
    """
    编码 PNG 并在 IHDR 之后插入 tEXt 块

    Raises:
        IOError: OpenCV 编码失败
    """
    ok, buffer = cv2.imencode(".png", image)
    if not ok:
        raise IOError("PNG encoding failed")
    data = buffer.tobytes()
    if not text:
        return data
    chunks = b"".join(
        _png_chunk(b"tEXt", key.encode("latin-1") + b"\x00" + str(value).encode("latin-1"))
        for key, value in text.items()
    )
    return data[:_IHDR_END] + chunks + data[_IHDR_END:]


def read_png_text(data: bytes) -> Dict[str, str]:
    """读取 PNG 中的全部 tEXt 块"""
    if not data.startswith(_PNG_SIGNATURE):
        raise ValueError("not a PNG file")
    text = {}
    pos = len(_PNG_SIGNATURE)
    while pos + 8 <= len(data):
        length, kind = struct.unpack(">I4s", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        if kind == b"tEXt":
            key, _, value = body.partition(b"\x00")
            text[key.decode("latin-1")] = value.decode("latin-1")
        if kind == b"IEND":
            break
        pos += 12 + length
    return text


class ImageSaver:
    """
    图像保存工具

    切片文件名由字段、切片位置与步数确定；渲染图默认以时间戳命名
    """

    def __init__(self, save_dir: Optional[str] = None):
        """
        初始化图像保存器

        Args:
            save_dir: 保存目录路径，如果为 None 则需要后续设置
        """
        self._save_dir = save_dir
        self._saved_count = 0

    @property
    def save_dir(self) -> Optional[str]:
        """获取保存目录"""
        return self._save_dir

    @property
    def saved_count(self) -> int:
        """获取已保存的图像数"""
        return self._saved_count

    def set_save_dir(self, directory: str) -> bool:
        """
        设置保存目录

        Args:
            directory: 目录路径

        Returns:
            是否成功
        """
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as e:
            logger.error(f"创建目录失败: {e}")
            return False

        self._save_dir = directory
        return True

    def _generate_timestamp(self) -> str:
        """生成时间戳字符串"""
        return datetime.now().strftime("%Y%m%d_%H%M%S_%f")[:-3]  # 精确到毫秒

    def _write(self, name: str, image: np.ndarray, text: Optional[Dict[str, str]]) -> str:
        if not self._save_dir:
            raise ValueError("保存目录未设置")
        path = os.path.join(self._save_dir, name)
        with open(path, "wb") as f:
            f.write(encode_png(image, text))
        self._saved_count += 1
        logger.info(f"已保存: {path}")
        return path

    def save_slice(
        self,
        snapshot: Snapshot,
        field: str,
        axis: int,
        index: int,
        colormap: str = "jet",
        vmin: Optional[float] = None,
        vmax: Optional[float] = None,
        name: Optional[str] = None,
    ) -> str:
        """
        保存快照切片

        Returns:
            保存的文件路径
        """
        image, text = render_slice(snapshot, field, axis, index, colormap, vmin, vmax)
        name = name or f"{field}_{AXES[axis]}{index:03d}_{snapshot.step:07d}.png"
        return self._write(name, image, text)

    def save_gray(self, image: np.ndarray, name: Optional[str] = None,
                  text: Optional[Dict[str, str]] = None) -> str:
        """保存 [0, 1] 灰度图 (折射渲染)"""
        name = name or f"refraction_{self._generate_timestamp()}.png"
        return self._write(name, to_uint8(image), text)

    def save_rgb(self, image: np.ndarray, name: Optional[str] = None,
                 text: Optional[Dict[str, str]] = None) -> str:
        """保存 [0, 1] RGB 图 (粒子渲染)"""
        # OpenCV 使用 BGR 格式，需要转换
        bgr = cv2.cvtColor(to_uint8(image), cv2.COLOR_RGB2BGR)
        name = name or f"particles_{self._generate_timestamp()}.png"
        return self._write(name, bgr, text)
