"""
基本形体 - 球、长方体、圆柱、圆环、楔形

用于成形装药与简单物体。volume 给定时按目标体积等比缩放 (网格体积恰为 V₀)。
"""

import logging
from typing import Optional, Sequence

import numpy as np

from .mesh import MeshError, TriangleMesh

logger = logging.getLogger(__name__)

SHAPES = ("sphere", "box", "cylinder", "torus", "wedge")


def _outward(mesh: TriangleMesh) -> TriangleMesh:
    return mesh.flipped() if mesh.signed_volume < 0.0 else mesh


def icosphere(radius: float = 1.0, subdivisions: int = 3, name: str = "sphere") -> TriangleMesh:
    """正二十面体细分球面，三角形数 20·4^subdivisions"""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    tris = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    mesh = TriangleMesh(verts, tris, name)
    for _ in range(subdivisions):
        mesh = mesh.subdivided()
    unit = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
    return _outward(TriangleMesh(unit * radius, mesh.triangles, name))


def box(size: Sequence[float] = (1.0, 1.0, 1.0), name: str = "box") -> TriangleMesh:
    """以原点为中心的长方体，12 个三角形"""
    sx, sy, sz = (0.5 * float(s) for s in size)
    verts = np.array([
        [-sx, -sy, -sz], [sx, -sy, -sz], [sx, sy, -sz], [-sx, sy, -sz],
        [-sx, -sy, sz], [sx, -sy, sz], [sx, sy, sz], [-sx, sy, sz],
    ])
    tris = np.array([
        [0, 2, 1], [0, 3, 2],       # -z
        [4, 5, 6], [4, 6, 7],       # +z
        [0, 1, 5], [0, 5, 4],       # -y
        [2, 3, 7], [2, 7, 6],       # +y
        [1, 2, 6], [1, 6, 5],       # +x
        [3, 0, 4], [3, 4, 7],       # -x
    ])
    return _outward(TriangleMesh(verts, tris, name))


def cylinder(radius: float = 1.0, height: float = 1.0, segments: int = 48, name: str = "cylinder") -> TriangleMesh:
    """轴线沿 z、以原点为中心的圆柱"""
    angles = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    half = 0.5 * height
    bottom = np.column_stack([ring, np.full(segments, -half)])
    top = np.column_stack([ring, np.full(segments, half)])
    verts = np.concatenate([bottom, top, [[0.0, 0.0, -half], [0.0, 0.0, half]]])
    cb, ct = 2 * segments, 2 * segments + 1
    i = np.arange(segments)
    j = (i + 1) % segments
    tris = np.concatenate([
        np.stack([i, j, j + segments], axis=1),
        np.stack([i, j + segments, i + segments], axis=1),
        np.stack([np.full(segments, cb), j, i], axis=1),
        np.stack([np.full(segments, ct), i + segments, j + segments], axis=1),
    ])
    return _outward(TriangleMesh(verts, tris, name))


def torus(
    major_radius: float = 2.0,
    minor_radius: float = 0.5,
    major_segments: int = 48,
    minor_segments: int = 24,
    name: str = "torus",
) -> TriangleMesh:
    """对称轴沿 z 的圆环"""
    if not major_radius > minor_radius > 0.0:
        raise MeshError("torus needs major_radius > minor_radius > 0")
    u = 2.0 * np.pi * np.arange(major_segments) / major_segments
    v = 2.0 * np.pi * np.arange(minor_segments) / minor_segments
    uu, vv = np.meshgrid(u, v, indexing="ij")
    r = major_radius + minor_radius * np.cos(vv)
    verts = np.stack([r * np.cos(uu), r * np.sin(uu), minor_radius * np.sin(vv)], axis=-1).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(major_segments), np.arange(minor_segments), indexing="ij")
    i, j = i.ravel(), j.ravel()
    i1 = (i + 1) % major_segments
    j1 = (j + 1) % minor_segments
    a = i * minor_segments + j
    b = i1 * minor_segments + j
    c = i1 * minor_segments + j1
    d = i * minor_segments + j1
    tris = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    return _outward(TriangleMesh(verts, tris, name))


def wedge(size: Sequence[float] = (1.0, 1.0, 1.0), name: str = "wedge") -> TriangleMesh:
    """
    楔形 (直角三棱柱)

    截面是 xz 平面内的直角三角形，沿 y 拉伸；斜面朝 +x+z
    """
    sx, sy, sz = (float(s) for s in size)
    verts = np.array([
        [0, 0, 0], [sx, 0, 0], [0, 0, sz],
        [0, sy, 0], [sx, sy, 0], [0, sy, sz],
    ], dtype=np.float64)
    verts -= verts.mean(axis=0)
    tris = np.array([
        [0, 2, 1], [3, 4, 5],           # 两个三角形端面
        [0, 1, 4], [0, 4, 3],           # 底面
        [0, 3, 5], [0, 5, 2],           # 竖直面
        [1, 2, 5], [1, 5, 4],           # 斜面
    ])
    return _outward(TriangleMesh(verts, tris, name))


def scale_to_volume(mesh: TriangleMesh, volume: float) -> TriangleMesh:
    """围绕质心等比缩放到目标体积"""
    if not volume > 0.0:
        raise MeshError(f"target volume must be positive, got {volume}")
    current = mesh.signed_volume
    if not current > 0.0:
        raise MeshError(f"mesh '{mesh.name}' has no positive volume to scale")
    factor = (volume / current) ** (1.0 / 3.0)
    return mesh.scaled(factor, about=mesh.vertices.mean(axis=0))


def build_shape(
    kind: str,
    center: Sequence[float] = (0.0, 0.0, 0.0),
    volume: Optional[float] = None,
    size: Optional[Sequence[float]] = None,
    radius: Optional[float] = None,
    height: Optional[float] = None,
    minor_radius: Optional[float] = None,
    resolution: int = 3,
    name: Optional[str] = None,
) -> TriangleMesh:
    """
    按名称构造基本形体并平移到 center

    Args:
        kind: sphere | box | cylinder | torus | wedge
        center: 中心位置 (m)
        volume: 目标体积 V₀ (m³)，给定时覆盖尺寸参数的绝对大小 (保留比例)
        size: box/wedge 的三边长
        radius: sphere/cylinder 半径，torus 主半径
        height: cylinder 高度
        minor_radius: torus 管半径
        resolution: 曲面细分程度
        name: 网格名

    Returns:
        外法线朝外的闭合网格
    """
    kind = kind.strip().lower()
    name = name or kind
    if kind == "sphere":
        mesh = icosphere(radius or 1.0, subdivisions=resolution, name=name)
    elif kind == "box":
        mesh = box(size or (1.0, 1.0, 1.0), name=name)
    elif kind == "cylinder":
        r = radius or 1.0
        mesh = cylinder(r, height or 2.0 * r, segments=12 * 2 ** max(resolution - 1, 0), name=name)
    elif kind == "torus":
        major = radius or 2.0
        mesh = torus(
            major, minor_radius or 0.25 * major,
            major_segments=12 * 2 ** max(resolution - 1, 0),
            minor_segments=6 * 2 ** max(resolution - 1, 0),
            name=name,
        )
    elif kind == "wedge":
        mesh = wedge(size or (1.0, 1.0, 1.0), name=name)
    else:
        raise MeshError(f"unknown shape '{kind}', expected one of {', '.join(SHAPES)}")

    if volume is not None:
        mesh = scale_to_volume(mesh, volume)
    offset = np.asarray(center, dtype=np.float64) - mesh.vertices.mean(axis=0)
    return mesh.translated(offset)
