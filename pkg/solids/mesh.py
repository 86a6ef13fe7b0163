"""
三角网格 - 顶点/三角形索引表、几何派生量、流形检查与纯文本读写

文本格式 (每行一条):
    # 注释
    v x y z         顶点坐标 (m)
    f a b c         三角形，1 起始索引，右手绕序 = 外法线
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)


class MeshError(ValueError):
    """网格不满足要求 (非流形、退化、格式错误)"""


@dataclass
class TriangleMesh:
    """索引三角网格"""
    vertices: np.ndarray        # (n, 3) float64
    triangles: np.ndarray       # (m, 3) int64
    name: str = ""

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshError(f"mesh '{self.name}': triangle index out of range")

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @property
    def corners(self) -> np.ndarray:
        """每个三角形的三个顶点 (m, 3, 3)"""
        return self.vertices[self.triangles]

    def _cross(self) -> np.ndarray:
        c = self.corners
        return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._cross(), axis=1)

    @property
    def normals(self) -> np.ndarray:
        """单位外法线 (m, 3)，退化三角形为零向量"""
        cross = self._cross()
        length = np.linalg.norm(cross, axis=1, keepdims=True)
        return np.divide(cross, length, out=np.zeros_like(cross), where=length > 0.0)

    @property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @property
    def signed_volume(self) -> float:
        """散度定理求体积，外法线时为正"""
        c = self.corners
        return float(np.sum(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2]))) / 6.0)

    @property
    def bounds(self) -> np.ndarray:
        """(2, 3) 包围盒"""
        return np.stack([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    @property
    def max_edge_length(self) -> float:
        c = self.corners
        edges = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 1], c[:, 0] - c[:, 2]], axis=1)
        return float(np.linalg.norm(edges, axis=2).max()) if len(c) else 0.0

    def check_manifold(self):
        """
        检查闭合流形: 每条边恰好被两个三角形共享，且方向相反

        Raises:
            MeshError: 指出第一条有问题的边 (按顶点索引排序)
        """
        if self.triangle_count == 0:
            raise MeshError(f"mesh '{self.name}' has no triangles")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        undirected = np.sort(directed, axis=1)
        edges, counts = np.unique(undirected, axis=0, return_counts=True)
        bad = np.flatnonzero(counts != 2)
        if bad.size:
            a, b = edges[bad[0]]
            raise MeshError(
                f"mesh '{self.name}' is not a closed manifold: edge ({a + 1}, {b + 1}) "
                f"is shared by {counts[bad[0]]} triangles"
            )
        # 同向的边出现两次说明绕序不一致
        _, directed_counts = np.unique(directed, axis=0, return_counts=True)
        if np.any(directed_counts != 1):
            dup = np.unique(directed, axis=0)[np.flatnonzero(directed_counts != 1)[0]]
            raise MeshError(
                f"mesh '{self.name}' has inconsistent winding at edge ({dup[0] + 1}, {dup[1] + 1})"
            )

    def validate_closed(self):
        """闭合流形且外法线朝外 (有符号体积 > 0)"""
        self.check_manifold()
        volume = self.signed_volume
        if not volume > 0.0:
            raise MeshError(
                f"mesh '{self.name}' is degenerate or inside-out (signed volume {volume:.6g})"
            )

    def winding_numbers(self, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """
        点的广义环绕数 (三角形立体角之和 / 4π)，闭合外法线网格内部为 1

        Args:
            points: (n, 3)
            chunk: 每批处理的点数
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        c = self.corners
        result = np.empty(len(points))
        for start in range(0, len(points), chunk):
            p = points[start:start + chunk]
            a = c[None, :, 0] - p[:, None]
            b = c[None, :, 1] - p[:, None]
            d = c[None, :, 2] - p[:, None]
            la = np.linalg.norm(a, axis=2)
            lb = np.linalg.norm(b, axis=2)
            ld = np.linalg.norm(d, axis=2)
            det = np.einsum("pti,pti->pt", a, np.cross(b, d))
            div = (la * lb * ld
                   + np.einsum("pti,pti->pt", a, b) * ld
                   + np.einsum("pti,pti->pt", b, d) * la
                   + np.einsum("pti,pti->pt", d, a) * lb)
            result[start:start + chunk] = np.sum(2.0 * np.arctan2(det, div), axis=1) / (4.0 * np.pi)
        return result

    def contains(self, points: np.ndarray) -> np.ndarray:
        """点是否在闭合网格内部"""
        return self.winding_numbers(points) > 0.5

    def copy(self) -> "TriangleMesh":
        return TriangleMesh(self.vertices.copy(), self.triangles.copy(), self.name)

    def transformed(
        self, rotation: Optional[np.ndarray] = None, translation: Sequence[float] = (0.0, 0.0, 0.0)
    ) -> "TriangleMesh":
        """x' = R·x + t"""
        verts = self.vertices
        if rotation is not None:
            verts = verts @ np.asarray(rotation, dtype=np.float64).T
        return TriangleMesh(verts + np.asarray(translation, dtype=np.float64), self.triangles.copy(), self.name)

    def translated(self, offset: Sequence[float]) -> "TriangleMesh":
        return self.transformed(None, offset)

    def scaled(self, factor: float, about: Optional[Sequence[float]] = None) -> "TriangleMesh":
        center = np.zeros(3) if about is None else np.asarray(about, dtype=np.float64)
        return TriangleMesh(center + (self.vertices - center) * factor, self.triangles.copy(), self.name)

    def flipped(self) -> "TriangleMesh":
        """反转所有三角形绕序"""
        return TriangleMesh(self.vertices.copy(), self.triangles[:, ::-1].copy(), self.name)

    def subdivided(self) -> "TriangleMesh":
        """每个三角形按边中点一分为四 (共享中点，保持流形)"""
        t = self.triangles
        n = self.vertex_count
        edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        unique, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        mids = 0.5 * (self.vertices[unique[:, 0]] + self.vertices[unique[:, 1]])
        m = len(t)
        ab, bc, ca = (inverse[:m] + n, inverse[m:2 * m] + n, inverse[2 * m:] + n)
        a, b, c = t[:, 0], t[:, 1], t[:, 2]
        tris = np.concatenate([
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ])
        return TriangleMesh(np.concatenate([self.vertices, mids]), tris, self.name)

    def refined(self, max_edge: float, max_levels: int = 8) -> "TriangleMesh":
        """
        反复细分直到最长边小于 max_edge

        Args:
            max_edge: 最长边上限 (m)
            max_levels: 最多细分次数
        """
        mesh = self
        level = 0
        while mesh.max_edge_length >= max_edge and level < max_levels:
            mesh = mesh.subdivided()
            level += 1
        if mesh.max_edge_length >= max_edge:
            logger.warning(
                f"网格 '{self.name}' 细分 {max_levels} 次后最长边仍为 {mesh.max_edge_length:.4g} m"
            )
        return mesh


def parse_mesh(text: str, name: str = "") -> TriangleMesh:
    """
    解析纯文本网格

    Raises:
        MeshError: 行格式错误
    """
    vertices = []
    triangles = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "v" and len(parts) == 4:
                vertices.append([float(p) for p in parts[1:]])
            elif tag == "f" and len(parts) == 4:
                triangles.append([int(p) - 1 for p in parts[1:]])
            else:
                raise ValueError(raw)
        except ValueError:
            raise MeshError(f"mesh '{name}' line {lineno}: cannot parse '{raw.strip()}'") from None
    return TriangleMesh(np.asarray(vertices).reshape(-1, 3), np.asarray(triangles, dtype=np.int64).reshape(-1, 3), name)


def format_mesh(mesh: TriangleMesh) -> str:
    """序列化为纯文本，浮点数使用最短往返表示 (逐位还原)"""
    lines = [f"# {mesh.name}" if mesh.name else "# mesh"]
    lines.extend(f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist())
    lines.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist())
    return "\n".join(lines) + "\n"


def load_mesh(path: Union[str, Path], name: Optional[str] = None) -> TriangleMesh:
    path = Path(path)
    return parse_mesh(path.read_text(encoding="utf-8"), name or path.stem)


def save_mesh(mesh: TriangleMesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_mesh(mesh), encoding="utf-8")
    return path

