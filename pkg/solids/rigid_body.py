"""
刚体 - 质量属性、位姿与显式欧拉积分

姿态用旋转矩阵表示: R ← R + Δt·[ω]×R，随后 Gram-Schmidt 正交化。
角速度由角动量求得 ω = I_world⁻¹·L。
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .mesh import MeshError, TriangleMesh

logger = logging.getLogger(__name__)

# 四面体二阶矩的系数矩阵
_COVARIANCE_WEIGHTS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])


def rigid_inertia(mesh: TriangleMesh, mass: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    均匀密度闭合网格的质心与惯性张量 (多面体精确积分)

    以原点为公共顶点把网格分解为四面体，累加体积、一阶矩和二阶矩。

    Args:
        mesh: 闭合流形网格 (外法线)
        mass: 质量 (kg)，必须为正

    Returns:
        (质心 (3,), 关于质心的惯性张量 (3, 3))

    Raises:
        MeshError: 零体积或反向网格
    """
    if not mass > 0.0:
        raise ValueError(f"mass must be positive, got {mass}")
    corners = mesh.corners                                   # (m, 3 顶点, 3 坐标)
    det = np.einsum("ij,ij->i", corners[:, 0], np.cross(corners[:, 1], corners[:, 2]))
    volume = det.sum() / 6.0
    if not volume > 0.0:
        raise MeshError(f"mesh '{mesh.name}' is degenerate (volume {volume:.6g})")

    com = (det[:, None] * corners.sum(axis=1)).sum(axis=0) / (24.0 * volume)
    # A 的列为三个顶点: C = Σ det/120 · A·S·Aᵀ
    a = np.transpose(corners, (0, 2, 1))
    cov = np.einsum("t,tik,kl,tjl->ij", det / 120.0, a, _COVARIANCE_WEIGHTS, a)
    cov -= volume * np.outer(com, com)
    cov *= mass / volume
    inertia = np.trace(cov) * np.eye(3) - cov
    return com, inertia


def skew(w: Sequence[float]) -> np.ndarray:
    """叉乘矩阵 [w]×"""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def orthonormalize(rot: np.ndarray) -> np.ndarray:
    """按列 Gram-Schmidt 正交化"""
    a = rot[:, 0] / np.linalg.norm(rot[:, 0])
    b = rot[:, 1] - np.dot(a, rot[:, 1]) * a
    b /= np.linalg.norm(b)
    c = np.cross(a, b)
    return np.column_stack([a, b, c])


@dataclass
class RigidBody:
    """刚体 (网格位于物体坐标系，质心在原点)"""
    name: str
    mesh: TriangleMesh
    mass: float
    inertia: np.ndarray                                         # 物体坐标系惯性张量
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_momentum: np.ndarray = field(default_factory=lambda: np.zeros(3))
    movable: bool = True
    force_mesh: Optional[TriangleMesh] = None                   # 细分后的受力网格 (物体坐标系)
    voxel_position: Optional[np.ndarray] = None                 # 上次体素化时的位姿
    voxel_orientation: Optional[np.ndarray] = None
    occupancy: Optional[np.ndarray] = None                      # 体素化缓存

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).copy()
        self.orientation = np.asarray(self.orientation, dtype=np.float64).copy()
        self.velocity = np.asarray(self.velocity, dtype=np.float64).copy()
        self.angular_momentum = np.asarray(self.angular_momentum, dtype=np.float64).copy()
        self.inertia = np.asarray(self.inertia, dtype=np.float64)
        if not self.mass > 0.0:
            raise ValueError(f"body '{self.name}': mass must be positive")

    @classmethod
    def from_world_mesh(
        cls,
        name: str,
        mesh: TriangleMesh,
        mass: Optional[float] = None,
        density: Optional[float] = None,
        movable: bool = True,
        velocity: Sequence[float] = (0.0, 0.0, 0.0),
    ) -> "RigidBody":
        """
        由世界坐标网格构造刚体，质量或密度二选一

        Raises:
            MeshError: 非流形或退化网格
        """
        mesh.validate_closed()
        if mass is None:
            if density is None:
                raise ValueError(f"body '{name}': mass or density is required")
            mass = float(density) * mesh.signed_volume
        com, inertia = rigid_inertia(mesh, mass)
        body_mesh = TriangleMesh(mesh.vertices - com, mesh.triangles, mesh.name or name)
        return cls(
            name=name, mesh=body_mesh, mass=float(mass), inertia=inertia,
            position=com, velocity=np.asarray(velocity, dtype=np.float64), movable=movable,
        )

    @property
    def inertia_world(self) -> np.ndarray:
        r = self.orientation
        return r @ self.inertia @ r.T

    @property
    def angular_velocity(self) -> np.ndarray:
        return np.linalg.solve(self.inertia_world, self.angular_momentum)

    def set_angular_velocity(self, omega: Sequence[float]):
        self.angular_momentum = self.inertia_world @ np.asarray(omega, dtype=np.float64)

    def to_world(self, points: np.ndarray) -> np.ndarray:
        return points @ self.orientation.T + self.position

    def world_mesh(self) -> TriangleMesh:
        return self.mesh.transformed(self.orientation, self.position)

    def world_force_mesh(self) -> TriangleMesh:
        mesh = self.force_mesh if self.force_mesh is not None else self.mesh
        return mesh.transformed(self.orientation, self.position)

    def point_velocity(self, points: np.ndarray) -> np.ndarray:
        """表面点速度 v + ω × (p − x)"""
        return self.velocity + np.cross(self.angular_velocity, np.atleast_2d(points) - self.position)

    def prepare_force_mesh(self, h: float, refine: bool = True):
        """
        受力网格: 细分直到最长边小于体素宽度，三角形上的力才可视为常数
        """
        if refine:
            self.force_mesh = self.mesh.refined(h)
        else:
            self.force_mesh = self.mesh
            if self.mesh.max_edge_length > h:
                logger.warning(
                    f"物体 '{self.name}' 的三角形最长边 {self.mesh.max_edge_length:.4g} m 大于体素宽度 {h:.4g} m"
                )

    def mark_voxelized(self, occupancy: np.ndarray):
        self.occupancy = occupancy
        self.voxel_position = self.position.copy()
        self.voxel_orientation = self.orientation.copy()

    def displacement_since_voxelization(self) -> float:
        """自上次体素化以来表面顶点的最大位移 (m)"""
        if self.voxel_position is None:
            return np.inf
        verts = self.mesh.vertices
        now = verts @ self.orientation.T + self.position
        then = verts @ self.voxel_orientation.T + self.voxel_position
        return float(np.max(np.linalg.norm(now - then, axis=1)))

    def needs_revoxelize(self, h: float, fraction: float = 0.25) -> bool:
        return self.displacement_since_voxelization() > fraction * h

    def integrate(
        self,
        force: np.ndarray,
        torque: np.ndarray,
        dt: float,
        gravity: Sequence[float] = (0.0, 0.0, 0.0),
    ):
        """
        显式欧拉: 位姿用时刻 t 的速度推进，随后更新动量

        Args:
            force: 合力 (N)，不含重力
            torque: 关于质心的合力矩 (N·m)
            dt: 时间步长 (s)
            gravity: 重力加速度 (m/s²)
        """
        if not self.movable:
            return
        omega = self.angular_velocity
        self.position = self.position + dt * self.velocity
        self.orientation = orthonormalize(self.orientation + dt * skew(omega) @ self.orientation)
        self.velocity = self.velocity + dt * (np.asarray(force) / self.mass + np.asarray(gravity))
        self.angular_momentum = self.angular_momentum + dt * np.asarray(torque)

    def state_dict(self) -> dict:
        """可序列化的运动状态 (快照用)"""
        return {
            "position": self.position.tolist(),
            "orientation": self.orientation.tolist(),
            "velocity": self.velocity.tolist(),
            "angular_momentum": self.angular_momentum.tolist(),
            "voxel_position": None if self.voxel_position is None else self.voxel_position.tolist(),
            "voxel_orientation": None if self.voxel_orientation is None else self.voxel_orientation.tolist(),
        }

    def load_state(self, state: dict):
        self.position = np.asarray(state["position"], dtype=np.float64)
        self.orientation = np.asarray(state["orientation"], dtype=np.float64)
        self.velocity = np.asarray(state["velocity"], dtype=np.float64)
        self.angular_momentum = np.asarray(state["angular_momentum"], dtype=np.float64)
        vp, vo = state.get("voxel_position"), state.get("voxel_orientation")
        self.voxel_position = None if vp is None else np.asarray(vp, dtype=np.float64)
        self.voxel_orientation = None if vo is None else np.asarray(vo, dtype=np.float64)
