"""
流体 → 固体耦合 - 动态超压与三角形面力

每个三角形上的力视为常数: f = −n̂·A·P̄_dyn，
P̄_dyn = (P − P_amb) + ½ρ(v_rel·n̂)²，忽略切向剪切力。
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from effects.sampling import trilinear_weighted
from fluid.grid import FluidGrid
from .mesh import TriangleMesh
from .rigid_body import RigidBody

logger = logging.getLogger(__name__)


def dynamic_overpressure(pres, ambient_p, rho, v_fluid, v_surface, normal):
    """
    动态超压 P̄ + ½ρ(v_rel·n̂)²

    Args:
        pres: 流体压力 (Pa)
        ambient_p: 环境压力 (Pa)
        rho: 密度 (kg/m³)
        v_fluid, v_surface: 流体与表面速度 (..., 3)
        normal: 单位法线 (..., 3)

    Returns:
        动态超压 (Pa)，允许为负 (吸力)
    """
    v_rel = np.asarray(v_fluid, dtype=np.float64) - np.asarray(v_surface, dtype=np.float64)
    vn = np.sum(v_rel * np.asarray(normal, dtype=np.float64), axis=-1)
    return (np.asarray(pres, dtype=np.float64) - ambient_p) + 0.5 * np.asarray(rho) * vn * vn


@dataclass
class SurfaceSample:
    """三角形质心处的流体采样 (按部分体积加权)"""
    overpressure: np.ndarray    # (m,)
    rho: np.ndarray             # (m,)
    velocity: np.ndarray        # (m, 3)
    open_weight: np.ndarray     # (m,) 插值模板内的流体权重，0 表示没有流体


def sample_surface(grid: FluidGrid, points: np.ndarray) -> SurfaceSample:
    """
    在表面点上采样超压、密度与速度

    超压直接插值 P − P_amb，环境场给出精确的零载荷
    """
    f = grid.read
    overpressure = f.pres - grid.ambient.pres
    over, weight = trilinear_weighted(grid, overpressure, f.pv, points)
    rho, _ = trilinear_weighted(grid, f.rho, f.pv, points)
    vel, _ = trilinear_weighted(grid, f.vel, f.pv, points)
    return SurfaceSample(overpressure=over, rho=rho, velocity=vel.T, open_weight=weight)


def triangle_forces(
    grid: FluidGrid,
    mesh: TriangleMesh,
    surface_velocity: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    每个三角形受到的流体力 (m, 3)

    Args:
        grid: 流体网格
        mesh: 世界坐标网格
        surface_velocity: 三角形质心处的表面速度 (m, 3)，默认静止
    """
    centroids = mesh.centroids
    normals = mesh.normals
    sample = sample_surface(grid, centroids)
    if surface_velocity is None:
        surface_velocity = np.zeros_like(centroids)
    p_dyn = sample.overpressure + 0.5 * sample.rho * np.sum(
        (sample.velocity - surface_velocity) * normals, axis=1
    ) ** 2
    # 质心附近没有流体的三角形不受力
    p_dyn = np.where(sample.open_weight > 0.0, p_dyn, 0.0)
    return -normals * (mesh.areas * p_dyn)[:, None]


@dataclass
class BodyLoad:
    """一个物体在某一时刻的流体载荷"""
    forces: np.ndarray          # (m, 3) 每个受力三角形
    force: np.ndarray           # (3,) 合力
    torque: np.ndarray          # (3,) 关于质心的合力矩


def compute_body_load(grid: FluidGrid, body: RigidBody) -> BodyLoad:
    """受力网格上的面力、合力与合力矩 (固定求和顺序)"""
    mesh = body.world_force_mesh()
    centroids = mesh.centroids
    forces = triangle_forces(grid, mesh, body.point_velocity(centroids))
    arm = centroids - body.position
    return BodyLoad(
        forces=forces,
        force=np.sum(forces, axis=0),
        torque=np.sum(np.cross(arm, forces), axis=0),
    )


def apply_fluid_forces(
    grid: FluidGrid,
    body: RigidBody,
    dt: float,
    gravity: Sequence[float] = (0.0, 0.0, 0.0),
    load: Optional[BodyLoad] = None,
) -> RigidBody:
    """
    把流体载荷 (加重力) 用显式欧拉积分到刚体上

    Args:
        grid: 流体网格
        body: 刚体 (不可动物体位姿不变)
        dt: 时间步长
        gravity: 重力加速度
        load: 已经算好的载荷 (None 时现算)

    Returns:
        同一刚体对象
    """
    if not body.movable:
        return body
    load = load or compute_body_load(grid, body)
    body.integrate(load.force, load.torque, dt, gravity)
    return body
