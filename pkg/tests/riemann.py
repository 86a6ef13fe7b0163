"""
理想气体一维黎曼问题精确解 (激波管对照解)

左右两个静止或运动的均匀状态在 x0 处接触，求 t 时刻的密度、速度与压力剖面。
星区压力由 f_L(p) + f_R(p) + Δu = 0 求根 (scipy.optimize.brentq)。
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class GasState:
    rho: float
    u: float
    p: float

    def sound_speed(self, gamma: float) -> float:
        return float(np.sqrt(gamma * self.p / self.rho))


def _wave_function(p: float, side: GasState, gamma: float) -> float:
    """激波 (p > p_k) 或稀疏波 (p ≤ p_k) 两侧的速度跳变"""
    if p > side.p:
        a = 2.0 / ((gamma + 1.0) * side.rho)
        b = (gamma - 1.0) / (gamma + 1.0) * side.p
        return (p - side.p) * np.sqrt(a / (p + b))
    c = side.sound_speed(gamma)
    return 2.0 * c / (gamma - 1.0) * ((p / side.p) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)


def star_state(left: GasState, right: GasState, gamma: float) -> Tuple[float, float]:
    """星区压力与速度 (p*, u*)"""
    du = right.u - left.u

    def residual(p):
        return _wave_function(p, left, gamma) + _wave_function(p, right, gamma) + du

    hi = max(left.p, right.p)
    while residual(hi) < 0.0:
        hi *= 2.0
    p_star = brentq(residual, 1e-12 * hi, hi, xtol=1e-12 * hi, rtol=1e-14)
    u_star = 0.5 * (left.u + right.u) + 0.5 * (
        _wave_function(p_star, right, gamma) - _wave_function(p_star, left, gamma)
    )
    return float(p_star), float(u_star)


def _sample_side(s: float, side: GasState, p_star: float, u_star: float, gamma: float, sign: float):
    """
    sign = +1 为左侧波，−1 为右侧波 (按镜像处理)

    Returns:
        (rho, u, p)
    """
    c = side.sound_speed(gamma)
    gm = (gamma - 1.0) / (gamma + 1.0)
    u_k = sign * side.u
    us = sign * u_star
    s = sign * s
    if p_star > side.p:
        ratio = p_star / side.p
        shock = u_k - c * np.sqrt((gamma + 1.0) / (2.0 * gamma) * ratio + (gamma - 1.0) / (2.0 * gamma))
        if s < shock:
            return side.rho, side.u, side.p
        rho = side.rho * (ratio + gm) / (gm * ratio + 1.0)
        return rho, u_star, p_star

    c_star = c * (p_star / side.p) ** ((gamma - 1.0) / (2.0 * gamma))
    head = u_k - c
    tail = us - c_star
    if s < head:
        return side.rho, side.u, side.p
    if s > tail:
        return side.rho * (p_star / side.p) ** (1.0 / gamma), u_star, p_star
    u = 2.0 / (gamma + 1.0) * (c + (gamma - 1.0) / 2.0 * u_k + s)
    cf = 2.0 / (gamma + 1.0) * (c + (gamma - 1.0) / 2.0 * (u_k - s))
    rho = side.rho * (cf / c) ** (2.0 / (gamma - 1.0))
    p = side.p * (cf / c) ** (2.0 * gamma / (gamma - 1.0))
    return rho, sign * u, p


def exact_profile(
    x: np.ndarray, x0: float, t: float, left: GasState, right: GasState, gamma: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    t 时刻在 x 处的精确解

    Returns:
        (rho, u, p)，与 x 同形
    """
    p_star, u_star = star_state(left, right, gamma)
    rho = np.empty(len(x))
    u = np.empty(len(x))
    p = np.empty(len(x))
    for n, xi in enumerate(np.asarray(x, dtype=np.float64)):
        s = (xi - x0) / t
        if s <= u_star:
            rho[n], u[n], p[n] = _sample_side(s, left, p_star, u_star, gamma, 1.0)
        else:
            rho[n], u[n], p[n] = _sample_side(s, right, p_star, u_star, gamma, -1.0)
    return rho, u, p


def shock_position(x0: float, t: float, left: GasState, right: GasState, gamma: float) -> float:
    """向右传播的激波位置 (右侧为低压区)"""
    p_star, _ = star_state(left, right, gamma)
    c = right.sound_speed(gamma)
    speed = right.u + c * np.sqrt((gamma + 1.0) / (2.0 * gamma) * p_star / right.p + (gamma - 1.0) / (2.0 * gamma))
    return x0 + speed * t
