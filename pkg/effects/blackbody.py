"""
黑体着色 - 按普朗克辐射在代表波长上的强度给粒子上色

RGB 与三个代表波长上的光谱辐亮度成正比，整体归一化使参考温度
(默认 2900 K) 时最强的通道为 1；不透明度随温度线性爬升。
不考虑电子激发的线发射。
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from fluid.constants import BOLTZMANN

PLANCK = 6.62607015e-34         # 普朗克常数 (J·s)
LIGHT_SPEED = 2.99792458e8      # 光速 (m/s)

DEFAULT_WAVELENGTHS = (610e-9, 549e-9, 468e-9)      # R, G, B (m)


def planck_radiance(wavelength, temp) -> np.ndarray:
    """
    普朗克光谱辐亮度 B(λ, T) (W·sr⁻¹·m⁻³)

    T ≤ 0 时为 0
    """
    wavelength = np.asarray(wavelength, dtype=np.float64)
    temp = np.asarray(temp, dtype=np.float64)
    safe = np.where(temp > 0.0, temp, 1.0)
    with np.errstate(over="ignore"):
        x = PLANCK * LIGHT_SPEED / (wavelength * BOLTZMANN * safe)
        value = 2.0 * PLANCK * LIGHT_SPEED ** 2 / wavelength ** 5 / np.expm1(x)
    return np.where(temp > 0.0, value, 0.0)


@dataclass(frozen=True)
class BlackbodyPalette:
    """黑体调色参数"""
    wavelengths: Tuple[float, float, float] = DEFAULT_WAVELENGTHS
    reference_temperature: float = 2900.0   # 该温度时最强通道为 1 (K)
    alpha_start: float = 500.0              # 不透明度从 0 开始上升 (K)
    alpha_full: float = 1500.0              # 完全不透明 (K)

    def __post_init__(self):
        if not self.reference_temperature > 0.0:
            raise ValueError("reference temperature must be positive")
        if not self.alpha_full > self.alpha_start:
            raise ValueError("alpha ramp must be increasing")

    @property
    def scale(self) -> float:
        reference = planck_radiance(np.asarray(self.wavelengths), self.reference_temperature)
        return 1.0 / float(reference.max())

    def color(self, temp) -> np.ndarray:
        """
        RGBA 颜色

        Args:
            temp: 温度 (K)，标量或数组

        Returns:
            (..., 4)，各分量 ∈ [0, 1]；T = 0 为完全透明的黑色
        """
        temp = np.asarray(temp, dtype=np.float64)
        lam = np.asarray(self.wavelengths).reshape((3,) + (1,) * temp.ndim)
        rgb = np.clip(planck_radiance(lam, temp[None]) * self.scale, 0.0, 1.0)
        alpha = np.clip((temp - self.alpha_start) / (self.alpha_full - self.alpha_start), 0.0, 1.0)
        alpha = np.where(temp > 0.0, alpha, 0.0)
        return np.moveaxis(np.concatenate([rgb, alpha[None]]), 0, -1)


def blackbody_color(temp, palette: BlackbodyPalette = BlackbodyPalette()) -> np.ndarray:
    """按默认调色参数计算 RGBA"""
    return palette.color(temp)
