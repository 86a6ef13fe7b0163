"""
物理常数与单位换算

默认值为海平面标准空气，全部可在场景文件 [constants] 中覆盖
"""

from dataclasses import dataclass, field, replace
from typing import Tuple


# 单位换算
ATM = 101325.0                  # 1 标准大气压 (Pa)
BOLTZMANN = 1.380649e-23        # 玻尔兹曼常数 (J/K)


@dataclass(frozen=True)
class PhysicalConstants:
    """空气的物理常数"""
    mu: float = 1.8e-5              # 粘性系数 (N·s/m²)
    k_thermal: float = 0.026        # 热导率 (W/(m·K))
    c_v: float = 717.5              # 定容比热 (J/(kg·K))
    r_gas: float = 287.0            # 空气气体常数 (J/(kg·K))
    k_gladstone: float = 2.26e-4    # Dale-Gladstone 常数 (m³/kg)
    gravity: Tuple[float, float, float] = field(default=(0.0, 0.0, -9.81))  # 体积力加速度 (m/s²)
    hydrostatic: bool = True        # 环境大气处于静力平衡，重力只作用于与环境的密度差

    def __post_init__(self):
        for name in ("mu", "k_thermal", "c_v", "r_gas"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if len(self.gravity) != 3:
            raise ValueError("gravity must be a 3-vector")
        # gravity 统一为 float 元组
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))

    @property
    def gamma(self) -> float:
        """比热比 γ = 1 + R/c_V (派生量，不单独存储)"""
        return 1.0 + self.r_gas / self.c_v

    def with_overrides(self, **overrides) -> "PhysicalConstants":
        """返回覆盖部分字段后的新常数对象"""
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "k_thermal": self.k_thermal,
            "c_v": self.c_v,
            "r_gas": self.r_gas,
            "k_gladstone": self.k_gladstone,
            "gravity": list(self.gravity),
            "hydrostatic": self.hydrostatic,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicalConstants":
        return cls(
            mu=float(data["mu"]),
            k_thermal=float(data["k_thermal"]),
            c_v=float(data["c_v"]),
            r_gas=float(data["r_gas"]),
            k_gladstone=float(data["k_gladstone"]),
            gravity=tuple(data["gravity"]),
            hydrostatic=bool(data.get("hydrostatic", True)),
        )
