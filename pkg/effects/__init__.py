"""后处理效果模块 - 示踪粒子、黑体着色、粉尘与折射渲染"""

from .sampling import trilinear, trilinear_gradient, trilinear_weighted
from .blackbody import BlackbodyPalette, blackbody_color, planck_radiance
from .tracers import TracerSet, advect_tracers, seed_tracers
from .dust import DustCloud, DustConfig, advect_dust, spawn_dust, surface_sources
from .camera import Camera
from .refraction import DensityVolume, RefractionConfig, refract_ray, render_refraction, trace_rays
from .splat import splat_particles

__all__ = [
    'trilinear',
    'trilinear_gradient',
    'trilinear_weighted',
    'BlackbodyPalette',
    'blackbody_color',
    'planck_radiance',
    'TracerSet',
    'advect_tracers',
    'seed_tracers',
    'DustCloud',
    'DustConfig',
    'advect_dust',
    'spawn_dust',
    'surface_sources',
    'Camera',
    'DensityVolume',
    'RefractionConfig',
    'refract_ray',
    'render_refraction',
    'trace_rays',
    'splat_particles',
]
