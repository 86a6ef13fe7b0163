"""固体模块 - 网格、体素化、装药与刚体耦合"""

from .mesh import MeshError, TriangleMesh, load_mesh, save_mesh
from .shapes import build_shape
from .voxelizer import free_fraction, occupancy, voxelize
from .charge import Charge, Trigger, ignite_charge, trigger_satisfied
from .rigid_body import RigidBody
from .coupling import apply_fluid_forces, compute_body_load, dynamic_overpressure
from .displacement import DisplacementState, adiabatic_compress, apply_displacement, schedule_displacement
from .force_export import ForceRecorder, read_force_file

__all__ = [
    'MeshError',
    'TriangleMesh',
    'load_mesh',
    'save_mesh',
    'build_shape',
    'free_fraction',
    'occupancy',
    'voxelize',
    'Charge',
    'Trigger',
    'ignite_charge',
    'trigger_satisfied',
    'RigidBody',
    'apply_fluid_forces',
    'compute_body_load',
    'dynamic_overpressure',
    'DisplacementState',
    'adiabatic_compress',
    'apply_displacement',
    'schedule_displacement',
    'ForceRecorder',
    'read_force_file',
]
