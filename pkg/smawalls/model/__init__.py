"""Q-tensor algebra, jump densities, configurations and their energies"""

from . import qtensor
from . import jump_energy
from . import discretization
from . import fields
from . import functionals
from .functionals import BoundaryForm, BoundaryTermForm, ModelParams, WeightFunction
from .jump_energy import DensityKind

__all__ = ["BoundaryForm", "BoundaryTermForm", "ModelParams", "WeightFunction", "DensityKind"]
