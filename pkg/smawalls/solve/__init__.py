"""Minimization of the discretized functionals"""

from . import optimizer
from . import problems
