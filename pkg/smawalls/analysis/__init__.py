"""Probes of the jump densities"""

from . import bv_probe
