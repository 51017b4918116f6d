"""Methods and definitions that are used by the other packages"""

from . import base
from . import config
from . import exceptions
from . import types
from . import util
