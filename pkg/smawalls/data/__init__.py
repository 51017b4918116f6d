"""Reading and writing profiles, tables and reports"""

from . import io
from . import exceptions
