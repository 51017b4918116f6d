from pathlib import Path
from typing import Callable, Tuple, Union

import numpy as np

PathOrStr = Union[Path, str]
Point2 = Tuple[float, float]
ArrayOrFloat = Union[np.ndarray, float]

# objective returning value and gradient
Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]
