class MisconfigurationException(Exception):
    pass


class InvalidArgumentException(Exception):
    pass


class ManifoldViolation(InvalidArgumentException):
    """A Q-tensor does not lie on the manifold of normalized uniaxial tensors"""

    pass


class DegenerateJump(InvalidArgumentException):
    """The two sides of a jump carry the same Q-tensor"""

    pass


class OnJumpSet(InvalidArgumentException):
    """A point lies on the jump curve, where the director is not defined"""

    pass
