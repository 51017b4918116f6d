class MalformedConfigException(Exception):
    """This exception indicates that a configuration file cannot be parsed"""

    def __init__(self, path, line: int, reason: str):
        super().__init__('Malformed config file "{}", line {:d}: {}'.format(path, line, reason))


class MalformedProfileException(Exception):
    """This exception indicates that a profile file does not describe a valid radial profile"""

    def __init__(self, path, reason: str):
        super().__init__('Malformed profile file "{}": {}'.format(path, reason))
