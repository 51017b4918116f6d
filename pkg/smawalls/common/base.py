import inspect
from typing import Type, TypeVar


class _Base:

    T = TypeVar("T")

    @classmethod
    def from_other(cls: Type[T], other: T, **kwargs) -> T:
        """Create a new object by partially overwriting the properties of another

        Args:
            other: The other object
            **kwargs: Arguments that should be overwritten
        """
        required = inspect.getfullargspec(cls.__init__)[0]

        other_args = dict()
        for name in required:
            if name not in kwargs.keys() and name != "self":

                # first, try public property, then private property
                if hasattr(other, name):
                    other_args[name] = getattr(other, name)
                elif hasattr(other, "_" + name):
                    other_args[name] = getattr(other, "_" + name)

        return cls(**kwargs, **other_args)

    def from_self(self: T, **kwargs) -> T:
        return type(self).from_other(self, **kwargs)
