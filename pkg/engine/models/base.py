"""
Base model for all domain objects
"""
import numpy as np


def to_plain(value):
    """Convert numpy values and nested models into JSON friendly values"""
    if isinstance(value, BaseModel):
        return value.to_dict()
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


class BaseModel:
    """Abstract base model with dictionary conversion"""
    __fields__ = ()

    def to_dict(self):
        """Convert model to dictionary"""
        return {name: to_plain(getattr(self, name)) for name in self.__fields__}

    def __repr__(self):
        shown = ', '.join(
            f'{name}={getattr(self, name)!r}'
            for name in self.__fields__[:3]
            if np.isscalar(getattr(self, name, None))
        )
        return f"<{self.__class__.__name__}({shown})>"
