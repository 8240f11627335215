"""inlab: instruction-learning locomotion laboratory."""
from .shared import config as _config  # noqa: F401  (logging setup)

__version__ = "0.1.0"
