"""Body mesh recovery toolkit: body model, projection, alignment losses, metrics and the augmentation harness."""

from ._robomesh import *  # noqa: F401,F403
from ._robomesh import __doc__  # noqa: F401

__version__ = "0.1.0"
