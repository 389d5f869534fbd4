"""Multi-bit quantized compressed sensing: quantizers, channels and recovery."""

from .channels import *  # noqa: F401,F403
from .exceptions import *  # noqa: F401,F403
from .experiments import *  # noqa: F401,F403
from .noise import *  # noqa: F401,F403
from .quantizer import *  # noqa: F401,F403
from .recovery import *  # noqa: F401,F403
from .scale import *  # noqa: F401,F403
from .signals import *  # noqa: F401,F403
from .stats import *  # noqa: F401,F403

__version__ = "0.1.0"
