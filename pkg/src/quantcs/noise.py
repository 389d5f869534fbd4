"""Noise model descriptors shared by the quantizer analytics and the channels."""

from dataclasses import dataclass

from .exceptions import DomainError

__all__ = ["ADDITIVE", "RANDOM_FLIP", "ADVERSARIAL_FLIP", "NOISE_KINDS", "FLIP_KINDS", "NoiseModel"]

ADDITIVE = "additive"
RANDOM_FLIP = "random_flip"
ADVERSARIAL_FLIP = "adversarial_flip"

NOISE_KINDS = (ADDITIVE, RANDOM_FLIP, ADVERSARIAL_FLIP)
FLIP_KINDS = (RANDOM_FLIP, ADVERSARIAL_FLIP)


@dataclass(frozen=True)
class NoiseModel:
    """One of three observation channels with its scalar parameter.

    ``additive`` carries the pre-quantization noise level sigma >= 0; the two
    flip kinds carry the per-entry flip probability p in [0, 1].
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise DomainError("unknown noise kind %r" % (self.kind,))
        p = float(self.param)
        if p != p or p < 0.0:
            raise DomainError("noise parameter must be nonnegative")
        if self.kind in FLIP_KINDS and p > 1.0:
            raise DomainError("flip probability must lie in [0, 1]")
        object.__setattr__(self, "param", p)

    @classmethod
    def additive(cls, sigma=0.0):
        return cls(ADDITIVE, sigma)

    @classmethod
    def random_flip(cls, p):
        return cls(RANDOM_FLIP, p)

    @classmethod
    def adversarial_flip(cls, p):
        return cls(ADVERSARIAL_FLIP, p)

    @property
    def is_flip(self):
        return self.kind in FLIP_KINDS

    @property
    def sigma(self):
        """Pre-quantization noise level (zero for the flip channels)."""
        return self.param if self.kind == ADDITIVE else 0.0
