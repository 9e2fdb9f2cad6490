"""Sample-block containers shared by every processing stage.

All signals travel as :class:`ComplexFrame` (complex baseband samples plus
their sample rate) and bit streams as :class:`BitFrame`.  Amplitudes are
dimensionless; in physical mode they are read as volts across a 1-ohm
reference, so ``|x|**2`` is watts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = ["BitFrame", "ComplexFrame"]


@dataclass
class BitFrame:
    """An ordered block of hard bits (values 0/1)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size == 0:
            raise ParameterError("BitFrame requires a non-empty 1-D bit sequence")
        if not np.isin(bits, (0, 1)).all():
            raise ParameterError("BitFrame elements must be exactly 0 or 1")
        self.bits = bits.astype(np.int8)

    @property
    def frame_len(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.frame_len


@dataclass
class ComplexFrame:
    """A block of complex baseband samples at a known sample rate."""

    samples: np.ndarray
    sample_rate_hz: float
    start_sample: int = field(default=0)
    """Index of the first sample on the global sample clock (carries the
    persistent counter used by phase/frequency rotation across frames)."""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ParameterError("ComplexFrame samples must be 1-D")
        if not float(self.sample_rate_hz) > 0.0:
            raise ParameterError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        if samples.size and not np.isfinite(samples).all():
            raise ParameterError("ComplexFrame samples must be finite (no NaN/Inf)")
        self.samples = samples
        self.sample_rate_hz = float(self.sample_rate_hz)

    def with_samples(self, samples: np.ndarray) -> "ComplexFrame":
        """New frame with the same clock but different samples."""
        return ComplexFrame(samples, self.sample_rate_hz, self.start_sample)

    @property
    def mean_power(self) -> float:
        """Mean ``|x|**2`` over the frame (watts into 1 ohm)."""
        if self.samples.size == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))

    def __len__(self) -> int:
        return int(self.samples.size)
