"""Link-budget math: antenna gain, free-space path loss, kTB noise, C/N.

Everything here is a pure function of its inputs.  The speed of light is
fixed at 3e8 m/s to match the source figures (affects the 4th significant
digit of the path loss).  Pointing loss is reported as its own budget line
rather than folded into the aperture gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParameterError

__all__ = [
    "SPEED_OF_LIGHT_M_S",
    "BOLTZMANN_J_PER_K",
    "AntennaSpec",
    "LinkGeometry",
    "BudgetLeg",
    "LinkBudgetReport",
    "antenna_gain_db",
    "free_space_path_loss_db",
    "noise_power_dbw",
    "compute_budget",
    "combined_cn_db",
    "format_report",
]

SPEED_OF_LIGHT_M_S = 3.0e8
BOLTZMANN_J_PER_K = 1.380649e-23


@dataclass(frozen=True)
class AntennaSpec:
    diameter_m: float
    efficiency: float
    pointing_loss_db: float = 0.0

    def __post_init__(self):
        if not self.diameter_m > 0:
            raise ParameterError("antenna diameter must be > 0")
        if not 0.0 < self.efficiency <= 1.0:
            raise ParameterError("antenna efficiency must be in (0, 1]")
        if self.pointing_loss_db < 0:
            raise ParameterError("pointing loss must be >= 0 dB")


@dataclass(frozen=True)
class LinkGeometry:
    range_m: float
    frequency_hz: float

    def __post_init__(self):
        if not self.range_m > 0:
            raise ParameterError("range must be > 0 m")
        if not self.frequency_hz > 0:
            raise ParameterError("frequency must be > 0 Hz")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.frequency_hz


@dataclass(frozen=True)
class BudgetLeg:
    """One direction of the link.

    Each antenna side takes exactly one of an explicit gain in dB or an
    :class:`AntennaSpec` (gain computed from aperture and frequency).
    """

    name: str
    tx_power_w: float
    geometry: LinkGeometry
    bandwidth_hz: float
    system_noise_temperature_k: float
    tx_antenna_gain_db: Optional[float] = None
    tx_antenna: Optional[AntennaSpec] = None
    rx_antenna_gain_db: Optional[float] = None
    rx_antenna: Optional[AntennaSpec] = None
    loss_override_db: Optional[float] = None

    def __post_init__(self):
        if not self.tx_power_w > 0:
            raise ParameterError("tx_power_w must be > 0")
        if not self.bandwidth_hz > 0:
            raise ParameterError("bandwidth_hz must be > 0")
        if not self.system_noise_temperature_k > 0:
            raise ParameterError("system_noise_temperature_k must be > 0")
        if (self.tx_antenna_gain_db is None) == (self.tx_antenna is None):
            raise ParameterError(
                "provide exactly one of tx_antenna_gain_db or tx_antenna"
            )
        if (self.rx_antenna_gain_db is None) == (self.rx_antenna is None):
            raise ParameterError(
                "provide exactly one of rx_antenna_gain_db or rx_antenna"
            )
        if self.loss_override_db is not None and self.loss_override_db < 0:
            raise ParameterError("loss_override_db must be >= 0 dB")


@dataclass(frozen=True)
class LinkBudgetReport:
    """Decibel power balance for one leg (plus its input lines)."""

    name: str
    tx_power_dbw: float
    tx_antenna_gain_db: float
    pointing_loss_db: float
    eirp_dbw: float
    path_loss_computed_db: float
    path_loss_override_db: Optional[float]
    path_loss_db: float  # the value actually used
    rx_gain_db: float
    rx_power_dbw: float
    noise_power_dbw: float
    cn_db: float


def antenna_gain_db(spec: AntennaSpec, frequency_hz: float) -> float:
    """Parabolic aperture gain 10*log10(eta*(pi*D/lambda)^2), pointing loss
    excluded (it is a separate budget line)."""
    if not frequency_hz > 0:
        raise ParameterError("frequency must be > 0 Hz")
    lam = SPEED_OF_LIGHT_M_S / frequency_hz
    g = spec.efficiency * (math.pi * spec.diameter_m / lam) ** 2
    return 10.0 * math.log10(g)


def free_space_path_loss_db(geom: LinkGeometry) -> float:
    """20*log10(4*pi*R/lambda)."""
    return 20.0 * math.log10(4.0 * math.pi * geom.range_m / geom.wavelength_m)


def noise_power_dbw(temperature_k: float, bandwidth_hz: float) -> float:
    """kTB in dBW."""
    if not temperature_k > 0 or not bandwidth_hz > 0:
        raise ParameterError("temperature and bandwidth must be > 0")
    return 10.0 * math.log10(BOLTZMANN_J_PER_K * temperature_k * bandwidth_hz)


def compute_budget(leg: BudgetLeg) -> LinkBudgetReport:
    """Evaluate the power balance for one leg.

    EIRP = Pt(dBW) + Gt - pointing loss; Pr = EIRP - Lp + Gr; C/N = Pr - N.
    The computed free-space loss is always reported; an override replaces it
    in the balance when set.
    """
    f = leg.geometry.frequency_hz
    if leg.tx_antenna is not None:
        gt = antenna_gain_db(leg.tx_antenna, f)
        pointing = leg.tx_antenna.pointing_loss_db
    else:
        gt = float(leg.tx_antenna_gain_db)
        pointing = 0.0
    pt_dbw = 10.0 * math.log10(leg.tx_power_w)
    eirp = pt_dbw + gt - pointing

    loss_computed = free_space_path_loss_db(leg.geometry)
    loss_used = leg.loss_override_db if leg.loss_override_db is not None else loss_computed

    if leg.rx_antenna is not None:
        gr = antenna_gain_db(leg.rx_antenna, f)
    else:
        gr = float(leg.rx_antenna_gain_db)

    pr = eirp - loss_used + gr
    n = noise_power_dbw(leg.system_noise_temperature_k, leg.bandwidth_hz)
    return LinkBudgetReport(
        name=leg.name,
        tx_power_dbw=pt_dbw,
        tx_antenna_gain_db=gt,
        pointing_loss_db=pointing,
        eirp_dbw=eirp,
        path_loss_computed_db=loss_computed,
        path_loss_override_db=leg.loss_override_db,
        path_loss_db=loss_used,
        rx_gain_db=gr,
        rx_power_dbw=pr,
        noise_power_dbw=n,
        cn_db=pr - n,
    )


def combined_cn_db(cn_up_db: float, cn_down_db: float) -> float:
    """End-to-end C/N of two cascaded legs (reciprocal sum in linear units).

    Not part of the published tables; provided as an extension.
    """
    up = 10.0 ** (cn_up_db / 10.0)
    down = 10.0 ** (cn_down_db / 10.0)
    return 10.0 * math.log10(1.0 / (1.0 / up + 1.0 / down))


def format_report(report: LinkBudgetReport) -> str:
    """Fixed-width text table for one leg."""
    rows = [
        ("Tx power", f"{report.tx_power_dbw:10.2f} dBW"),
        ("Tx antenna gain", f"{report.tx_antenna_gain_db:10.2f} dB"),
        ("Pointing loss", f"{report.pointing_loss_db:10.2f} dB"),
        ("EIRP", f"{report.eirp_dbw:10.2f} dBW"),
        ("Path loss (computed)", f"{report.path_loss_computed_db:10.2f} dB"),
    ]
    if report.path_loss_override_db is not None:
        rows.append(("Path loss (override; used)", f"{report.path_loss_override_db:10.2f} dB"))
    rows += [
        ("Rx antenna gain", f"{report.rx_gain_db:10.2f} dB"),
        ("Rx power", f"{report.rx_power_dbw:10.2f} dBW"),
        ("Noise power", f"{report.noise_power_dbw:10.2f} dBW"),
        ("C/N", f"{report.cn_db:10.2f} dB"),
    ]
    width = max(len(label) for label, _ in rows)
    lines = [f"== {report.name} =="]
    lines += [f"{label:<{width}} {value}" for label, value in rows]
    return "\n".join(lines)
