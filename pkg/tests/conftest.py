import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

from vsatlink import CompensationFlags, ModemConfig, SalehParams, load_scenario


@pytest.fixture(scope="session")
def modem_cfg() -> ModemConfig:
    return ModemConfig()


@pytest.fixture(scope="session")
def reference_scenario():
    """The shipped KPTCL C-band scenario."""
    return load_scenario("kptcl-cband")


@pytest.fixture(scope="session")
def awgn_scenario():
    return load_scenario("awgn-validation")


@pytest.fixture(scope="session")
def neutral_reference_scenario(reference_scenario):
    """Reference scenario with the amplifier linearized (pure-geometry runs)."""
    return replace(reference_scenario, saleh=SalehParams.linear())


def comp_off() -> CompensationFlags:
    return CompensationFlags(dc=False, agc=False, phase_freq=False)
