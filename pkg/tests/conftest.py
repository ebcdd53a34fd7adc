import numpy as np
import pytest

from optocorr.physics import BeamConfig, ExperimentParams, MechanicalOscillator, OpticalCavity


@pytest.fixture
def setup():
    return ExperimentParams()


@pytest.fixture
def reference():
    """Reference point of the radiation/thermal scaling law."""
    return ExperimentParams(
        oscillator=MechanicalOscillator(resonance_freq=1e6, mass=1e-6, quality_factor=1e6),
        cavity=OpticalCavity(finesse=300_000, wavelength=800e-9),
        beams=BeamConfig(signal_power=1e-3),
        temperature=1.0,
    )


def complex_corr(a, b):
    """|<a b*>| / sqrt(<|a|^2><|b|^2>) for plain arrays."""
    return abs(np.vdot(b, a)) / np.sqrt(np.vdot(a, a).real * np.vdot(b, b).real)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
