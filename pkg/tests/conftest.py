import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nvrdja.quantum import density_from_bloch

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def bloch_vectors(draw, max_norm=1.0):
    """Uniform-ish points in the Bloch ball."""
    theta = draw(st.floats(0.0, np.pi))
    phi = draw(st.floats(0.0, 2 * np.pi))
    r = draw(st.floats(0.0, max_norm))
    return (r * np.sin(theta) * np.cos(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(theta))


@st.composite
def density_matrices(draw):
    return density_from_bloch(draw(bloch_vectors()))


unit_axes = st.builds(
    lambda th, ph: (np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)),
    st.floats(0.0, np.pi),
    st.floats(0.0, 2 * np.pi),
)


@pytest.fixture(scope="session")
def default_spectrum():
    from nvrdja.bath import paper_default_spectrum

    return paper_default_spectrum()


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Records one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
