import numpy as np
import pytest

from gsp_lab import Custom, PerturbedPowerLaw, PowerLaw, Tabulated


def make_tabulated_power(amp=4.0, p=1.5, lo=1e-4, hi=1e2, n=241):
    """Exact power-law samples on a log grid; straight line in log-log."""
    x = np.geomspace(lo, hi, n)
    return Tabulated(x, amp * x**p)


def make_cubic_custom():
    # f = x^2 + x^3 with hand-written derivative; primitives are elementary:
    # F = a^3/3 + a^4/4, H = a^4/4 + a^5/5, G = a^5/5 + 2 a^6/6 + a^7/7.
    return Custom(
        lambda x: x**2 + x**3,
        lambda x: 2.0 * x + 3.0 * x**2,
        vectorized=True,
        name="cubic",
    )


def gallery():
    """The mixed bag every identity is expected to survive."""
    specs = [
        ("power_p0.3", PowerLaw(p=0.3)),
        ("power_p0.5", PowerLaw(p=0.5)),
        ("power_p1", PowerLaw(p=1.0)),
        ("power_p2", PowerLaw(p=2.0)),
        ("power_p5", PowerLaw(p=5.0)),
        ("power_p2_amp7", PowerLaw(p=2.0, amp=7.0)),
        ("perturbed_p1", PerturbedPowerLaw(p=1.0, eps=0.1)),
        ("perturbed_p2", PerturbedPowerLaw(p=2.0, eps=0.05)),
        ("cubic", make_cubic_custom()),
        ("tab_x15", make_tabulated_power()),
    ]
    return specs


@pytest.fixture(scope="session")
def tab_x15():
    return make_tabulated_power()


@pytest.fixture(scope="session")
def x15_csv(tmp_path_factory):
    """The tabulated fixture in CSV form, for loader and CLI tests."""
    path = tmp_path_factory.mktemp("fixtures") / "x15.csv"
    x = np.geomspace(1e-4, 1e2, 241)
    f = 4.0 * x**1.5
    lines = ["x,f"] + [f"{xv:.17g},{fv:.17g}" for xv, fv in zip(x, f)]
    path.write_text("\n".join(lines) + "\n")
    return path
