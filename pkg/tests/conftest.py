import numpy as np
import pytest

from dyadnet import (
    AdditiveNodeDraw,
    ErdosRenyiInitial,
    ModelSpec,
    PanelData,
    Theta,
    simulate_panel,
)

# Blinking design: strong covariate effect, negative lagged-link coefficient,
# dense initial network.  Gives the bounds real power against sign-flipped
# lagged coefficients while staying valid at the truth.
THETA_BLINK = Theta([3.0], [-3.0, 0.001])
THETA_BLINK_BAD = Theta([3.0], [6.0, -0.002])


def blink_spec(n, T=2, shocks=None, heterogeneity=None):
    kwargs = dict(
        n=n,
        T=T,
        theta0=THETA_BLINK,
        heterogeneity=heterogeneity or AdditiveNodeDraw(loc=-0.25, scale=0.25),
        initial=ErdosRenyiInitial(0.65),
    )
    if shocks is not None:
        kwargs["shocks"] = shocks
    return ModelSpec(**kwargs)


@pytest.fixture(scope="session")
def blink_data_400():
    sim = simulate_panel(blink_spec(400), seed=0)
    return PanelData.from_simulation(sim)


@pytest.fixture(scope="session")
def additive_sim_small():
    spec = ModelSpec(
        n=80,
        T=3,
        theta0=Theta([1.0], [0.75, 0.25]),
        heterogeneity=AdditiveNodeDraw(loc=-1.0, scale=0.5),
        initial=ErdosRenyiInitial(0.12),
    )
    return simulate_panel(spec, seed=3)
