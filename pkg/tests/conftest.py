import numpy as np
import pytest

import handover_sim as hs


@pytest.fixture(scope="session")
def fig2_rigid_config():
    return hs.load_scenario("fig2-rigid")


@pytest.fixture(scope="session")
def default_params(fig2_rigid_config):
    """The 3-link default model, loaded from a shipped scenario file."""
    return fig2_rigid_config.params


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_state(rng, n_joints=3, rate_scale=0.5):
    """Random configuration away from the pitch singularity."""
    xi = np.concatenate([
        rng.uniform(-1.0, 1.0, 3),
        rng.uniform(-0.8, 0.8, 3),
        rng.uniform(-1.5, 1.5, n_joints),
    ])
    xi_dot = rng.uniform(-rate_scale, rate_scale, 6 + n_joints)
    return xi, xi_dot
