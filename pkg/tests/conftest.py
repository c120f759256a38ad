import numpy as np
import pytest

import vbsense as vb


@pytest.fixture
def hand_graph():
    """4 variables, 3 checks: c0~{v0,v1}, c1~{v1,v2}, c2~{v0,v2,v3}, weights 1."""
    return vb.SensingGraph(
        4,
        3,
        np.array([0, 1, 1, 2, 0, 2, 3]),
        np.array([0, 0, 1, 1, 2, 2, 2]),
        np.ones(7),
    )


@pytest.fixture
def hand_signal():
    return vb.SignalVector(np.array([5.0, 0.0, 0.0, 7.0]))


def make_spec(lam_text, rho_text, n, alpha, **kw):
    return vb.EnsembleSpec(
        n=n,
        lam=vb.parse_distribution(lam_text, side="variable"),
        rho=vb.parse_distribution(rho_text, side="check"),
        alpha=alpha,
        **kw,
    )
