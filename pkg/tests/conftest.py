import os

import pytest

from jcsim.master_equation import steady_state
from jcsim.params import SystemParams, from_config


def pytest_collection_modifyitems(config, items):
    if os.environ.get("JCSIM_RUN_SLOW") == "1":
        return
    marker = pytest.mark.skip(reason="set JCSIM_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(marker)


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion, independent of
    # output capture
    if report.when != "call" or "acceptance" not in report.keywords:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\n[acceptance] {name}: {'PASS' if report.passed else 'FAIL'}",
          flush=True)


@pytest.fixture(scope="session")
def blockade_params():
    # single-photon resonance point, small enough to solve in milliseconds
    return from_config(dict(g_over_kappa=5, eps_over_g=0.09, delta_over_g=1,
                            gamma_over_kappa=0, n_max=15))


@pytest.fixture(scope="session")
def blockade_state(blockade_params):
    return steady_state(blockade_params)


@pytest.fixture(scope="session")
def empty_cavity_params():
    # decoupled atom, drive and detuning set in absolute kappa units
    return SystemParams(g=0.0, kappa=1.0, gamma=0.0, delta_omega=0.5,
                        eps_d=1.0, n_max=20)


@pytest.fixture(scope="session")
def empty_cavity_state(empty_cavity_params):
    return steady_state(empty_cavity_params)
