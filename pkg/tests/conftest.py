import math

import pytest

import pcoheading as pco

W0 = math.pi / 5
WMAX = 0.3 * W0
PERIOD = 2 * math.pi / W0

# Even spread over an arc of exactly 0.9*pi.
ARC_HEADINGS = tuple(k * 0.9 * math.pi / 5 for k in range(6))
# Clustered but pairwise distinct.
CLUSTERED_HEADINGS = tuple(0.1 + 0.08 * k for k in range(6))


def sync_config(*, refractory=0.0, alpha=0.5, topology=None, headings=ARC_HEADINGS,
                t_end=100 * PERIOD, delay=None, sample_interval=0.5, seed=0,
                omega_max=WMAX):
    return pco.SimConfig(
        n=len(headings), omega0=W0, omega_max=omega_max,
        prc=pco.SyncPrc(alpha=alpha, refractory=refractory),
        topology=topology or pco.all_to_all(len(headings)),
        initial_headings=headings,
        delay_model=delay or pco.DelayModel(),
        t_end=t_end, sample_interval=sample_interval, seed=seed,
    )


def desync_config(*, l1=0.8, l2=0.6, headings=CLUSTERED_HEADINGS,
                  t_end=200 * PERIOD, delay=None, sample_interval=0.5, seed=0):
    return pco.SimConfig(
        n=len(headings), omega0=W0, omega_max=WMAX,
        prc=pco.DesyncPrf(l1=l1, l2=l2, n=len(headings)),
        topology=pco.all_to_all(len(headings)),
        initial_headings=headings,
        delay_model=delay or pco.DelayModel(),
        t_end=t_end, sample_interval=sample_interval, seed=seed,
    )


@pytest.fixture(scope="session")
def sync_trace():
    """The reference synchronization run, shared across tests."""
    return pco.run(sync_config())


@pytest.fixture(scope="session")
def desync_trace():
    """The reference desynchronization run, shared across tests."""
    return pco.run(desync_config())
