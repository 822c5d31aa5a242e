import numpy as np
import pytest

from edgeoffload.harness import RATE_RANGES
from edgeoffload.model import Assignment, Cap, Decision, Device, Instance, Task


def make_instance(rng, n, m, rate_range="low", lambda_t=0.5, lambda_e=0.5, jc=None):
    """Random instance drawn from the reference simulation ranges."""
    lo, hi = RATE_RANGES[rate_range]
    device = Device(
        r0=400e6,
        p_comp=0.8,
        p_tx=1.258,
        p_rx=1.181,
        jc=float(rng.uniform(200.0, 500.0)) if jc is None else jc,
        ec=float(rng.uniform(1e-10, 2e-10)),
    )
    caps = tuple(
        Cap(
            r=float(rng.uniform(2e9, 2.2e9)),
            c_ul=float(rng.uniform(lo, hi)),
            c_dl=float(rng.uniform(lo, hi)),
        )
        for _ in range(m)
    )
    tasks = tuple(Task(alpha=4e6, beta=0.8e6, omega=1.32e9) for _ in range(n))
    return Instance(device, caps, tasks, lambda_t, lambda_e)


def random_decision(rng, instance):
    cpu_of = tuple(int(rng.integers(0, instance.n_caps + 1)) for _ in range(instance.n_tasks))
    return Decision(Assignment(cpu_of), float(rng.uniform()))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
