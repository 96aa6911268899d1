import numpy as np
import pytest

from skillrepro.trajectory import Demonstration, DemonstrationSet, Label, Trajectory

FIXTURE_DIR = "tests/fixtures"


def make_curve(rng, length=60, dim=2, scale=1.0):
    """Random smooth curve: low-order Fourier series plus a linear ramp."""
    u = np.linspace(0.0, 1.0, length)
    cols = []
    for d in range(dim):
        y = rng.normal(0.0, 0.3) * u
        for k in (1, 2, 3):
            y = y + rng.normal(0.0, scale / k) * np.sin(np.pi * k * u)
        cols.append(y)
    return np.stack(cols, axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bundle(rng, n_demos=4, length=60, dim=2, label=Label.SUCCESSFUL, spread=0.02, tag="d"):
    """A tight bundle of noisy copies of one random curve."""
    base = make_curve(rng, length=length, dim=dim)
    demos = []
    for i in range(n_demos):
        pts = base + rng.normal(0.0, spread, size=base.shape)
        demos.append(Demonstration(id=f"{tag}{i}", trajectory=Trajectory(pts), label=label))
    return demos


def demo_set(rng, n_success=3, n_fail=0, **kw):
    succ = bundle(rng, n_demos=n_success, tag="s", **kw) if n_success else []
    fail = bundle(rng, n_demos=n_fail, label=Label.FAILED, tag="f", **kw) if n_fail else []
    return DemonstrationSet(tuple(succ), tuple(fail))
