import pytest

from fads.model import ModelParams


def make_params(**kw) -> ModelParams:
    base = dict(r=0.0, mu=0.08, sigma=0.2, lam=1.0, p=0.6, gamma=0.0, T=1.0)
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture
def params():
    return make_params()
