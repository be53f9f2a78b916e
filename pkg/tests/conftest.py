import pytest

from edgesim import default_config, reduced_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def rcfg():
    return reduced_config()


@pytest.fixture(scope="session")
def default_raw(cfg):
    return cfg.to_dict()
