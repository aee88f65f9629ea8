from dataclasses import replace

import pytest

from uavqkd.config import LinkConfig, build_context


def make_config(**overrides) -> LinkConfig:
    """Reference parameter set with the FoV pinned at 100 urad."""
    return replace(LinkConfig(theta_fov=100e-6), **overrides)


def make_context(**overrides):
    return build_context(make_config(**overrides))


@pytest.fixture
def baseline_cfg() -> LinkConfig:
    return make_config()


@pytest.fixture
def baseline_ctx():
    return make_context()
