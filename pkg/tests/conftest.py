import numpy as np
import pytest

from tablesim.scansim import CameraIntrinsics
from tablesim.synthetic import build_demo_catalog


@pytest.fixture(scope="session")
def demo_catalog(tmp_path_factory):
    root = tmp_path_factory.mktemp("catalog")
    return build_demo_catalog(root, seed=0, assets_per_category=1)


@pytest.fixture(scope="session")
def small_intrinsics():
    # quarter-res Kinect-class camera keeps render tests fast
    return CameraIntrinsics(fx=146.25, fy=146.25, cx=79.5, cy=59.5,
                            width=160, height=120)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
