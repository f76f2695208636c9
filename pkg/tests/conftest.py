import numpy as np
import pytest

from gmi import build_spec


@pytest.fixture
def rng():
    return np.random.default_rng(20260821)


@pytest.fixture
def make_spec():
    def _make(model_id="model-a", n=8, image_dim=4, prompt_dim=3,
              download_count=0, seed=7, metadata=None):
        r = np.random.default_rng(seed)
        images = r.normal(size=(n, image_dim))
        prompts = [r.normal(size=prompt_dim) for _ in range(n)]
        return build_spec(model_id, images, prompts,
                          download_count=download_count,
                          metadata=metadata or {})

    return _make
