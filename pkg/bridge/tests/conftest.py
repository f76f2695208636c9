import numpy as np
import pytest
from PIL import Image

pytest.importorskip("gmi_bridge", reason="gmi-bridge is not installed")

H, W = 48, 64


def write_png(path, arr):
    Image.fromarray(np.clip(arr, 0, 255).astype("uint8")).save(path)


class ImageFactory:
    """Writes small deterministic PNGs with distinct statistics."""

    def __init__(self, root):
        self.root = root

    def _save(self, name, arr):
        path = self.root / name
        write_png(path, arr)
        return path

    def red_gradient(self, name="red_gradient.png"):
        ramp = np.linspace(80, 255, W)[None, :, None] * np.array([1.0, 0.25, 0.2])
        return self._save(name, np.broadcast_to(ramp, (H, W, 3)).copy())

    def red_disc(self, name="red_disc.png"):
        yy, xx = np.mgrid[0:H, 0:W]
        disc = ((yy - H / 2) ** 2 + (xx - W / 2) ** 2 < 300)[..., None]
        return self._save(name, np.where(disc, np.array([230, 60, 50]),
                                         np.array([120, 20, 20])))

    def blue_checker(self, name="blue_checker.png"):
        yy, xx = np.mgrid[0:H, 0:W]
        cells = (((yy // 8) + (xx // 8)) % 2)[..., None]
        return self._save(name, np.where(cells, np.array([30, 60, 200]),
                                         np.array([10, 20, 80])))

    def noise(self, seed, tint, name=None):
        rng = np.random.default_rng(seed)
        arr = rng.normal(150, 40, (H, W, 3)) * np.asarray(tint)
        return self._save(name or f"noise_{seed}.png", arr)

    def constant(self, rgb, name=None):
        name = name or "const_{}_{}_{}.png".format(*rgb)
        return self._save(name, np.full((H, W, 3), rgb, dtype=np.float64))

    def corrupt(self, name="corrupt.png"):
        path = self.root / name
        path.write_text("this is not a png", encoding="utf-8")
        return path


@pytest.fixture()
def images(tmp_path):
    return ImageFactory(tmp_path)
