"""Tour of the modification operators.

Builds a small synthetic street-scene-like image, applies one instance of
every operator, saves each result next to this script, and prints the
structural similarity between the original and each modification.  Severe
operators (inversion, flips, blackout) land far below the mild ones.

Run:  python demos/01_modification_operators.py
"""

import os

import numpy as np

from vistest import Image, Modification, apply, mssim, save_image

OUT_DIR = os.path.join(os.path.dirname(__file__), "output", "operators")


def make_scene(width=128, height=96) -> Image:
    xs = np.linspace(0.0, 1.0, width)
    arr = np.empty((height, width, 3))
    arr[:, :, 0] = 40 + 160 * xs          # warm gradient "road"
    arr[:, :, 1] = 60 + 140 * xs
    arr[:, :, 2] = 90 + 120 * xs
    arr[10:40, 15:60] = (200, 70, 60)     # a building
    arr[55:90, 70:115] = (60, 170, 110)   # a tree
    noise = np.random.default_rng(42).integers(-8, 9, size=arr.shape)
    return Image(np.clip(arr + noise, 0, 255).astype(np.uint8))


MODIFICATIONS = [
    Modification("brightness", {"factor": 0.2}, sim=True),
    Modification("brightness", {"factor": -0.4}, sim=True),
    Modification("blur", {"strength": 0.2}, sim=True),
    Modification("blur", {"strength": 0.8}),
    Modification("pixel_noise", {"count": 300}, seed=1, sim=True),
    Modification("weather", {"kind": "fog", "intensity": 0.5}, seed=2, sim=True),
    Modification("weather", {"kind": "rain", "intensity": 0.5}, seed=3, sim=True),
    Modification("weather", {"kind": "snow", "intensity": 0.5}, seed=4, sim=True),
    Modification("weather", {"kind": "sun", "intensity": 0.5}, seed=5, sim=True),
    Modification("weather", {"kind": "shadow", "intensity": 0.5}, seed=6, sim=True),
    Modification("affine", {"a": 0.9, "b": 0.15, "c": 6, "d": -0.1, "e": 0.95, "f": 3}),
    Modification("flip", {"axis": "horizontal"}),
    Modification("invert"),
    Modification("blackout"),
]


def main() -> None:
    scene = make_scene()
    save_image(scene, os.path.join(OUT_DIR, "original.png"))
    print(f"wrote {OUT_DIR}/original.png")
    print(f"{'modification':<42} {'sim':<5} SSIM vs original")
    for mod in MODIFICATIONS:
        modified = apply(mod, scene)
        name = f"{mod.op}_{mod.params_summary()}".replace('"', "").replace(":", "-")
        name = "".join(c if c.isalnum() or c in "_-." else "_" for c in name)
        save_image(modified, os.path.join(OUT_DIR, name + ".png"))
        similarity = mssim(scene, modified).mean
        label = f"{mod.op} {mod.params_summary()}"
        print(f"{label:<42} {str(mod.sim).lower():<5} {similarity:+.4f}")


if __name__ == "__main__":
    main()
