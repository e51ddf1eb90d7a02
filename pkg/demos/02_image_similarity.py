"""What the similarity metrics do and don't tell you.

Walks through the windowed structural-similarity measure and MSE on
constructed image pairs: the analytic extremes, a case where the two metrics
disagree about which image is "closer", and the negative values that
anti-correlated structure produces (which a plain [0, 1] reading hides).

Run:  python demos/02_image_similarity.py
"""

import numpy as np

from vistest import Image, brightness, invert, mse, mssim


def checkerboard(width=64, height=64, tile=8) -> Image:
    ys, xs = np.mgrid[0:height, 0:width]
    board = 60 + (((xs // tile) + (ys // tile)) % 2) * 140  # soft 60/200 tiles
    return Image(np.stack([board] * 3, axis=2).astype(np.uint8))


def main() -> None:
    rng = np.random.default_rng(11)
    photo = Image(rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8))

    print("-- identical images --")
    print(f"ssim = {mssim(photo, photo).mean:.6f}   mse = {mse(photo, photo):.1f}")

    print("\n-- constant black vs constant white --")
    black = Image.new(32, 32, (0, 0, 0))
    white = Image.new(32, 32, (255, 255, 255))
    print(f"ssim = {mssim(black, white).mean:.6e}  (analytic: C1/(255^2+C1))")
    print(f"mse  = {mse(black, white):.1f}          (255^2 everywhere)")

    print("\n-- structure matters more than intensity --")
    board = checkerboard()
    brighter = brightness(board, 0.25)
    inverted = invert(board)
    print(f"brightened: ssim = {mssim(board, brighter).mean:+.4f}   mse = {mse(board, brighter):9.1f}")
    print(f"inverted:   ssim = {mssim(board, inverted).mean:+.4f}   mse = {mse(board, inverted):9.1f}")
    print("inversion keeps every edge yet lands near -1: the windows are")
    print("perfectly anti-correlated, which MSE sees as just a big distance.")

    print("\n-- the per-window map --")
    half = board.pixels.copy()
    half[:, 32:] = 128
    result = mssim(board, Image(half))
    print(f"left half untouched, right half flattened: mean = {result.mean:+.4f}")
    print(f"map shape = {result.map.shape}; column means show the damage profile:")
    cols = result.map.mean(axis=0)
    marks = "".join("#" if c > 0.5 else ("-" if c > 0 else ".") for c in cols)
    print(f"  {marks}")


if __name__ == "__main__":
    main()
