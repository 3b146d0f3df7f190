"""Regenerate the 512x512 golden raw pair (deterministic, no random numbers).

Scene: smooth color gradients, a bright lamp that saturates long exposures at
every ratio, and a dark disc that shifts by a few pixels between the frames.
"""

from pathlib import Path

import numpy as np

from rawhdr.raw import BayerImage, write_pgm

HERE = Path(__file__).parent
SIZE = 512
BLACK, WHITE = 256, 16383


def scene(shift: int) -> np.ndarray:
    y, x = np.mgrid[0:SIZE, 0:SIZE] / SIZE
    base = 0.02 + 0.25 * x * y + 0.05 * np.sin(12 * x) ** 2
    lamp = np.exp(-((x - 0.7) ** 2 + (y - 0.3) ** 2) / 0.004)
    disc = ((x - 0.35 - shift / SIZE) ** 2 + (y - 0.6) ** 2) < 0.01
    img = np.clip(base + 0.7 * lamp, 0, 1)
    img[disc] *= 0.2
    # color filter response: R and B planes darker than green
    cfa = np.ones((SIZE, SIZE))
    cfa[0::2, 0::2] = 0.6
    cfa[1::2, 1::2] = 0.45
    return np.round(BLACK + img * cfa * (WHITE - BLACK)).astype(np.uint16)


def main() -> None:
    for name, shift in (("scene_a", 0), ("scene_b", 6)):
        write_pgm(HERE / f"{name}.pgm", BayerImage(scene(shift), "RGGB", BLACK, WHITE, 14))


if __name__ == "__main__":
    main()
