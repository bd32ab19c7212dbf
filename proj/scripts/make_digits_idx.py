#!/usr/bin/env python3
"""Write the UCI handwritten digits bundled with scikit-learn as IDX files.

Pixels (0..16) are rescaled to 0..255 bytes. Every sixth sample goes to the
test split, the rest to the train split. With --shift, each split also gets
the eight one-pixel translations of every image (zero fill), grouped by
source image so a digit and its copies stay together.
"""
import argparse
import pathlib
import struct

import numpy as np
from sklearn.datasets import load_digits


def write_images(path, images):
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def translate(image, dy, dx):
    out = np.zeros_like(image)
    h, w = image.shape
    out[max(dy, 0):h + min(dy, 0), max(dx, 0):w + min(dx, 0)] = \
        image[max(-dy, 0):h + min(-dy, 0), max(-dx, 0):w + min(-dx, 0)]
    return out


def with_shifts(images, labels):
    offsets = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
    out = np.stack([translate(img, dy, dx) for img in images for dy, dx in offsets])
    return out, np.repeat(labels, len(offsets))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/digits")
    parser.add_argument("--shift", action="store_true")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = np.rint(digits.images * 255.0 / 16.0).clip(0, 255)
    labels = digits.target
    test_mask = np.arange(len(labels)) % 6 == 5

    splits = {
        "train": (images[~test_mask], labels[~test_mask]),
        "test": (images[test_mask], labels[test_mask]),
    }
    for name, (x, y) in splits.items():
        if args.shift:
            x, y = with_shifts(x, y)
        write_images(out / f"{name}-images-idx3-ubyte", x)
        write_labels(out / f"{name}-labels-idx1-ubyte", y)
        print(f"{name}={len(y)}")


if __name__ == "__main__":
    main()
