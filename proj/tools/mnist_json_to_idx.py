#!/usr/bin/env python3
"""Convert the per-digit JSON files of the `mnist` npm package into gzipped IDX.

The package ships the first 10,000 MNIST training digits grouped by class,
pixels as floats in [0, 1]. Digits are interleaved with a fixed permutation
and split into train (first --train) and test (remainder).

usage: mnist_json_to_idx.py <package>/src/digits <out dir> [--train 8000]
"""
import argparse
import gzip
import json
import random
import struct
from pathlib import Path


def write_idx(path, magic, dims, payload):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits", type=Path)
    ap.add_argument("out", type=Path)
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--seed", type=int, default=20170601)
    args = ap.parse_args()

    samples = []
    for label in range(10):
        flat = json.loads((args.digits / f"{label}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        for i in range(0, len(flat), 784):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in flat[i:i + 784])
            samples.append((pixels, label))
    random.Random(args.seed).shuffle(samples)

    args.out.mkdir(parents=True, exist_ok=True)
    parts = {"train": samples[:args.train], "test": samples[args.train:]}
    for name, part in parts.items():
        write_idx(args.out / f"{name}-images-idx3-ubyte.gz", 0x803, (len(part), 28, 28),
                  b"".join(p for p, _ in part))
        write_idx(args.out / f"{name}-labels-idx1-ubyte.gz", 0x801, (len(part),),
                  bytes(l for _, l in part))
        print(f"{name}: {len(part)} samples")


if __name__ == "__main__":
    main()
