#!/usr/bin/env python3
"""Convert the per-class JSON pixel arrays shipped in the `mnist` and
`fashion-mnist` npm packages into IDX files (images + labels).

Usage: npm_json_to_idx.py <mnist|fmnist> <package_src_dir> <out_dir> <class>... [--limit N]
"""
import argparse
import json
import os
import struct


def load_class(kind, src, cls):
    if kind == "mnist":
        flat = json.load(open(os.path.join(src, "digits", f"{cls}.json")))["data"]
        n = len(flat) // 784
        return [[int(round(v * 255)) for v in flat[i * 784:(i + 1) * 784]] for i in range(n)]
    rows = json.load(open(os.path.join(src, "clothes", f"{cls}.json")))["data"]
    return [[int(v) for v in r] for r in rows]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=["mnist", "fmnist"])
    ap.add_argument("src")
    ap.add_argument("out")
    ap.add_argument("classes", nargs="+", type=int)
    ap.add_argument("--limit", type=int, default=None)
    a = ap.parse_args()

    images, labels = [], []
    per_class = {c: load_class(a.kind, a.src, c)[: a.limit] for c in a.classes}
    # interleave classes so every prefix of the file mixes labels
    longest = max(len(v) for v in per_class.values())
    for i in range(longest):
        for c in a.classes:
            if i < len(per_class[c]):
                images.append(per_class[c][i])
                labels.append(c)

    os.makedirs(a.out, exist_ok=True)
    with open(os.path.join(a.out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(max(0, min(255, v)) for v in img))
    with open(os.path.join(a.out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))
    print(f"{len(images)} images written to {a.out}")


if __name__ == "__main__":
    main()
