#!/usr/bin/env python3
# Copyright 2026 The rrl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the 5000-image MNIST subset shipped inside the mlxtend wheel
(500 images per digit, 28x28 u8) as a pair of IDX files.

    pip download --no-deps -d /tmp/wheels mlxtend
    python3 tools/make_mnist_subset.py /tmp/wheels/mlxtend-*.whl data/mnist5k
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path


def main(wheel: str, out_dir: str) -> None:
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    rows = [line.split(",") for line in raw.decode().splitlines() if line]
    n = len(rows)
    pixels = bytearray()
    labels = bytearray()
    for r in rows:
        assert len(r) == 785
        pixels.extend(int(float(v)) for v in r[:784])
        labels.append(int(r[784]))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "images-idx3-ubyte").write_bytes(
        struct.pack(">IIII", 0x00000803, n, 28, 28) + bytes(pixels))
    (out / "labels-idx1-ubyte").write_bytes(
        struct.pack(">II", 0x00000801, n) + bytes(labels))
    print(f"wrote {n} images to {out}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
