"""Regenerate the golden synthetic digit bitmaps.

The PBM files under src/saccade/data/ are the source of truth; this script
only documents how they were drawn. Re-running it must reproduce them
byte-for-byte (checked in tests/test_idx.py).

    python scripts/draw_synthetic_digits.py [OUT_DIR]
"""

import sys
from pathlib import Path

import numpy as np

# 3-pixel strokes on a 12x20 box spanning cols 8..19, rows 4..23.
SEGMENTS = {
    "a": (slice(4, 7), slice(8, 20)),
    "g": (slice(12, 15), slice(8, 20)),
    "d": (slice(21, 24), slice(8, 20)),
    "f": (slice(4, 15), slice(8, 11)),
    "b": (slice(4, 15), slice(17, 20)),
    "e": (slice(12, 24), slice(8, 11)),
    "c": (slice(12, 24), slice(17, 20)),
}

DIGITS = {
    0: "abcdef",
    2: "abged",
    3: "abgcd",
    4: "fgbc",
    5: "afgcd",
    6: "afgedc",
    7: "abc",
    8: "abcdefg",
    9: "abcdfg",
}


def draw(digit):
    grid = np.zeros((28, 28), dtype=np.uint8)
    if digit == 1:
        grid[4:24, 12:15] = 1  # stem
        grid[4:7, 9:12] = 1  # flag
        grid[21:24, 9:18] = 1  # base
        return grid
    for name in DIGITS[digit]:
        grid[SEGMENTS[name]] = 1
    return grid


def main(out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # imported lazily so the script also works before the package is installed
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from saccade.idx import write_pbm

    for d in range(10):
        write_pbm(out_dir / f"digit_{d}.pbm", draw(d))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/saccade/data")
