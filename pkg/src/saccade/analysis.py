"""Post-hoc analysis of a trained brain: accuracy tables, visit heatmaps,
and single-episode traces, with plain CSV / PGM / JSON-lines outputs.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .brain import DONE, GUESS, GateNetwork, constant_network
from .env import MAX_STEPS, SIDE, Brain, EpisodeResult, draw_starts, run_episode, run_episodes
from .idx import N_CLASSES, Dataset

GUESS0 = GUESS.start


def oracle_stub(label: int) -> GateNetwork:
    """Always guesses ``label`` alone and stops at once."""
    return constant_network([GUESS0 + label, DONE])


def all_guess_stub() -> GateNetwork:
    return constant_network([GUESS0 + c for c in range(N_CLASSES)] + [DONE])


def starts_for(data: Dataset, starts_seed: int) -> np.ndarray:
    return draw_starts(np.random.default_rng(starts_seed), len(data))


def _batched_episodes(net: Brain, data: Dataset, starts, max_steps: int, threads: int):
    if threads <= 1 or len(data) < 2 * threads:
        return run_episodes(net, data, starts, max_steps)
    bounds = np.linspace(0, len(data), threads + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def part(span):
        lo, hi = span
        sub = Dataset(data.images[lo:hi], data.labels[lo:hi], data.split_name)
        return run_episodes(net, sub, starts[lo:hi], max_steps)

    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(part, chunks))
    return tuple(np.concatenate(arrays) for arrays in zip(*parts))


@dataclass(frozen=True)
class PerClassAccuracy:
    """Strict accuracy (the single guess is the label) per class, plus the
    partial-credit score used for fitness, for comparison."""

    per_class: tuple
    overall: Fraction
    partial_credit: tuple
    counts: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("class", "n_images", "accuracy", "partial_credit"))
        for c in range(N_CLASSES):
            w.writerow((c, self.counts[c], f"{float(self.per_class[c]):.6f}", f"{float(self.partial_credit[c]):.6f}"))
        w.writerow(("overall", sum(self.counts), f"{float(self.overall):.6f}",
                    f"{float(sum(self.partial_credit, Fraction(0)) / N_CLASSES):.6f}"))
        return buf.getvalue()

    def pretty(self) -> str:
        lines = ["class  images  accuracy  partial"]
        for c in range(N_CLASSES):
            lines.append(f"{c:>5}  {self.counts[c]:>6}  {float(self.per_class[c]):>8.3f}  {float(self.partial_credit[c]):>7.3f}")
        lines.append(f"overall {sum(self.counts):>5}  {float(self.overall):>8.3f}")
        return "\n".join(lines)


def accuracy_from_masks(masks, labels) -> PerClassAccuracy:
    """Classes with no images contribute 0 to the macro average."""
    masks = np.asarray(masks, np.int64)
    labels = np.asarray(labels, np.int64)
    n_guessed = np.array([bin(int(m)).count("1") for m in masks], np.int64)
    hit = ((masks >> labels) & 1).astype(bool)
    per_class, partial, counts = [], [], []
    for c in range(N_CLASSES):
        sel = labels == c
        n = int(sel.sum())
        counts.append(n)
        if n == 0:
            per_class.append(Fraction(0))
            partial.append(Fraction(0))
            continue
        per_class.append(Fraction(int((hit[sel] & (n_guessed[sel] == 1)).sum()), n))
        partial.append(sum((Fraction(1, int(k)) for k in n_guessed[sel & hit]), Fraction(0)) / n)
    overall = sum(per_class, Fraction(0)) / N_CLASSES
    return PerClassAccuracy(tuple(per_class), overall, tuple(partial), tuple(counts))


def evaluate_accuracy(net: Brain, data: Dataset, starts_seed: int = 0, *,
                      max_steps: int = MAX_STEPS, threads: int = 1) -> PerClassAccuracy:
    """Per-class strict accuracy with random starts drawn from ``starts_seed``."""
    masks, _, _ = _batched_episodes(net, data, starts_for(data, starts_seed), max_steps, threads)
    return accuracy_from_masks(masks, data.labels)


def heatmap_from_traces(steps, traces) -> np.ndarray:
    """Count, per pixel, how many (episode, step) fovea windows covered it."""
    steps = np.asarray(steps)
    live = np.arange(traces.shape[1])[None, :] < steps[:, None]
    pos = traces[live]
    grid = np.zeros((SIDE, SIDE), np.int64)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            x = pos[:, 0] + dx
            y = pos[:, 1] + dy
            ok = (x >= 0) & (x < SIDE) & (y >= 0) & (y < SIDE)
            np.add.at(grid, (y[ok], x[ok]), 1)
    return grid


def visit_heatmap(net: Brain, data: Dataset, starts_seed: int = 0, *,
                  max_steps: int = MAX_STEPS, threads: int = 1, starts=None) -> np.ndarray:
    """``(28, 28)`` grid (row = y) of fovea visit counts over all episodes."""
    if starts is None:
        starts = starts_for(data, starts_seed)
    _, steps, traces = _batched_episodes(net, data, np.asarray(starts, np.int64), max_steps, threads)
    return heatmap_from_traces(steps, traces)


def write_pgm(path, grid, maxval: int = 255) -> None:
    """Plain (P2) greymap."""
    grid = np.asarray(grid, dtype=np.int64)
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in grid)
    Path(path).write_text(f"P2\n{grid.shape[1]} {grid.shape[0]}\n{maxval}\n{body}\n")


def heatmap_image(counts) -> np.ndarray:
    """Darker = more visits (0 black for the maximum, 255 white for none)."""
    counts = np.asarray(counts, dtype=np.float64)
    top = counts.max()
    if top == 0:
        return np.full(counts.shape, 255, np.int64)
    return np.rint(255 - 255 * counts / top).astype(np.int64)


def write_heatmap(out_dir, counts) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    csv_path = out_dir / "heatmap.csv"
    csv_path.write_text("\n".join(",".join(str(int(v)) for v in row) for row in counts) + "\n")
    pgm_path = out_dir / "heatmap.pgm"
    write_pgm(pgm_path, heatmap_image(counts))
    return csv_path, pgm_path


def trace_overlay(img, result: EpisodeResult) -> np.ndarray:
    """Grey levels: 255 background, 160 digit, 64 visited, 0 visited digit."""
    img = np.asarray(img)
    out = np.where(img == 1, 160, 255).astype(np.int64)
    for x, y in result.visited_pixels:
        out[y, x] = 0 if img[y, x] else 64
    return out


def trace_episode(net, image, start, out_dir, *, max_steps: int = MAX_STEPS,
                  stem: str = "trace") -> tuple[EpisodeResult, dict]:
    """Run one recorded episode and write ``<stem>.jsonl``, ``<stem>.pgm``
    and ``<stem>.path.csv`` (the visiting order) into ``out_dir``."""
    out_dir = Path(out_dir)
    result = run_episode(net, image, start, max_steps, record_trace=True)
    paths = {
        "jsonl": out_dir / f"{stem}.jsonl",
        "pgm": out_dir / f"{stem}.pgm",
        "path": out_dir / f"{stem}.path.csv",
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths["jsonl"].write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in result.records))
        write_pgm(paths["pgm"], trace_overlay(image, result))
        rows = ["step,x,y"] + [f"{t},{p.x},{p.y}" for t, p in enumerate(result.trajectory, 1)]
        paths["path"].write_text("\n".join(rows) + "\n")
    except OSError as exc:
        raise OSError(f"writing trace into {out_dir}: {exc}") from exc
    return result, paths
