"""The image world: sensing, saccades, episodes, and the classification fitness.

Coordinates are ``(x, y)`` = (column, row) of the fovea center on the
28x28 grid. Rays point 0 deg = +x, 90 deg = -y (up), 180 deg = -x,
270 deg = +y (down).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Union

import numpy as np

from . import _kernels as K
from .brain import DONE, GUESS, MOTOR_H, MOTOR_V, SENSORS, VETO, GateNetwork, empty_state
from .idx import Dataset

SIDE = K.SIDE
MAX_STEPS = 40
SACCADE = K.SACCADE
SCORE_DENOM = K.SCORE_DENOM
DIRECTIONS = (0, 90, 180, 270)

# A network, or a label -> network factory (used for calibration stubs).
Brain = Union[GateNetwork, Callable[[int], GateNetwork]]


class Position(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class SensorReading:
    fovea: tuple[int, ...]
    rays: tuple[int, ...]

    @property
    def bits(self) -> tuple[int, ...]:
        return self.fovea + self.rays


@dataclass
class EpisodeResult:
    final_guesses: frozenset
    done_fired: bool
    steps_used: int
    trajectory: list | None = None
    visited_pixels: set = field(default_factory=set)
    records: list | None = None


@dataclass(frozen=True)
class FitnessResult:
    """Exact mean score. ``numerators[i] / SCORE_DENOM`` is image i's score."""

    value: Fraction
    numerators: np.ndarray
    steps: np.ndarray

    @property
    def scores(self) -> list[Fraction]:
        return [Fraction(int(n), SCORE_DENOM) for n in self.numerators]

    def __float__(self):
        return float(self.value)


def clamp(v: int) -> int:
    return min(max(int(v), 0), SIDE - 1)


def raycast(img, pos, direction: int) -> int:
    """1 if any active pixel lies on the ray leaving the fovea edge in ``direction``."""
    img = np.asarray(img)
    x, y = pos
    if direction == 0:
        cells = img[y, x + 2:]
    elif direction == 90:
        cells = img[: max(y - 1, 0), x]
    elif direction == 180:
        cells = img[y, : max(x - 1, 0)]
    elif direction == 270:
        cells = img[y + 2:, x]
    else:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    return int(cells.any())


def sense(img, pos) -> SensorReading:
    img = np.asarray(img)
    x, y = pos
    fovea = []
    for r in range(3):
        for c in range(3):
            xx, yy = x + c - 1, y + r - 1
            fovea.append(int(img[yy, xx]) if 0 <= xx < SIDE and 0 <= yy < SIDE else 0)
    return SensorReading(tuple(fovea), tuple(raycast(img, pos, d) for d in DIRECTIONS))


def fovea_cells(pos) -> list[tuple[int, int]]:
    """In-image (x, y) cells covered by the fovea at ``pos``."""
    x, y = pos
    return [
        (x + dx, y + dy)
        for dy in (-1, 0, 1)
        for dx in (-1, 0, 1)
        if 0 <= x + dx < SIDE and 0 <= y + dy < SIDE
    ]


def decode_actuation(s) -> tuple[int, int]:
    """(dx, dy): each motor bit picks the sign of a fixed 3-pixel jump."""
    dx = SACCADE if s[MOTOR_H] else -SACCADE
    dy = SACCADE if s[MOTOR_V] else -SACCADE
    return dx, dy


def decode_classification(s) -> tuple[frozenset, bool]:
    guesses = np.asarray(s[GUESS])
    vetoes = np.asarray(s[VETO])
    picked = frozenset(int(c) for c in np.flatnonzero((guesses == 1) & (vetoes == 0)))
    return picked, bool(s[DONE])


def run_episode(net, img, start, max_steps: int = MAX_STEPS, record_trace: bool = False) -> EpisodeResult:
    """Sense, think, classify (maybe stop), move; at most ``max_steps`` times.

    ``net`` is anything with a ``step(state) -> state`` method.
    """
    img = np.asarray(img)
    pos = Position(clamp(start[0]), clamp(start[1]))
    s = empty_state()
    trajectory, visited, records = ([], set(), []) if record_trace else (None, set(), None)
    for t in range(1, max_steps + 1):
        reading = sense(img, pos)
        s[SENSORS] = reading.bits
        s = np.asarray(net.step(s))
        guesses, done = decode_classification(s)
        if record_trace:
            trajectory.append(pos)
            visited.update(fovea_cells(pos))
            records.append({
                "t": t,
                "x": pos.x,
                "y": pos.y,
                "fovea_bits": list(reading.fovea),
                "ray_bits": list(reading.rays),
                "guesses": [int(c) for c in np.flatnonzero(s[GUESS])],
                "vetoes": [int(c) for c in np.flatnonzero(s[VETO])],
                "done": int(done),
            })
        if done or t == max_steps:
            return EpisodeResult(guesses, done, t, trajectory, visited, records)
        dx, dy = decode_actuation(s)
        pos = Position(clamp(pos.x + dx), clamp(pos.y + dy))
    raise ValueError("max_steps must be at least 1")


def score_episode(result: EpisodeResult, label: int) -> Fraction:
    if label in result.final_guesses:
        return Fraction(1, len(result.final_guesses))
    return Fraction(0)


def draw_starts(rng: np.random.Generator, n: int) -> np.ndarray:
    """``(n, 2)`` uniform random fovea positions."""
    return rng.integers(0, SIDE, size=(n, 2), dtype=np.int64)


def _as_starts(starts, n) -> np.ndarray:
    starts = np.ascontiguousarray(np.asarray(starts, dtype=np.int64).reshape(-1, 2))
    if len(starts) != n:
        raise ValueError(f"need one start per image ({n}), got {len(starts)}")
    return np.clip(starts, 0, SIDE - 1)


def score_network(net: GateNetwork, images, labels, starts, max_steps: int = MAX_STEPS):
    """Per-image score numerators (over ``SCORE_DENOM``) and steps used."""
    n = len(labels)
    scores = np.zeros(n, np.int64)
    steps = np.zeros(n, np.int64)
    K.score_images(*net.arrays, images, np.asarray(labels, np.int64), starts, max_steps, scores, steps)
    return scores, steps


def evaluate_fitness(net: Brain, data: Dataset, starts, max_steps: int = MAX_STEPS) -> FitnessResult:
    """Exact mean per-image score over ``data``.

    ``net`` may also be a callable returning a network for a given label;
    each image is then run with the network built for its own label.
    """
    n = len(data)
    starts = _as_starts(starts, n)
    if isinstance(net, GateNetwork):
        scores, steps = score_network(net, data.images, data.labels, starts, max_steps)
    else:
        scores = np.zeros(n, np.int64)
        steps = np.zeros(n, np.int64)
        for i in range(n):
            s, t = score_network(net(int(data.labels[i])), data.images[i:i + 1],
                                 data.labels[i:i + 1], starts[i:i + 1], max_steps)
            scores[i], steps[i] = s[0], t[0]
    value = Fraction(int(scores.sum()), SCORE_DENOM * n) if n else Fraction(0)
    return FitnessResult(value, scores, steps)


def run_episodes(net: Brain, data: Dataset, starts, max_steps: int = MAX_STEPS):
    """Fast batch of episodes with positions recorded.

    Returns ``(guess_masks, steps, traces)`` where bit c of ``guess_masks[i]``
    marks class c as a final guess and ``traces[i, :steps[i]]`` holds the
    sensing positions.
    """
    n = len(data)
    starts = _as_starts(starts, n)
    masks = np.zeros(n, np.int64)
    steps = np.zeros(n, np.int64)
    traces = np.zeros((n, max_steps, 2), np.int64)
    if isinstance(net, GateNetwork):
        K.run_traced(*net.arrays, data.images, starts, max_steps, masks, steps, traces)
    else:
        for i in range(n):
            K.run_traced(*net(int(data.labels[i])).arrays, data.images[i:i + 1], starts[i:i + 1],
                         max_steps, masks[i:i + 1], steps[i:i + 1], traces[i:i + 1])
    return masks, steps, traces
