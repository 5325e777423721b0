"""Genetic algorithm over byte genomes: mutation, pairwise tournaments, the
generation loop, checkpoints, and reseeding from an elite.

All randomness is derived from ``(master_seed, stream, generation)`` through
``numpy.random.SeedSequence`` spawn keys, so a run is fully determined by its
seed and config regardless of thread count or interruption.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .brain import GENE_BYTES, MAX_GENOME, MIN_GENOME, START_CODON, as_genome, decode_genome, genome_digest
from .env import MAX_STEPS, SCORE_DENOM, draw_starts, score_network
from .idx import Dataset

log = logging.getLogger(__name__)

STREAM_INIT = 0
STREAM_STARTS = 1
STREAM_SELECTION = 2
STREAM_ELITE = 3

CHECKPOINT_FORMAT = "saccade-checkpoint"
CHECKPOINT_VERSION = 1
LOG_HEADER = ("generation", "best_fitness", "mean_fitness", "best_digest")
STARTS_POLICIES = ("per-generation", "fixed")


class CheckpointError(RuntimeError):
    pass


@dataclass
class EvolutionConfig:
    population_size: int = 100
    max_genome: int = MAX_GENOME
    min_genome: int = MIN_GENOME
    initial_length: int = 5000
    point_rate: float = 0.0005
    dup_rate: float = 0.05
    del_rate: float = 0.02
    segment_min: int = 16
    segment_max: int = 512
    generations: int = 1000
    seed: int = 0
    starts_policy: str = "per-generation"
    max_steps: int = MAX_STEPS
    dataset: str = "synthetic"
    mnist_dir: str = ""
    per_class: int = 100
    checkpoint_every: int = 0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("int", "float") and isinstance(value, str):
                setattr(self, f.name, int(value) if f.type == "int" else float(value))
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population_size must be an even number >= 2")
        for name in ("point_rate", "dup_rate", "del_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 1 <= self.min_genome <= self.initial_length <= self.max_genome:
            raise ValueError("need 1 <= min_genome <= initial_length <= max_genome")
        if self.initial_length < GENE_BYTES:
            raise ValueError(f"initial_length must be at least {GENE_BYTES}")
        if not 1 <= self.segment_min <= self.segment_max:
            raise ValueError("need 1 <= segment_min <= segment_max")
        if self.starts_policy not in STARTS_POLICIES:
            raise ValueError(f"starts_policy must be one of {STARTS_POLICIES}")
        if self.generations < 0 or self.max_steps < 1 or self.checkpoint_every < 0:
            raise ValueError("generations and checkpoint_every must be >= 0, max_steps >= 1")
        if self.dataset not in ("synthetic", "mnist"):
            raise ValueError("dataset must be 'synthetic' or 'mnist'")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "EvolutionConfig":
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            values[key] = value
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


@dataclass
class Population:
    genomes: list
    generation: int = 0

    def __len__(self):
        return len(self.genomes)


@dataclass(frozen=True)
class LogRecord:
    generation: int
    best_fitness: Fraction
    mean_fitness: Fraction
    best_digest: str

    def row(self):
        return (self.generation, f"{float(self.best_fitness):.10f}",
                f"{float(self.mean_fitness):.10f}", self.best_digest)

    def to_json(self):
        return [self.generation, str(self.best_fitness), str(self.mean_fitness), self.best_digest]

    @classmethod
    def from_json(cls, item):
        return cls(int(item[0]), Fraction(item[1]), Fraction(item[2]), item[3])


@dataclass
class EvolutionLog:
    records: list = field(default_factory=list)

    def append(self, record: LogRecord):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        writer.writerows(r.row() for r in self.records)
        return buf.getvalue()


@dataclass
class EvolutionResult:
    log: EvolutionLog
    best: np.ndarray
    best_fitness: Fraction
    population: Population


@dataclass(frozen=True)
class MutationReport:
    point: int = 0
    duplicated: bool = False
    deleted: bool = False


def derive_rng(seed: int, stream: int, generation: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, generation)))


def random_genome(rng: np.random.Generator, length: int = 5000, n_codons: int = 12) -> np.ndarray:
    """Uniform random bytes with ``n_codons`` start codons planted at distinct offsets."""
    if not MIN_GENOME <= length <= MAX_GENOME:
        raise ValueError(f"length {length} outside [{MIN_GENOME}, {MAX_GENOME}]")
    g = rng.integers(0, 256, size=length, dtype=np.uint8)
    for p in rng.choice(length - GENE_BYTES + 1, size=n_codons, replace=False):
        g[p], g[p + 1] = START_CODON
    return g


def mutate_with_report(g, rng: np.random.Generator, cfg: EvolutionConfig) -> tuple[np.ndarray, MutationReport]:
    """Point mutations, then maybe one duplication, then maybe one deletion."""
    g = as_genome(g).copy()
    n = len(g)
    k = int(rng.binomial(n, cfg.point_rate)) if cfg.point_rate > 0 else 0
    if k:
        where = rng.choice(n, size=k, replace=False)
        g[where] = rng.integers(0, 256, size=k, dtype=np.uint8)

    duplicated = deleted = False
    if cfg.dup_rate > 0 and rng.random() < cfg.dup_rate:
        n = len(g)
        seg = min(int(rng.integers(cfg.segment_min, cfg.segment_max + 1)), n)
        start = int(rng.integers(0, n - seg + 1))
        at = int(rng.integers(0, n + 1))
        if n + seg <= cfg.max_genome:
            g = np.concatenate([g[:at], g[start:start + seg], g[at:]])
            duplicated = True
    if cfg.del_rate > 0 and rng.random() < cfg.del_rate:
        n = len(g)
        seg = min(int(rng.integers(cfg.segment_min, cfg.segment_max + 1)), n)
        start = int(rng.integers(0, n - seg + 1))
        if n - seg >= cfg.min_genome:
            g = np.concatenate([g[:start], g[start + seg:]])
            deleted = True
    return g, MutationReport(k, duplicated, deleted)


def mutate(g, rng: np.random.Generator, cfg: EvolutionConfig) -> np.ndarray:
    return mutate_with_report(g, rng, cfg)[0]


def pair_winners(order, fitnesses) -> list[int]:
    """Winner index of each consecutive pair in ``order``; ties go to the first."""
    order = list(order)
    if len(order) % 2:
        raise ValueError("tournament needs an even number of competitors")
    winners = []
    for a, b in zip(order[::2], order[1::2]):
        winners.append(b if fitnesses[b] > fitnesses[a] else a)
    return winners


def tournament_round(pop: Population, fitnesses, rng: np.random.Generator,
                     cfg: EvolutionConfig) -> Population:
    """Shuffle, pair off, and replace each pair by winner + mutated winner."""
    if len(fitnesses) != len(pop):
        raise ValueError("need one fitness per genome")
    order = rng.permutation(len(pop))
    genomes = []
    for w in pair_winners(order, fitnesses):
        genomes.append(pop.genomes[w])
        genomes.append(mutate(pop.genomes[w], rng, cfg))
    return Population(genomes, pop.generation + 1)


def seed_from_elite(elite, rng: np.random.Generator, cfg: EvolutionConfig) -> Population:
    """One exact copy of ``elite`` plus ``population_size - 1`` mutants."""
    elite = as_genome(elite)
    return Population([elite] + [mutate(elite, rng, cfg) for _ in range(cfg.population_size - 1)])


def initial_population(cfg: EvolutionConfig) -> Population:
    rng = derive_rng(cfg.seed, STREAM_INIT)
    return Population([random_genome(rng, cfg.initial_length) for _ in range(cfg.population_size)])


def generation_starts(cfg: EvolutionConfig, generation: int, n_images: int) -> np.ndarray:
    """Start positions shared by every genome in ``generation``; row i is image i's."""
    key = generation if cfg.starts_policy == "per-generation" else 0
    return draw_starts(derive_rng(cfg.seed, STREAM_STARTS, key), n_images)


class PopulationEvaluator:
    """Scores whole populations on a dataset, optionally over a thread pool.

    Returned fitness values are integer numerators over
    ``SCORE_DENOM * len(data)``, so comparisons are exact.
    """

    def __init__(self, data: Dataset, max_steps: int = MAX_STEPS, threads: int = 1):
        self.data = data
        self.max_steps = max_steps
        self.threads = max(1, int(threads))
        self._labels = np.asarray(data.labels, np.int64)
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def _one(self, genome, starts):
        scores, _ = score_network(decode_genome(genome), self.data.images, self._labels, starts, self.max_steps)
        return int(scores.sum())

    def __call__(self, genomes, starts) -> np.ndarray:
        starts = np.ascontiguousarray(starts, dtype=np.int64)
        if self._pool is None:
            totals = [self._one(g, starts) for g in genomes]
        else:
            totals = list(self._pool.map(lambda g: self._one(g, starts), genomes))
        return np.array(totals, dtype=np.int64)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def save_checkpoint(path, cfg: EvolutionConfig, pop: Population, evo_log: EvolutionLog) -> None:
    """Atomically write a resumable checkpoint; a previous file survives any failure."""
    path = Path(path)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(cfg),
        "generation": pop.generation,
        "rng": {"scheme": "SeedSequence(seed, spawn_key=(stream, generation))",
                "seed": cfg.seed, "generation": pop.generation},
        "genomes": [base64.b64encode(as_genome(g).tobytes()).decode("ascii") for g in pop.genomes],
        "log": [r.to_json() for r in evo_log.records],
    }
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(json.dumps(payload))
        os.replace(tmp, path)
    except OSError as exc:
        raise CheckpointError(f"could not write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> tuple[EvolutionConfig, Population, EvolutionLog]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: not a version-{CHECKPOINT_VERSION} checkpoint")
    cfg = EvolutionConfig(**payload["config"])
    genomes = [np.frombuffer(base64.b64decode(s), dtype=np.uint8).copy() for s in payload["genomes"]]
    evo_log = EvolutionLog([LogRecord.from_json(item) for item in payload["log"]])
    return cfg, Population(genomes, payload["generation"]), evo_log


# Keys that may differ between a checkpoint and the run resuming it.
_RESUMABLE_CHANGES = {"generations", "checkpoint_every"}


def run_evolution(cfg: EvolutionConfig, data: Dataset, initial: Population | None = None, *,
                  threads: int = 1, checkpoint_path=None, resume_from=None,
                  callback=None) -> EvolutionResult:
    """Evaluate, log, and select for ``cfg.generations`` rounds.

    The log gets one record per evaluated generation, ``generations + 1``
    in total. ``callback(record)`` is called after each record; returning
    True stops the run early. Checkpoints are written after selection every
    ``cfg.checkpoint_every`` generations when ``checkpoint_path`` is given.
    """
    if resume_from is not None:
        saved_cfg, pop, evo_log = load_checkpoint(resume_from)
        mismatched = {k for k, v in asdict(saved_cfg).items()
                      if getattr(cfg, k) != v and k not in _RESUMABLE_CHANGES}
        if mismatched:
            raise CheckpointError(f"config differs from checkpoint in: {sorted(mismatched)}")
    else:
        pop = initial if initial is not None else initial_population(cfg)
        evo_log = EvolutionLog()
    for g in pop.genomes:
        if not cfg.min_genome <= len(g) <= cfg.max_genome:
            raise ValueError(f"genome length {len(g)} outside configured bounds")

    denom = SCORE_DENOM * max(len(data), 1)
    with PopulationEvaluator(data, cfg.max_steps, threads) as evaluate:
        while True:
            gen = pop.generation
            totals = evaluate(pop.genomes, generation_starts(cfg, gen, len(data)))
            best = int(np.argmax(totals))
            record = LogRecord(gen, Fraction(int(totals[best]), denom),
                               Fraction(int(totals.sum()), denom * len(pop)),
                               genome_digest(pop.genomes[best]))
            evo_log.append(record)
            if gen % 100 == 0:
                log.info("generation %d best %.4f mean %.4f", gen,
                         float(record.best_fitness), float(record.mean_fitness))
            stop = callback(record) if callback is not None else False
            if gen >= cfg.generations or stop:
                break
            pop = tournament_round(pop, totals, derive_rng(cfg.seed, STREAM_SELECTION, gen), cfg)
            if checkpoint_path is not None and cfg.checkpoint_every and pop.generation % cfg.checkpoint_every == 0:
                save_checkpoint(checkpoint_path, cfg, pop, evo_log)

    return EvolutionResult(evo_log, pop.genomes[best], record.best_fitness, pop)
