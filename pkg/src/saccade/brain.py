"""Byte genomes and the deterministic gate networks decoded from them.

A genome is a 1-D ``uint8`` array. Scanning it for the start codon
``(42, 213)`` yields one gate per occurrence; each gate reads up to four
state bits at time t and ORs up to four bits into the fresh state at t+1.

State vectors are ``(64,)`` integer arrays of 0/1 with the layout below.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K

MIN_GENOME = 500
MAX_GENOME = 10_000
START_CODON = (K.CODON_A, K.CODON_B)
GENE_BYTES = K.GENE_BYTES

N_STATES = 64
VISION = slice(0, 9)
RAYS = slice(9, 13)
SENSORS = slice(0, 13)
MOTOR_V = K.MOTOR_V
MOTOR_H = K.MOTOR_H
GUESS = slice(15, 25)
VETO = slice(25, 35)
DONE = K.DONE
MEMORY = slice(36, 64)


@dataclass(frozen=True)
class Gate:
    """A lookup-table gate.

    The table index is built from the inputs with ``input_ids[0]`` as the
    least significant bit; bit j of a table entry goes to ``output_ids[j]``.
    """

    input_ids: tuple[int, ...]
    output_ids: tuple[int, ...]
    table: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.input_ids) <= 4 or not 1 <= len(self.output_ids) <= 4:
            raise ValueError("gates take 1 to 4 inputs and 1 to 4 outputs")
        if len(self.table) != 1 << len(self.input_ids):
            raise ValueError("table needs 2**n_in entries")
        if any(not 0 <= t < 1 << len(self.output_ids) for t in self.table):
            raise ValueError("table entry wider than n_out bits")
        if any(not 0 <= i < N_STATES for i in self.input_ids + self.output_ids):
            raise ValueError("state index out of range")

    @property
    def n_in(self):
        return len(self.input_ids)

    @property
    def n_out(self):
        return len(self.output_ids)


@dataclass(frozen=True, eq=False)
class GateNetwork:
    """Decoded brain, stored as parallel arrays for the compiled kernels."""

    n_in: np.ndarray
    n_out: np.ndarray
    ins: np.ndarray
    outs: np.ndarray
    table: np.ndarray
    genome_hash: str = field(default="")

    def __post_init__(self):
        for name in ("n_in", "n_out", "ins", "outs", "table"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_gates(cls, gates, genome_hash: str = "") -> "GateNetwork":
        gates = list(gates)
        g = len(gates)
        ins = np.zeros((g, 4), np.int64)
        outs = np.zeros((g, 4), np.int64)
        table = np.zeros((g, 16), np.int64)
        for k, gate in enumerate(gates):
            ins[k, : gate.n_in] = gate.input_ids
            outs[k, : gate.n_out] = gate.output_ids
            table[k, : len(gate.table)] = gate.table
        return cls(
            np.array([gt.n_in for gt in gates], np.int64),
            np.array([gt.n_out for gt in gates], np.int64),
            ins,
            outs,
            table,
            genome_hash,
        )

    @property
    def arrays(self):
        return self.n_in, self.n_out, self.ins, self.outs, self.table

    @property
    def gates(self) -> list[Gate]:
        return [
            Gate(
                tuple(int(v) for v in self.ins[k, :ni]),
                tuple(int(v) for v in self.outs[k, :no]),
                tuple(int(v) for v in self.table[k, : 1 << ni]),
            )
            for k, (ni, no) in enumerate(zip(self.n_in, self.n_out))
        ]

    def __len__(self):
        return len(self.n_in)

    def __eq__(self, other):
        if not isinstance(other, GateNetwork):
            return NotImplemented
        return self.gates == other.gates

    def step(self, state):
        return brain_step(self, state)


def constant_network(state_ids) -> GateNetwork:
    """Network that sets every listed state bit to 1 on every step."""
    ids = sorted(set(int(i) for i in state_ids))
    gates = [Gate((0,), tuple(chunk), ((1 << len(chunk)) - 1,) * 2)
             for chunk in (ids[k:k + 4] for k in range(0, len(ids), 4))]
    return GateNetwork.from_gates(gates)


def as_genome(g) -> np.ndarray:
    if isinstance(g, (bytes, bytearray, memoryview)):
        return np.frombuffer(bytes(g), dtype=np.uint8).copy()
    return np.ascontiguousarray(g, dtype=np.uint8)


def genome_digest(g) -> str:
    """Hex SHA-256 of the genome bytes."""
    return hashlib.sha256(as_genome(g).tobytes()).hexdigest()


def decode_genome(g) -> GateNetwork:
    """Decode every start codon whose 28-byte gene fits inside the genome.

    Overlapping genes are allowed: scanning resumes one byte after each codon.
    """
    g = as_genome(g)
    return GateNetwork(*K.decode(g), genome_hash=genome_digest(g))


def empty_state() -> np.ndarray:
    return np.zeros(N_STATES, dtype=np.int64)


def brain_step(net: GateNetwork, s) -> np.ndarray:
    """State at t+1 from state at t: all gates read ``s``, writes are OR-merged."""
    s = np.asarray(s, dtype=np.int64)
    out = empty_state()
    if len(net) == 0:
        return out
    in_mask = np.arange(4) < net.n_in[:, None]
    idx = ((s[net.ins] * in_mask) << np.arange(4)).sum(axis=1)
    entries = net.table[np.arange(len(net)), idx]
    bits = (entries[:, None] >> np.arange(4)) & 1
    fire = (bits == 1) & (np.arange(4) < net.n_out[:, None])
    out[net.outs[fire]] = 1
    return out


def save_genome(path, genome, **meta) -> Path:
    """Write raw bytes to ``path`` plus a ``path.json`` metadata sidecar.

    The sidecar always carries ``length`` and ``digest``; callers add
    ``generation``, ``fitness`` and ``seed`` when known.
    """
    path = Path(path)
    genome = as_genome(genome)
    path.write_bytes(genome.tobytes())
    record = {"length": int(len(genome)), "digest": genome_digest(genome)}
    record.update({k: meta.get(k) for k in ("generation", "fitness", "seed")})
    record.update({k: v for k, v in meta.items() if k not in record})
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return sidecar


def load_genome(path) -> np.ndarray:
    """Read a ``.genome`` file, checking its digest against the sidecar if present."""
    path = Path(path)
    genome = as_genome(path.read_bytes())
    sidecar = path.with_name(path.name + ".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        if meta.get("digest") not in (None, genome_digest(genome)):
            raise ValueError(f"{path}: digest does not match {sidecar.name}")
    return genome
