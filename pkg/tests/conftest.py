import numpy as np
import pytest

from saccade.brain import Gate, GateNetwork, decode_genome
from saccade.env import evaluate_fitness
from saccade.idx import synthetic_digits

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return report


@pytest.fixture(scope="session")
def digits():
    return synthetic_digits()


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(digits):
    """Compile the numba kernels once so timed tests measure work, not JIT."""
    net = decode_genome(bytes([42, 213] + [0] * 30))
    evaluate_fitness(net, digits, np.zeros((len(digits), 2), int))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- independent oracles ------------------------------------------------------

def reference_decode(genome: bytes) -> list[Gate]:
    """Plain-Python decoder written straight from the gene layout."""
    genome = bytes(genome)
    gates = []
    p = genome.find(b"\x2a\xd5")
    while p != -1:
        gene = genome[p:p + 28]
        if len(gene) == 28:
            n_in = gene[2] % 4 + 1
            n_out = gene[3] % 4 + 1
            ins = tuple(b % 64 for b in gene[4:4 + n_in])
            outs = tuple(b % 64 for b in gene[8:8 + n_out])
            table = tuple(b % 2 ** n_out for b in gene[12:12 + 2 ** n_in])
            gates.append(Gate(ins, outs, table))
        p = genome.find(b"\x2a\xd5", p + 1)
    return gates


def reference_sensors(img, x, y):
    """Brute force: visit every pixel of the grid and classify it."""
    fovea = [0] * 9
    rays = [0, 0, 0, 0]
    for yy in range(28):
        for xx in range(28):
            if not img[yy][xx]:
                continue
            if abs(xx - x) <= 1 and abs(yy - y) <= 1:
                fovea[3 * (yy - y + 1) + (xx - x + 1)] = 1
            if yy == y and xx >= x + 2:
                rays[0] = 1
            if xx == x and yy <= y - 2:
                rays[1] = 1
            if yy == y and xx <= x - 2:
                rays[2] = 1
            if xx == x and yy >= y + 2:
                rays[3] = 1
    return fovea, rays


def random_network(rng, n_gates=None) -> GateNetwork:
    n_gates = int(rng.integers(0, 30)) if n_gates is None else n_gates
    gates = []
    for _ in range(n_gates):
        n_in = int(rng.integers(1, 5))
        n_out = int(rng.integers(1, 5))
        gates.append(Gate(
            tuple(int(v) for v in rng.integers(0, 64, n_in)),
            tuple(int(v) for v in rng.integers(0, 64, n_out)),
            tuple(int(v) for v in rng.integers(0, 2 ** n_out, 2 ** n_in)),
        ))
    return GateNetwork.from_gates(gates)


def codon_rich_genome(rng, length=600, codons=20):
    g = rng.integers(0, 256, length).astype(np.uint8)
    for p in rng.integers(0, length - 1, codons):
        g[p], g[p + 1] = 42, 213
    return g
