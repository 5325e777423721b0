# %% [markdown]
# # From bytes to a brain
#
# A genome is a byte string. Every start codon `42 213` begins a 28-byte
# gene describing one lookup-table gate. The brain's 64 binary states are
# updated all at once each tick: every gate reads the old states, and the
# new state vector is the OR of everything the gates write.

# %%
import numpy as np

from saccade.brain import Gate, GateNetwork, brain_step, decode_genome, empty_state, genome_digest
from saccade.env import run_episode
from saccade.idx import synthetic_digits

gene = [42, 213, 0, 0, 5, 0, 0, 0, 7, 0, 0, 0, 1] + [0] * 15
genome = bytes(gene).ljust(500, b"\0")
net = decode_genome(genome)
print(net.gates)
print(genome_digest(genome)[:16])

# %% [markdown]
# That gate writes NOT(state 5) into state 7.

# %%
s = empty_state()
print(np.flatnonzero(brain_step(net, s)))
s[5] = 1
print(np.flatnonzero(brain_step(net, s)))

# %% [markdown]
# Hand-built agent: if the center pixel is lit, guess "1" and stop;
# otherwise keep saccading down-right. States 13/14 are the motors,
# 15..24 the guesses, 35 is "done".

# %%
agent = GateNetwork.from_gates([
    Gate((4,), (15 + 1, 35), (0, 3)),
    Gate((4,), (13, 14), (3, 0)),
])
digits = synthetic_digits()
for label in (1, 7):
    res = run_episode(agent, digits.images[label], (1, 1), record_trace=True)
    print(label, res.final_guesses, res.steps_used, res.trajectory)

# %% [markdown]
# It stops at the first lit pixel on its diagonal, so the 7 is called a 1
# too. Telling them apart needs more sensors, memory, and a better path,
# which is what evolution has to discover.

# %% [markdown]
# Random genomes decode to random wiring; most of it does nothing useful.

# %%
rng = np.random.default_rng(0)
g = rng.integers(0, 256, 5000).astype(np.uint8)
for p in rng.choice(4972, 12, replace=False):
    g[p], g[p + 1] = 42, 213
print(len(decode_genome(g)), "gates")
