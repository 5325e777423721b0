# %% [markdown]
# # Looking inside an evolved brain
#
# Uses `demo_run/best.genome` from the previous demo (or a random genome
# if it is missing): accuracy per digit, where the fovea spends its time,
# and one recorded scan.

# %%
import os
from pathlib import Path

import numpy as np

from saccade.analysis import evaluate_accuracy, trace_episode, visit_heatmap, write_heatmap
from saccade.brain import decode_genome, load_genome
from saccade.evolution import EvolutionConfig, generation_starts, random_genome
from saccade.idx import synthetic_digits

OUT = Path(os.environ.get("OUT", "demo_run"))
OUT.mkdir(exist_ok=True)
path = OUT / "best.genome"
genome = load_genome(path) if path.exists() else random_genome(np.random.default_rng(0))
net = decode_genome(genome)
digits = synthetic_digits()
print(len(net), "gates")

# %% [markdown]
# Accuracy here is strict: the digit counts only if it is the single final
# guess. The partial-credit column is the training score. Fresh random
# starts (seed 0) differ from the fixed starts used in training.

# %%
print(evaluate_accuracy(net, digits, starts_seed=0).pretty())

# %% [markdown]
# The training starts, for comparison:

# %%
cfg = EvolutionConfig(starts_policy="fixed", seed=2)
train_starts = generation_starts(cfg, 0, len(digits))
heat = visit_heatmap(net, digits, starts=train_starts)
for row in heat:
    print("".join(" .:-=+*#%@"[min(9, int(9 * v / max(1, heat.max())))] for v in row))
write_heatmap(OUT, heat)

# %% [markdown]
# One scan, written as JSON lines plus a greymap overlay.

# %%
result, paths = trace_episode(net, digits.images[3], train_starts[3], OUT)
print(sorted(result.final_guesses), result.steps_used, result.trajectory)
print(paths)
