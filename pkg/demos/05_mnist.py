# %% [markdown]
# # MNIST
#
# Needs the four official IDX files (gzipped or not) in `MNIST_DIR`. The
# training set is cut down to the first 100 images of each digit; the test
# set is used whole. Evolving to a good MNIST classifier takes days, so
# this only shows the plumbing.

# %%
import os
import sys
from pathlib import Path

import numpy as np

from saccade.analysis import evaluate_accuracy
from saccade.brain import decode_genome
from saccade.evolution import EvolutionConfig, run_evolution
from saccade.idx import load_mnist

MNIST_DIR = Path(os.environ.get("MNIST_DIR", "data/mnist"))
if not (MNIST_DIR / "train-images-idx3-ubyte").exists() and not (MNIST_DIR / "train-images-idx3-ubyte.gz").exists():
    print(f"no MNIST files in {MNIST_DIR}; set MNIST_DIR")
    sys.exit(0)

train = load_mnist(MNIST_DIR, "train")
test = load_mnist(MNIST_DIR, "test")
print(len(train), np.bincount(train.labels), len(test))

# %%
cfg = EvolutionConfig(dataset="mnist", mnist_dir=str(MNIST_DIR), generations=20, seed=0)
result = run_evolution(cfg, train)
print(result.log.to_csv().splitlines()[-1])

# %%
print(evaluate_accuracy(decode_genome(result.best), test, starts_seed=0).pretty())
