# %% [markdown]
# # Evolving a classifier on the synthetic digits
#
# Population of 100 byte genomes, pairwise tournaments, winners keep an
# exact copy plus one mutant. Start positions are drawn once and kept
# fixed, which makes the task learnable in a few thousand generations.
#
# Set `GENERATIONS` higher for a better brain; 1,500 takes well under a
# minute on one core.

# %%
import os
from pathlib import Path

from saccade.brain import save_genome
from saccade.evolution import EvolutionConfig, run_evolution
from saccade.idx import synthetic_digits

GENERATIONS = int(os.environ.get("GENERATIONS", 1500))
OUT = Path(os.environ.get("OUT", "demo_run"))
OUT.mkdir(exist_ok=True)

cfg = EvolutionConfig(starts_policy="fixed", initial_length=500, generations=GENERATIONS, seed=2)
result = run_evolution(cfg, synthetic_digits())

# %% [markdown]
# The log has one record per generation; the CSV is the raw material for a
# fitness-over-time plot.

# %%
for rec in result.log.records[:: max(1, GENERATIONS // 10)]:
    print(f"{rec.generation:>6}  best {float(rec.best_fitness):.3f}  mean {float(rec.mean_fitness):.3f}")
(OUT / "fitness_log.csv").write_text(result.log.to_csv())
save_genome(OUT / "best.genome", result.best, generation=GENERATIONS,
            fitness=str(result.best_fitness), seed=cfg.seed)
print("best", float(result.best_fitness), "->", OUT / "best.genome")

# %% [markdown]
# The same thing from the shell:
#
#     saccade evolve --dataset synthetic --starts-policy fixed --initial-length 500 \
#         --generations 1500 --seed 2 --out demo_run
#
# and a second round seeded from mutants of the elite:
#
#     saccade evolve --seed-genome demo_run/best.genome --starts-policy fixed \
#         --generations 1500 --seed 3 --out demo_run2
