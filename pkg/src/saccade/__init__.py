"""Evolved gate-network agents that classify digits by saccading over them."""

from .analysis import evaluate_accuracy, trace_episode, visit_heatmap
from .brain import Gate, GateNetwork, brain_step, decode_genome, genome_digest, load_genome, save_genome
from .env import evaluate_fitness, raycast, run_episode, score_episode, sense
from .evolution import EvolutionConfig, mutate, random_genome, run_evolution, seed_from_elite, tournament_round
from .idx import Dataset, binarize, load_mnist, parse_idx_images, parse_idx_labels, select_training_subset, synthetic_digits

__all__ = [
    "Dataset", "EvolutionConfig", "Gate", "GateNetwork",
    "binarize", "brain_step", "decode_genome", "evaluate_accuracy", "evaluate_fitness",
    "genome_digest", "load_genome", "load_mnist", "mutate", "parse_idx_images", "parse_idx_labels",
    "random_genome", "raycast", "run_episode", "run_evolution", "save_genome", "score_episode",
    "seed_from_elite", "select_training_subset", "sense", "synthetic_digits", "tournament_round",
    "trace_episode", "visit_heatmap",
]
