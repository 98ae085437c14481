"""Rank-based genetic algorithm over 16-bit-per-parameter genomes.

A genome holds five unsigned 16-bit genes, one per cell parameter
(a, b, c, d, u0), stored as plain binary integers and mapped linearly onto
their value ranges.  Mutation flips a single bit in the Gray-code image of
one gene, so neighbouring phenotype states differ by one bit; crossover
cuts only between genes.  Parents are drawn by linear ranking and the best
individual of each generation is copied unchanged into the next one.

Randomness is split into named substreams: the variation stage of
generation g draws from SeedSequence(seed, spawn_key=stream_key + (g,)),
with key (stream_key + (0,)) seeding the initial population.  Fitness
evaluations consume no randomness, so evaluating in parallel cannot change
the course of a run.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DEFAULT_RANGES, PARAMETER_NAMES, NeuronParameters, ParameterRanges

GENE_BITS = 16
GENE_MAX = (1 << GENE_BITS) - 1  # 65535
GENE_COUNT = 5


def to_gray(x: int) -> int:
    """Reflected binary Gray code of a 16-bit integer."""
    return x ^ (x >> 1)


def from_gray(g: int) -> int:
    """Inverse of to_gray for 16-bit values."""
    x = g
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x


@dataclass(frozen=True)
class Genome:
    genes: tuple[int, int, int, int, int]

    def __post_init__(self):
        if len(self.genes) != GENE_COUNT:
            raise ValueError(f"expected {GENE_COUNT} genes, got {len(self.genes)}")
        for g in self.genes:
            if not 0 <= g <= GENE_MAX:
                raise ValueError(f"gene {g} outside [0, {GENE_MAX}]")


def decode(genome: Genome, ranges: ParameterRanges = DEFAULT_RANGES) -> NeuronParameters:
    """Map genes onto phenotype values: lo + gene/65535 * (hi - lo)."""
    values = [
        lo + (g / GENE_MAX) * (hi - lo)
        for g, (lo, hi) in zip(genome.genes, ranges.astuples())
    ]
    return NeuronParameters(*values)


def encode(params: NeuronParameters, ranges: ParameterRanges = DEFAULT_RANGES) -> Genome:
    """Nearest-gene inverse of decode; rejects out-of-range phenotypes."""
    ranges.validate(params, context="encode")
    genes = []
    for x, (lo, hi) in zip(params.astuple(), ranges.astuples()):
        genes.append(0 if hi == lo else int(round((x - lo) / (hi - lo) * GENE_MAX)))
    return Genome(genes=tuple(genes))


def mutate(genome: Genome, rng: np.random.Generator) -> Genome:
    """Flip one random bit of one random gene, in the Gray-code domain."""
    idx = int(rng.integers(GENE_COUNT))
    bit = int(rng.integers(GENE_BITS))
    flipped = from_gray(to_gray(genome.genes[idx]) ^ (1 << bit))
    genes = list(genome.genes)
    genes[idx] = flipped
    return Genome(genes=tuple(genes))


def crossover(g1: Genome, g2: Genome, rng: np.random.Generator) -> Genome:
    """Single cut between two genes; genes are never split internally."""
    k = int(rng.integers(1, GENE_COUNT))
    return Genome(genes=g1.genes[:k] + g2.genes[k:])


def rank_select(errors: list[float] | np.ndarray, rng: np.random.Generator) -> int:
    """Draw one parent index by linear ranking over ascending error.

    Rank k (1 = best) is selected with probability 2(p - k + 1) / (p(p + 1));
    ties keep their original order.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 1 or errors.size == 0:
        raise ValueError("errors must be a non-empty vector")
    if not np.all(np.isfinite(errors)):
        raise ValueError("errors must be finite")
    order = np.argsort(errors, kind="stable")
    cum = _rank_cum_weights(errors.size)
    return _pick_ranked(order, cum, rng)


def _rank_cum_weights(p: int) -> np.ndarray:
    # weight p for the best-ranked individual down to 1 for the worst
    return np.cumsum(np.arange(p, 0, -1, dtype=float))


def _pick_ranked(order: np.ndarray, cum: np.ndarray, rng: np.random.Generator) -> int:
    pos = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return int(order[min(pos, len(order) - 1)])


@dataclass(frozen=True)
class GAConfig:
    population: int = 1000
    generations: int = 100
    crossover_rate: float = 0.5
    mutation_rate: float = 0.5
    seed: int = 0
    ranges: ParameterRanges = field(default_factory=ParameterRanges)

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.generations < 1:
            raise ValueError("need at least one generation")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")


@dataclass
class EvolutionHistory:
    best_error: list[float] = field(default_factory=list)
    mean_error: list[float] = field(default_factory=list)
    best_params: list[NeuronParameters] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best_error)


def _stream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def random_genome(rng: np.random.Generator) -> Genome:
    return Genome(genes=tuple(int(g) for g in rng.integers(0, GENE_MAX + 1, size=GENE_COUNT)))


def evolve(
    cfg: GAConfig,
    error_fn,
    stream_key: tuple[int, ...] = (),
) -> tuple[Genome, EvolutionHistory]:
    """Minimise error_fn(genome) and return the best genome plus history.

    error_fn must be deterministic for a fixed genome.  Per generation the
    population is evaluated, the best individual copied unchanged into the
    next population, and the remaining slots are filled by rank selection,
    then crossover with probability crossover_rate (against a second
    rank-selected parent), then mutation with probability mutation_rate.
    """
    init_rng = _stream(cfg.seed, stream_key + (0,))
    population = [random_genome(init_rng) for _ in range(cfg.population)]

    history = EvolutionHistory()
    best_genome: Genome | None = None
    best_error = np.inf

    for gen in range(cfg.generations):
        errors = []
        for genome in population:
            try:
                errors.append(float(error_fn(genome)))
            except Exception as exc:
                raise RuntimeError(
                    f"error function failed in generation {gen} "
                    f"for phenotype {decode(genome, cfg.ranges)}"
                ) from exc

        i_best = int(np.argmin(errors))  # argmin keeps the lowest index on ties
        if errors[i_best] < best_error:
            best_error = errors[i_best]
            best_genome = population[i_best]
        history.best_error.append(errors[i_best])
        history.mean_error.append(float(np.mean(errors)))
        history.best_params.append(decode(population[i_best], cfg.ranges))

        if gen == cfg.generations - 1:
            break

        rng = _stream(cfg.seed, stream_key + (gen + 1,))
        order = np.argsort(errors, kind="stable")
        cum = _rank_cum_weights(cfg.population)
        next_population = [population[i_best]]  # elite, protected from variation
        for _ in range(cfg.population - 1):
            child = population[_pick_ranked(order, cum, rng)]
            if rng.random() < cfg.crossover_rate:
                mate = population[_pick_ranked(order, cum, rng)]
                child = crossover(child, mate, rng)
            if rng.random() < cfg.mutation_rate:
                child = mutate(child, rng)
            next_population.append(child)
        population = next_population

    assert best_genome is not None
    return best_genome, history
