"""
Per-trial seed derivation.

Seeds are derived with a splitmix64 mix of (master_seed, trial_index, stream_tag)
so every trial and every random stream inside it is independent of execution
order. Trials can run in any order, on any worker, and draw identical numbers.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Stable integer tags; never renumber, CSV reproducibility depends on them.
STREAM_TAGS = {
    "trial": 0,
    "profiles": 1,
    "channels": 2,
    "noise": 3,
    "beams": 4,
}


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, trial_index: int, stream_tag: str = "trial") -> int:
    """
    Derive a 64-bit seed for one random stream of one trial.

    Args:
        master_seed: Experiment master seed in [0, 2**64)
        trial_index: Zero-based trial index
        stream_tag: One of STREAM_TAGS

    Returns:
        Unsigned 64-bit seed
    """
    if stream_tag not in STREAM_TAGS:
        raise KeyError(f"unknown stream tag: {stream_tag!r}")
    state = splitmix64(master_seed & MASK64)
    state = splitmix64(state ^ (trial_index & MASK64))
    return splitmix64(state ^ STREAM_TAGS[stream_tag])


def trial_rng(
    master_seed: int, trial_index: int, stream_tag: str
) -> np.random.Generator:
    """numpy Generator for one stream of one trial."""
    return np.random.default_rng(derive_seed(master_seed, trial_index, stream_tag))
