"""Reproducible random number streams.

All stochastic code in the package draws from counter-based Philox generators so
that ensembles and parameter sweeps can run in any order (or in parallel) and
still reproduce bit-for-bit.  Substreams are derived from a master seed plus a
task index, never by sharing one generator across tasks.
"""

import numpy as np

__all__ = ["substream", "spawn_rng"]


def substream(master_seed, task_index=0):
    """Return the SeedSequence for task ``task_index`` under ``master_seed``."""
    return np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1),
                                  spawn_key=(int(task_index),))


def spawn_rng(master_seed, task_index=0):
    """Return a Generator on an independent Philox substream.

    The (master_seed, task_index) pair fully determines the stream, so two
    tasks with distinct indices never overlap and a rerun of any single task
    reproduces its draws exactly.
    """
    return np.random.Generator(np.random.Philox(substream(master_seed, task_index)))
