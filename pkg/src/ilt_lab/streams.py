"""Deterministic random substreams and an order-preserving task map.

Every unit of Monte Carlo work is a task with an integer index; its
generator depends only on (master_seed, task_index), so results are the
same whatever the number of worker processes.
"""

import multiprocessing as mp

import numpy as np


def derive_substream(master_seed, task_index):
    """Counter-based generator for one task (Philox keyed by a SeedSequence)."""
    if task_index < 0:
        raise ValueError("task_index must be >= 0")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(task_index),))
    return np.random.Generator(np.random.Philox(ss))


def _call(job):
    fn, master_seed, index, args = job
    return fn(derive_substream(master_seed, index), index, *args)


def map_tasks(fn, n_tasks, master_seed, workers=1, args=()):
    """Run ``fn(rng, index, *args)`` for index in range(n_tasks).

    Results come back in task order.  ``fn`` and ``args`` must be picklable
    when ``workers > 1``.
    """
    jobs = [(fn, master_seed, i, tuple(args)) for i in range(n_tasks)]
    if workers <= 1 or n_tasks <= 1:
        return [_call(j) for j in jobs]
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(min(workers, n_tasks)) as pool:
        return pool.map(_call, jobs, chunksize=1)


def batch_sizes(n_items, batch):
    """Split n_items into consecutive batches of at most ``batch``."""
    full, rest = divmod(int(n_items), int(batch))
    return [int(batch)] * full + ([rest] if rest else [])
