"""Synthetic data from a DAG's structure.

Generates linear-Gaussian structural equations along a topological order:
each variable is a weighted sum of its parents plus independent Gaussian
noise. Latent variables are simulated but excluded from the returned
table, exactly as they would be missing from a mined dataset. Used by the
test suite as a ground-truth generator and handy for demos.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

import numpy as np

from .graph import CausalDag
from .stats import DatasetTable

__all__ = ["simulate_linear_gaussian"]


def simulate_linear_gaussian(
    dag: CausalDag,
    n: int,
    rng_seed: int = 0,
    weights: Optional[Mapping[tuple[str, str], float]] = None,
    weight_range: tuple[float, float] = (0.5, 1.5),
    noise_scale: float = 1.0,
    binary: Iterable[str] = (),
) -> DatasetTable:
    """Draw n rows from a linear-Gaussian model with `dag`'s structure.

    Edge weights default to uniform draws from `weight_range` with random
    sign. Columns named in `binary` are thresholded at their median to
    {0, 1} after generation (downstream causes see the binary value).
    """
    if n < 4:
        raise ValueError("need at least 4 rows")
    rng = np.random.default_rng(rng_seed)
    order = dag.topological_order()
    binary = set(binary)

    w: dict[tuple[str, str], float] = {}
    for e in dag.edges:
        if weights is not None and (e.src, e.dst) in weights:
            w[(e.src, e.dst)] = float(weights[(e.src, e.dst)])
        else:
            lo, hi = weight_range
            w[(e.src, e.dst)] = float(rng.uniform(lo, hi) * rng.choice([-1.0, 1.0]))

    values: dict[str, np.ndarray] = {}
    for name in order:
        col = rng.normal(scale=noise_scale, size=n)
        for p in sorted(dag.parents(name)):
            col = col + w[(p, name)] * values[p]
        if name in binary:
            col = (col > np.median(col)).astype(float)
        values[name] = col

    return DatasetTable({name: values[name] for name in sorted(dag.observed)})
