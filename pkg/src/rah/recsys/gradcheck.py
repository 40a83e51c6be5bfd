"""Analytic vs central-difference gradients for the factorisation models."""

from __future__ import annotations

import numpy as np

from .dataset import RecDataset
from .models import FactorConfig, FactorModel, build_model


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(
    kind: str,
    dataset: RecDataset,
    epsilon: float = 1e-5,
    points: int = 100,
    coords_per_point: int = 8,
    seed: int = 0,
    config: FactorConfig | None = None,
    scale: float = 0.1,
) -> float:
    """Largest relative error over seeded parameter points and coordinates.

    Coordinates are drawn from the parameters the sample actually touches, plus
    the global bias, so the comparison is not dominated by pure L2 terms.
    """
    model = build_model(kind, dataset.universe, factor=config or FactorConfig(dim=4))
    if not isinstance(model, FactorModel):
        raise ValueError(f"{kind} has no gradient")
    rng = np.random.default_rng(seed)
    u, i, y, w = dataset.users, dataset.items, dataset.labels, dataset.weights
    worst = 0.0
    for _ in range(points):
        params = model.init_params(rng, scale)
        grads = model.gradient(params, u, i, y, w)
        keys = sorted(params)
        for _ in range(coords_per_point):
            key = keys[rng.integers(len(keys))]
            flat = params[key].reshape(-1)
            touched = np.flatnonzero(grads[key].reshape(-1) != 0)
            pool = touched if touched.size else np.arange(flat.size)
            pos = int(pool[rng.integers(pool.size)])
            saved = flat[pos]
            flat[pos] = saved + epsilon
            up = model.objective(params, u, i, y, w)
            flat[pos] = saved - epsilon
            down = model.objective(params, u, i, y, w)
            flat[pos] = saved
            numeric = (up - down) / (2 * epsilon)
            worst = max(worst, relative_error(float(grads[key].reshape(-1)[pos]), numeric))
    return worst
