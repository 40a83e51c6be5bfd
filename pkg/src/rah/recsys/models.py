"""MF, FM, ItemKNN and Popularity recommenders with seeded fitting and ranking.

MF and FM minimise the weighted logistic objective

    J(theta) = sum_n w_n * BCE(sigmoid(s_n), y_n) + (l2 / 2) * ||theta||^2

over the labelled rows plus ``negatives`` sampled unobserved items per Like
(label 0, weight ``negative_weight``), resampled every epoch. Minibatch steps
use the batch's data gradient plus the L2 gradient scaled by batch/N, so a full
batch step is exact gradient descent on J.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .dataset import RecDataset, Universe

MODEL_FORMAT = "rah-model"
MODEL_VERSION = 1
KINDS = ("mf", "fm", "knn", "pop")


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class FactorConfig:
    dim: int = 32
    lr: float = 0.05
    l2: float = 0.01
    epochs: int = 30
    negatives: int = 4
    negative_weight: float = 0.25
    batch_size: int | None = 256
    init_scale: float = 0.01

    def __post_init__(self):
        if self.dim < 1 or self.epochs < 0 or self.negatives < 0:
            raise ValueError("dim must be positive; epochs and negatives non-negative")
        if self.lr <= 0 or self.l2 < 0 or self.negative_weight <= 0:
            raise ValueError("lr and negative_weight must be positive, l2 non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive or None")


@dataclass(frozen=True)
class KNNConfig:
    k: int = 20

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


def weighted_bce(logits: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * (np.logaddexp(0.0, logits) - labels * logits)))


def sample_negatives(
    dataset: RecDataset, count: int, rng: np.random.Generator, max_rounds: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniformly drawn unobserved items per Like row."""
    pos_users = np.repeat(dataset.users[dataset.labels == 1], count)
    if pos_users.size == 0:
        return pos_users, pos_users.copy()
    observed = dataset.observed_codes()
    n_items = dataset.n_items
    cand = rng.integers(0, n_items, size=pos_users.size)
    bad = np.isin(pos_users * n_items + cand, observed)
    for _ in range(max_rounds):
        if not bad.any():
            break
        cand[bad] = rng.integers(0, n_items, size=int(bad.sum()))
        bad = np.isin(pos_users * n_items + cand, observed)
    keep = ~bad
    return pos_users[keep], cand[keep]


class Recommender:
    kind = ""

    def __init__(self, universe: Universe):
        self.universe = universe

    @property
    def n_users(self) -> int:
        return len(self.universe.users)

    @property
    def n_items(self) -> int:
        return len(self.universe.items)

    def score_matrix(self, users: Iterable[int]) -> np.ndarray:
        raise NotImplementedError

    def score(self, user: int, item: int) -> float:
        if not 0 <= user < self.n_users:
            raise IndexError(f"unknown user index {user}")
        if not 0 <= item < self.n_items:
            raise IndexError(f"unknown item index {item}")
        return float(self.score_matrix([user])[0, item])

    def arrays(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def hyperparams(self) -> dict:
        return {}


class FactorModel(Recommender):
    """Shared SGD machinery for the two factorisation models."""

    def __init__(self, universe: Universe, config: FactorConfig):
        super().__init__(universe)
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        self.loss_history: list[float] = []

    def init_params(self, rng: np.random.Generator, scale: float | None = None) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def logits(self, params, users: np.ndarray, items: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def data_grad(self, params, users, items, residual) -> dict[str, np.ndarray]:
        """Gradient of sum_n residual_n * s_n with respect to params."""
        raise NotImplementedError

    def objective(self, params, users, items, labels, weights) -> float:
        penalty = 0.5 * self.config.l2 * sum(float(np.sum(p * p)) for p in params.values())
        return weighted_bce(self.logits(params, users, items), labels, weights) + penalty

    def gradient(self, params, users, items, labels, weights, reg_scale: float = 1.0) -> dict[str, np.ndarray]:
        residual = weights * (_sigmoid(self.logits(params, users, items)) - labels)
        grads = self.data_grad(params, users, items, residual)
        for key, value in params.items():
            grads[key] = grads[key] + reg_scale * self.config.l2 * value
        return grads

    def training_rows(self, dataset: RecDataset, rng: np.random.Generator):
        cfg = self.config
        if cfg.negatives == 0:
            return dataset.users, dataset.items, dataset.labels, dataset.weights
        nu, ni = sample_negatives(dataset, cfg.negatives, rng)
        return (
            np.concatenate([dataset.users, nu]),
            np.concatenate([dataset.items, ni]),
            np.concatenate([dataset.labels, np.zeros(len(nu))]),
            np.concatenate([dataset.weights, np.full(len(nu), cfg.negative_weight)]),
        )

    def fit(self, dataset: RecDataset, seed: int) -> FactorModel:
        if len(dataset) == 0:
            raise ValueError("cannot fit on an empty dataset")
        if dataset.universe != self.universe:
            raise ValueError("dataset and model index maps differ")
        cfg = self.config
        rng = np.random.default_rng(seed)
        params = self.init_params(rng)
        history = []
        for epoch in range(cfg.epochs):
            u, i, y, w = self.training_rows(dataset, rng)
            n = len(u)
            batch = n if cfg.batch_size is None else cfg.batch_size
            order = np.arange(n) if cfg.batch_size is None else rng.permutation(n)
            for start in range(0, n, batch):
                sel = order[start : start + batch]
                grads = self.gradient(params, u[sel], i[sel], y[sel], w[sel], reg_scale=len(sel) / n)
                for key in params:
                    params[key] -= cfg.lr * grads[key]
            loss = self.objective(params, u, i, y, w)
            if not np.isfinite(loss) or not all(np.isfinite(p).all() for p in params.values()):
                raise DivergenceError(f"{self.kind} diverged at epoch {epoch}")
            history.append(loss)
        self.params = params
        self.loss_history = history
        return self

    def arrays(self) -> dict[str, np.ndarray]:
        return dict(self.params)

    def hyperparams(self) -> dict:
        return asdict(self.config)


class MF(FactorModel):
    """score = mu + b_u + b_i + U_u . V_i"""

    kind = "mf"

    def init_params(self, rng, scale=None):
        s = self.config.init_scale if scale is None else scale
        d = self.config.dim
        return {
            "mu": rng.uniform(-s, s, 1),
            "bu": rng.uniform(-s, s, self.n_users),
            "bi": rng.uniform(-s, s, self.n_items),
            "U": rng.uniform(-s, s, (self.n_users, d)),
            "V": rng.uniform(-s, s, (self.n_items, d)),
        }

    def logits(self, params, users, items):
        return (
            params["mu"][0]
            + params["bu"][users]
            + params["bi"][items]
            + np.einsum("nd,nd->n", params["U"][users], params["V"][items])
        )

    def data_grad(self, params, users, items, residual):
        g_u = np.zeros_like(params["U"])
        g_v = np.zeros_like(params["V"])
        np.add.at(g_u, users, residual[:, None] * params["V"][items])
        np.add.at(g_v, items, residual[:, None] * params["U"][users])
        return {
            "mu": np.array([residual.sum()]),
            "bu": np.bincount(users, residual, self.n_users),
            "bi": np.bincount(items, residual, self.n_items),
            "U": g_u,
            "V": g_v,
        }

    def score_matrix(self, users):
        u = np.asarray(list(users), dtype=np.int64)
        p = self.params
        return p["mu"][0] + p["bu"][u][:, None] + p["bi"][None, :] + p["U"][u] @ p["V"].T


def fm_pairwise(factors: np.ndarray) -> np.ndarray:
    """Pairwise interaction sum over active unit-valued features.

    ``factors`` has shape (..., n_active, d); uses
    sum_{a<b} <v_a, v_b> = 0.5 * sum_k ((sum_a v_ak)^2 - sum_a v_ak^2).
    """
    total = factors.sum(axis=-2)
    return 0.5 * np.sum(total * total - np.sum(factors * factors, axis=-2), axis=-1)


class FM(FactorModel):
    """Features per example: user one-hot, item one-hot, item-domain one-hot."""

    kind = "fm"

    def __init__(self, universe, config):
        super().__init__(universe, config)
        self.item_domain = universe.domain_codes()
        self.n_features = self.n_users + self.n_items + len(universe.domains)

    def features(self, users: np.ndarray, items: np.ndarray) -> np.ndarray:
        return np.stack(
            [users, self.n_users + items, self.n_users + self.n_items + self.item_domain[items]], axis=1
        )

    def init_params(self, rng, scale=None):
        s = self.config.init_scale if scale is None else scale
        return {
            "w0": rng.uniform(-s, s, 1),
            "w": rng.uniform(-s, s, self.n_features),
            "V": rng.uniform(-s, s, (self.n_features, self.config.dim)),
        }

    def logits(self, params, users, items):
        feats = self.features(users, items)
        return params["w0"][0] + params["w"][feats].sum(axis=1) + fm_pairwise(params["V"][feats])

    def data_grad(self, params, users, items, residual):
        feats = self.features(users, items)
        active = params["V"][feats]
        total = active.sum(axis=1, keepdims=True)
        g_w = np.zeros_like(params["w"])
        g_v = np.zeros_like(params["V"])
        for col in range(feats.shape[1]):
            g_w += np.bincount(feats[:, col], residual, self.n_features)
            np.add.at(g_v, feats[:, col], residual[:, None] * (total[:, 0] - active[:, col]))
        return {"w0": np.array([residual.sum()]), "w": g_w, "V": g_v}

    def score_matrix(self, users):
        u = np.asarray(list(users), dtype=np.int64)
        p = self.params
        items = np.arange(self.n_items)
        vi = p["V"][self.n_users + items]
        vd = p["V"][self.n_users + self.n_items + self.item_domain]
        vu = p["V"][u]
        item_part = p["w"][self.n_users + items] + p["w"][self.n_users + self.n_items + self.item_domain]
        item_part = item_part + np.einsum("id,id->i", vi, vd)
        return p["w0"][0] + p["w"][u][:, None] + item_part[None, :] + vu @ (vi + vd).T


class ItemKNN(Recommender):
    """Cosine item-item similarity on the binary Like matrix, top-k neighbours per item."""

    kind = "knn"

    def __init__(self, universe: Universe, config: KNNConfig = KNNConfig()):
        super().__init__(universe)
        self.config = config
        self.likes = np.zeros((self.n_users, self.n_items))
        self.sim = np.eye(self.n_items)
        self.neighbors = np.zeros((self.n_items, self.n_items))

    def fit(self, dataset: RecDataset, seed: int = 0) -> ItemKNN:
        x = dataset.positives()
        norms = np.sqrt(x.sum(axis=0))
        co = x.T @ x
        denom = np.outer(norms, norms)
        sim = np.divide(co, denom, out=np.zeros_like(co), where=denom > 0)
        np.fill_diagonal(sim, 1.0)
        # top-k neighbours of each item, self excluded; ties go to the lower index
        masked = sim.copy()
        np.fill_diagonal(masked, -np.inf)
        k = min(self.config.k, self.n_items - 1)
        kept = np.zeros_like(sim)
        if k > 0:
            order = np.argsort(-masked, axis=1, kind="stable")[:, :k]
            rows = np.arange(self.n_items)[:, None]
            kept[rows, order] = sim[rows, order]
        self.likes, self.sim, self.neighbors = x, sim, kept
        return self

    def score_matrix(self, users):
        u = np.asarray(list(users), dtype=np.int64)
        return self.likes[u] @ self.neighbors.T

    def arrays(self):
        return {"likes": self.likes, "sim": self.sim, "neighbors": self.neighbors}

    def hyperparams(self):
        return asdict(self.config)


class Popularity(Recommender):
    kind = "pop"

    def __init__(self, universe: Universe):
        super().__init__(universe)
        self.counts = np.zeros(self.n_items)

    def fit(self, dataset: RecDataset, seed: int = 0) -> Popularity:
        like = dataset.labels == 1
        self.counts = np.bincount(dataset.items[like], minlength=self.n_items).astype(float)
        return self

    def score_matrix(self, users):
        u = list(users)
        return np.tile(self.counts, (len(u), 1))

    def arrays(self):
        return {"counts": self.counts}


def build_model(kind: str, universe: Universe, factor: FactorConfig | None = None, knn: KNNConfig | None = None):
    if kind == "mf":
        return MF(universe, factor or FactorConfig())
    if kind == "fm":
        return FM(universe, factor or FactorConfig())
    if kind == "knn":
        return ItemKNN(universe, knn or KNNConfig())
    if kind == "pop":
        return Popularity(universe)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def fit(kind: str, dataset: RecDataset, seed: int, factor: FactorConfig | None = None, knn: KNNConfig | None = None):
    return build_model(kind, dataset.universe, factor, knn).fit(dataset, seed)


def rank(
    model: Recommender,
    user: int,
    candidates: Iterable[int],
    exclude: Iterable[int] = (),
    k: int = 10,
    scores: np.ndarray | None = None,
) -> list[int]:
    """Top-k candidate indices by descending score; equal scores keep ascending index order."""
    banned = set(exclude)
    cand = np.array(sorted(c for c in set(candidates) if c not in banned), dtype=np.int64)
    if cand.size == 0:
        raise ValueError(f"no candidates left to rank for user {user}")
    row = model.score_matrix([user])[0] if scores is None else scores
    order = np.argsort(-row[cand], kind="stable")
    return cand[order[:k]].tolist()


def save_model(model: Recommender, path: str | Path) -> None:
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "hyperparams": model.hyperparams(),
        "universe": {
            "users": list(model.universe.users),
            "items": list(model.universe.items),
            "item_domain": list(model.universe.item_domain),
        },
    }
    with Path(path).open("wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta, sort_keys=True)), **model.arrays())


def load_model(path: str | Path) -> Recommender:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        arrays = {k: data[k] for k in data.files if k != "__meta__"}
    if meta.get("format") != MODEL_FORMAT or meta.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model file {meta.get('format')!r} v{meta.get('version')!r}")
    uni = meta["universe"]
    universe = Universe(tuple(uni["users"]), tuple(uni["items"]), tuple(uni["item_domain"]))
    kind = meta["kind"]
    hp = meta["hyperparams"]
    if kind in ("mf", "fm"):
        model = build_model(kind, universe, factor=FactorConfig(**hp))
        model.params = arrays
    elif kind == "knn":
        model = ItemKNN(universe, KNNConfig(**hp))
        model.likes, model.sim, model.neighbors = arrays["likes"], arrays["sim"], arrays["neighbors"]
    else:
        model = Popularity(universe)
        model.counts = arrays["counts"]
    return model
