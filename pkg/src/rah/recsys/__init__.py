from .dataset import RecDataset, Universe
from .gradcheck import grad_check
from .metrics import EvalReport, evaluate, ndcg_at_k, recall_at_k
from .models import (
    FM,
    KINDS,
    MF,
    DivergenceError,
    FactorConfig,
    ItemKNN,
    KNNConfig,
    Popularity,
    build_model,
    fit,
    fm_pairwise,
    load_model,
    rank,
    save_model,
)

__all__ = [
    "FM",
    "KINDS",
    "MF",
    "DivergenceError",
    "EvalReport",
    "FactorConfig",
    "ItemKNN",
    "KNNConfig",
    "Popularity",
    "RecDataset",
    "Universe",
    "build_model",
    "evaluate",
    "fit",
    "fm_pairwise",
    "grad_check",
    "load_model",
    "ndcg_at_k",
    "rank",
    "recall_at_k",
    "save_model",
]
