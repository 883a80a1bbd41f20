"""Stratified k-fold cross-validation and randomized hyperparameter search."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .smo import SvmConfig, svm_fit, svm_predict


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Index arrays for k folds with per-class balance (seeded shuffle)."""
    labels = np.asarray(labels)
    if len(labels) < k:
        raise ValueError(f"need at least {k} samples for {k}-fold CV")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            folds[pos % k].append(int(sample))
    return [np.sort(np.array(f, dtype=np.intp)) for f in folds]


@dataclass
class CvResult:
    fold_accuracies: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_accuracies))


def kfold_cv(
    features: np.ndarray,
    labels: np.ndarray,
    config: SvmConfig,
    k: int = 5,
    seed: int = 0,
) -> CvResult:
    """Train on k-1 folds, validate on the held-out fold, for each fold."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    folds = stratified_folds(labels, k, seed)
    accuracies = []
    for held_out in folds:
        mask = np.ones(len(labels), dtype=bool)
        mask[held_out] = False
        model = svm_fit(features[mask], labels[mask], config)
        pred, _ = svm_predict(model, features[held_out])
        accuracies.append(float((pred == labels[held_out]).mean()))
    return CvResult(fold_accuracies=accuracies)


@dataclass(frozen=True)
class SearchSpace:
    gamma_range: tuple[float, float] = (1e-2, 1e1)   # log-uniform
    c_range: tuple[float, float] = (1e-1, 1e2)       # log-uniform
    coef0_choices: tuple[float, ...] = (0.0, 1.0)


def random_search(
    features: np.ndarray,
    labels: np.ndarray,
    n_trials: int,
    seed: int = 0,
    space: SearchSpace = SearchSpace(),
    k: int = 5,
) -> tuple[SvmConfig, CvResult, list[dict]]:
    """Sample n_trials configs, score each by k-fold CV, return the best.

    Deterministic given the seed; ties keep the earliest trial.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    best: tuple[SvmConfig, CvResult] | None = None
    trials = []
    for trial in range(n_trials):
        config = SvmConfig(
            gamma=float(np.exp(rng.uniform(*np.log(space.gamma_range)))),
            C=float(np.exp(rng.uniform(*np.log(space.c_range)))),
            coef0=float(rng.choice(space.coef0_choices)),
        )
        result = kfold_cv(features, labels, config, k=k, seed=seed)
        trials.append(
            {"gamma": config.gamma, "C": config.C, "coef0": config.coef0,
             "mean_accuracy": result.mean, "std_accuracy": result.std}
        )
        if best is None or result.mean > best[1].mean:
            best = (config, result)
    assert best is not None
    return best[0], best[1], trials
