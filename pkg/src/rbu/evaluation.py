"""Benchmark harness: stratified repeated 50/50 cross-validation, inner
model selection by the combined F/AUC/G-mean criterion, experiment sweeps,
rank aggregation and the Friedman statistic.

Every random decision derives its stream from the master seed and the unit
identity (dataset, method, classifier, fold), so reports are identical no
matter how work is scheduled, including across worker processes.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .baselines import ResampleSpec, apply_resample
from .dataio import BinaryTask, encode_categoricals, fit_standardizer, split_binary
from .errors import LeakageError, ParameterError
from .minority import categorize_minority
from .modeling import METRIC_NAMES, compute_metrics, make_classifier
from .seeding import derive_seed

SCHEMA_VERSION = 1
SELECTION_METRICS = ("f_measure", "auc", "g_mean")


@dataclass(frozen=True)
class FoldPlan:
    """Index lists for repeated stratified 50/50 splits.

    Each repeat contributes two folds: (half A trains, half B tests) and the
    swap.  ``folds[2r]`` and ``folds[2r + 1]`` belong to repeat ``r``.
    """

    repeats: int
    seed: int
    folds: tuple

    def __len__(self):
        return len(self.folds)


def make_folds(labels, repeats: int, seed) -> FoldPlan:
    """Seeded stratified half-and-half splits, both halves serving as train once."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    smallest = counts.min()
    if smallest < 2 * repeats:
        raise ParameterError(
            f"smallest class has {smallest} members, need at least {2 * repeats}"
        )
    rng = np.random.default_rng(seed)
    folds = []
    for _ in range(repeats):
        half_a, half_b = [], []
        for cls in classes:
            members = np.flatnonzero(labels == cls)
            perm = rng.permutation(members)
            n_a = len(members) // 2
            if len(members) % 2 == 1:
                n_a += int(rng.integers(0, 2))
            half_a.append(perm[:n_a])
            half_b.append(perm[n_a:])
        a = np.sort(np.concatenate(half_a))
        b = np.sort(np.concatenate(half_b))
        folds.append((a, b))
        folds.append((b, a))
    return FoldPlan(repeats=repeats, seed=seed, folds=tuple(folds))


def check_no_leakage(train_idx, test_idx) -> None:
    """Raise if any test index appears on the training side."""
    overlap = np.intersect1d(train_idx, test_idx)
    if len(overlap) > 0:
        raise LeakageError(f"test indices leaked into training: {overlap[:5]}")


def binary_task_from_labels(features: np.ndarray, labels01: np.ndarray) -> BinaryTask:
    labels01 = np.asarray(labels01)
    return BinaryTask(
        majority=features[labels01 == 0],
        minority=features[labels01 == 1],
        minority_label="1",
        majority_label="0",
    )


def _fit_and_score(classifier, train_features, train_labels, test_features):
    model = make_classifier(classifier)
    model.fit(train_features, train_labels)
    scores = model.score_samples(test_features)
    preds = (scores > 0.5).astype(np.int64)
    return preds, scores


def _stack_task(task: BinaryTask):
    features = np.vstack([task.majority, task.minority])
    labels = np.concatenate(
        [np.zeros(task.n_majority, dtype=np.int64), np.ones(task.n_minority, dtype=np.int64)]
    )
    return features, labels


def select_params(
    features,
    labels,
    grid,
    classifier: str,
    seed,
    inner_repeats: int = 3,
    plan_seed=None,
) -> ResampleSpec:
    """Pick the grid point maximizing the inner-CV mean of (F + AUC + G-mean)/3.

    A grid point whose resampling or fit fails on an inner fold scores 0 for
    that fold.  Ties keep the earliest grid point in declared order.
    """
    grid = list(grid)
    if not grid:
        raise ParameterError("empty parameter grid")
    if len(grid) == 1:
        return grid[0]
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if plan_seed is None:
        plan_seed = derive_seed(seed, "inner-plan")
    plan = make_folds(labels, inner_repeats, plan_seed)

    best_spec, best_score = None, -np.inf
    for grid_idx, spec in enumerate(grid):
        fold_scores = []
        for fold_idx, (train_idx, test_idx) in enumerate(plan.folds):
            try:
                task = binary_task_from_labels(features[train_idx], labels[train_idx])
                resampled = apply_resample(
                    task, spec, seed=derive_seed(seed, grid_idx, fold_idx)
                )
                fit_x, fit_y = _stack_task(resampled)
                preds, scores = _fit_and_score(classifier, fit_x, fit_y, features[test_idx])
                metrics = compute_metrics(labels[test_idx], preds, scores)
                combined = sum(getattr(metrics, m) for m in SELECTION_METRICS) / len(
                    SELECTION_METRICS
                )
            except Exception:
                combined = 0.0
            fold_scores.append(combined)
        score = float(np.mean(fold_scores))
        if score > best_score:
            best_spec, best_score = spec, score
    return best_spec


# ---------------------------------------------------------------------------
# Experiment sweep


def _evaluate_unit(payload):
    """Evaluate one (dataset, classifier, method) cell over every outer fold."""
    (
        dataset_name,
        features,
        labels01,
        folds,
        classifier,
        method_name,
        grid,
        master_seed,
        inner_repeats,
        standardize,
    ) = payload

    rows = []
    checks = 0
    for fold_idx, (train_idx, test_idx) in enumerate(folds):
        check_no_leakage(train_idx, test_idx)
        checks += 1
        row = {
            "dataset": dataset_name,
            "classifier": classifier,
            "method": method_name,
            "fold": fold_idx,
        }
        try:
            train_x_raw, train_y = features[train_idx], labels01[train_idx]
            test_x_raw, test_y = features[test_idx], labels01[test_idx]
            if standardize == "per-fold":
                scaler = fit_standardizer(train_x_raw)
                train_x = scaler.transform(train_x_raw)
                test_x = scaler.transform(test_x_raw)
            else:  # "global": matrix was standardized up front
                train_x, test_x = train_x_raw, test_x_raw
            unit_seed = derive_seed(master_seed, dataset_name, classifier, method_name, fold_idx)
            inner_plan_seed = derive_seed(master_seed, dataset_name, "inner", fold_idx)
            best = select_params(
                train_x,
                train_y,
                grid,
                classifier,
                seed=unit_seed,
                inner_repeats=inner_repeats,
                plan_seed=inner_plan_seed,
            )
            task = binary_task_from_labels(train_x, train_y)
            resampled = apply_resample(task, best, seed=derive_seed(unit_seed, "final"))
            fit_x, fit_y = _stack_task(resampled)
            preds, scores = _fit_and_score(classifier, fit_x, fit_y, test_x)
            metrics = compute_metrics(test_y, preds, scores)
            row["spec"] = best.label
            row["metrics"] = metrics.as_dict()
        except LeakageError:
            raise
        except Exception as exc:  # recorded, not fatal to the sweep
            row["spec"] = None
            row["metrics"] = None
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows, checks


@dataclass
class EvalReport:
    """Per-fold rows, fold-mean aggregates, average ranks and Friedman stats."""

    seed: int
    repeats: int
    datasets: list
    methods: list
    classifiers: list
    runs: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    friedman: list = field(default_factory=list)
    dataset_stats: list = field(default_factory=list)
    leakage_checks: int = 0

    def aggregate_metrics(self, dataset, method, classifier):
        for row in self.aggregates:
            if (
                row["dataset"] == dataset
                and row["method"] == method
                and row["classifier"] == classifier
            ):
                return row["metrics"]
        return None

    def to_json_dict(self) -> dict:
        def round6(value):
            if isinstance(value, dict):
                return {k: round6(v) for k, v in value.items()}
            if isinstance(value, list):
                return [round6(v) for v in value]
            if isinstance(value, float):
                return round(value, 6)
            return value

        return {
            "schema": SCHEMA_VERSION,
            "seed": self.seed,
            "repeats": self.repeats,
            "datasets": list(self.datasets),
            "methods": list(self.methods),
            "classifiers": list(self.classifiers),
            "runs": round6(self.runs),
            "aggregates": round6(self.aggregates),
            "ranks": round6(self.ranks),
            "friedman": round6(self.friedman),
            "dataset_stats": round6(self.dataset_stats),
            "leakage_checks": self.leakage_checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["dataset,classifier,method,fold,spec," + ",".join(METRIC_NAMES)]
        for row in self.runs:
            metrics = row.get("metrics")
            values = (
                ["%.6f" % metrics[m] for m in METRIC_NAMES]
                if metrics
                else [""] * len(METRIC_NAMES)
            )
            spec = row.get("spec") or row.get("error", "")
            lines.append(
                ",".join(
                    [
                        row["dataset"],
                        row["classifier"],
                        row["method"],
                        str(row["fold"]),
                        '"%s"' % spec,
                    ]
                    + values
                )
            )
        return "\n".join(lines) + "\n"


def run_experiment(
    datasets,
    methods,
    classifiers,
    seed,
    repeats: int = 5,
    inner_repeats: int = 3,
    jobs: int = 1,
    standardize: str = "per-fold",
    minority_labels=None,
    with_dataset_stats: bool = False,
) -> EvalReport:
    """Sweep methods x classifiers x folds over the given datasets.

    ``datasets`` maps name -> Dataset (two-class); ``methods`` maps method
    name -> parameter grid (list of ResampleSpec, declared order).  Cells
    that fail are recorded as failed runs; the sweep continues.
    """
    if standardize not in ("per-fold", "global"):
        raise ParameterError(f"unknown standardize mode {standardize!r}")
    if not datasets:
        raise ParameterError("no datasets given")
    if not methods:
        raise ParameterError("no methods given")
    minority_labels = minority_labels or {}

    prepared = []
    stats_rows = []
    for name, ds in datasets.items():
        encoded = encode_categoricals(ds)
        task = split_binary(encoded, minority_labels.get(name, "auto"))
        labels01 = np.zeros(encoded.n, dtype=np.int64)
        labels01[task.minority_indices] = 1
        features = encoded.features
        if standardize == "global":
            features = fit_standardizer(features).transform(features)
        plan = make_folds(labels01, repeats, derive_seed(seed, name, "folds"))
        prepared.append((name, features, labels01, plan))
        if with_dataset_stats:
            scaled = fit_standardizer(encoded.features).transform(encoded.features)
            report = categorize_minority(
                binary_task_from_labels(scaled, labels01), k=5, p=2.0
            )
            stats_rows.append(
                {
                    "dataset": name,
                    "ir": task.n_majority / task.n_minority,
                    "samples": encoded.n,
                    "features": encoded.m,
                    "type_proportions": report.proportions,
                }
            )

    units = [
        (
            name,
            features,
            labels01,
            plan.folds,
            classifier,
            method_name,
            list(grid),
            seed,
            inner_repeats,
            standardize,
        )
        for (name, features, labels01, plan) in prepared
        for classifier in classifiers
        for method_name, grid in methods.items()
    ]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_unit, units))
    else:
        results = [_evaluate_unit(unit) for unit in units]

    report = EvalReport(
        seed=seed,
        repeats=repeats,
        datasets=[name for name, *_ in prepared],
        methods=list(methods.keys()),
        classifiers=list(classifiers),
        dataset_stats=stats_rows,
    )
    for rows, checks in results:
        report.runs.extend(rows)
        report.leakage_checks += checks
    report.runs.sort(key=lambda r: (r["dataset"], r["classifier"], r["method"], r["fold"]))

    _aggregate(report)
    _rank_and_test(report)
    return report


def _aggregate(report: EvalReport) -> None:
    groups = {}
    for row in report.runs:
        key = (row["dataset"], row["classifier"], row["method"])
        groups.setdefault(key, []).append(row)
    for (dataset, classifier, method), rows in sorted(groups.items()):
        failed = [r for r in rows if r.get("metrics") is None]
        entry = {
            "dataset": dataset,
            "classifier": classifier,
            "method": method,
            "folds": len(rows),
            "failed_folds": len(failed),
        }
        if failed:
            entry["metrics"] = None
        else:
            entry["metrics"] = {
                m: float(np.mean([r["metrics"][m] for r in rows])) for m in METRIC_NAMES
            }
        report.aggregates.append(entry)


def rank_methods(means_by_dataset, methods):
    """Average ranks (best = 1, ties averaged) over datasets with complete cells.

    Returns (average ranks per method, per-dataset ranks, ranked datasets).
    """
    methods = list(methods)
    if len(methods) < 2:
        raise ParameterError("ranking needs at least 2 methods")
    per_dataset = {}
    for dataset, means in means_by_dataset.items():
        values = [means.get(m) for m in methods]
        if any(v is None for v in values):
            warnings.warn(
                f"dataset {dataset!r} has missing cells and is excluded from ranking"
            )
            continue
        ranks = rankdata([-v for v in values], method="average")
        per_dataset[dataset] = {m: float(r) for m, r in zip(methods, ranks)}
    if not per_dataset:
        raise ParameterError("no dataset has complete cells for ranking")
    average = {
        m: float(np.mean([per_dataset[d][m] for d in per_dataset])) for m in methods
    }
    return average, per_dataset, sorted(per_dataset)


def average_ranks(report: EvalReport, metric: str, classifier: str):
    """Per-method mean rank for one metric/classifier pair of a finished report."""
    if metric not in METRIC_NAMES:
        raise ParameterError(f"unknown metric {metric!r}")
    means_by_dataset = {}
    for row in report.aggregates:
        if row["classifier"] != classifier:
            continue
        metrics = row["metrics"]
        means_by_dataset.setdefault(row["dataset"], {})[row["method"]] = (
            None if metrics is None else metrics[metric]
        )
    average, _, _ = rank_methods(means_by_dataset, report.methods)
    return average


def friedman_statistic(ranks) -> tuple[float, int]:
    """Friedman chi-square over a datasets x methods rank matrix (no tie
    correction); degrees of freedom is methods - 1."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.ndim != 2:
        raise ParameterError("rank matrix must be 2-D (datasets x methods)")
    n, k = ranks.shape
    if n < 2 or k < 2:
        raise ParameterError(f"need at least 2 datasets and 2 methods, got {n}x{k}")
    mean_ranks = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * (float((mean_ranks**2).sum()) - k * (k + 1) ** 2 / 4.0)
    return chi2, k - 1


def _rank_and_test(report: EvalReport) -> None:
    if len(report.methods) < 2:
        return
    for classifier in report.classifiers:
        for metric in METRIC_NAMES:
            means_by_dataset = {}
            for row in report.aggregates:
                if row["classifier"] != classifier:
                    continue
                metrics = row["metrics"]
                means_by_dataset.setdefault(row["dataset"], {})[row["method"]] = (
                    None if metrics is None else metrics[metric]
                )
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    average, per_dataset, used = rank_methods(
                        means_by_dataset, report.methods
                    )
            except ParameterError:
                continue
            report.ranks.append(
                {
                    "classifier": classifier,
                    "metric": metric,
                    "average": average,
                    "per_dataset": per_dataset,
                    "datasets": used,
                }
            )
            if len(used) >= 2:
                matrix = [[per_dataset[d][m] for m in report.methods] for d in used]
                chi2, df = friedman_statistic(matrix)
                report.friedman.append(
                    {
                        "classifier": classifier,
                        "metric": metric,
                        "chi_square": chi2,
                        "df": df,
                        "datasets": len(used),
                    }
                )
