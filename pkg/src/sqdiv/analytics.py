"""Evaluation artifacts: scatter data, diversity-accuracy correlations, and
per-sample case studies.

Scatter and correlation run over the full candidate set, not a top-K slice,
so the reported association covers the whole diversity-accuracy cloud.
Rendering is out of scope; everything here emits plot-ready rows or JSON.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scoring import ScoreConfig, normalize_metric, score_teams
from .teams import SOFT, consensus, enumerate_teams, make_team, team_accuracy_table

SCATTER_COLUMNS = ("team", "size", "score", "accuracy")


class UndefinedCorrelationError(ValueError):
    """Correlation requested on a constant (zero-variance) sequence."""


def pearson(xs, ys):
    """Pearson product-moment correlation of two equal-length sequences."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("pearson needs two equal-length 1-d sequences")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float(xc @ xc)
    vy = float(yc @ yc)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("undefined correlation: zero variance")
    return float((xc @ yc) / math.sqrt(vx * vy))


def _ranks(values):
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    base = np.empty(v.size, dtype=np.float64)
    base[order] = np.arange(1, v.size + 1, dtype=np.float64)
    _, inverse = np.unique(v, return_inverse=True)
    sums = np.bincount(inverse, weights=base)
    counts = np.bincount(inverse)
    return (sums / counts)[inverse]


def spearman(xs, ys):
    """Spearman rank correlation (average ranks on ties)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("spearman needs two equal-length 1-d sequences")
    return pearson(_ranks(x), _ranks(y))


@dataclass(frozen=True)
class SweepResult:
    """Shared sweep over all candidate teams: scores per metric + accuracy."""

    team_keys: tuple[str, ...]
    team_sizes: tuple[int, ...]
    scores: dict
    accuracy: dict


def sweep(pool, cm, metrics, cfg=ScoreConfig(), consensus_method=SOFT,
          min_size=2, max_size=None):
    teams = list(enumerate_teams(pool.n_models, min_size, max_size))
    scores = score_teams(pool, cm, teams, metrics, cfg)
    accuracy = team_accuracy_table(pool, teams, consensus_method)
    return SweepResult(
        team_keys=tuple(t.team_key for t in teams),
        team_sizes=tuple(t.size for t in teams),
        scores=scores,
        accuracy=accuracy,
    )


def scatter_export(pool, cm, metric, cfg=ScoreConfig(), consensus_method=SOFT,
                   min_size=2, max_size=None):
    """One (team_key, team_size, score, accuracy) row per candidate team."""
    metric = normalize_metric(metric)
    result = sweep(pool, cm, [metric], cfg, consensus_method, min_size, max_size)
    return [
        (key, size, result.scores[metric][key].value, result.accuracy[key])
        for key, size in zip(result.team_keys, result.team_sizes)
    ]


def correlation_report(pool, cm, metrics, cfg=ScoreConfig(), consensus_method=SOFT,
                       use_spearman=False, min_size=2, max_size=None):
    """Correlation between each metric's team scores and team accuracies.

    A metric whose scores are constant across teams (or a constant accuracy
    column) has no defined correlation and reports None.
    """
    metrics = [normalize_metric(m) for m in metrics]
    result = sweep(pool, cm, metrics, cfg, consensus_method, min_size, max_size)
    accs = [result.accuracy[k] for k in result.team_keys]
    estimator = spearman if use_spearman else pearson
    report = {}
    for metric in metrics:
        values = [result.scores[metric][k].value for k in result.team_keys]
        try:
            report[metric] = estimator(values, accs)
        except UndefinedCorrelationError:
            report[metric] = None
    return report


def case_study(pool, team, sample_id, consensus_method=SOFT):
    """Faithful slice of one sample: member probabilities, member argmax
    labels, the consensus label, and the truth. JSON-ready."""
    j = pool.sample_index(sample_id)
    team = make_team(getattr(team, "member_ids", team), pool.n_models)
    labels = pool.predicted_labels()
    fused = consensus(pool, team, consensus_method)
    truth_idx = int(pool.truth[j])
    members = []
    for m in team.member_ids:
        pred_idx = int(labels[m, j])
        members.append({
            "model_id": m,
            "name": pool.models[m].name,
            "probabilities": [float(v) for v in pool.probs[m, j]],
            "predicted": pool.classes[pred_idx],
            "correct": pred_idx == truth_idx,
        })
    consensus_idx = int(fused.predicted[j])
    return {
        "sample_id": pool.sample_ids[j],
        "team": team.team_key,
        "classes": list(pool.classes),
        "truth": pool.classes[truth_idx],
        "members": members,
        "consensus": {
            "method": fused.method,
            "predicted": pool.classes[consensus_idx],
            "correct": consensus_idx == truth_idx,
        },
    }
