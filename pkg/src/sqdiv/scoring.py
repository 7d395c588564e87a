"""Metric registry and efficient multi-team scoring sweeps.

score_team is the single-team entry point; score_teams amortizes the work a
full candidate sweep repeats per team: the pairwise contingency counts are
computed once per team and shared by the pairwise metrics, and for the
synergy metric the focal negative sets and per-focal pair statistics depend
only on the focal model (never on the rest of the team), so they are built
once per pool and reused across all candidate teams. Both paths evaluate
the same formula helpers, so sweep scores equal single-team scores.

Direction is metadata here: Yule's Q is a similarity (lower means more
diverse); every other score is higher-is-diverse. Callers never need to
know.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmetrics
from .qmetrics import (
    ANY_MEMBER_ERRS,
    FOCAL_ERRS,
    DiversityScore,
    UndefinedDiversityError,
    _member_ids,
    _pair_counts,
    _kappa_pairs,
    _q_pairs,
    _subset_indices,
    negative_samples,
)
from .sq import FocalResult, SQBreakdown, SQConfig, multiclass_kappa, sq_score

METRICS = ("CK", "QS", "BD", "GD", "KW", "SQ")

HIGHER_IS_DIVERSE = "higher-is-diverse"
LOWER_IS_DIVERSE = "lower-is-diverse"

_DIRECTIONS = {
    "CK": HIGHER_IS_DIVERSE,
    "QS": LOWER_IS_DIVERSE,
    "BD": HIGHER_IS_DIVERSE,
    "GD": HIGHER_IS_DIVERSE,
    "KW": HIGHER_IS_DIVERSE,
    "SQ": HIGHER_IS_DIVERSE,
}

_Q_FUNCS = {
    "CK": qmetrics.cohen_kappa_diversity,
    "QS": qmetrics.q_statistic,
    "BD": qmetrics.binary_disagreement,
    "GD": qmetrics.generalized_diversity,
    "KW": qmetrics.kohavi_wolpert,
}


def normalize_metric(metric):
    name = str(metric).strip().upper()
    if name not in METRICS:
        raise ValueError(f"unknown metric: {metric!r} (choose from {', '.join(METRICS)})")
    return name


def metric_direction(metric):
    return _DIRECTIONS[normalize_metric(metric)]


@dataclass(frozen=True)
class ScoreConfig:
    """One bundle of scoring knobs shared by every metric.

    use_full_set evaluates the classical metrics on all samples instead of
    the team's negative samples.
    """

    w_epsilon: float = 1.0
    w_alpha: float = 1.0
    negative_cap: int | None = None
    seed: int = 0
    use_full_set: bool = False
    alpha_on_labels: bool = True

    def sq_config(self):
        return SQConfig(
            w_epsilon=self.w_epsilon,
            w_alpha=self.w_alpha,
            negative_cap=self.negative_cap,
            seed=self.seed,
            alpha_on_labels=self.alpha_on_labels,
        )


def _q_subset(cm, team, cfg):
    if cfg.use_full_set:
        return np.arange(cm.n_samples)
    return negative_samples(
        cm, team, mode=ANY_MEMBER_ERRS, seed=cfg.seed, cap=cfg.negative_cap
    )


def score_team(pool, cm, team, metric, cfg=ScoreConfig()):
    """Score one team with one metric; raises UndefinedDiversityError when
    the classical metrics have no negative samples to work with."""
    metric = normalize_metric(metric)
    if metric == "SQ":
        breakdown = sq_score(pool, cm, team, cfg.sq_config())
        note = "all-focals-skipped" if breakdown.all_skipped else None
        return DiversityScore("SQ", breakdown.aggregate, detail=breakdown, note=note)
    return _Q_FUNCS[metric](cm, team, _q_subset(cm, team, cfg))


class _FocalTables:
    """Per-pool tables for sweeping the synergy metric over many teams.

    For every model f taken as focal: its negative sample count, each
    model's accuracy on those samples, and the kappa over every model
    pair's predictions there.
    """

    def __init__(self, pool, cm, cfg):
        m = pool.n_models
        labels = pool.predicted_labels()
        if cfg.alpha_on_labels:
            data, n_classes = labels, pool.n_classes
        else:
            data = (labels == pool.truth[None, :]).astype(np.int64)
            n_classes = 2
        self.counts = np.zeros(m, dtype=np.int64)
        self.acc = np.zeros((m, m))
        self.kappa = np.zeros((m, m, m))
        all_models = tuple(range(m))
        for f in range(m):
            neg = negative_samples(
                cm, all_models, mode=FOCAL_ERRS, seed=cfg.seed,
                cap=cfg.negative_cap, focal_id=f,
            )
            self.counts[f] = len(neg)
            if not len(neg):
                continue
            idx = np.asarray(neg.sample_indices, dtype=np.int64)
            self.acc[f] = cm.bits[:, idx].mean(axis=1)
            sliced = data[:, idx]
            for a in range(m):
                for b in range(a + 1, m):
                    k = multiclass_kappa(sliced[a], sliced[b], n_classes)
                    self.kappa[f, a, b] = k
                    self.kappa[f, b, a] = k

    def breakdown(self, team, cfg):
        members = _member_ids(team)
        per_focal, skipped = [], set()
        for focal in members:
            if self.counts[focal] == 0:
                skipped.add(focal)
                continue
            others = [m for m in members if m != focal]
            eps = float(np.mean(self.acc[focal, others]))
            if len(others) < 2:
                alpha = 0.0
            else:
                pair_vals = [
                    self.kappa[focal, others[a], others[b]]
                    for a in range(len(others))
                    for b in range(a + 1, len(others))
                ]
                alpha = float(np.mean(np.asarray(pair_vals)))
            per_focal.append(
                FocalResult(
                    focal_id=focal,
                    negative_count=int(self.counts[focal]),
                    sq_epsilon=eps,
                    sq_alpha=alpha,
                    combined=cfg.w_epsilon * eps + cfg.w_alpha * alpha,
                )
            )
        if per_focal:
            aggregate = float(np.mean(np.asarray([f.combined for f in per_focal])))
        else:
            aggregate = 0.0
        return SQBreakdown(
            per_focal=tuple(per_focal),
            aggregate=aggregate,
            skipped_focals=frozenset(skipped),
            all_skipped=not per_focal,
        )


def score_teams(pool, cm, teams, metrics, cfg=ScoreConfig()):
    """Score many teams with many metrics in one pass.

    Returns {metric: {team_key: DiversityScore}}. Classical-metric errors on
    a degenerate team abort the sweep with the offending team identified.
    """
    teams = list(teams)
    metrics = [normalize_metric(m) for m in metrics]
    if len(set(metrics)) != len(metrics):
        raise ValueError("duplicate metrics requested")
    out = {m: {} for m in metrics}
    q_wanted = [m for m in metrics if m != "SQ"]
    need_pairs = any(m in metrics for m in ("CK", "QS", "BD"))
    need_counts = any(m in metrics for m in ("GD", "KW"))
    tables = _FocalTables(pool, cm, cfg) if "SQ" in metrics else None

    for team in teams:
        members = list(_member_ids(team))
        if q_wanted:
            subset = _q_subset(cm, team, cfg)
            idx = _subset_indices(subset, cm.n_samples)
            if idx.size == 0:
                raise UndefinedDiversityError(
                    q_wanted[0],
                    f"undefined diversity: {'/'.join(q_wanted)} on team "
                    f"{team.team_key} (empty evaluation subset)",
                )
            sub = cm.bits[members][:, idx]
            if need_pairs:
                n11, n10, n01, n00 = _pair_counts(sub)
                if "CK" in out:
                    out["CK"][team.team_key] = DiversityScore(
                        "CK", float(np.mean(1.0 - _kappa_pairs(n11, n10, n01, n00)))
                    )
                if "QS" in out:
                    out["QS"][team.team_key] = DiversityScore(
                        "QS", float(np.mean(_q_pairs(n11, n10, n01, n00)))
                    )
                if "BD" in out:
                    out["BD"][team.team_key] = DiversityScore(
                        "BD", float(np.mean((n10 + n01) / sub.shape[1]))
                    )
            if need_counts:
                mm = sub.shape[0]
                correct = sub.sum(axis=0)
                if "GD" in out:
                    wrong = mm - correct
                    p1 = float(wrong.mean()) / mm
                    if p1 == 0.0:
                        out["GD"][team.team_key] = DiversityScore("GD", 0.0, note="no-failures")
                    else:
                        p2 = float((wrong * (wrong - 1)).mean()) / (mm * (mm - 1))
                        out["GD"][team.team_key] = DiversityScore("GD", float(1.0 - p2 / p1))
                if "KW" in out:
                    out["KW"][team.team_key] = DiversityScore(
                        "KW", float((correct * (mm - correct)).sum() / (idx.size * mm * mm))
                    )
        if tables is not None:
            breakdown = tables.breakdown(team, cfg)
            note = "all-focals-skipped" if breakdown.all_skipped else None
            out["SQ"][team.team_key] = DiversityScore(
                "SQ", breakdown.aggregate, detail=breakdown, note=note
            )
    return out
