"""Least-squares with dummy-coded fixed effects and cluster-robust inference.

The covariance is the CR1 sandwich: G/(G-1) * (N-1)/(N-K) scaled meat of
per-cluster score outer products.  P-values use a t reference distribution
with G-1 degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import t as student_t


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    t_stat: float
    p_one_sided: float   # H0: coefficient <= 0 vs H1: > 0
    p_two_sided: float

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "t": self.t_stat,
                "p_one_sided": self.p_one_sided, "p_two_sided": self.p_two_sided}


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    n_obs: int
    n_clusters: int
    residuals: np.ndarray

    def __getitem__(self, name: str) -> Estimate:
        idx = self.names.index(name)
        return self._estimate(self.coefficients[idx],
                              float(np.sqrt(self.covariance[idx, idx])))

    def contrast(self, weights: Mapping[str, float]) -> Estimate:
        """Linear combination of coefficients, e.g. {"mode:C": 1, "mode:B": -1}."""
        lam = np.zeros(len(self.names))
        for name, weight in weights.items():
            lam[self.names.index(name)] = weight
        value = float(lam @ self.coefficients)
        se = float(np.sqrt(lam @ self.covariance @ lam))
        return self._estimate(value, se)

    def _estimate(self, value: float, se: float) -> Estimate:
        df = max(self.n_clusters - 1, 1)
        t_stat = value / se if se > 0 else np.inf * np.sign(value)
        p_one = float(student_t.sf(t_stat, df))
        p_two = float(2 * student_t.sf(abs(t_stat), df))
        return Estimate(value=value, se=se, t_stat=t_stat,
                        p_one_sided=p_one, p_two_sided=p_two)


def ols_cluster(design: np.ndarray, outcome: np.ndarray,
                clusters: Sequence, names: Sequence[str]) -> RegressionResult:
    X = np.asarray(design, dtype=float)
    y = np.asarray(outcome, dtype=float)
    n, k = X.shape
    rank = np.linalg.matrix_rank(X)
    if rank < k:
        # name the collinear columns: those whose removal restores full rank
        collinear = [names[j] for j in range(k)
                     if np.linalg.matrix_rank(np.delete(X, j, axis=1)) == rank]
        raise RankDeficientError(
            f"design matrix is rank deficient (rank {rank} < {k}); "
            f"collinear columns: {collinear}")
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ X.T @ y
    resid = y - X @ beta

    labels = np.asarray([str(c) for c in clusters])
    unique = np.unique(labels)
    meat = np.zeros((k, k))
    for g in unique:
        idx = labels == g
        score = X[idx].T @ resid[idx]
        meat += np.outer(score, score)
    G = len(unique)
    if G < 2:
        raise ValueError("cluster-robust covariance needs at least 2 clusters")
    scale = (G / (G - 1)) * ((n - 1) / (n - k))
    cov = scale * xtx_inv @ meat @ xtx_inv
    return RegressionResult(names=tuple(names), coefficients=beta,
                            covariance=cov, n_obs=n, n_clusters=G,
                            residuals=resid)


def _dummies(values: Sequence[str], baseline: str, prefix: str
             ) -> tuple[np.ndarray, list[str]]:
    levels = sorted(set(values))
    if baseline not in levels:
        raise ValueError(f"baseline {baseline!r} not present in {prefix} column")
    keep = [lvl for lvl in levels if lvl != baseline]
    columns = np.zeros((len(values), len(keep)))
    for j, lvl in enumerate(keep):
        columns[:, j] = [1.0 if v == lvl else 0.0 for v in values]
    return columns, [f"{prefix}:{lvl}" for lvl in keep]


def mode_effects_regression(rows: Sequence[Mapping],
                            baseline_mode: str = "A",
                            baseline_instance: Optional[str] = None,
                            cluster: str = "subject") -> RegressionResult:
    """Outcome on subject + instance fixed effects + treatment dummies, with
    the baseline mode and the first instance omitted; SEs clustered by
    subject (override ``cluster`` for other schemes).

    Rows need keys: outcome, subject, instance, mode.
    """
    outcome = np.array([float(r["outcome"]) for r in rows])
    subjects = [str(r["subject"]) for r in rows]
    instances = [str(r["instance"]) for r in rows]
    modes = [str(r["mode"]) for r in rows]
    if baseline_instance is None:
        baseline_instance = sorted(set(instances))[0]

    subj_cols, subj_names = _dummies(subjects, sorted(set(subjects))[0], "subject")
    inst_cols, inst_names = _dummies(instances, baseline_instance, "instance")
    mode_cols, mode_names = _dummies(modes, baseline_mode, "mode")
    design = np.column_stack([np.ones(len(rows)), subj_cols, inst_cols, mode_cols])
    names = ["intercept", *subj_names, *inst_names, *mode_names]
    clusters = [str(r[cluster]) for r in rows]
    return ols_cluster(design, outcome, clusters, names)


def human_vs_auto_regression(rows: Sequence[Mapping],
                             baseline_instance: Optional[str] = None
                             ) -> RegressionResult:
    """Outcome on instance fixed effects plus a human-mode indicator.

    Rows need keys: outcome, instance, human (bool), cluster -- with human
    observations clustered by subject and automated observations by run.
    """
    outcome = np.array([float(r["outcome"]) for r in rows])
    instances = [str(r["instance"]) for r in rows]
    human = np.array([1.0 if r["human"] else 0.0 for r in rows])
    if baseline_instance is None:
        baseline_instance = sorted(set(instances))[0]
    inst_cols, inst_names = _dummies(instances, baseline_instance, "instance")
    design = np.column_stack([np.ones(len(rows)), inst_cols, human])
    names = ["intercept", *inst_names, "human"]
    clusters = [str(r["cluster"]) for r in rows]
    return ols_cluster(design, outcome, clusters, names)
