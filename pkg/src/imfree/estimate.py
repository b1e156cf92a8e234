"""Monte Carlo check of the Cramer-Rao bound with maximum-likelihood estimates."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .fisher import cfim, compute_sld, fisher_report
from .model import Model, evaluate
from .povm import Povm, probabilities

SCHEMA_VERSION = 1
MAX_EXCLUDED = 0.01
BOUNDARY_RTOL = 1e-6
DEGENERATE_RTOL = 1e-8


def fmt(v) -> str:
    return format(float(v), ".17g")


def sample_outcomes(probs, n_c: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts for ``n_c`` repetitions."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return rng.multinomial(int(n_c), p / p.sum())


def trial_rngs(seed: int, n_trials: int) -> list:
    """One independent generator per trial, split from a single seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trials)]


class LikelihoodGrid:
    """Outcome probabilities tabulated on a regular grid over the domain."""

    def __init__(self, model: Model, povm: Povm, points_per_axis: int = 64):
        self.model, self.povm = model, povm
        axes = []
        for (lo, hi), per in zip(model.domain, model.periodic):
            axes.append(np.linspace(lo, hi, points_per_axis, endpoint=not per))
        mesh = np.meshgrid(*axes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=1)
        self.log_p = np.array([self._logp(x) for x in self.points])

    def _logp(self, x) -> np.ndarray:
        p = probabilities(self.model.state(x), self.povm)
        return np.log(np.clip(p, 1e-300, None))

    def loglik(self, x, counts) -> float:
        lp = self._logp(x)
        return float(np.sum(np.where(counts > 0, counts * lp, 0.0)))


@dataclass
class FitResult:
    x: np.ndarray
    loglik: float
    boundary: bool
    degenerate: bool
    reason: str = ""


def _wrap(model: Model, x: np.ndarray) -> np.ndarray:
    out = x.copy()
    for i, ((lo, hi), per) in enumerate(zip(model.domain, model.periodic)):
        if per:
            out[i] = lo + np.mod(out[i] - lo, hi - lo)
    return out


def mle_fit(model: Model, povm: Povm, counts, grid: LikelihoodGrid | None = None,
            points_per_axis: int = 64, xatol: float = 1e-8) -> FitResult:
    """Grid search followed by Nelder-Mead refinement of the log-likelihood.

    ``boundary`` marks estimates on a non-periodic domain edge.  ``degenerate``
    marks estimates where the classical Fisher matrix is singular, so the
    likelihood is locally flat in some direction.
    """
    counts = np.asarray(counts)
    grid = LikelihoodGrid(model, povm, points_per_axis) if grid is None else grid
    ll = np.where(counts[None, :] > 0, counts[None, :] * grid.log_p, 0.0).sum(axis=1)
    start = grid.points[int(np.argmax(ll))]
    bounds = [(None, None) if per else (lo, hi) for (lo, hi), per in zip(model.domain, model.periodic)]
    res = minimize(lambda x: -grid.loglik(_wrap(model, x), counts), start, method="Nelder-Mead",
                   bounds=bounds, options={"xatol": xatol, "fatol": 1e-11, "maxiter": 4000 * model.n_params})
    x = _wrap(model, np.asarray(res.x, dtype=float))
    widths = model.widths
    boundary = any(
        not per and (xi - lo <= BOUNDARY_RTOL * w or hi - xi <= BOUNDARY_RTOL * w)
        for xi, (lo, hi), per, w in zip(x, model.domain, model.periodic, widths)
    )
    degenerate, reason = False, "boundary" if boundary else ""
    try:
        f = cfim(evaluate(model, x, validate=False), povm).matrix
        ev = np.linalg.eigvalsh(f)
        if ev.max() <= 0 or ev.min() <= DEGENERATE_RTOL * ev.max():
            degenerate, reason = True, reason or "degenerate"
    except ValueError as exc:
        degenerate, reason = True, reason or f"degenerate: {exc}"
    return FitResult(x, -float(res.fun), boundary, degenerate, reason)


@dataclass
class TrialRecord:
    index: int
    estimate: np.ndarray
    excluded: bool
    reason: str


@dataclass
class CovarianceReport:
    true_x: np.ndarray
    n_c: int
    seed: int
    n_trials: int
    n_excluded: int
    mean: np.ndarray
    scaled_covariance: np.ndarray
    scaled_mse: np.ndarray
    cfim: np.ndarray
    qfim: np.ndarray
    cfim_inverse: np.ndarray
    qfim_inverse: np.ndarray
    records: list = field(repr=False, default_factory=list)

    @property
    def excluded_fraction(self) -> float:
        return self.n_excluded / self.n_trials if self.n_trials else 0.0

    @property
    def valid(self) -> bool:
        return self.excluded_fraction <= MAX_EXCLUDED

    @property
    def quantum_ratio(self) -> np.ndarray:
        return np.diag(self.scaled_covariance) / np.diag(self.qfim_inverse)

    @property
    def classical_ratio(self) -> np.ndarray:
        return np.diag(self.scaled_covariance) / np.diag(self.cfim_inverse)


def residuals(model: Model, estimates, true_x) -> np.ndarray:
    """Estimate minus truth, wrapped onto the circle for periodic parameters."""
    r = np.asarray(estimates, dtype=float) - np.asarray(true_x, dtype=float)[None, :]
    for i, ((lo, hi), per) in enumerate(zip(model.domain, model.periodic)):
        if per:
            w = hi - lo
            r[:, i] = np.mod(r[:, i] + w / 2, w) - w / 2
    return r


def new_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2 ** 63))


def run_trials(model: Model, povm: Povm, true_x, n_c: int, n_trials: int, seed: int | None = None,
               points_per_axis: int = 64) -> CovarianceReport:
    """Repeat sampling and estimation; report ``n_c`` times the estimator covariance.

    Trials whose estimate lies on the domain boundary or is degenerate are
    excluded and counted; the report is ``valid`` while at most 1% are.
    """
    seed = new_seed() if seed is None else int(seed)
    true_x = np.asarray(true_x, dtype=float)
    point = evaluate(model, true_x)
    probs = probabilities(point.rho, povm)
    grid = LikelihoodGrid(model, povm, points_per_axis)
    records = []
    for k, rng in enumerate(trial_rngs(seed, n_trials)):
        counts = sample_outcomes(probs, n_c, rng)
        fit = mle_fit(model, povm, counts, grid)
        excluded = fit.boundary or fit.degenerate
        records.append(TrialRecord(k, fit.x, excluded, fit.reason))
    used = np.array([r.estimate for r in records if not r.excluded]).reshape(-1, model.n_params)
    n = model.n_params
    if len(used) >= 2:
        res = residuals(model, used, true_x)
        cov = np.atleast_2d(np.cov(res, rowvar=False, ddof=1)) * n_c
        mse = (res.T @ res) / len(res) * n_c
        mean = true_x + res.mean(axis=0)
    else:
        cov = mse = np.full((n, n), np.nan)
        mean = np.full(n, np.nan)
    fc = cfim(point, povm).matrix
    fq = fisher_report(point, compute_sld(point)).qfim
    return CovarianceReport(true_x, int(n_c), seed, int(n_trials), sum(r.excluded for r in records), mean,
                            cov, mse, fc, fq, np.linalg.pinv(fc), np.linalg.pinv(fq), records)


def write_trials_csv(report: CovarianceReport, path, names) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["trial"] + [f"est_{n}" for n in names] + ["excluded", "reason", "schema_version"])
        for r in report.records:
            w.writerow([r.index] + [fmt(v) for v in r.estimate] + [int(r.excluded), r.reason, SCHEMA_VERSION])


def _matrix(m) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(m)]


def summary_dict(report: CovarianceReport, names) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": report.seed,
        "params": list(names),
        "true_x": [float(v) for v in report.true_x],
        "n_c": report.n_c,
        "n_trials": report.n_trials,
        "n_excluded": report.n_excluded,
        "excluded_fraction": report.excluded_fraction,
        "valid": report.valid,
        "mean": [float(v) for v in report.mean],
        "scaled_covariance": _matrix(report.scaled_covariance),
        "scaled_mse": _matrix(report.scaled_mse),
        "cfim": _matrix(report.cfim),
        "qfim": _matrix(report.qfim),
        "cfim_inverse": _matrix(report.cfim_inverse),
        "qfim_inverse": _matrix(report.qfim_inverse),
        "ratio_to_quantum_bound": [float(v) for v in report.quantum_ratio],
        "ratio_to_classical_bound": [float(v) for v in report.classical_ratio],
    }


def write_summary_json(report: CovarianceReport, path, names) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(summary_dict(report, names)))
        fh.write("\n")


def dump_json(obj) -> str:
    """JSON text; ``repr`` floats round-trip exactly, non-finite values become null."""

    def conv(o):
        if isinstance(o, float) and not np.isfinite(o):
            return None
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        return o

    return json.dumps(conv(obj), indent=1)
