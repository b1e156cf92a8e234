"""Command-line entry point.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import estimate, zoo
from .config import ConfigError, load_config
from .fisher import SingularQfim, cfim, compute_sld, fisher_report, qcrb_efficiency
from .linalg import NonHermitian, NotSymmetricUnitary
from .model import InvalidState, OutOfDomain, evaluate
from .povm import InvalidPovm, NotPure, Povm, validate_povm, yang_optimality_check
from .symmetry import (
    DegenerateState,
    NotConjugation,
    asymmetry_measures,
    find_las,
    invariant_povm,
    verify_gas,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
fmt = estimate.fmt


class NumericalFailure(RuntimeError):
    pass


def _model(cfg):
    spec = cfg.get("model")
    if spec is None or "name" not in spec:
        raise ConfigError("config needs model.name")
    return zoo.make_model(spec["name"], spec.get("params", {}), spec.get("domain"))


def _points(cfg, model) -> np.ndarray:
    if "points" in cfg and "grid" in cfg:
        raise ConfigError("give either points or grid, not both")
    if "points" in cfg:
        pts = np.array(cfg["points"], dtype=float)
    elif "grid" in cfg:
        axes = []
        for item in cfg["grid"]:
            if len(item) != 3:
                raise ConfigError("grid entries are [low, high, count]")
            axes.append(np.linspace(item[0], item[1], int(item[2])))
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    else:
        pts = np.array([[0.5 * (lo + hi) for lo, hi in model.domain]])
    if pts.ndim != 2 or pts.shape[1] != model.n_params:
        raise ConfigError(f"points must have {model.n_params} coordinates each")
    return pts


def _povm(cfg, model) -> Povm:
    spec = cfg.get("povm")
    if spec is None:
        raise ConfigError("config needs a povm section")
    keys = [k for k in ("canonical", "invariant", "file", "elements") if k in spec]
    if len(keys) != 1:
        raise ConfigError("povm needs exactly one of canonical, invariant, file, elements")
    kind = keys[0]
    if kind == "canonical":
        povm = zoo.canonical_basis(spec["canonical"], **spec.get("params", {}))
    elif kind == "invariant":
        inv = spec["invariant"]
        mspec = cfg["model"]
        theta = zoo.canonical_gas(mspec["name"], mspec.get("params", {}))
        povm = invariant_povm(theta, inv.get("rotations", 1), inv.get("seed", 0), inv.get("include_reference", True))
    elif kind == "file":
        with open(spec["file"], encoding="utf-8") as fh:
            povm = Povm.from_json(fh.read())
    else:
        if "dim" not in spec:
            raise ConfigError("povm.elements needs povm.dim")
        povm = Povm.from_dict({"dim": spec["dim"], "elements": spec["elements"]})
    rep = validate_povm(povm)
    if not rep.ok:
        raise ConfigError("invalid POVM: " + "; ".join(rep.failures))
    if povm.dim != model.dim:
        raise ConfigError(f"POVM dimension {povm.dim} differs from model dimension {model.dim}")
    return povm


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header + ["schema_version"])
        for r in rows:
            w.writerow(r + [SCHEMA_VERSION])


def _write_json(path, obj):
    obj = {"schema_version": SCHEMA_VERSION, **obj}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(estimate.dump_json(obj))
        fh.write("\n")


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def cmd_analyze(cfg, out, seed):
    model = _model(cfg)
    pts = _points(cfg, model)
    n = model.n_params
    names = list(model.param_names)
    header = names + [f"qfim_{i}{j}" for i, j in _pairs(n)] + [f"uhlmann_{i}{j}" for i, j in _pairs(n) if i < j]
    header += ["weakly_commutative", "quasi_classical", "partially_commutative", "las", "las_method"]
    rows, summary = [], []
    for x in pts:
        pt = evaluate(model, x)
        rep = fisher_report(pt)
        las = find_las(pt, seed=seed or 0)
        rows.append([fmt(v) for v in x] + [fmt(rep.qfim[i, j]) for i, j in _pairs(n)]
                    + [fmt(rep.uhlmann[i, j]) for i, j in _pairs(n) if i < j]
                    + [int(rep.weakly_commutative), int(rep.quasi_classical), int(rep.partially_commutative),
                       las.status, las.method])
        summary.append({"x": [float(v) for v in x], "max_uhlmann": rep.max_uhlmann,
                        "max_commutator": rep.max_commutator, "tolerance": rep.tolerance, "las": las.status,
                        "las_residual": las.residual,
                        "las_certificate": list(las.certificate.nodes) if hasattr(las.certificate, "nodes") else None})
    gas = {"status": "unknown"}
    try:
        theta = zoo.canonical_gas(cfg["model"]["name"], cfg["model"].get("params", {}))
        rng = np.random.default_rng(seed or 0)
        k = cfg.get("gas_samples", 50)
        sample = [[rng.uniform(lo, hi) for lo, hi in model.domain] for _ in range(k)] + list(pts)
        v = verify_gas(model, theta, sample)
        gas = {"status": v.status, "residual": v.residual, "samples": len(sample)}
    except zoo.NoKnownGas as exc:
        gas = {"status": "none_known", "reason": str(exc)}
    _write_csv(os.path.join(out, "analyze.csv"), header, rows)
    _write_json(os.path.join(out, "analyze.json"), {"model": model.name, "params": names,
                                                     "global_symmetry": gas, "points": summary})
    print(f"model {model.name}: {len(pts)} point(s), global symmetry {gas['status']}")
    for r in summary:
        print(f"  x={r['x']} max|U|={r['max_uhlmann']:.3e} las={r['las']}")
    return EXIT_OK


def cmd_povm_eval(cfg, out, seed):
    model = _model(cfg)
    povm = _povm(cfg, model)
    pts = _points(cfg, model)
    n = model.n_params
    header = list(model.param_names) + [f"cfim_{i}{j}" for i, j in _pairs(n)] + [f"qfim_{i}{j}" for i, j in _pairs(n)]
    header += ["efficiency"] + [f"ratio_{p}" for p in model.param_names] + ["divergent", "yang"]
    rows = []
    for x in pts:
        pt = evaluate(model, x)
        slds = compute_sld(pt)
        fq = fisher_report(pt, slds).qfim
        fc = cfim(pt, povm)
        try:
            eff = qcrb_efficiency(fc.matrix, fq)
            e_val, ratios = eff.efficiency, eff.diagonal_ratios
        except SingularQfim:
            e_val, ratios = float("nan"), np.full(n, np.nan)
        try:
            yang = "pass" if yang_optimality_check(pt, slds, povm).passed else "fail"
        except NotPure:
            yang = "n/a"
        rows.append([fmt(v) for v in x] + [fmt(fc.matrix[i, j]) for i, j in _pairs(n)]
                    + [fmt(fq[i, j]) for i, j in _pairs(n)] + [fmt(e_val)] + [fmt(r) for r in ratios]
                    + [int(fc.divergent), yang])
        print(f"  x={x.tolist()} efficiency={e_val:.6f} yang={yang}{' DIVERGENT' if fc.divergent else ''}")
    _write_csv(os.path.join(out, "povm_eval.csv"), header, rows)
    with open(os.path.join(out, "povm.json"), "w", encoding="utf-8") as fh:
        fh.write(povm.to_json())
    return EXIT_OK


def cmd_asymmetry(cfg, out, seed):
    model = _model(cfg)
    pts = _points(cfg, model)
    opts = cfg.get("asymmetry", {})
    rows = []
    for x in pts:
        pt = evaluate(model, x)
        rep = asymmetry_measures(pt, opts.get("n_starts", 16), opts.get("seed", seed or 0))
        las = find_las(pt)
        rows.append([fmt(v) for v in x] + [fmt(rep.m_sq), fmt(rep.m1_max), fmt(rep.m1_mean), las.status])
        print(f"  x={x.tolist()} m_sq={rep.m_sq:.6e} m1_max={rep.m1_max:.6e} las={las.status}")
    _write_csv(os.path.join(out, "asymmetry.csv"), list(model.param_names) + ["m_sq", "m1_max", "m1_mean", "las"], rows)
    return EXIT_OK


def fig3_rows(delta_step=0.01, delta_max=0.9, targets=None, bases=("gisin", "antiparallel_product")):
    """Single-parameter phase deviation ``1/[F_C]_phiphi`` on depolarized antiparallel spins.

    ``bound`` is ``1/[F_Q]_phiphi`` from the computed QFIM; for white noise
    on four levels it equals ``(1 - delta/2) / (2 (1 - delta)^2 sin^2 eta)``.
    """
    targets = targets or [(3 * np.pi / 4, np.pi / 8), (3 * np.pi / 4, np.pi / 4)]
    deltas = np.round(np.arange(0, delta_max + delta_step / 2, delta_step), 12)
    povms = {b: zoo.canonical_basis(b) for b in bases}
    rows = []
    for delta in deltas:
        model = zoo.make_model("antiparallel_depolarized", {"delta": float(delta)})
        for basis, povm in povms.items():
            for eta, phi in targets:
                pt = evaluate(model, [eta, phi])
                f = cfim(pt, povm)
                if f.divergent:
                    raise NumericalFailure(f"divergent Fisher information at delta={delta}")
                dev = 1.0 / f.matrix[1, 1]
                bound = 1.0 / fisher_report(pt).qfim[1, 1]
                rows.append((float(delta), basis, float(eta), float(phi), float(dev), float(bound)))
    return rows


def cmd_fig3(cfg, out, seed):
    opts = cfg.get("fig3", {})
    rows = fig3_rows(opts.get("delta_step", 0.01), opts.get("delta_max", 0.9),
                     [tuple(t) for t in opts["targets"]] if "targets" in opts else None,
                     tuple(opts.get("bases", ("gisin", "antiparallel_product"))))
    _write_csv(os.path.join(out, "fig3.csv"), ["delta", "basis", "eta", "phi", "dev_phi2", "bound"],
               [[fmt(r[0]), r[1], fmt(r[2]), fmt(r[3]), fmt(r[4]), fmt(r[5])] for r in rows])
    print(f"fig3: {len(rows)} rows written")
    return EXIT_OK


def cmd_simulate(cfg, out, seed):
    model = _model(cfg)
    povm = _povm(cfg, model)
    sim = cfg.get("simulation")
    if sim is None or "true_x" not in sim:
        raise ConfigError("simulate needs simulation.true_x")
    seed = seed if seed is not None else sim.get("seed")
    rep = estimate.run_trials(model, povm, sim["true_x"], sim.get("n_c", 10000), sim.get("n_trials", 200),
                              seed, sim.get("grid", 64))
    names = model.param_names
    estimate.write_trials_csv(rep, os.path.join(out, "trials.csv"), names)
    estimate.write_summary_json(rep, os.path.join(out, "summary.json"), names)
    print(f"seed {rep.seed}: {rep.n_trials} trials, {rep.n_excluded} excluded")
    print(f"  N_C * covariance diagonal: {np.diag(rep.scaled_covariance).tolist()}")
    print(f"  ratio to quantum bound:    {rep.quantum_ratio.tolist()}")
    if not rep.valid:
        raise NumericalFailure(f"{rep.excluded_fraction:.1%} of trials excluded (limit 1%)")
    return EXIT_OK


def cmd_zoo(args):
    for name, entry in zoo.ZOO.items():
        params = ", ".join(entry.params) or "-"
        print(f"{name:26s} params: {params}")
        print(f"{'':26s} {entry.summary}; global symmetry: {entry.has_gas}")
    print("bases: " + ", ".join(zoo.BASES))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "povm-eval": cmd_povm_eval,
    "fig3": cmd_fig3,
    "simulate": cmd_simulate,
    "asymmetry": cmd_asymmetry,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imfree", description="Antiunitary symmetry analysis of estimation models.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=(name != "fig3"), help="YAML or JSON run configuration")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--seed", type=int, default=None)
    z = sub.add_parser("zoo")
    z.add_argument("action", choices=["list"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "zoo":
        return cmd_zoo(args)
    try:
        cfg = load_config(args.config) if args.config else {}
        if cfg.get("command", args.command) != args.command:
            raise ConfigError(f"config is for command {cfg['command']!r}")
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](cfg, args.out, args.seed)
    except (ConfigError, zoo.UnknownName, zoo.BadParams, zoo.NoKnownGas, OutOfDomain, InvalidPovm,
            NotConjugation, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, InvalidState, NonHermitian, NotSymmetricUnitary, DegenerateState,
            SingularQfim, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
