"""Command-line interface.

Subcommands: simulate (Monte Carlo study from a JSON manifest),
estimate (network from a data CSV), analyze (measures and centralities
from a network JSON), shock (propagation from a network JSON), and
pipeline (prices CSV to rolling networks).

Exit codes: 0 success (possibly with flagged rows), 2 input or config
error, 3 estimation or numeric error.
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytics, pipeline
from .elastic_net import PenaltyConfig
from .em import EMConfig, MODES
from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    EstimationError,
    FitError,
    NumericError,
    ParcornetError,
    SelectionError,
    ShapeError,
)
from .matrices import Dataset, PartialCorrelationMatrix, precision_to_partial_correlation
from .metrics import confusion, f1_score, false_discovery_rate, frobenius_distance
from .netgen import TopologySpec, generate_precision
from .samplers import DistributionSpec, sample, spawned_rng
from .selection import LambdaGrid, build_grid, select

INPUT_ERRORS = (ConfigError, DataError, ShapeError, DomainError)
RUN_ERRORS = (EstimationError, SelectionError, NumericError, DivergenceError, FitError)

SIM_COLUMNS = (
    "topology,distribution,n,run,estimator,alpha,lambda,bic,edges,"
    "tp,fp,fn,f1,fdr,frobenius,em_converged,failed,error"
)

MANIFEST_DEFAULTS = {
    "seed": 0,
    "p": 20,
    "v": 0.3,
    "u": 0.1,
    "topologies": ["scale-free"],
    "distributions": [{"kind": "normal"}],
    "sample_sizes": [100],
    "runs": 10,
    "modes": ["gaussian", "t"],
    "alphas": [0.5],
    "nu": 3.0,
    "rule": "and",
    "lambda": {"lo": 0.01, "hi": 1.5, "count": 20},
    "delta": 1e-4,
    "max_iter": 200,
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}" if np.isfinite(v) else ""
    return str(v)


def _clean_msg(msg: str) -> str:
    return str(msg).replace(",", ";").replace("\n", " ")


# ---------------------------------------------------------------- simulate

def _resolve_manifest(raw: dict) -> dict:
    unknown = set(raw) - set(MANIFEST_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown manifest keys: {sorted(unknown)}")
    m = dict(MANIFEST_DEFAULTS)
    m.update(raw)
    if not isinstance(m["runs"], int) or m["runs"] < 1:
        raise ConfigError(f"runs must be a positive integer, got {m['runs']!r}")
    topologies = []
    for entry in m["topologies"]:
        t = {"kind": entry} if isinstance(entry, str) else dict(entry)
        t.setdefault("p", m["p"])
        t.setdefault("v", m["v"])
        t.setdefault("u", m["u"])
        label = t.pop("label", t["kind"])
        TopologySpec(seed=0, **t)  # validates kind and parameters
        topologies.append({"label": label, "kwargs": t})
    if len({t["label"] for t in topologies}) != len(topologies):
        raise ConfigError("topology labels must be unique")
    dists = []
    for entry in m["distributions"]:
        d = {"kind": entry} if isinstance(entry, str) else dict(entry)
        spec = DistributionSpec(**d)
        dists.append({"label": spec.label(), "kwargs": d})
    if len({d["label"] for d in dists}) != len(dists):
        raise ConfigError("distribution labels must be unique")
    for mode in m["modes"]:
        if mode not in MODES:
            raise ConfigError(f"estimator mode must be one of {MODES}, got {mode!r}")
    grid = {**MANIFEST_DEFAULTS["lambda"], **dict(m["lambda"])}
    unknown = set(grid) - {"lo", "hi", "count"}
    if unknown:
        raise ConfigError(f"unknown lambda grid keys: {sorted(unknown)}")
    build_grid(grid["lo"], grid["hi"], grid["count"])
    m["lambda"] = grid
    m["topologies"] = topologies
    m["distributions"] = dists
    m["sample_sizes"] = [int(n) for n in m["sample_sizes"]]
    if any(n < 2 for n in m["sample_sizes"]):
        raise ConfigError("sample sizes must be >= 2")
    return m


def _truth_seed(seed: int, topo_index: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=(1, int(topo_index)))
    return int(ss.generate_state(1)[0])


def _simulate_task(task: dict) -> list:
    topo = TopologySpec(seed=task["truth_seed"], **task["topology_kwargs"])
    truth_edges, theta = generate_precision(topo)
    truth_pc = precision_to_partial_correlation(theta)
    dist = DistributionSpec(**task["dist_kwargs"])
    rng = spawned_rng(task["seed"], 2, task["ti"], task["di"], task["ni"], task["run"])
    data = sample(theta, task["n"], dist, rng)
    grid = build_grid(task["grid"]["lo"], task["grid"]["hi"], task["grid"]["count"])
    rows = []
    for est in task["estimators"]:
        base = {
            "topology": task["topology_label"],
            "distribution": task["dist_label"],
            "n": task["n"],
            "run": task["run"],
            "estimator": est["mode"],
            "alpha": est["alpha"],
        }
        config = EMConfig(
            penalty=PenaltyConfig(est["alpha"], grid.lo),
            mode=est["mode"],
            nu=est["nu"],
            rule=task["rule"],
            delta=task["delta"],
            max_iter=task["max_iter"],
        )
        try:
            report = select(data, grid, config)
        except (EstimationError, SelectionError) as exc:
            rows.append({**base, "lambda": None, "bic": None, "edges": None,
                         "tp": None, "fp": None, "fn": None, "f1": None,
                         "fdr": None, "frobenius": None, "em_converged": None,
                         "failed": 1, "error": _clean_msg(exc)})
            continue
        est_pc = precision_to_partial_correlation(report.state.psi)
        counts = confusion(est_pc.edge_set(), truth_edges)
        rows.append({
            **base,
            "lambda": report.chosen_lambda,
            "bic": report.bic_value,
            "edges": len(report.state.edges),
            "tp": counts.tp,
            "fp": counts.fp,
            "fn": counts.fn,
            "f1": f1_score(counts),
            "fdr": false_discovery_rate(counts),
            "frobenius": frobenius_distance(est_pc, truth_pc),
            "em_converged": int(report.state.converged),
            "failed": 0,
            "error": "",
        })
    return rows


def cmd_simulate(args) -> int:
    with open(args.manifest) as fh:
        raw = json.load(fh)
    manifest = _resolve_manifest(raw)
    if args.seed is not None:
        manifest["seed"] = args.seed
    estimators = [
        {"mode": mode, "alpha": float(a), "nu": float(manifest["nu"])}
        for mode in manifest["modes"]
        for a in manifest["alphas"]
    ]
    tasks = []
    for ti, topo in enumerate(manifest["topologies"]):
        tseed = _truth_seed(manifest["seed"], ti)
        for di, dist in enumerate(manifest["distributions"]):
            for ni, n in enumerate(manifest["sample_sizes"]):
                for run in range(manifest["runs"]):
                    tasks.append({
                        "seed": manifest["seed"],
                        "ti": ti, "di": di, "ni": ni, "run": run,
                        "topology_label": topo["label"],
                        "topology_kwargs": topo["kwargs"],
                        "truth_seed": tseed,
                        "dist_label": dist["label"],
                        "dist_kwargs": dist["kwargs"],
                        "n": n,
                        "estimators": estimators,
                        "rule": manifest["rule"],
                        "delta": manifest["delta"],
                        "max_iter": manifest["max_iter"],
                        "grid": manifest["lambda"],
                    })
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_simulate_task, tasks, chunksize=1))
    else:
        results = [_simulate_task(t) for t in tasks]
    rows = [row for chunk in results for row in chunk]

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "metrics.csv")
    with open(csv_path, "w") as fh:
        fh.write(SIM_COLUMNS + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[c]) for c in SIM_COLUMNS.split(",")) + "\n")

    groups = {}
    for r in rows:
        key = (r["topology"], r["distribution"], r["n"], r["estimator"], r["alpha"])
        groups.setdefault(key, []).append(r)
    aggregates = []
    for key in sorted(groups, key=str):
        g = groups[key]
        ok = [r for r in g if not r["failed"]]
        agg = {
            "topology": key[0], "distribution": key[1], "n": key[2],
            "estimator": key[3], "alpha": key[4],
            "rows": len(g), "failures": len(g) - len(ok),
        }
        if ok:
            agg["median_f1"] = statistics.median(r["f1"] for r in ok)
            agg["median_fdr"] = statistics.median(r["fdr"] for r in ok)
            agg["median_frobenius"] = statistics.median(r["frobenius"] for r in ok)
        aggregates.append(agg)
    summary = {"manifest": manifest, "rows": len(rows), "aggregates": aggregates}
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(rows)} rows to {csv_path}")
    return 0


# ---------------------------------------------------------------- estimate

def _estimator_config(args) -> tuple:
    if args.mode == "t" and args.nu is None:
        raise ConfigError("--nu is required with --mode t")
    nu = 3.0 if args.nu is None else float(args.nu)
    grid = build_grid(args.lambda_lo, args.lambda_hi, args.lambda_count)
    config = EMConfig(
        penalty=PenaltyConfig(args.alpha, grid.lo),
        mode=args.mode,
        nu=nu,
        rule=args.rule,
        delta=args.delta,
        max_iter=args.max_iter,
    )
    return config, grid


def _config_echo(config: EMConfig, grid: LambdaGrid) -> dict:
    return {
        "mode": config.mode,
        "nu": config.nu if config.mode == "t" else None,
        "alpha": config.penalty.alpha,
        "rule": config.rule,
        "delta": config.delta,
        "max_iter": config.max_iter,
        "lambda_grid": grid.to_json_dict(),
    }


def network_to_json_dict(pc: PartialCorrelationMatrix, names, lam: float, bic: float,
                         extra: dict | None = None) -> dict:
    names = list(names)
    edges = [
        {"i": j + 1, "j": k + 1, "weight": float(pc.values[j, k])}
        for j, k in sorted(pc.edge_set().pairs)
    ]
    d = {"p": pc.p, "nodes": names, "edges": edges, "lambda": lam, "bic": bic}
    if extra:
        d.update(extra)
    return d


def network_from_json_dict(d: dict) -> tuple:
    p = int(d["p"])
    names = [str(s) for s in d.get("nodes", [f"x{j + 1}" for j in range(p)])]
    if len(names) != p:
        raise DataError(f"network lists {len(names)} nodes for p={p}")
    vals = np.zeros((p, p))
    for e in d.get("edges", []):
        i, j, w = int(e["i"]) - 1, int(e["j"]) - 1, float(e["weight"])
        if not (0 <= i < p and 0 <= j < p) or i == j:
            raise DataError(f"edge ({e['i']},{e['j']}) invalid for p={p}")
        vals[i, j] = vals[j, i] = w
    return PartialCorrelationMatrix(vals), names


def _write_json(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_estimate(args) -> int:
    config, grid = _estimator_config(args)
    with open(args.data) as fh:
        data = Dataset.from_csv_text(fh.read())
    report = select(data, grid, config)
    pc = precision_to_partial_correlation(report.state.psi)
    out = network_to_json_dict(
        pc, data.column_names(), report.chosen_lambda, report.bic_value,
        extra={
            "config": _config_echo(config, grid),
            "em_converged": report.state.converged,
            "bic_table": report.to_json_dict()["records"],
        },
    )
    _write_json(out, args.out)
    return 0


# ---------------------------------------------------------------- analyze

def cmd_analyze(args) -> int:
    with open(args.network) as fh:
        pc, names = network_from_json_dict(json.load(fh))
    meas = analytics.measures(pc, absolute_strength=args.absolute_strength)
    cent = analytics.node_centralities(pc, absolute_strength=args.absolute_strength)
    os.makedirs(args.out, exist_ok=True)
    mpath = os.path.join(args.out, "measures.csv")
    with open(mpath, "w") as fh:
        d = meas.to_json_dict()
        fh.write(",".join(d.keys()) + "\n")
        fh.write(",".join(_fmt(float(v) if isinstance(v, float) else v) for v in d.values()) + "\n")
    cpath = os.path.join(args.out, "centralities.csv")
    with open(cpath, "w") as fh:
        fh.write("node,name,degree,strength,eigenvector\n")
        for j, name in enumerate(names):
            fh.write(
                f"{j + 1},{name},{int(cent.degree[j])},"
                f"{_fmt(float(cent.strength[j]))},{_fmt(float(cent.eigenvector[j]))}\n"
            )
    print(f"wrote {mpath} and {cpath}")
    return 0


# ---------------------------------------------------------------- shock

def cmd_shock(args) -> int:
    with open(args.network) as fh:
        pc, names = network_from_json_dict(json.load(fh))
    try:
        node = int(args.node) - 1
    except ValueError:
        if args.node not in names:
            raise DataError(f"node {args.node!r} not in network") from None
        node = names.index(args.node)
    if not (0 <= node < pc.p):
        raise DataError(f"node index {args.node} out of range 1..{pc.p}")
    res = analytics.shock(pc, node)
    out = {
        "node": node + 1,
        "name": names[node],
        "total": res.total,
        "spectral_radius": res.spectral_radius,
        "abs_radius_bound": res.abs_radius_bound,
        "steady_state": [float(v) for v in res.steady_state],
    }
    _write_json(out, args.out)
    return 0


# ---------------------------------------------------------------- pipeline

def cmd_pipeline(args) -> int:
    config, grid = _estimator_config(args)
    try:
        with open(args.prices) as fh:
            prices = pipeline.PriceTable.from_csv_text(fh.read())
        returns = pipeline.log_returns(prices)
    except ParcornetError as exc:
        raise type(exc)(f"returns: {exc}") from exc
    if not np.all(np.isfinite(returns.values)):
        raise DataError("returns: missing values present; clean the price panel first")

    fits = []
    for j, name in enumerate(returns.names):
        try:
            fits.append(pipeline.fit_ar_garch(returns.values[:, j]))
        except ParcornetError as exc:
            raise type(exc)(f"garch: series {name}: {exc}") from exc
    resid = np.column_stack([f.residuals for f in fits])
    resid_dates = returns.dates[1:]

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "residuals.csv"), "w") as fh:
        fh.write("date," + ",".join(returns.names) + "\n")
        for d, row in zip(resid_dates, resid):
            fh.write(d + "," + ",".join(f"{v:.12g}" for v in row) + "\n")

    with open(os.path.join(args.out, "garch.csv"), "w") as fh:
        fh.write("series,c,phi,omega,a,b,loglik,ks_normal,ks_normal_reject,ks_t,ks_t_reject\n")
        for name, f in zip(returns.names, fits):
            ksn, rejn = pipeline.ks_statistic(f.residuals, "normal")
            if config.mode == "t":
                kst, rejt = pipeline.ks_statistic(f.residuals, "t", nu=config.nu)
                t_cells = f"{_fmt(kst)},{int(rejt)}"
            else:
                t_cells = ","
            fh.write(
                f"{name},{_fmt(f.c)},{_fmt(f.phi)},{_fmt(f.omega)},{_fmt(f.a)},"
                f"{_fmt(f.b)},{_fmt(f.loglik)},{_fmt(ksn)},{int(rejn)},{t_cells}\n"
            )

    try:
        windows = pipeline.rolling_estimate(
            resid, args.window, args.step, config, grid,
            absolute_strength=args.absolute_strength,
        )
    except ParcornetError as exc:
        raise type(exc)(f"windows: {exc}") from exc

    wdir = os.path.join(args.out, "windows")
    os.makedirs(wdir, exist_ok=True)
    for w in windows:
        path = os.path.join(wdir, f"window_{w.index:03d}.json")
        base = {
            "window": w.index,
            "start_row": w.start,
            "stop_row": w.stop,
            "start_date": resid_dates[w.start],
            "end_date": resid_dates[w.stop - 1],
        }
        if w.report is not None:
            pc = precision_to_partial_correlation(w.report.state.psi)
            net = network_to_json_dict(
                pc, returns.names, w.report.chosen_lambda, w.report.bic_value,
                extra={"measures": w.net_measures.to_json_dict()},
            )
            _write_json({**base, **net}, path)
        else:
            _write_json({**base, "error": w.error}, path)

    with open(os.path.join(args.out, "strength.csv"), "w") as fh:
        fh.write("window,start_date,end_date,mean_strength,error\n")
        for w in windows:
            val = w.net_measures.mean_strength if w.net_measures is not None else None
            err = _clean_msg(w.error) if w.error else ""
            fh.write(
                f"{w.index},{resid_dates[w.start]},{resid_dates[w.stop - 1]},"
                f"{_fmt(val)},{err}\n"
            )

    summary = {
        "config": _config_echo(config, grid),
        "window": args.window,
        "step": args.step,
        "series": list(returns.names),
        "rows": resid.shape[0],
        "windows": len(windows),
        "failed_windows": sum(1 for w in windows if w.error),
    }
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(windows)} windows to {args.out}")
    return 0


# ---------------------------------------------------------------- parser

def _add_estimator_flags(sp) -> None:
    sp.add_argument("--mode", choices=MODES, default="t")
    sp.add_argument("--nu", type=float, default=None,
                    help="tail parameter; required with --mode t")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--lambda-lo", type=float, default=0.01)
    sp.add_argument("--lambda-hi", type=float, default=1.5)
    sp.add_argument("--lambda-count", type=int, default=20)
    sp.add_argument("--rule", choices=("and", "or"), default="and")
    sp.add_argument("--delta", type=float, default=1e-4)
    sp.add_argument("--max-iter", type=int, default=200)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parcornet",
        description="Sparse partial-correlation networks for heavy-tailed data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="Monte Carlo study from a JSON manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="estimate a network from a data CSV")
    sp.add_argument("data")
    _add_estimator_flags(sp)
    sp.add_argument("--out", default=None, help="output JSON path (default stdout)")
    sp.add_argument("--seed", type=int, default=None, help="accepted for uniformity; unused")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("analyze", help="measures and centralities from a network JSON")
    sp.add_argument("network")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--absolute-strength", action="store_true")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("shock", help="propagate a unit shock from one node")
    sp.add_argument("network")
    sp.add_argument("--node", required=True, help="1-based index or node name")
    sp.add_argument("--out", default=None, help="output JSON path (default stdout)")
    sp.set_defaults(func=cmd_shock)

    sp = sub.add_parser("pipeline", help="prices CSV to rolling-window networks")
    sp.add_argument("prices")
    _add_estimator_flags(sp)
    sp.add_argument("--window", type=int, default=pipeline.TRADING_DAYS_PER_YEAR)
    sp.add_argument("--step", type=int, default=pipeline.TRADING_DAYS_PER_MONTH)
    sp.add_argument("--absolute-strength", action="store_true")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, default=None, help="accepted for uniformity; unused")
    sp.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        print(f"error: bad input: {exc!r}", file=sys.stderr)
        return 2
    except RUN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
