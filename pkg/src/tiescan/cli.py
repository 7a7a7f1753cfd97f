"""Command line interface: ``tiescan detect|interval|segment|critval|simulate|diagnose``."""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, analytic
from ._validation import check_alpha, check_choice, check_statistics
from .estimators import BinarySegmentation, ChangedIntervalDetector, GraphChangePointDetector, shared_change_points
from .exceptions import ConfigError, DegenerateStatisticError, InputError, TiescanError
from .io import FORMATS, ingest
from .moments import moment_profile, scheme_from
from .scan import default_window
from .simulate import SCENARIOS, MultinomialSpec, power_study

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_CONFIG = 0, 2, 3, 4

DEFAULTS = {
    "input": None,
    "format": "csv-vectors",
    "metric": "euclidean",
    "graph": "nnl",
    "edges": None,
    "mode": "averaging",
    "stat": "S",
    "n0": None,
    "n1": None,
    "alpha": 0.05,
    "infer": None,
    "perm": None,
    "seed": 0,
    "threads": None,
    "profile": False,
    "out": None,
    "quantize": None,
    "threshold": 0.001,
    "min_seg": None,
    # critval
    "n": None,
    # simulate
    "scenario": ["S1"],
    "replicates": 100,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="JSON file with option values; flags take precedence")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--alpha", type=float)


def _data(p):
    p.add_argument("--input")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--metric", choices=("euclidean", "l1", "hamming", "normalized-frobenius"))
    p.add_argument("--graph", choices=("nnl", "mst", "union-msts", "user-edges"))
    p.add_argument("--edges", help="file with one 'u v' category pair per line (graph=user-edges)")
    p.add_argument("--quantize", type=int, help="round distances to this many decimals")
    p.add_argument("--n0", type=int)
    p.add_argument("--n1", type=int)


def _detection(p, with_mode=True):
    if with_mode:
        p.add_argument("--mode", choices=("averaging", "union", "both"))
    p.add_argument("--stat", help="Zw, S, M or all")
    p.add_argument("--infer", choices=("analytic", "analytic-skew", "permutation", "exhaustive"))
    p.add_argument("--perm", type=int, metavar="R", help="permutation inference with R permutations")


def build_parser():
    parser = _Parser(prog="tiescan", description="Graph-based change-point detection with repeated observations.")
    parser.add_argument("--version", action="version", version=f"tiescan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="single change-point scan")
    _common(p)
    _data(p)
    _detection(p)
    p.add_argument("--profile", action="store_true", default=None, help="include the per-t profile")

    p = sub.add_parser("interval", help="changed-interval scan (permutation p-value)")
    _common(p)
    _data(p)
    _detection(p)

    p = sub.add_parser("segment", help="binary segmentation")
    _common(p)
    _data(p)
    _detection(p)
    p.add_argument("--threshold", type=float, help="split when p is below this (default 0.001)")
    p.add_argument("--min-seg", dest="min_seg", type=int, help="shortest segment tested (default 2*n0)")

    p = sub.add_parser("critval", help="analytic critical value")
    _common(p)
    p.add_argument("statistic", nargs="?", choices=("Zw", "S", "M"))
    p.add_argument("alpha_pos", nargs="?", type=float, metavar="alpha")
    p.add_argument("n", nargs="?", type=int)
    p.add_argument("n0", nargs="?", type=int)
    p.add_argument("n1", nargs="?", type=int)
    _data_opt = p.add_argument_group("skewness correction from data")
    _data_opt.add_argument("--input")
    _data_opt.add_argument("--format", choices=FORMATS)
    _data_opt.add_argument("--metric", choices=("euclidean", "l1", "hamming", "normalized-frobenius"))
    _data_opt.add_argument("--graph", choices=("nnl", "mst", "union-msts"))
    _data_opt.add_argument("--quantize", type=int)
    _data_opt.add_argument("--mode", choices=("averaging", "union", "both"))

    p = sub.add_parser("simulate", help="configuration-model power study")
    _common(p)
    p.add_argument("--scenario", nargs="+", choices=sorted(SCENARIOS) + ["multinomial"])
    p.add_argument("--replicates", type=int)
    p.add_argument("--infer", choices=("analytic", "analytic-skew", "permutation"))
    p.add_argument("--perm", type=int, metavar="R")

    p = sub.add_parser("diagnose", help="condition diagnostics of the similarity graph")
    _common(p)
    _data(p)
    p.add_argument("--mode", choices=("averaging", "union", "both"))
    return parser


def resolve_config(args):
    """Merge defaults, the optional config file and explicit flags (in that order)."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg["alpha" if key == "alpha_pos" else key] = val
    if cfg["infer"] is None:
        cfg["infer"] = "permutation" if cfg["perm"] is not None else "analytic-skew"
    if cfg["perm"] is None:
        cfg["perm"] = 1000
    if cfg["threads"] is None:
        env = os.environ.get("TIESCAN_THREADS")
        try:
            cfg["threads"] = int(env) if env else (os.cpu_count() or 1)
        except ValueError as exc:
            raise ConfigError(f"TIESCAN_THREADS must be an integer, got {env!r}") from exc
    if cfg["threads"] < 1:
        raise ConfigError("threads must be positive")
    check_alpha(cfg["alpha"])
    check_choice(cfg["mode"], ("averaging", "union", "both"), "mode")
    if isinstance(cfg["scenario"], str):
        cfg["scenario"] = [cfg["scenario"]]
    return cfg


def _modes(cfg):
    return ("averaging", "union") if cfg["mode"] == "both" else (cfg["mode"],)


def _load(cfg):
    if not cfg["input"]:
        raise ConfigError("--input is required")
    return ingest(cfg["input"], cfg["format"])


def _load_edges(cfg):
    if cfg["graph"] != "user-edges":
        return None
    if not cfg["edges"]:
        raise ConfigError("graph=user-edges requires --edges")
    try:
        edges = np.loadtxt(cfg["edges"], dtype=np.int64, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read edge list {cfg['edges']}: {exc}") from exc
    if edges.size and edges.shape[1] != 2:
        raise InputError("edge list needs two columns")
    return edges.reshape(-1, 2)


def _echo(cfg, keys):
    return {k: cfg[k] for k in keys}


DATA_KEYS = ("input", "format", "metric", "graph", "edges", "quantize", "mode", "n0", "n1")


def _detector(cfg, mode, stat):
    return GraphChangePointDetector(
        statistic=stat,
        mode=mode,
        graph=cfg["graph"],
        metric=cfg["metric"],
        n0=cfg["n0"],
        n1=cfg["n1"],
        inference=cfg["infer"],
        n_permutations=cfg["perm"],
        alpha=cfg["alpha"],
        random_state=cfg["seed"],
        n_jobs=cfg["threads"],
        quantize=cfg["quantize"],
        edges=_load_edges(cfg),
    )


def _significant_taus(per_mode, stat, alpha):
    res = per_mode[stat]
    return [res["tau"]] if res["pvalue"] < alpha else []


def cmd_detect(cfg):
    X = _load(cfg)
    stats = list(check_statistics(cfg["stat"]))
    report = {"config": _echo(cfg, DATA_KEYS + ("stat", "infer", "perm", "alpha", "seed"))}
    results, profiles, diagnostics = {}, {}, None
    for mode in _modes(cfg):
        det = _detector(cfg, mode, stats).fit(X)
        report["n"], report["K"], report["window"] = det.n_, det.K_, list(det.window_)
        results[mode] = det.results_
        if diagnostics is None:
            diagnostics = [c.as_dict() for c in det.conditions()]
        if cfg["profile"]:
            profiles[mode] = det.profile_.as_records()
    report["results"] = results
    if cfg["mode"] == "both":
        report["shared"] = {
            s: shared_change_points(
                _significant_taus(results["averaging"], s, cfg["alpha"]),
                _significant_taus(results["union"], s, cfg["alpha"]),
            )
            for s in stats
        }
    report["diagnostics"] = diagnostics
    if cfg["profile"]:
        report["profile"] = profiles
    return report


def cmd_interval(cfg):
    X = _load(cfg)
    (stat,) = check_statistics(cfg["stat"])
    report = {"config": _echo(cfg, DATA_KEYS + ("stat", "perm", "alpha", "seed"))}
    results = {}
    for mode in _modes(cfg):
        det = ChangedIntervalDetector(
            statistic=stat,
            mode=mode,
            graph=cfg["graph"],
            metric=cfg["metric"],
            n0=cfg["n0"],
            n1=cfg["n1"],
            n_permutations=cfg["perm"],
            alpha=cfg["alpha"],
            random_state=cfg["seed"],
            n_jobs=cfg["threads"],
            quantize=cfg["quantize"],
            edges=_load_edges(cfg),
        ).fit(X)
        report["n"], report["K"], report["window"] = det.n_, det.K_, list(det.window_)
        results[mode] = {
            stat: {
                "max": det.max_statistic_,
                "interval": list(det.interval_),
                "pvalues": {"permutation": det.pvalue_},
                "pvalue": det.pvalue_,
            }
        }
    report["results"] = results
    return report


def cmd_segment(cfg):
    X = _load(cfg)
    (stat,) = check_statistics(cfg["stat"])
    report = {"config": _echo(cfg, DATA_KEYS + ("stat", "infer", "perm", "seed", "threshold", "min_seg"))}
    report["n"] = len(X)
    segs = {}
    for mode in _modes(cfg):
        seg = BinarySegmentation(_detector(cfg, mode, stat), cfg["threshold"], cfg["min_seg"]).fit(X)
        segs[mode] = {"change_points": seg.change_points_, "depth": seg.depth_, "tree": seg.tree_}
    report["segmentation"] = segs
    if cfg["mode"] == "both":
        report["shared"] = shared_change_points(
            segs["averaging"]["change_points"], segs["union"]["change_points"]
        )
    return report


def cmd_critval(cfg):
    stat = cfg.get("statistic") or (cfg["stat"] if cfg["stat"] != "all" else None)
    n = cfg["n"]
    if stat is None:
        raise ConfigError("critval needs a statistic")
    check_choice(stat, ("Zw", "S", "M"), "statistic")
    report = {"config": _echo(cfg, ("alpha", "input", "mode"))}
    report["config"]["statistic"] = stat
    values = {}
    if cfg["input"]:
        X = _load(cfg)
        for mode in _modes(cfg):
            det = GraphChangePointDetector(
                statistic=stat, mode=mode, graph=cfg["graph"], metric=cfg["metric"], quantize=cfg["quantize"],
                n0=cfg["n0"], n1=cfg["n1"], inference="analytic",
            ).fit(X)
            n = det.n_
            n0, n1 = det.window_
            skew = stat != "S"
            if skew:
                mp = moment_profile(det.scheme_, range(1, n), skew=True)
                gw, gd = mp.gamma_w, mp.gamma_d
            else:
                gw = gd = None
            values[mode] = analytic.critical_value(stat, cfg["alpha"], n, n0, n1, gw, gd)
        report["skew_corrected"] = stat != "S"
    else:
        if n is None:
            raise ConfigError("critval needs n (or --input)")
        n0, n1 = default_window(n, cfg["n0"], cfg["n1"])
        values["none"] = analytic.critical_value(stat, cfg["alpha"], n, n0, n1)
        report["skew_corrected"] = False
    report.update({"n": n, "window": [n0, n1], "critical_value": values})
    return report


def cmd_simulate(cfg):
    scen = {}
    for name in cfg["scenario"]:
        scen[name] = MultinomialSpec() if name == "multinomial" else SCENARIOS[name]
    infer = cfg["infer"] if cfg["infer"] != "exhaustive" else "analytic-skew"
    table = power_study(
        scen,
        replicates=cfg["replicates"],
        random_state=cfg["seed"],
        alpha=cfg["alpha"],
        inference=infer,
        n_permutations=cfg["perm"],
    )
    report = {"config": _echo(cfg, ("scenario", "replicates", "seed", "alpha", "infer"))}
    report.update(json.loads(table.to_json()))
    report["csv"] = table.to_csv()
    return report


def cmd_diagnose(cfg):
    X = _load(cfg)
    report = {"config": _echo(cfg, DATA_KEYS)}
    det = GraphChangePointDetector(
        statistic="S", graph=cfg["graph"], metric=cfg["metric"], quantize=cfg["quantize"],
        n0=cfg["n0"], n1=cfg["n1"], inference="analytic", edges=_load_edges(cfg),
    ).fit(X)
    report.update({"n": det.n_, "K": det.K_, "edges": int(det.graph_.edges.shape[0])})
    report["conditions"] = [c.as_dict() for c in det.conditions()]
    return report


COMMANDS = {
    "detect": cmd_detect,
    "interval": cmd_interval,
    "segment": cmd_segment,
    "critval": cmd_critval,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
}


def _clean(obj):
    """Plain JSON types; non-finite floats become null so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def render(report, command):
    body = _clean({"schema_version": SCHEMA_VERSION, "command": command, **report})
    return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        report = COMMANDS[args.command](cfg)
        text = render(report, args.command)
        if args.command == "simulate" and cfg["out"] and cfg["out"].endswith(".csv"):
            text = report["csv"]
        if cfg["out"]:
            with open(cfg["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except InputError as exc:
        print(f"tiescan: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateStatisticError as exc:
        print(f"tiescan: degenerate statistic: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ConfigError as exc:
        print(f"tiescan: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TiescanError as exc:
        print(f"tiescan: error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
