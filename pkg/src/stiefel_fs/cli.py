"""Command-line front end: ``stiefel-fs {rank,eval,trace,replay}``.

Exit codes: 0 ok, 2 I/O, 3 data validation, 4 numerical failure, 5 config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, _kernels
from .data import load_csv, one_hot, standardize
from .errors import ConfigError, DataError, DataIOError, StiefelFSError
from .evaluation import EvalConfig, backward_eliminate
from .objective import build_problem
from .optimizer import SearchConfig, SimplexWeights, minimize
from .scoring import FeatureRanking, polygons_json, quadrant_process, rank_features
from .search import DEFAULT_GRID_STEP, build_grid, curve_area, sweep
from .seeding import OPTIMIZER_STREAM, derive_seed

log = logging.getLogger("stiefel_fs")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fingerprint(path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out: Path, command: str, argv, config: dict, inputs: dict, seed, started: str):
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "inputs": inputs,
        "seed": seed,
        "version": __version__,
        "kernel_backend": _kernels.backend(),
        "started": started,
        "finished": _now(),
    }
    _atomic_write(out / f"{command}_manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load(args):
    ds = load_csv(args.data, args.label_col, delimiter=args.delimiter, header=not args.no_header)
    return standardize(ds)


def _search_config(args, mode="hybrid") -> SearchConfig:
    kw = {}
    for name in ("eps_grad", "dt_init", "dt_min", "dt_max", "rho", "delta", "mu", "max_iters"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    return SearchConfig(seed=derive_seed(args.seed, OPTIMIZER_STREAM), mode=mode, **kw)


def _config_dict(cfg) -> dict:
    from dataclasses import asdict

    d = asdict(cfg)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_rank(args, argv) -> int:
    started = _now()
    out = Path(args.out)
    ds = _load(args)
    problem = build_problem(ds.features, one_hot(ds))
    grid = build_grid(args.grid_step)
    cfg = _search_config(args)
    normalize = args.normalize_curve == "on"
    result = sweep(problem, grid, cfg, normalize=normalize, threads=args.threads)
    wq = quadrant_process(result.best_W)
    ranking = rank_features(wq)
    names = ds.names()

    _atomic_write(out / "ranking.csv", ranking.to_csv(names))
    _atomic_write(out / "ranking.json", ranking.to_json(names) + "\n")
    _atomic_write(out / "sweep.csv", result.to_csv())
    _atomic_write(out / "best_trace.csv", result.best_point.trace.to_csv())
    _atomic_write(out / "polygons.json", polygons_json(wq, names) + "\n")
    _atomic_write(
        out / "dataset_meta.json",
        json.dumps(_json_meta(ds.metadata), indent=2, sort_keys=True) + "\n",
    )
    best = result.best_point
    config = {
        "search": _config_dict(cfg),
        "grid_step": args.grid_step,
        "grid_size": len(grid),
        "normalize_curve": normalize,
        "threads": args.threads,
        "best_weights": list(best.weights.as_tuple()),
        "best_area": best.area,
        "best_iterations": best.iterations,
        "best_converged": best.converged,
        "split_policy": "stratified",
    }
    _write_manifest(out, "rank", argv, config, {"data": _fingerprint(args.data)}, args.seed, started)
    print(f"ranked {ds.d} features; best (alpha, beta, gamma) = {best.weights.as_tuple()}, S = {best.area:.6g}")
    return 0


def _json_meta(meta):
    from .data import _jsonable

    return _jsonable(meta)


def _parse_sizes(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, got {text!r}") from None


def cmd_eval(args, argv) -> int:
    started = _now()
    out = Path(args.out)
    ds = _load(args)
    try:
        ranking = FeatureRanking.from_csv(Path(args.ranking).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read ranking {args.ranking}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed ranking file {args.ranking}: {exc}") from exc
    if len(ranking.entries) != ds.d:
        raise DataError(f"ranking has {len(ranking.entries)} features, dataset has {ds.d}")
    sizes = _parse_sizes(args.sizes) if args.sizes else None
    if sizes and max(sizes) > ds.d:
        raise ConfigError(f"subset size {max(sizes)} exceeds d={ds.d}")
    cfg = EvalConfig(
        n_trials=args.trials,
        classifier=args.classifier,
        knn_k=args.knn_k,
        ridge=args.ridge,
        elimination_schedule=sizes,
        base_seed=args.seed,
        paired=not args.unpaired,
        threads=args.threads,
    )
    curve = backward_eliminate(ds, ranking, cfg)
    _atomic_write(out / "curve.csv", curve.to_csv())
    full = curve.points[0]
    summary = {
        "best_size": curve.best_size,
        "best_accuracy": curve.best_accuracy,
        "largest_size": full[0],
        "largest_size_accuracy": full[1],
    }
    _atomic_write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    inputs = {"data": _fingerprint(args.data), "ranking": _fingerprint(args.ranking)}
    _write_manifest(out, "eval", argv, _config_dict(cfg), inputs, args.seed, started)
    print(f"best subset size {curve.best_size}: accuracy {curve.best_accuracy:.4f}")
    return 0


def cmd_trace(args, argv) -> int:
    started = _now()
    out = Path(args.out)
    weights = SimplexWeights(args.alpha, args.beta, args.gamma)
    ds = _load(args)
    problem = build_problem(ds.features, one_hot(ds))
    cfg = _search_config(args, mode=args.mode)
    _, trace = minimize(problem, weights, cfg)
    normalize = args.normalize_curve == "on"
    area = curve_area(trace, normalize=normalize)
    stem = f"trace_{args.mode}"
    _atomic_write(out / f"{stem}.csv", trace.to_csv())
    info = {
        "mode": args.mode,
        "direction": "F1 only, no step averaging" if args.mode == "plain" else "hybrid alpha*F1 + beta*F2 + gamma*F3",
        "weights": list(trace.weights),
        "curve_area": area,
        "normalized": normalize,
        "iterations": trace.iterations,
        "converged": trace.converged,
        "eps_grad": trace.eps_grad,
        "backtracking_floor_hits": trace.floor_hits,
        "direction_fallbacks": trace.direction_fallbacks,
    }
    _atomic_write(out / f"{stem}.json", json.dumps(info, indent=2, sort_keys=True) + "\n")
    config = {"search": _config_dict(cfg), "weights": [args.alpha, args.beta, args.gamma]}
    _write_manifest(out, "trace", argv, config, {"data": _fingerprint(args.data)}, args.seed, started)
    print(f"{args.mode}: S = {area:.6g} after {trace.iterations} iterations")
    return 0


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read manifest {args.manifest}: {exc}") from exc
    old = list(manifest["argv"])
    if args.out:
        old = _replace_flag(old, "--out", args.out)
    return main(old)


def _replace_flag(argv, flag, value):
    argv = list(argv)
    for i, a in enumerate(argv):
        if a == flag and i + 1 < len(argv):
            argv[i + 1] = value
            return argv
        if a.startswith(flag + "="):
            argv[i] = f"{flag}={value}"
            return argv
    return argv + [flag, value]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _data_flags(p):
    p.add_argument("--data", required=True, help="CSV file, one sample per row")
    p.add_argument("--label-col", default="-1", help="label column name or index (default: last)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="first row is data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")


def _search_flags(p):
    p.add_argument("--normalize-curve", choices=("on", "off"), default="on")
    p.add_argument("--eps-grad", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--dt-init", type=float)
    p.add_argument("--dt-min", type=float)
    p.add_argument("--dt-max", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stiefel-fs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rank", help="sweep direction weights and rank features by polygon area")
    _data_flags(p)
    _search_flags(p)
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="backward elimination along a ranking")
    _data_flags(p)
    p.add_argument("--ranking", required=True, help="ranking.csv written by 'rank'")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--classifier", choices=("linear", "knn"), default="linear")
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--ridge", type=float, default=1e-3)
    p.add_argument("--sizes", help="comma-separated subset sizes, strictly decreasing")
    p.add_argument("--unpaired", action="store_true", help="fresh splits per subset size")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="single run; write the descent curve")
    _data_flags(p)
    _search_flags(p)
    p.add_argument("--alpha", type=float, default=1 / 3)
    p.add_argument("--beta", type=float, default=1 / 3)
    p.add_argument("--gamma", type=float, default=1 - 2 / 3)
    p.add_argument("--mode", choices=("hybrid", "plain"), default="hybrid")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write to this directory instead of the recorded one")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        if getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be >= 1")
        return args.func(args, argv)
    except StiefelFSError as exc:
        print(f"stiefel-fs: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
