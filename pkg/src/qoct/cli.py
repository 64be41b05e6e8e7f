"""``qoct`` command line.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import reconstruct as rc
from . import scenarios
from .coincidence import InputError, format_summary
from .config import Config, FormatError, load_config
from .events import ModelError, qtag_bytes, read_qtag
from .scene import MirrorObject
from .spectral import joint_from_csv, joint_to_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class DataError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("QOCT_THREADS", "")
    try:
        n = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise FormatError(f"QOCT_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def write_atomic(path: Path, data: str | bytes) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if isinstance(data, bytes) else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(cfg: Config, **extra) -> dict[str, str]:
    return {"config_sha256": cfg.digest, **{k: str(v) for k, v in extra.items()}}


def _say(args, line: str) -> None:
    if not args.quiet:
        print(line)


def cmd_simulate_joint(cfg: Config, args) -> None:
    js = scenarios.analytic_joint(cfg)
    write_atomic(args.out / "joint.csv", joint_to_csv(js))
    _say(args, format_summary({"kind": cfg.source.kind, "n_points": js.shape[0],
                               "total": repr(float(js.values.sum())), "config_sha256": cfg.digest}))


def cmd_simulate_tags(cfg: Config, args) -> None:
    tags = scenarios.simulate_tags(cfg, _threads())
    write_atomic(args.out / "tags.qtag", qtag_bytes(tags))
    meta = _meta(cfg, n_pulses=cfg.run.n_pulses, seed=cfg.run.rng_seed, records=tags.size)
    write_atomic(args.out / "tags.qtag.meta", "".join(f"{k}={v}\n" for k, v in meta.items()))
    _say(args, format_summary({"records": tags.size, "n_pulses": cfg.run.n_pulses, "seed": cfg.run.rng_seed}))


def cmd_process_tags(cfg: Config, args) -> None:
    try:
        tags = read_qtag(args.tags)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(f"{args.tags}: {exc}") from exc
    counts, prob, counters = scenarios.process_tags(tags, cfg)
    write_atomic(args.out / "counts.csv", joint_to_csv(counts))
    write_atomic(args.out / "joint.csv", joint_to_csv(prob))
    line = format_summary({**counters, "config_sha256": cfg.digest})
    write_atomic(args.out / "summary.txt", line + "\n")
    _say(args, line)


def _load_joint(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return joint_from_csv(fh.read())
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def cmd_reconstruct(cfg: Config, args) -> None:
    rcfg = cfg.reconstruct if args.mode is None else replace(cfg.reconstruct, mode=args.mode)
    if args.joint:
        jss = [_load_joint(p) for p in args.joint]
    else:
        jss = [scenarios.analytic_joint(cfg, scenarios.object_at(cfg, i)) for i in range(cfg.positions)]
    meta = _meta(cfg, mode=rcfg.mode)
    first = rc.reconstruct_ascan(jss[0], rcfg)
    write_atomic(args.out / "ascan.csv", rc.ascan_to_csv(first, meta))
    b = rc.bscan(jss, rcfg)
    write_atomic(args.out / "bscan.csv", rc.bscan_to_csv(b, meta))
    write_atomic(args.out / "bscan.pgm", rc.bscan_to_pgm(b, meta))
    pm = rc.peak_metrics(first, scenarios.default_search_window(cfg, spec=rc.extract_spectrum(jss[0], rcfg)))
    _say(args, format_summary({"columns": len(jss), "mode": rcfg.mode, "peak_um": f"{pm.position * 1e6:.3f}",
                               "fwhm_um": f"{pm.fwhm * 1e6:.3f}", "config_sha256": cfg.digest}))


def cmd_rolloff(cfg: Config, args) -> None:
    curve, _ = scenarios.rolloff_sweep(cfg)
    pred = scenarios.predicted_six_db_range(cfg)
    meta = _meta(cfg, predicted_six_db_range_um="inf" if np.isinf(pred) else repr(pred * 1e6))
    write_atomic(args.out / "rolloff.csv", rc.rolloff_to_csv(curve, meta))
    rng = curve.six_db_range
    _say(args, format_summary({"six_db_range_um": "inf" if np.isinf(rng) else f"{rng * 1e6:.2f}",
                               "predicted_um": "inf" if np.isinf(pred) else f"{pred * 1e6:.2f}",
                               "config_sha256": cfg.digest}))


def cmd_compare(cfg: Config, args) -> None:
    report = scenarios.compare(cfg)
    lines = [f"config_sha256={cfg.digest}"] + [f"{k}={v!r}" for k, v in report.items()]
    write_atomic(args.out / "compare.txt", "\n".join(lines) + "\n")
    _say(args, " ".join(lines))


COMMANDS = {
    "simulate-joint": cmd_simulate_joint,
    "simulate-tags": cmd_simulate_tags,
    "process-tags": cmd_process_tags,
    "reconstruct": cmd_reconstruct,
    "rolloff": cmd_rolloff,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="key = value config file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=None, help="override [run] seed")
    common.add_argument("--quiet", action="store_true", help="suppress the summary line")

    p = argparse.ArgumentParser(prog="qoct", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate-joint", parents=[common], help="analytic joint spectrum -> joint.csv")
    sub.add_parser("simulate-tags", parents=[common], help="Monte Carlo tag stream -> tags.qtag")
    pt = sub.add_parser("process-tags", parents=[common], help="tags.qtag -> counts.csv, joint.csv")
    pt.add_argument("tags", type=Path)
    pr = sub.add_parser("reconstruct", parents=[common], help="joint spectra -> ascan.csv, bscan.csv, bscan.pgm")
    pr.add_argument("joint", nargs="*", type=Path, help="joint spectrum CSVs (default: simulate the scan)")
    pr.add_argument("--mode", choices=("row", "column", "diagonal"), default=None)
    sub.add_parser("rolloff", parents=[common], help="depth sweep -> rolloff.csv")
    sub.add_parser("compare", parents=[common], help="classical vs entangled metrics -> compare.txt")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise FormatError("--seed must be non-negative")
            cfg = cfg.with_seed(args.seed)
        if args.command in ("simulate-tags", "process-tags") and cfg.run is None:
            raise FormatError(f"{args.command} needs a [run] section")
        if args.command == "rolloff" and not cfg.rolloff_depths:
            raise FormatError("rolloff needs a [rolloff] section")
        if args.command == "simulate-tags" and cfg.source.kind != "classical":
            raise FormatError("simulate-tags models the classical source only")
        if args.command in ("rolloff", "compare") and not isinstance(cfg.obj, MirrorObject):
            raise FormatError(f"{args.command} needs a [mirror] object")
    except (FormatError, ValueError) as exc:
        print(f"qoct: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qoct: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args)
    except FormatError as exc:
        print(f"qoct: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ModelError, InputError) as exc:
        print(f"qoct: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
