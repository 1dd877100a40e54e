"""Command-line front end: ``s2malign {gen,train,align,eval}``.

Exit codes: 0 success, 1 environment or I/O failure, 2 invalid input or config.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import io as fio
from .datagen import BenchmarkConfig, ConfigError, gen_benchmark
from .embedding import EmbeddingConfig
from .pipeline import (
    DEFAULT_CANDIDATES,
    DEFAULT_FOLDS,
    TrainConfig,
    TrainedModel,
    align_baseline,
    align_test,
    benchmark_template,
    cross_validate_embedding,
    noise_sweep,
    train,
)
from .cca import DEFAULT_RIDGE
from .synthesis import Template

log = logging.getLogger("s2malign")


class InputError(ValueError):
    """Invalid user input; maps to exit code 2."""


# argument parsing helpers


def parse_ids(text: str) -> list[int]:
    """``"0..18"`` (inclusive), ``"0,3,5"`` or a mix such as ``"0..4,9"``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise InputError(f"malformed id list {text!r}") from None
    if not out:
        raise InputError(f"empty id list {text!r}")
    return out


def parse_rates(text: str) -> list[float]:
    """Comma list (``"0,0.1,0.5"``) or ``start:stop:step`` with inclusive stop."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step))
            rates = [round(start + k * step, 10) for k in range(n + 1)]
        else:
            rates = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"malformed rate list {text!r}") from None
    if not rates or any(not 0 <= r <= 1 for r in rates):
        raise InputError(f"rates must be a nonempty list within [0, 1], got {text!r}")
    return rates


def parse_candidates(text: str) -> list[EmbeddingConfig]:
    """``"0:0,5:5,20:20"`` as past:future pairs; a bare ``h`` means ``h:h``."""
    out = []
    try:
        for part in text.split(","):
            if ":" in part:
                p, f = part.split(":")
                out.append(EmbeddingConfig(int(p), int(f)))
            elif part.strip():
                out.append(EmbeddingConfig(int(part), int(part)))
    except ValueError:
        raise InputError(f"malformed candidate list {text!r}") from None
    if not out:
        raise InputError("empty candidate list")
    return out


def _workers(args) -> int:
    return args.threads or os.cpu_count() or 1


def write_manifest(path: Path, command: str, config: dict, seed: int | None, started: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "config_hash": fio.config_hash(config),
        "seed": seed,
        "tool_version": __version__,
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    fio.write_json(path, manifest)


def _series_name(kind: str, i: int, ext: str) -> str:
    return f"{kind}_{i:04d}.{ext}"


def _load_benchmark_config(data: Path) -> BenchmarkConfig:
    manifest = data / "manifest.json"
    if not manifest.exists():
        raise FileNotFoundError(f"{manifest} not found")
    obj = fio.read_json(manifest)
    return BenchmarkConfig.from_json(obj["config"])


def _load_items(data: Path, ids):
    items = []
    for i in ids:
        x = fio.load_series(data / _series_name("series", i, "csv"))
        truth = fio.load_aligned(data / _series_name("truth", i, "json"))
        bp = fio.load_model(data / _series_name("blueprint", i, "json"))
        items.append((x, truth, bp))
    return items


def _template_arg(args):
    if args.synthesis == "replication":
        if not args.template:
            raise InputError("replication synthesis needs --template")
        return fio.load_template(args.template)
    return None


# commands


def cmd_gen(args) -> int:
    started = time.time()
    base = {}
    if args.config:
        base = fio.read_json(args.config)
        if not isinstance(base, dict):
            raise InputError("benchmark config must be a JSON object")
    overrides = {
        "seed": args.seed,
        "n_series": args.n_series,
        "noise_rate": args.noise_rate,
        "warp_strength": args.warp_strength,
        "pattern_jitter": args.jitter,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "n_series" in base and "n_train" not in base:
        base["n_train"] = min(BenchmarkConfig.n_train, int(base["n_series"]))
    config = BenchmarkConfig.from_json(base)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cases = gen_benchmark(config)
    for case in cases:
        i = case.index
        fio.save_series(out / _series_name("series", i, "csv"), case.series)
        fio.save_model(out / _series_name("blueprint", i, "json"), case.blueprint)
        fio.write_json(out / _series_name("truth", i, "json"), fio.aligned_to_json(case.truth))
    if config.n_train:
        fio.save_series(out / "template.csv", benchmark_template(cases[0]).values)
    write_manifest(out / "manifest.json", "gen", config.to_json(), config.seed, started)
    log.info("wrote %d series to %s", len(cases), out)
    return 0


def cmd_train(args) -> int:
    started = time.time()
    data = Path(args.data)
    ids = parse_ids(args.train_ids)
    template = _template_arg(args)
    items = _load_items(data, ids)
    if args.cv:
        cands = parse_candidates(args.candidates) if args.candidates else list(DEFAULT_CANDIDATES)
        emb = cross_validate_embedding(
            items, cands, args.folds, args.ridge, args.synthesis, template, _workers(args)
        )
    else:
        emb = EmbeddingConfig(args.past, args.future)
    log.info("embedding past=%d future=%d (M=%d)", emb.past, emb.future, emb.dim)
    trained = train(items, TrainConfig(emb, args.ridge, args.synthesis, template))
    extra = {"synthesis": args.synthesis}
    if template is not None:
        extra["template"] = fio.template_to_json(template)
    fio.save_latent(args.out, trained.latent, extra)
    log.info("rho = %.6f", trained.latent.rho)
    config = {
        "train_ids": ids,
        "synthesis": args.synthesis,
        "template": args.template,
        "ridge": args.ridge,
        "cv": bool(args.cv),
        "past": emb.past,
        "future": emb.future,
    }
    write_manifest(Path(str(args.out) + ".manifest.json"), "train", config, None, started)
    return 0


def cmd_align(args) -> int:
    series = fio.load_series(args.series)
    blueprint = fio.load_model(args.blueprint)
    if args.method == "cca":
        if not args.model:
            raise InputError("--method cca needs --model")
        latent, raw = fio.load_latent(args.model)
        synthesis = args.synthesis or raw.get("synthesis", "binary")
        if args.template:
            template = fio.load_template(args.template)
        elif "template" in raw and synthesis == "replication":
            t = raw["template"]
            template = Template(t["values"], int(t.get("class", 0)))
        else:
            template = None
        cfg = TrainConfig(latent.embedding, latent.ridge, synthesis, template)
        aligned, alignment = align_test(
            series, blueprint, TrainedModel(latent, cfg), with_alignment=True
        )
    else:
        args.synthesis = args.synthesis or "replication"
        template = _template_arg(args)
        aligned, alignment = align_baseline(
            series, blueprint, args.synthesis, template, with_alignment=True
        )
    payload = fio.aligned_to_json(aligned)
    if args.out:
        fio.write_json(args.out, payload)
    else:
        sys.stdout.write(fio.dumps(payload))
    if args.path_out:
        fio.save_alignment(args.path_out, alignment)
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    data = Path(args.data)
    rates = parse_rates(args.rates)
    config = _load_benchmark_config(data)
    if args.seed is not None:
        config = config.with_(seed=args.seed)
    train_ids = parse_ids(args.train_ids) if args.train_ids else config.train_ids
    test_ids = parse_ids(args.test_ids) if args.test_ids else config.test_ids
    bad = [i for i in train_ids + test_ids if not 0 <= i < config.n_series]
    if bad:
        raise InputError(f"series ids outside the benchmark: {bad[:5]}")
    cands = parse_candidates(args.candidates) if args.candidates else list(DEFAULT_CANDIDATES)
    result = noise_sweep(
        config, rates, train_ids, test_ids, cands, args.folds, args.ridge, args.synthesis,
        _workers(args),
    )
    out = Path(args.out)
    fio.write_sweep_csv(out, result.rows)
    summary_path = Path(args.summary) if args.summary else out.with_suffix(".json")
    fio.write_json(summary_path, {"benchmark": config.to_json(), "summary": result.summary})
    run_config = {
        "benchmark": config.to_json(),
        "rates": rates,
        "train_ids": train_ids,
        "test_ids": test_ids,
        "candidates": [[c.past, c.future] for c in cands],
        "folds": args.folds,
        "ridge": args.ridge,
        "synthesis": args.synthesis,
    }
    write_manifest(Path(str(out) + ".manifest.json"), "eval", run_config, config.seed, started)
    for row in result.summary:
        log.info("%.2f %-12s %.3f", row["noise_rate"], row["method"], row["mean_error"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--quiet", "-q", action="store_true")
    common.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="s2malign", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a seeded synthetic benchmark")
    g.add_argument("--config", help="benchmark config JSON (flags override it)")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--n-series", type=int)
    g.add_argument("--noise-rate", type=float)
    g.add_argument("--warp-strength", type=float)
    g.add_argument("--jitter", type=float)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", parents=[common], help="learn the latent map")
    t.add_argument("--data", required=True)
    t.add_argument("--train-ids", default="0..18")
    t.add_argument("--synthesis", choices=["binary", "replication"], default="replication")
    t.add_argument("--template")
    t.add_argument("--cv", action="store_true", help="cross-validate the embedding size")
    t.add_argument("--candidates", help="past:future list for --cv")
    t.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    t.add_argument("--past", type=int, default=20)
    t.add_argument("--future", type=int, default=20)
    t.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    a = sub.add_parser("align", parents=[common], help="locate blueprint markers in a series")
    a.add_argument("--method", choices=["cca", "dtw"], default="cca")
    a.add_argument("--model")
    a.add_argument("--series", required=True)
    a.add_argument("--blueprint", required=True)
    a.add_argument("--synthesis", choices=["binary", "replication"])
    a.add_argument("--template")
    a.add_argument("--out", help="aligned markers JSON (default: stdout)")
    a.add_argument("--path-out", help="warping path JSON")
    a.set_defaults(func=cmd_align)

    e = sub.add_parser("eval", parents=[common], help="noise-rate sweep of both methods")
    e.add_argument("--data", required=True)
    e.add_argument("--rates", default="0:1:0.1")
    e.add_argument("--train-ids")
    e.add_argument("--test-ids")
    e.add_argument("--candidates")
    e.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    e.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    e.add_argument("--synthesis", choices=["binary", "replication"], default="replication")
    e.add_argument("--seed", type=int)
    e.add_argument("--out", required=True)
    e.add_argument("--summary", help="JSON summary path (default: OUT with .json)")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
