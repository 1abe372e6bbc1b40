"""Command-line entry point.

    semalloc export-curves [--out DIR]
    semalloc train-auction [--config F] [--iters N] [--batch B] [--seed S] [--devices N] [--out DIR]
    semalloc simulate [--config F] [--seed S] [--iters N] [--devices N] [--out DIR]
    semalloc simulate fedse [--rounds R] [--groups G] [--seed S] [--out DIR]
    semalloc eval-metrics [--candidates F --references F] [--embeddings A B] [--trace F --horizon T]

Every output is CSV with a header; floats are written with 8 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import metrics
from .auction import dump_nets, expected_revenue, spa_expected_revenue
from .config import ConfigError, ExperimentConfig, FedSEBlock, load_config
from .fedse import make_groups, run_rounds
from .perf_model import CSV_HEADER, curve_rows
from .training import TrainingDiverged, train
from .wpcn import NetworkConfig, device_state, sample_channels, value_sampler

log = logging.getLogger("semalloc")


class InputError(ValueError):
    """Malformed input file; message carries ``file:line``."""


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.8g}"
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


# -- commands -----------------------------------------------------------------


def export_curves(out: Path) -> Path:
    return write_csv(out / "curves.csv", CSV_HEADER, curve_rows())


def _with_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
        if cfg.auction is not None:
            cfg = dataclasses.replace(cfg, auction=dataclasses.replace(cfg.auction, seed=cfg.sub_seed("auction")))
    if cfg.auction is not None:
        changes = {}
        if getattr(args, "iters", None) is not None:
            changes["iterations"] = args.iters
        if getattr(args, "batch", None) is not None:
            changes["batch_size"] = args.batch
        if changes:
            cfg = dataclasses.replace(cfg, auction=dataclasses.replace(cfg.auction, **changes))
        errs = cfg.auction.errors()
        if errs:
            raise ConfigError([f"auction.{e}" for e in errs])
    if cfg.wpcn is not None and getattr(args, "devices", None) is not None:
        cfg = dataclasses.replace(cfg, wpcn=dataclasses.replace(cfg.wpcn, devices=args.devices))
        errs = cfg.wpcn.errors()
        if errs:
            raise ConfigError([f"wpcn.{e}" for e in errs])
    return cfg


def train_auction(cfg: ExperimentConfig, out: Path) -> dict:
    """Train on wpcn valuation profiles; write the revenue trace and parameters."""
    sampler = value_sampler(cfg.wpcn)
    result = train(cfg.auction, sampler)
    write_csv(out / "revenue_trace.csv", ("iteration", "dl_revenue", "spa_revenue"), result.trace)
    (out / "auction_params.txt").write_text(dump_nets(result.nets), encoding="utf-8")
    seed = cfg.sub_seed("heldout")
    summary = {
        "heldout_dl_revenue": expected_revenue(result.nets, sampler, cfg.heldout, np.random.default_rng(seed)),
        "heldout_spa_revenue": spa_expected_revenue(sampler, cfg.heldout, np.random.default_rng(seed)),
    }
    write_csv(out / "auction_summary.csv", ("quantity", "value"), summary.items())
    return summary


def write_devices(cfg: NetworkConfig, seed: int, out: Path) -> Path:
    rng = np.random.default_rng(seed)
    gains = sample_channels(cfg, rng)
    rows = []
    for i, h in enumerate(gains):
        s = device_state(cfg, float(h), i)
        rows.append((s.id, s.channel_gain, s.harvested_energy, s.bit_budget, s.dimension or 0,
                     s.similarity, s.bleu, s.valuation, s.bid))
    header = ("device", "channel_gain", "harvested_energy_j", "bit_budget", "dimension",
              "similarity", "bleu_1gram", "valuation", "bid")
    return write_csv(out / "devices.csv", header, rows)


def run_case_study(cfg: ExperimentConfig, out: Path) -> dict:
    export_curves(out)
    write_devices(cfg.wpcn, cfg.sub_seed("wpcn"), out)
    return train_auction(cfg, out)


def run_fedse(block: FedSEBlock, seed: int, out: Path) -> Path:
    rng = np.random.default_rng(seed)
    groups, target = make_groups(block.groups, rng, block.dim, block.samples,
                                 block.devices_per_group, block.fed.label_noise)
    _, logs = run_rounds(groups, block.rounds, block.fed, rng, target)
    return write_csv(out / "fedse_rounds.csv", ("round", "global_loss", "uploads"),
                     [(l.round, l.global_loss, l.uploads) for l in logs])


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text("utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def read_sentences(path: Path) -> list[list[str]]:
    out = []
    for lineno, line in enumerate(_read_lines(path), 1):
        tokens = metrics.tokenize(line)
        if not tokens:
            raise InputError(f"{path}:{lineno}: empty sentence")
        out.append(tokens)
    return out


def read_vectors(path: Path) -> list[np.ndarray]:
    out = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        try:
            vec = np.array([float(x) for x in line.split(",")])
        except ValueError:
            raise InputError(f"{path}:{lineno}: expected comma-separated floats") from None
        out.append(vec)
    return out


def read_trace(path: Path) -> metrics.StateTrace:
    lines = _read_lines(path)
    if not lines or [c.strip() for c in lines[0].split(",")] != ["t", "source", "estimate", "gen_time"]:
        raise InputError(f"{path}:1: expected header t,source,estimate,gen_time")
    events = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 4:
            raise InputError(f"{path}:{lineno}: expected 4 columns, got {len(cells)}")
        try:
            events.append(metrics.TraceEvent(float(cells[0]), cells[1], cells[2], float(cells[3])))
        except ValueError:
            raise InputError(f"{path}:{lineno}: t and gen_time must be numbers") from None
    try:
        return metrics.StateTrace(events)
    except metrics.MetricInputError as exc:
        raise InputError(f"{path}: {exc}") from None


def eval_metrics(out: Path, candidates=None, references=None, embeddings=None, trace=None,
                 horizon=None, max_n: int = 1) -> Path:
    rows = []
    if candidates is not None or references is not None:
        if candidates is None or references is None:
            raise InputError("--candidates and --references go together")
        cands, refs = read_sentences(Path(candidates)), read_sentences(Path(references))
        if len(cands) != len(refs):
            raise InputError(f"{len(cands)} candidates but {len(refs)} references")
        for i, (c, r) in enumerate(zip(cands, refs), 1):
            n = min(max_n, len(c))
            try:
                rows.append((f"bleu_{n}", f"{candidates}:{i}", metrics.bleu(c, [r], n)))
                rows.append((f"cider_{n}", f"{candidates}:{i}", metrics.cider(c, [r], n)))
            except metrics.MetricInputError as exc:
                raise InputError(f"{candidates}:{i}: {exc}") from None
    if embeddings is not None:
        a_path, b_path = embeddings
        va, vb = read_vectors(Path(a_path)), read_vectors(Path(b_path))
        if len(va) != len(vb):
            raise InputError(f"{len(va)} vectors in {a_path} but {len(vb)} in {b_path}")
        for i, (a, b) in enumerate(zip(va, vb), 1):
            try:
                rows.append(("similarity", f"{a_path}:{i}", metrics.sentence_similarity(a, b)))
            except metrics.MetricInputError as exc:
                raise InputError(f"{a_path}:{i}: {exc}") from None
    if trace is not None:
        tr = read_trace(Path(trace))
        h = float(horizon) if horizon is not None else tr[-1].t
        try:
            rows.append(("aoi", str(trace), metrics.average_aoi(tr, h)))
            rows.append(("aoii", str(trace), metrics.average_aoii(tr, h)))
        except metrics.MetricInputError as exc:
            raise InputError(f"{trace}: {exc}") from None
    if not rows:
        raise InputError("no inputs given")
    return write_csv(out / "metrics.csv", ("metric", "input", "value"), rows)


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semalloc", description="Semantic-aware energy auctions.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="TOML config (default: packaged default)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("export-curves", help="write curves.csv")
    sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("train-auction", help="train the learned auction on wpcn profiles")
    common(sp)
    sp.add_argument("--iters", type=int)
    sp.add_argument("--batch", type=int)
    sp.add_argument("--devices", type=int)

    sp = sub.add_parser("simulate", help="case study (default) or the fedse simulation")
    sp.add_argument("target", nargs="?", choices=("case-study", "fedse"), default="case-study")
    common(sp)
    sp.add_argument("--iters", type=int)
    sp.add_argument("--devices", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--groups", type=int)

    sp = sub.add_parser("eval-metrics", help="BLEU/CIDEr, similarity and AoI/AoII reports")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--candidates")
    sp.add_argument("--references")
    sp.add_argument("--embeddings", nargs=2, metavar=("A", "B"))
    sp.add_argument("--trace")
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--max-n", type=int, default=1)
    return p


def _out_dir(args, cfg: ExperimentConfig = None) -> Path:
    if args.out:
        return Path(args.out)
    return Path(cfg.out) if cfg is not None else Path("out")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "export-curves":
            print(export_curves(_out_dir(args)))
        elif args.command == "eval-metrics":
            print(eval_metrics(_out_dir(args), args.candidates, args.references, args.embeddings,
                               args.trace, args.horizon, args.max_n))
        elif args.command == "train-auction":
            cfg = _with_overrides(load_config(args.config, require=("wpcn", "auction")), args)
            summary = train_auction(cfg, _out_dir(args, cfg))
            for k, v in summary.items():
                print(f"{k} = {fmt(v)}")
        elif args.command == "simulate" and args.target == "fedse":
            cfg = _with_overrides(load_config(args.config, require=("fedse",)), args)
            block = cfg.fedse
            if args.rounds is not None:
                block = dataclasses.replace(block, rounds=args.rounds)
            if args.groups is not None:
                block = dataclasses.replace(block, groups=args.groups)
            if block.rounds < 1 or block.groups < 1:
                raise ConfigError(["fedse.rounds/groups: must be >= 1"])
            print(run_fedse(block, cfg.sub_seed("fedse"), _out_dir(args, cfg)))
        else:
            cfg = _with_overrides(load_config(args.config, require=("wpcn", "auction")), args)
            summary = run_case_study(cfg, _out_dir(args, cfg))
            for k, v in summary.items():
                print(f"{k} = {fmt(v)}")
    except (ConfigError, InputError, TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
