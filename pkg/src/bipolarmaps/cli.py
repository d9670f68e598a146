"""Command-line interface.

Every subcommand is a pure function of its flags: randomness comes from
``--seed`` alone and outputs are written only after the whole run succeeded.
Exit status is 0 on success, 2 on bad input or an unmet precondition and 3
when an experiment's statistical check fails.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as bio
from .rng import make_rng

EXIT_OK, EXIT_INPUT, EXIT_STAT = 0, 2, 3

# stream ids so that subcommands never share random draws
STREAMS = {
    "sample-walk": 1,
    "sample-map": 2,
    "sample-ball": 3,
    "simulate-levy": 4,
    "experiment": 5,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    alpha: float = 1.5
    seed: int = 0
    out: str = "-"
    options: dict = field(default_factory=dict)

    def rng(self, *extra: int) -> np.random.Generator:
        return make_rng(self.seed, STREAMS.get(self.command, 0), *extra)


def _dist(alpha: float):
    from .stepdist import power_law_distribution

    return power_law_distribution(alpha)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


# subcommands; each returns (outputs, exit code) with outputs {suffix: text}


def cmd_sample_walk(cfg: RunConfig, a) -> tuple[dict, int]:
    from .walks import WalkSpec, sample_conditioned, sample_unconditioned

    dist = _dist(cfg.alpha)
    if a.bridge is None:
        path = sample_unconditioned(a.n, dist, cfg.rng())
    else:
        l, k = a.bridge
        path, _ = sample_conditioned(WalkSpec(a.n, (0, l), (k, 0), dist), cfg.rng(), a.max_attempts)
    return {"": bio.path_csv(path)}, EXIT_OK


def cmd_build_map(cfg: RunConfig, a) -> tuple[dict, int]:
    from .sewing import build_map

    moves = bio.moves_text_decode(_read_input(a.input))
    return {"": bio.map_json_encode(build_map(moves))}, EXIT_OK


def cmd_decode_map(cfg: RunConfig, a) -> tuple[dict, int]:
    from .sewing import decode_map

    m = bio.map_json_decode(_read_input(a.input))
    return {"": bio.moves_text_encode(decode_map(m))}, EXIT_OK


def cmd_sample_map(cfg: RunConfig, a) -> tuple[dict, int]:
    from .sewing import build_map
    from .walks import WalkSpec, sample_conditioned

    dist = _dist(cfg.alpha)
    e = 1.0 / cfg.alpha
    l = a.l if a.l is not None else math.floor(a.A * a.n**e)
    k = a.k if a.k is not None else math.floor(a.B * a.n**e)
    spec = WalkSpec(a.n, (0, l), (k, 0), dist)
    path, _ = sample_conditioned(spec, cfg.rng(), a.max_attempts)
    return {"": bio.map_json_encode(build_map(path.moves()))}, EXIT_OK


def cmd_sample_ball(cfg: RunConfig, a) -> tuple[dict, int]:
    from .uibpm import grow_until_certified

    ball, m = grow_until_certified(cfg.seed, a.r, _dist(cfg.alpha), m0=a.m0, m_max=a.m_max)
    doc = bio.ball_document(ball)
    doc["seed"] = cfg.seed
    doc["alpha"] = cfg.alpha
    return {"": bio.dumps(doc)}, EXIT_OK


def cmd_simulate_levy(cfg: RunConfig, a) -> tuple[dict, int]:
    from . import levy

    dist = _dist(cfg.alpha)
    if a.delta is None:
        delta, _ = levy.default_delta(a.T, cfg.alpha, dist.c1, max_jumps=a.max_jumps)
    else:
        delta = a.delta
    pair = levy.sample_pair(a.T, delta, cfg.alpha, dist.c1, cfg.rng())
    grid = np.linspace(0.0, a.T, a.grid + 1)
    return {"": bio.jumps_csv(pair.jumps), ".grid": bio.grid_csv(pair, grid)}, EXIT_OK


def _exp_tails(cfg, a):
    from .stats import hill_tail_index
    from .stepdist import sample_move_arrays

    i, j = sample_move_arrays(_dist(cfg.alpha), cfg.rng(1), a.samples)
    deg = (i + j + 2)[i >= 0]
    est = hill_tail_index(deg, a.k_fraction)
    ok = abs(est.alpha - cfg.alpha) <= a.tol
    return {"kind": "tails", "alpha": cfg.alpha, "samples": a.samples, "faces": int(deg.size),
            "k_fraction": a.k_fraction, "estimate": est.alpha, "stderr": est.stderr,
            "k": est.k, "tolerance": a.tol, "passed": ok}, ok


def _exp_tv(cfg, a):
    from .walks import WalkSpec, window_tv

    dist = _dist(cfg.alpha)
    rows = []
    for n in a.ns:
        l = math.floor(n ** (1.0 / cfg.alpha) / 2)
        rows.append({"n": n, "l": l, "k": l, "tv": window_tv(WalkSpec(n, (0, l), (l, 0), dist), 0)})
    tvs = [r["tv"] for r in rows]
    ok = all(x > y for x, y in zip(tvs, tvs[1:]))
    return {"kind": "tv", "alpha": cfg.alpha, "r": 0, "rows": rows, "passed": ok}, ok


def _exp_scaling(cfg, a):
    from .stats import scaling_experiment

    lc = {"delta": a.delta} if a.delta is not None else {"max_jumps": a.max_jumps}
    rep = scaling_experiment(a.n, a.replicas, cfg.alpha, levy_config=lc, seed=cfg.seed)
    ok = all(t["passed"] for t in rep["tests"])
    rep["kind"] = "scaling"
    rep["passed"] = ok
    return rep, ok


def _exp_ball_freq(cfg, a):
    from .stats import ball_frequency_experiment

    rep = ball_frequency_experiment(a.ns, a.A, a.B, cfg.alpha, a.samples, a.seeds,
                                    r=a.r, m_max=a.m_max, seed=cfg.seed)
    tvs = [row["tv_move_root"] for row in rep["finite"]]
    ok = all(x >= y for x, y in zip(tvs, tvs[1:]))
    rep["kind"] = "ball-freq"
    rep["passed"] = ok
    return rep, ok


EXPERIMENTS = {"tails": _exp_tails, "tv": _exp_tv, "scaling": _exp_scaling, "ball-freq": _exp_ball_freq}


def cmd_experiment(cfg: RunConfig, a) -> tuple[dict, int]:
    rep, ok = EXPERIMENTS[a.kind](cfg, a)
    return {"": bio.dumps(rep)}, EXIT_OK if ok else EXIT_STAT


COMMANDS = {
    "sample-walk": cmd_sample_walk,
    "build-map": cmd_build_map,
    "decode-map": cmd_decode_map,
    "sample-map": cmd_sample_map,
    "sample-ball": cmd_sample_ball,
    "simulate-levy": cmd_simulate_levy,
    "experiment": cmd_experiment,
}


def _nonneg(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _pos_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _seed(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _alpha(s: str) -> float:
    v = float(s)
    if not 1.0 < v < 2.0:
        raise argparse.ArgumentTypeError("alpha must lie in (1, 2)")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=_alpha, default=1.5)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = _Parser(prog="bipolarmaps", description="Random bipolar-oriented maps with heavy-tailed faces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample-walk", parents=[common], help="path CSV of a walk")
    s.add_argument("--n", type=_nonneg, required=True)
    s.add_argument("--bridge", type=_nonneg, nargs=2, metavar=("L", "K"),
                   help="condition on a quadrant walk from (0, L) to (K, 0)")
    s.add_argument("--max-attempts", type=_pos_int, default=10**6)

    s = sub.add_parser("build-map", parents=[common], help="moves text to map JSON")
    s.add_argument("input", help="moves file, '-' for stdin")

    s = sub.add_parser("decode-map", parents=[common], help="map JSON to moves text")
    s.add_argument("input", help="map JSON file, '-' for stdin")

    s = sub.add_parser("sample-map", parents=[common], help="conditioned map by rejection")
    s.add_argument("--n", type=_nonneg, required=True)
    s.add_argument("--A", type=float, default=0.5)
    s.add_argument("--B", type=float, default=0.5)
    s.add_argument("--l", type=_nonneg, help="start height, overrides --A")
    s.add_argument("--k", type=_nonneg, help="end abscissa, overrides --B")
    s.add_argument("--max-attempts", type=_pos_int, default=10**6)

    s = sub.add_parser("sample-ball", parents=[common], help="certified infinite-volume ball")
    s.add_argument("--r", type=_nonneg, default=1)
    s.add_argument("--m0", type=_pos_int, default=64)
    s.add_argument("--m-max", type=_pos_int, default=2**20)

    s = sub.add_parser("simulate-levy", parents=[common], help="jump CSV and grid CSV")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--delta", type=float)
    s.add_argument("--max-jumps", type=float, default=2e4)
    s.add_argument("--grid", type=_pos_int, default=1000, help="number of grid intervals")

    s = sub.add_parser("experiment", parents=[common], help="statistical experiments")
    s.add_argument("kind", choices=sorted(EXPERIMENTS))
    s.add_argument("--n", type=_pos_int, default=10**4)
    s.add_argument("--replicas", type=_pos_int, default=10**4)
    s.add_argument("--ns", type=_pos_int, nargs="+")
    s.add_argument("--samples", type=_pos_int, default=10**6)
    s.add_argument("--k-fraction", type=float, default=0.01)
    s.add_argument("--tol", type=float, default=0.1)
    s.add_argument("--delta", type=float)
    s.add_argument("--max-jumps", type=float, default=2e4)
    s.add_argument("--A", type=float, default=0.5)
    s.add_argument("--B", type=float, default=0.5)
    s.add_argument("--r", type=_nonneg, default=1)
    s.add_argument("--seeds", type=_pos_int, default=10**4)
    s.add_argument("--m-max", type=_pos_int, default=2**16)
    return p


_DEFAULT_NS = {"tv": [10, 20, 40], "ball-freq": [15, 30]}


def _write(out: str, outputs: dict) -> None:
    if out == "-":
        for text in outputs.values():
            sys.stdout.write(text)
        return
    base = Path(out)
    for suffix, text in outputs.items():
        target = base if not suffix else base.with_name(base.stem + suffix + (base.suffix or ".csv"))
        target.write_text(text, encoding="utf-8", newline="\n")


def main(argv=None) -> int:
    from .sewing import SewingError
    from .uibpm import CertificationFailed
    from .walks import RejectionExhausted, WalkCapExceeded

    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.command == "experiment" and a.ns is None:
            a.ns = _DEFAULT_NS.get(a.kind, [])
        opts = {k: v for k, v in vars(a).items() if k not in ("command", "alpha", "seed", "out")}
        cfg = RunConfig(a.command, a.alpha, a.seed, a.out, opts)
        outputs, code = COMMANDS[a.command](cfg, a)
    except UsageError as exc:
        print(f"bipolarmaps: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RejectionExhausted, CertificationFailed) as exc:
        print(f"bipolarmaps: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (bio.FormatError, SewingError, WalkCapExceeded, ValueError, OSError,
            UnicodeDecodeError) as exc:
        print(f"bipolarmaps: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if code == EXIT_STAT:
        # the report is still the run's result, but nothing is written on failure
        sys.stderr.write(next(iter(outputs.values())))
        return code
    try:
        _write(cfg.out, outputs)
    except OSError as exc:
        print(f"bipolarmaps: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
