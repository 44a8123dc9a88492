"""Command-line entry point: single runs, parameter sweeps, and the
verification suites, all emitting reproducible CSV.

Exit codes: 0 success, 1 verification violation, 2 configuration error,
3 numeric failure (non-finite state; the message carries the round).
"""
import argparse
import hashlib
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

from . import harness
from .harness import STREAM_KINDS, LossStream, evaluate_run
from .learners import ALGOS, SIMPLEX_ALGOS

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# LossStream fields settable through a config file's stream_params
_STREAM_PARAM_KEYS = ("lo", "hi", "sigma", "scales", "scale", "x_star", "path")
_GRID_KEYS = ("algo", "stream", "n", "t", "q", "c", "seed", "m_pivot")


@dataclass
class RunConfig:
    """One experiment, fully resolved; serializes round-trip stable."""

    algo: str = None
    stream: str = "iid_uniform"
    n: int = None
    t: int = 1000
    q: float = None
    c: float = 1.0
    seed: int = 0
    out: str = None
    m_pivot: str = "barloss"
    stream_params: dict = field(default_factory=dict)

    def validate(self):
        if self.algo not in ALGOS:
            raise ValueError(
                f"missing or unknown algo {self.algo!r}; valid tags: {', '.join(ALGOS)}"
            )
        if self.stream not in STREAM_KINDS:
            raise ValueError(
                f"unknown stream {self.stream!r}; valid kinds: {', '.join(STREAM_KINDS)}"
            )
        if self.t < 1:
            raise ValueError("T must be >= 1")
        if self.n < 1:
            raise ValueError("N must be >= 1")
        if self.q is not None and not self.q > 0:
            raise ValueError("q must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.m_pivot not in ("barloss", "zero"):
            raise ValueError("m-pivot must be 'barloss' or 'zero'")
        unknown = set(self.stream_params) - set(_STREAM_PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown stream_params keys: {sorted(unknown)}")
        return self

    def to_dict(self):
        return asdict(self)

    @staticmethod
    def from_dict(d):
        unknown = set(d) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**d)

    def make_stream(self):
        params = dict(self.stream_params)
        if "scales" in params:
            params["scales"] = tuple(params["scales"])
        return LossStream(self.stream, n=self.n, t=self.t, seed=self.seed, **params)


def _fill_defaults(cfg):
    if cfg.n is None:
        cfg = replace(cfg, n=1 if cfg.stream == "plateau_exp" else 2)
    if cfg.stream == "plateau_exp" and cfg.n != 1:
        raise ValueError("plateau_exp is a scalar stream (N = 1)")
    return cfg


def _load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ValueError(f"cannot read config file: {e}")
    except json.JSONDecodeError as e:
        raise ValueError(f"config file is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _merge(args, validate=True):
    """Resolve precedence: defaults < config file < explicit flags.

    Returns (RunConfig, grid dict or None).  Sweeps defer validation to
    the per-point configs, so a base config may omit keys the grid
    supplies (e.g. sweeping over algo without naming a base algo)."""
    data = {}
    grid = None
    if args.config:
        data = _load_config_file(args.config)
        grid = data.pop("grid", None)
    for key in ("algo", "stream", "n", "t", "q", "c", "seed", "out", "m_pivot"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    cfg = _fill_defaults(RunConfig.from_dict(data))
    if validate:
        cfg.validate()
    return cfg, grid


def _fmt(v):
    return repr(float(v))


def write_run_csv(path, cfg, record):
    """Per-round CSV with the resolved config echoed as header comments."""
    conf = cfg.to_dict()
    conf["q"] = record.q  # resolved default, for provenance
    conf.pop("out", None)  # not part of the experiment; keeps CSV reproducible
    lines = [f"# {k} = {json.dumps(conf[k], sort_keys=True)}" for k in sorted(conf)]
    lines.append("t,loss,delta,Delta,eta,null,cum_regret,bound")
    tr = record.trace
    for i in range(len(tr)):
        lines.append(
            f"{i + 1},{_fmt(tr.round_loss[i])},{_fmt(tr.delta[i])},"
            f"{_fmt(tr.Delta[i])},{_fmt(tr.eta[i])},{int(tr.was_null[i])},"
            f"{_fmt(record.cum_regret[i])},{_fmt(record.bound)}"
        )
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def summary_line(cfg, record):
    # actual run dimensions, not the config echo: replay streams take
    # their shape from the file, ignoring t and n
    t, n = record.trace.predictions.shape
    return (
        f"{record.algo}, {t}, {n}, {_fmt(record.q)}, "
        f"{_fmt(record.regret)}, {_fmt(record.bound)}, {_fmt(record.ratio)}"
    )


def _default_out_name(cfg):
    return f"{cfg.algo}_{cfg.stream}_{cfg.seed}.csv"


def _execute(cfg):
    return evaluate_run(
        cfg.algo,
        cfg.make_stream(),
        q=cfg.q,
        c=cfg.c,
        m_pivot=cfg.m_pivot,
    )


def cmd_run(args):
    cfg, _ = _merge(args)
    record = _execute(cfg)
    out = cfg.out or _default_out_name(cfg)
    write_run_csv(out, cfg, record)
    print(summary_line(cfg, record))
    if cfg.stream == "plateau_exp":
        final = float(record.trace.predictions[-1, 0])
        x_star = float(record.comparators[0][0])
        print(f"final_dist = {_fmt(abs(final - x_star))}")
    print(f"wrote {out}")
    return EXIT_OK


def _config_hash(conf):
    blob = json.dumps(conf, sort_keys=True).encode()
    return hashlib.sha1(blob).hexdigest()[:8]


def _sweep_point(cfg, out_dir):
    record = _execute(cfg)
    conf = cfg.to_dict()
    name = f"{cfg.algo}_{cfg.stream}_{cfg.seed}_{_config_hash(conf)}.csv"
    write_run_csv(os.path.join(out_dir, name), cfg, record)
    return name, cfg, record


def cmd_sweep(args):
    cfg, grid = _merge(args, validate=False)
    if not grid or not isinstance(grid, dict):
        raise ValueError("sweep needs a non-empty 'grid' object in the config file")
    unknown = set(grid) - set(_GRID_KEYS)
    if unknown:
        raise ValueError(f"grid keys not sweepable: {sorted(unknown)}")
    keys = sorted(grid)
    axes = [grid[k] if isinstance(grid[k], list) else [grid[k]] for k in keys]
    if any(len(a) == 0 for a in axes):
        raise ValueError("grid axes must be non-empty")
    out_dir = cfg.out or "sweep_out"
    os.makedirs(out_dir, exist_ok=True)
    points = []
    for combo in itertools.product(*axes):
        pt = _fill_defaults(replace(cfg, out=None, **dict(zip(keys, combo))))
        points.append(pt.validate())
    workers = int(os.environ.get("ISOTUNE_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda p: _sweep_point(p, out_dir), points))
    rows.sort(key=lambda r: r[0])
    index_lines = ["file,algo,stream,seed,T,N,q,c,regret,bound,ratio"]
    for name, pt, rec in rows:
        t, n = rec.trace.predictions.shape
        index_lines.append(
            f"{name},{pt.algo},{pt.stream},{pt.seed},{t},{n},"
            f"{_fmt(rec.q)},{_fmt(pt.c)},{_fmt(rec.regret)},{_fmt(rec.bound)},{_fmt(rec.ratio)}"
        )
    index_path = os.path.join(out_dir, "index.csv")
    with open(index_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(index_lines) + "\n")
    print(f"swept {len(rows)} grid points into {out_dir} (index: {index_path})")
    return EXIT_OK


def cmd_verify(args):
    suite = args.suite
    if suite == "lemmas":
        report = harness.verify_lemmas()
        bad = 0
        for name, violations in sorted(report.items()):
            print(f"{name}: {10_000 - len(violations)} pass, {len(violations)} fail")
            for x in violations[:5]:
                print(f"  violated at x = {x!r}")
                bad += 1
        return EXIT_OK if bad == 0 else EXIT_VIOLATION
    if suite == "oracles":
        checks = harness.verify_oracles()
        fails = [c for c in checks if not c[3]]
        print(f"oracles: {len(checks) - len(fails)} pass, {len(fails)} fail")
        for name, got, want, _ in fails:
            print(f"  {name}: got {got!r}, want {want!r}")
        return EXIT_OK if not fails else EXIT_VIOLATION
    if suite == "invariance":
        rows = harness.verify_invariance()
        fails = [r for r in rows if not r[5]]
        print(f"invariance: {len(rows) - len(fails)} pass, {len(fails)} fail")
        for check, algo, par, dev, tol, _ in fails:
            print(f"  {check} {algo} param={par!r}: deviation {dev!r} > {tol!r}")
        return EXIT_OK if not fails else EXIT_VIOLATION
    if suite == "bounds":
        checked, failures = harness.verify_bounds()
        print(f"bounds: {checked - len(failures)} pass, {len(failures)} fail")
        for algo, kind, n, seed, j, regret, bound in failures[:10]:
            print(
                f"  {algo} on {kind} N={n}: regret {regret!r} > bound {bound!r}; "
                f"repro: isotune run --algo {algo} --stream {kind} --N {n} "
                f"--T 10000 --seed {seed}"
            )
        return EXIT_OK if not failures else EXIT_VIOLATION
    raise ValueError(f"unknown suite {suite!r}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="isotune",
        description="Online-learning experiments with executable regret certificates.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_run_flags(sp):
        sp.add_argument("--algo", choices=ALGOS, help="learner tag")
        sp.add_argument("--stream", choices=STREAM_KINDS, help="loss stream kind")
        sp.add_argument("--N", dest="n", type=int, help="coordinates / experts")
        sp.add_argument("--T", dest="t", type=int, help="number of rounds")
        sp.add_argument("--q", type=float, help="rate numerator (default: ln N on the simplex, else 1)")
        sp.add_argument("--c", type=float, help="null-update factor (default 1)")
        sp.add_argument("--seed", type=int, help="stream seed (default 0)")
        sp.add_argument("--out", help="output CSV path (run) or directory (sweep)")
        sp.add_argument("--config", help="JSON config file; flags override it")
        sp.add_argument(
            "--m-pivot", dest="m_pivot", choices=("barloss", "zero"),
            help="isohedge translation pivot",
        )

    pr = sub.add_parser("run", help="run one experiment and write its CSV")
    add_run_flags(pr)
    ps = sub.add_parser("sweep", help="run a parameter grid from a config file")
    add_run_flags(ps)
    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=("bounds", "lemmas", "invariance", "oracles"))
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse uses 2 for usage errors, matching our config-error code
        return int(e.code or 0)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except ArithmeticError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
