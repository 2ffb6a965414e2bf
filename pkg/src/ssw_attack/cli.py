"""Command-line front end: ``ssw <subcommand> [flags]``.

Exit status is 0 on success, 1 on usage errors and 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__, codec, datagen, gibbs, ingest, matio, report, stats, vb
from .errors import NumericError, SswError, UsageError
from .model import init_hyperparams


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("SSW_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SSW_SEED must be an integer, got {raw!r}") from None


def parse_dwr_list(text: str) -> list[float]:
    """Parse ``"20:40"``, ``"20:40:2"`` or ``"20,25,30"`` into a list of DWR values."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + k * step for k in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid DWR list {text!r}") from None


def _load_signal(path: str):
    """Return (matrix, layout or None) from a PGM image or a matrix file."""
    p = Path(path)
    if not p.exists():
        raise UsageError(f"--in: file not found: {path}")
    if p.suffix.lower() == ".pgm":
        return ingest.patchify(ingest.read_pgm(p))
    return matio.read_matrix(p), None


def _display(img: np.ndarray) -> np.ndarray:
    lo, hi = float(img.min()), float(img.max())
    return np.zeros_like(img) if hi == lo else (img - lo) * (255.0 / (hi - lo))


def _square_layout(n: int, d: int) -> ingest.PatchLayout | None:
    edge, side = int(round(d ** 0.5)), int(round(n ** 0.5))
    if edge * edge != d or side * side != n:
        return None
    return ingest.PatchLayout(rows=side, cols=side, global_mean=0.0, patch_edge=edge)


def _truth(args):
    w = matio.read_vector(args.truth_w) if args.truth_w else None
    b = matio.read_bits(args.truth_bits) if args.truth_bits else None
    return w, b


def _write_outputs(out: Path, summary, truth_w, truth_b, outputs: list[str]):
    metrics = None
    if truth_w is not None and truth_b is not None:
        metrics = report.compute_metrics(truth_b, truth_w, summary)
    report.export_summary(summary, metrics, out / "summary.json")
    report.export_watermark(summary, out / "watermark.csv", truth_w)
    report.export_bits(summary, out / "bits.csv", truth_b)
    outputs += ["summary.json", "watermark.csv", "bits.csv"]
    return metrics


def cmd_synth(args, out: Path) -> list[str]:
    cfg = datagen.SynthConfig(n=args.n, d=args.d, dwr_db=args.dwr, seed=args.seed)
    data = datagen.generate(cfg)
    matio.write_matrix(data.y, out / "y.mat")
    matio.write_matrix(data.hosts, out / "hosts.mat")
    matio.write_vector(data.w, out / "truth_w.mat")
    matio.write_bits(data.bits, out / "truth_bits.mat")
    outputs = ["y.mat", "hosts.mat", "truth_w.mat", "truth_bits.mat"]
    if args.csv:
        matio.write_matrix_csv(data.y, out / "y.csv")
        outputs.append("y.csv")
    layout = _square_layout(cfg.n, cfg.d)
    if layout is not None:
        ingest.write_pgm(_display(ingest.unpatchify(data.hosts, layout)), out / "host.pgm")
        diff = ingest.unpatchify(data.y - data.hosts, layout)
        ingest.write_pgm(_display(diff), out / "watermark_diff.pgm")
        outputs += ["host.pgm", "watermark_diff.pgm"]
    return outputs


def cmd_embed(args, out: Path) -> list[str]:
    hosts, layout = _load_signal(args.in_path)
    n, d = hosts.shape
    w = codec.scale_to_dwr(hosts, datagen.draw_raw_watermark(d, stats.make_rng(args.seed, "watermark")),
                           args.dwr)
    bits = datagen.generate_bits(datagen.SynthConfig(n=n, d=d, seed=args.seed),
                                 stats.make_rng(args.seed, "bits"))
    y = codec.embed(hosts, w, bits)
    matio.write_matrix(y, out / "y.mat")
    matio.write_vector(w, out / "truth_w.mat")
    matio.write_bits(bits, out / "truth_bits.mat")
    outputs = ["y.mat", "truth_w.mat", "truth_bits.mat"]
    if args.csv:
        matio.write_matrix_csv(y, out / "y.csv")
        outputs.append("y.csv")
    if layout is not None:
        (out / "layout.json").write_text(json.dumps(layout.__dict__) + "\n")
        ingest.write_pgm(ingest.unpatchify(y, layout), out / "watermarked.pgm")
        outputs += ["layout.json", "watermarked.pgm"]
    return outputs


def cmd_attack_mcmc(args, out: Path) -> list[str]:
    y, _ = _load_signal(args.in_path)
    truth_w, truth_b = _truth(args)
    cfg = gibbs.McmcConfig(total_iters=args.iters, burn_in=args.burnin, seed=args.seed,
                           thinning=args.thin, credible_level=args.level)
    trace, summary = gibbs.run_gibbs(y, init_hyperparams(y, args.dwr), cfg)
    report.export_chain(trace, out / "trace.csv", out / "bit_freq.csv")
    outputs = ["trace.csv", "bit_freq.csv"]
    _write_outputs(out, summary, truth_w, truth_b, outputs)
    return outputs


def cmd_attack_vb(args, out: Path) -> list[str]:
    y, _ = _load_signal(args.in_path)
    truth_w, truth_b = _truth(args)
    cfg = vb.VbConfig(max_iters=args.max_iters, elbo_rel_tol=args.tol, seed=args.seed,
                      credible_level=args.level)
    trace, summary, _ = vb.run_vb(y, init_hyperparams(y, args.dwr), cfg)
    report.export_elbo(trace, out / "elbo.csv")
    outputs = ["elbo.csv"]
    _write_outputs(out, summary, truth_w, truth_b, outputs)
    return outputs


def cmd_sweep(args, out: Path) -> list[str]:
    if args.solver == "mcmc":
        options = dict(total_iters=args.iters, burn_in=args.burnin, thinning=args.thin)
    else:
        options = dict(max_iters=args.max_iters, elbo_rel_tol=args.tol)
    if args.in_path:
        hosts, _ = _load_signal(args.in_path)
        n, d = hosts.shape
        raw_w = datagen.draw_raw_watermark(d, stats.make_rng(args.seed, "watermark"))
        bits = datagen.generate_bits(datagen.SynthConfig(n=n, d=d, seed=args.seed),
                                     stats.make_rng(args.seed, "bits"))
        rows = report.dwr_sweep(hosts, raw_w, bits, args.dwr_list, solver=args.solver,
                                seed=args.seed, **options)
    else:
        rows = report.synthetic_sweep(args.n, args.d, args.seed, args.dwr_list,
                                      solver=args.solver, **options)
    report.export_sweep(rows, out / "sweep.csv")
    return ["sweep.csv"]


def cmd_report(args, out: Path) -> list[str]:
    if not Path(args.in_path).exists():
        raise UsageError(f"--in: file not found: {args.in_path}")
    summary, _ = report.load_summary(args.in_path)
    truth_w, truth_b = _truth(args)
    outputs: list[str] = []
    metrics = _write_outputs(out, summary, truth_w, truth_b, outputs)
    if metrics is not None:
        (out / "metrics.json").write_text(json.dumps(metrics.__dict__, indent=1) + "\n")
        outputs.append("metrics.json")
    return outputs


COMMANDS = {
    "synth": cmd_synth,
    "embed": cmd_embed,
    "attack-mcmc": cmd_attack_mcmc,
    "attack-vb": cmd_attack_vb,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ssw", description="Bayesian attacks on repeated spread-spectrum watermarks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_out=True):
        p.add_argument("--seed", type=int, default=None, help="master seed (default: $SSW_SEED or 0)")
        p.add_argument("--threads", type=int, default=None, help="cap on BLAS threads")
        p.add_argument("--out-dir", required=needs_out, type=Path)

    def truth(p):
        p.add_argument("--truth-w", help="true watermark matrix file (enables metrics)")
        p.add_argument("--truth-bits", help="true bitstream matrix file (enables metrics)")

    def mcmc_flags(p):
        p.add_argument("--iters", type=int, default=2000)
        p.add_argument("--burnin", type=int, default=1000)
        p.add_argument("--thin", type=int, default=1)

    def vb_flags(p):
        p.add_argument("--max-iters", type=int, default=100)
        p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("synth", help="draw synthetic hosts, watermark and bits")
    common(p)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--dwr", type=float, default=30.0)
    p.add_argument("--csv", action="store_true", help="also write y.csv")

    p = sub.add_parser("embed", help="watermark a PGM image or a host matrix")
    common(p)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--dwr", type=float, default=30.0)
    p.add_argument("--csv", action="store_true", help="also write y.csv")

    p = sub.add_parser("attack-mcmc", help="Gibbs sampler attack")
    common(p)
    truth(p)
    mcmc_flags(p)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--dwr", type=float, default=30.0, help="DWR assumed by the watermark prior")
    p.add_argument("--level", type=float, default=0.95, help="credible level")

    p = sub.add_parser("attack-vb", help="variational Bayes attack")
    common(p)
    truth(p)
    vb_flags(p)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--dwr", type=float, default=30.0, help="DWR assumed by the watermark prior")
    p.add_argument("--level", type=float, default=0.95, help="credible level")

    p = sub.add_parser("sweep", help="P_e and R_w across DWR levels for one watermark direction")
    common(p)
    mcmc_flags(p)
    vb_flags(p)
    p.add_argument("--solver", choices=("vb", "mcmc"), default="vb")
    p.add_argument("--dwr-list", type=parse_dwr_list, default=parse_dwr_list("20:40"))
    p.add_argument("--in", dest="in_path", help="host PGM or matrix (default: synthetic hosts)")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--d", type=int, default=64)

    p = sub.add_parser("report", help="recompute metrics and exports from a stored summary")
    common(p)
    truth(p)
    p.add_argument("--in", dest="in_path", required=True, help="summary.json")

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out-dir", type=Path, help="write to this directory instead")
    return parser


def _manifest(args, argv, outputs, seconds) -> dict:
    resolved = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    return {
        "tool": "ssw-attack",
        "version": __version__,
        "subcommand": args.command,
        "argv": list(argv),
        "args": resolved,
        "seed": args.seed,
        "outputs": outputs,
        "duration_s": seconds,
    }


def _rerun(args) -> int:
    doc = json.loads(args.manifest.read_text())
    argv = list(doc["argv"])
    if "--seed" not in argv:
        argv += ["--seed", str(doc["seed"])]
    if args.out_dir is not None:
        idx = argv.index("--out-dir")
        argv[idx + 1] = str(args.out_dir)
    return main(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            return _rerun(args)
        if args.seed is None:
            args.seed = _default_seed()
        args.out_dir.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        with threadpool_limits(limits=args.threads):
            outputs = COMMANDS[args.command](args, args.out_dir)
        manifest = _manifest(args, argv, outputs, time.perf_counter() - start)
        (args.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    except UsageError as exc:
        print(f"ssw {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"ssw {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (SswError, OSError) as exc:
        print(f"ssw {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
