"""Recovery metrics, JSON/CSV exports and the DWR sweep protocol."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import datagen, gibbs, stats, vb
from .codec import embed, scale_to_dwr
from .errors import DimensionMismatch, InvalidParameter, ZeroWatermark
from .model import PosteriorSummary, init_hyperparams

SUMMARY_SCHEMA = "ssw-attack/summary"
SUMMARY_VERSION = 1


@dataclass(frozen=True)
class Metrics:
    p_e: float
    r_w: float
    # Diagnostics under the labeling (b, w) -> (1 - b, -w) when that one scores better.
    p_e_flip: float
    r_w_flip: float


def bit_error_rate(truth_b: np.ndarray, b_hat: np.ndarray) -> float:
    return float(np.mean(np.asarray(truth_b) != np.asarray(b_hat)))


def relative_error(truth_w: np.ndarray, w_hat: np.ndarray) -> float:
    norm = float(np.linalg.norm(truth_w))
    if norm == 0.0:
        raise ZeroWatermark("true watermark has zero norm")
    return float(np.linalg.norm(np.asarray(truth_w) - np.asarray(w_hat))) / norm


def compute_metrics(truth_b: np.ndarray, truth_w: np.ndarray, summary: PosteriorSummary) -> Metrics:
    truth_b = np.asarray(truth_b)
    truth_w = np.asarray(truth_w, dtype=float)
    if truth_b.shape != summary.b_hat.shape or truth_w.shape != summary.w_hat.shape:
        raise DimensionMismatch("ground truth and summary have different shapes")
    p_e = bit_error_rate(truth_b, summary.b_hat)
    r_w = relative_error(truth_w, summary.w_hat)
    p_e_alt = bit_error_rate(truth_b, 1 - summary.b_hat)
    if p_e_alt < p_e:
        p_e_flip, r_w_flip = p_e_alt, relative_error(truth_w, -summary.w_hat)
    else:
        p_e_flip, r_w_flip = p_e, r_w
    return Metrics(p_e=p_e, r_w=r_w, p_e_flip=p_e_flip, r_w_flip=r_w_flip)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def summary_to_dict(summary: PosteriorSummary, metrics: Metrics | None = None) -> dict:
    return {
        "schema": SUMMARY_SCHEMA,
        "version": SUMMARY_VERSION,
        "method": summary.method,
        "level": summary.level,
        "w_hat": _jsonable(summary.w_hat),
        "ci_lo": _jsonable(summary.ci_lo),
        "ci_hi": _jsonable(summary.ci_hi),
        "b_hat": _jsonable(summary.b_hat),
        "b_soft": _jsonable(summary.b_soft),
        "pi_hat": float(summary.pi_hat),
        "diagnostics": _jsonable(summary.diagnostics),
        "metrics": None if metrics is None else asdict(metrics),
    }


def export_summary(summary: PosteriorSummary, metrics: Metrics | None, path) -> None:
    Path(path).write_text(json.dumps(summary_to_dict(summary, metrics), indent=1) + "\n")


def load_summary(path) -> tuple[PosteriorSummary, Metrics | None]:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != SUMMARY_SCHEMA:
        raise InvalidParameter(f"{path}: not a summary file (schema {doc.get('schema')!r})")
    if doc.get("version") != SUMMARY_VERSION:
        raise InvalidParameter(f"{path}: unsupported summary version {doc.get('version')}")
    summary = PosteriorSummary(
        method=doc["method"],
        w_hat=np.array(doc["w_hat"], dtype=float),
        ci_lo=np.array(doc["ci_lo"], dtype=float),
        ci_hi=np.array(doc["ci_hi"], dtype=float),
        b_hat=np.array(doc["b_hat"], dtype=np.int8),
        b_soft=np.array(doc["b_soft"], dtype=float),
        pi_hat=doc["pi_hat"],
        level=doc["level"],
        diagnostics=doc["diagnostics"],
    )
    metrics = None if doc["metrics"] is None else Metrics(**doc["metrics"])
    return summary, metrics


def _fmt(value) -> str:
    # repr gives the shortest decimal string that round-trips exactly.
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(int(value))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v != "" else np.nan for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def export_watermark(summary: PosteriorSummary, path, truth_w: np.ndarray | None = None) -> None:
    """Per-coordinate (index, w_true, w_hat, ci_lo, ci_hi) for watermark panels."""
    d = summary.w_hat.shape[0]
    truth = [None] * d if truth_w is None else list(np.asarray(truth_w, dtype=float))
    rows = zip(range(d), truth, summary.w_hat, summary.ci_lo, summary.ci_hi)
    write_csv(path, ["index", "w_true", "w_hat", "ci_lo", "ci_hi"], rows)


def export_bits(summary: PosteriorSummary, path, truth_b: np.ndarray | None = None) -> None:
    n = summary.b_hat.shape[0]
    truth = [None] * n if truth_b is None else list(np.asarray(truth_b, dtype=int))
    write_csv(path, ["i", "b_true", "b_hat", "b_soft"], zip(range(n), truth, summary.b_hat, summary.b_soft))


def export_elbo(trace: vb.ElboTrace, path) -> None:
    write_csv(path, ["iter", "elbo", "delta_rel"],
              zip(trace.iters, trace.elbo, [None if not np.isfinite(x) else x for x in trace.delta_rel]))


def export_chain(trace: gibbs.ChainTrace, path, bits_path) -> None:
    d = trace.w[0].shape[0] if trace.w else 0
    header = ["iter", "pi", "log_joint"] + [f"w_{j}" for j in range(d)]
    write_csv(path, header, ([it, pi, lj, *w] for it, pi, lj, w in
                             zip(trace.iters, trace.pi, trace.log_joint, trace.w)))
    write_csv(bits_path, ["i", "b_freq"], enumerate(trace.b_freq))


@dataclass(frozen=True)
class SweepRow:
    dwr: float
    p_e: float
    r_w: float
    p_e_flip: float
    r_w_flip: float


def export_sweep(rows: list[SweepRow], path) -> None:
    write_csv(path, ["dwr", "p_e", "r_w"], ((r.dwr, r.p_e, r.r_w) for r in rows))


def run_solver(y: np.ndarray, dwr_db: float, solver: str, seed: int = 0, **options):
    """Initialize hyper-parameters from ``y`` and run one solver; returns (trace, summary)."""
    if solver not in ("vb", "mcmc"):
        raise InvalidParameter(f"unknown solver {solver!r}; expected 'vb' or 'mcmc'")
    h = init_hyperparams(y, dwr_db)
    if solver == "vb":
        trace, summary, _ = vb.run_vb(y, h, vb.VbConfig(seed=seed, **options))
    else:
        trace, summary = gibbs.run_gibbs(y, h, gibbs.McmcConfig(seed=seed, **options))
    return trace, summary


def dwr_sweep(hosts: np.ndarray, raw_w: np.ndarray, bits: np.ndarray, dwr_list,
              solver: str = "vb", seed: int = 0, **options) -> list[SweepRow]:
    """Rescale one watermark draw to every DWR level, embed, attack and score.

    ``raw_w`` is the single zero-mean watermark direction shared by all levels.
    """
    rows = []
    for dwr in dwr_list:
        w = scale_to_dwr(hosts, raw_w, dwr)
        y = embed(hosts, w, bits)
        _, summary = run_solver(y, dwr, solver, seed=seed, **options)
        m = compute_metrics(bits, w, summary)
        rows.append(SweepRow(float(dwr), m.p_e, m.r_w, m.p_e_flip, m.r_w_flip))
    return rows


def synthetic_sweep(n: int, d: int, seed: int, dwr_list, solver: str = "vb",
                    p_one: float = 0.5, **options) -> list[SweepRow]:
    cfg = datagen.SynthConfig(n=n, d=d, seed=seed, p_one=p_one)
    hosts = datagen.generate_hosts(cfg, stats.make_rng(seed, "hosts"))
    raw_w = datagen.draw_raw_watermark(d, stats.make_rng(seed, "watermark"))
    bits = datagen.generate_bits(cfg, stats.make_rng(seed, "bits"))
    return dwr_sweep(hosts, raw_w, bits, dwr_list, solver=solver, seed=seed, **options)
