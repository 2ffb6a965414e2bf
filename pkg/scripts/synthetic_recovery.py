"""Both attacks on the synthetic 30 dB setup over several seeds.

Writes per-seed watermark panels (index, w_true, w_hat, ci_lo, ci_hi) and a
metrics table to --out-dir.

    python scripts/synthetic_recovery.py --seeds 0 1 2 3 4 --out-dir runs/synthetic
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

from ssw_attack import datagen, gibbs, report, vb
from ssw_attack.model import init_hyperparams


@dataclass
class Config:
    n: int = 4096
    d: int = 64
    dwr_db: float = 30.0
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    solvers: tuple[str, ...] = ("vb", "mcmc")
    mcmc_iters: int = 2000
    mcmc_burn_in: int = 1000
    out_dir: Path = Path("runs/synthetic")


def run(cfg: Config) -> list[list]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in cfg.seeds:
        data = datagen.generate(datagen.SynthConfig(n=cfg.n, d=cfg.d, dwr_db=cfg.dwr_db, seed=seed))
        h = init_hyperparams(data.y, cfg.dwr_db)
        for solver in cfg.solvers:
            t0 = time.perf_counter()
            if solver == "vb":
                _, summary, _ = vb.run_vb(data.y, h, vb.VbConfig(seed=seed))
            else:
                mc = gibbs.McmcConfig(total_iters=cfg.mcmc_iters, burn_in=cfg.mcmc_burn_in, seed=seed)
                _, summary = gibbs.run_gibbs(data.y, h, mc)
            elapsed = time.perf_counter() - t0
            m = report.compute_metrics(data.bits, data.w, summary)
            report.export_watermark(summary, cfg.out_dir / f"watermark_{solver}_seed{seed}.csv", data.w)
            rows.append([seed, solver, m.p_e, m.r_w, m.p_e_flip, m.r_w_flip, elapsed])
            print(f"seed {seed} {solver:4s} P_e={m.p_e:.4f} R_w={m.r_w:.3f} ({elapsed:.1f}s)")
    report.write_csv(cfg.out_dir / "metrics.csv",
                     ["seed", "solver", "p_e", "r_w", "p_e_flip", "r_w_flip", "seconds"],
                     ([r[0], 0 if r[1] == "vb" else 1, *r[2:]] for r in rows))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--d", type=int, default=Config.d)
    ap.add_argument("--dwr", type=float, default=Config.dwr_db)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--solvers", nargs="+", choices=("vb", "mcmc"), default=["vb", "mcmc"])
    ap.add_argument("--iters", type=int, default=Config.mcmc_iters)
    ap.add_argument("--burnin", type=int, default=Config.mcmc_burn_in)
    ap.add_argument("--out-dir", type=Path, default=Config.out_dir)
    a = ap.parse_args()
    run(Config(n=a.n, d=a.d, dwr_db=a.dwr, seeds=a.seeds, solvers=tuple(a.solvers),
               mcmc_iters=a.iters, mcmc_burn_in=a.burnin, out_dir=a.out_dir))


if __name__ == "__main__":
    main()
