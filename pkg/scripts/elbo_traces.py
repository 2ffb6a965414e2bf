"""ELBO traces of the variational attack on synthetic data and on a grayscale PGM.

    python scripts/elbo_traces.py --pgm photo.pgm --out-dir runs/elbo

Without --pgm the scikit-image camera test picture is used when available.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ssw_attack import codec, datagen, ingest, report, stats, vb
from ssw_attack.model import init_hyperparams


@dataclass
class Config:
    dwr_db: float = 30.0
    seed: int = 0
    pgm: Path | None = None
    out_dir: Path = Path("runs/elbo")


def _image(cfg: Config) -> np.ndarray | None:
    if cfg.pgm is not None:
        return ingest.read_pgm(cfg.pgm)
    try:
        from skimage import data as skdata
    except ImportError:
        return None
    return skdata.camera().astype(float)


def _trace(y, cfg, name):
    trace, _, _ = vb.run_vb(y, init_hyperparams(y, cfg.dwr_db), vb.VbConfig(seed=cfg.seed))
    report.export_elbo(trace, cfg.out_dir / f"elbo_{name}.csv")
    first = next((i + 1 for i, dl in enumerate(trace.delta_rel) if dl < 1e-6), None)
    steps = np.diff(trace.elbo) / np.abs(trace.elbo[1:])
    print(f"{name}: {len(trace.elbo)} sweeps, relative change < 1e-6 at sweep {first}, "
          f"smallest relative step {steps.min() if steps.size else 0.0:.2e}")


def run(cfg: Config) -> None:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    data = datagen.generate(datagen.SynthConfig(dwr_db=cfg.dwr_db, seed=cfg.seed))
    _trace(data.y, cfg, "synthetic")
    img = _image(cfg)
    if img is None:
        print("no image available; pass --pgm")
        return
    x, _ = ingest.patchify(img)
    w = codec.scale_to_dwr(x, datagen.draw_raw_watermark(x.shape[1], stats.make_rng(cfg.seed, "watermark")),
                           cfg.dwr_db)
    bits = datagen.generate_bits(datagen.SynthConfig(n=x.shape[0], d=x.shape[1], seed=cfg.seed),
                                 stats.make_rng(cfg.seed, "bits"))
    _trace(codec.embed(x, w, bits), cfg, "image")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dwr", type=float, default=30.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pgm", type=Path)
    ap.add_argument("--out-dir", type=Path, default=Config.out_dir)
    a = ap.parse_args()
    run(Config(dwr_db=a.dwr, seed=a.seed, pgm=a.pgm, out_dir=a.out_dir))


if __name__ == "__main__":
    main()
