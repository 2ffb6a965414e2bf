"""Bit error of decoders that are handed the true watermark, on the synthetic setup.

The likelihood-ratio test between N(0, S) and N(w, S), with the true host
covariance S and pi = 1/2, is the Bayes-optimal bit decision given w. No blind
attack can beat it, so it bounds the attainable P_e at each DWR.

    python scripts/informed_bound.py --dwr 20 25 30
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ssw_attack import codec, datagen


@dataclass
class Config:
    dwr_list: list[float] = field(default_factory=lambda: [20.0, 25.0, 30.0])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])


def run(cfg: Config) -> None:
    for dwr in cfg.dwr_list:
        for seed in cfg.seeds:
            data = datagen.generate(datagen.SynthConfig(dwr_db=dwr, seed=seed))
            whitened = np.linalg.solve(data.host_cov, data.w)
            snr = float(data.w @ whitened)
            lrt = (data.y @ whitened > 0.5 * snr).astype(np.int8)
            corr = codec.decode(data.y, data.w)
            print(f"DWR {dwr:4.1f} seed {seed}: optimal P_e {np.mean(lrt != data.bits):.4f} "
                  f"(theory {norm.cdf(-0.5 * np.sqrt(snr)):.4f}), "
                  f"correlation decoder {np.mean(corr != data.bits):.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dwr", type=float, nargs="+", default=[20.0, 25.0, 30.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    a = ap.parse_args()
    run(Config(dwr_list=a.dwr, seeds=a.seeds))


if __name__ == "__main__":
    main()
