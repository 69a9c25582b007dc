"""Regenerate the bundled synthetic IV dataset.

The curve is the elastic model for the default junction at a quasiparticle
temperature of 248 mK, 200 points on [-400, 400] uV, with 0.5 % Gaussian
current noise (seed 2024).
"""

from importlib import resources

import numpy as np

from qcrlab import default_config, elastic_dc_current
from qcrlab.io import write_iv

SEED = 2024
NOISE = 0.005


def main():
    junction = default_config().junction().replace(T_qp=0.248)
    v = np.linspace(-400e-6, 400e-6, 200)
    clean = elastic_dc_current(v, junction)
    rng = np.random.default_rng(SEED)
    noisy = clean * (1.0 + NOISE * rng.standard_normal(v.size))
    target = resources.files("qcrlab.data").joinpath("iv_synthetic.csv")
    meta = {
        "source": "synthetic, elastic model, default junction with T_qp = 248 mK",
        "noise": f"{NOISE} relative gaussian, numpy default_rng seed {SEED}",
    }
    write_iv(v, noisy, str(target), meta)


if __name__ == "__main__":
    main()
