"""Compare the numba and numpy pointwise kernels, then a full rotating-frame step per backend.

Usage: python3 benchmarks/bench_kernels.py [points]
"""

import os
import subprocess
import sys
import timeit

import numpy as np

from gprotor import _kernels_numba as nb
from gprotor import _kernels_numpy as npk

STEP_SNIPPET = """
import timeit
from gprotor import kernels
from gprotor.dynamics import RotatingStepper
from gprotor.experiments import offset_gaussian
from gprotor.field import ProblemParams, make_grid
p = ProblemParams((1.0, 2.0), (0, 0, 0.5), a=1.0)
g = make_grid(2, {n}, 8.0)
s = RotatingStepper(g, p, 1e-3)
v = offset_gaussian(g, p, [0.5, 0.0]).values
s.step(v)
t = min(timeit.repeat(lambda: s.step(v), number=20, repeat=5)) / 20
print(kernels.BACKEND, t)
"""


def best(f, number=20):
    return min(timeit.repeat(f, number=number, repeat=5)) / number


def main(n=256):
    rng = np.random.default_rng(0)
    psi = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))).reshape(-1)
    pot = rng.random(n * n)
    lphi = psi * 0.3
    cases = {
        "nonlinear_phase": lambda m: m.nonlinear_phase(psi, pot, 1.0, 1.0, 1e-3),
        "nonlinear_phase sigma=0.7": lambda m: m.nonlinear_phase(psi, pot, 1.0, 0.7, 1e-3),
        "flow_forcing": lambda m: m.flow_forcing(psi, pot, lphi, 1.0, 1.0, 0.5),
        "power_sum p=4": lambda m: m.power_sum(psi, 4.0),
        "weighted_sum": lambda m: m.weighted_sum(psi, pot),
    }
    print(f"pointwise kernels on {n}x{n} (seconds per call)")
    print(f"{'kernel':28s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, call in cases.items():
        a = call(npk)
        b = call(nb)  # also triggers compilation
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name
        t_np, t_nb = best(lambda: call(npk)), best(lambda: call(nb))
        print(f"{name:28s} {t_np:10.2e} {t_nb:10.2e} {t_np / t_nb:8.2f}")
    print(f"\nfull rotating-frame step on {n}x{n}")
    for flag in ("0", "1"):
        env = dict(os.environ, GPROTOR_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"{out[0]:28s} {float(out[1]):10.2e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 256)
