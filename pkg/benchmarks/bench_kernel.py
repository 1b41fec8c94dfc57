"""Compare the compiled propagation kernel with the NumPy fallback.

Usage::

    python benchmarks/bench_kernel.py [--fock-dim 20] [--periods 20] [--repeat 3]

Both backends propagate the four computational states of two ions through
the same stretch of bichromatic drive; the script prints the best wall time
of each, the speedup and the largest difference between the final states.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from geogate import backend
from geogate.drive import DriveConfig
from geogate.hilbert import SpaceLayout
from geogate.propagator import DriveHamiltonian, IntegratorSpec, computational_block, evolve


def case(fock_dim: int, periods: int):
    nu = 2 * np.pi * 1.26e6
    omega = nu / 6
    eta = 0.056
    cfg = DriveConfig.gate_regime(nu, omega, eta, 4 * eta * omega**2 / nu, delta_off=2 * np.pi * 20e3)
    layout = SpaceLayout(2, fock_dim)
    return DriveHamiltonian(cfg, layout), computational_block(layout), periods * 2 * np.pi / nu


def run(name: str, ham, psi0, t1, spec, repeat: int):
    backend.set_backend(name)
    out = evolve(ham, psi0, 0.0, t1, spec)
    best = min(timeit.repeat(lambda: evolve(ham, psi0, 0.0, t1, spec), number=1, repeat=repeat))
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fock-dim", type=int, default=20)
    p.add_argument("--periods", type=int, default=20)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    ham, psi0, t1 = case(args.fock_dim, args.periods)
    spec = IntegratorSpec()
    names = [n for n in ("compiled", "python") if n in backend.available()]
    previous = backend.active()
    results = {n: run(n, ham, psi0, t1, spec, args.repeat) for n in names}
    backend.set_backend(previous)

    steps = spec.n_steps(t1, 2 * np.pi / ham.config.nu)
    print(f"two ions, fock_dim={args.fock_dim}, {args.periods} trap periods, {steps} steps")
    for n, (t, _) in results.items():
        print(f"  {n:9s} {t * 1e3:9.2f} ms   {t / steps * 1e6:8.2f} us/step")
    if len(results) == 2:
        (tc, oc), (tp, op) = results["compiled"], results["python"]
        print(f"  speedup   {tp / tc:9.1f}x")
        print(f"  max |difference| {np.max(np.abs(oc - op)):.2e}")


if __name__ == "__main__":
    main()
