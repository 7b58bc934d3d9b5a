"""Compare the numba and pure-numpy ensemble kernels on an RDJA delay scan.

    python3 benchmarks/bench_kernels.py [--nodes 64] [--repeat 3]
"""
import argparse
import time

import numpy as np

from nvrdja import _kernels
from nvrdja.bath import paper_default_spectrum, quadrature_nodes
from nvrdja.protocols import build_rdja_sequence


def scan(fn, seqs, d, w, rho0):
    return [fn(*s.arrays, d, w, rho0) for s in seqs]


def best_of(fn, repeat, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--nodes", type=int, default=64, help="quadrature nodes per mode")
    p.add_argument("--mc", type=int, default=0, help="use this many Monte Carlo samples instead")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    s = paper_default_spectrum()
    if args.mc:
        from nvrdja.bath import sample_detunings

        d = sample_detunings(s, args.mc, np.random.default_rng(0))
        w = np.full(d.size, 1.0 / d.size)
    else:
        d, w = quadrature_nodes(s, args.nodes)
    rho0 = np.array([[1, 0], [0, 0]], dtype=complex)
    seqs = [build_rdja_sequence(o, t) for o in ("U1", "U2", "U3", "U4") for t in np.arange(0.0, 801.0, 10.0)]
    print(f"{len(seqs)} sequences x {d.size} detunings")

    backends = [("numpy", _kernels.ensemble_average_numpy)]
    if _kernels.HAVE_NUMBA:
        _kernels.ensemble_average_numba(*seqs[0].arrays, d[:1], w[:1], rho0)  # compile
        backends.append(("numba", _kernels.ensemble_average_numba))
    results = {}
    for name, fn in backends:
        elapsed, out = best_of(scan, args.repeat, fn, seqs, d, w, rho0)
        results[name] = (elapsed, out)
        print(f"{name:6s} {elapsed * 1e3:9.1f} ms")
    if len(results) == 2:
        diff = max(np.max(np.abs(a - b)) for a, b in zip(results["numpy"][1], results["numba"][1]))
        print(f"speedup numba/numpy: {results['numpy'][0] / results['numba'][0]:.2f}x  max |diff| = {diff:.1e}")
    print(f"active backend: {_kernels.BACKEND} (set NVRDJA_DISABLE_NUMBA=1 for numpy)")


if __name__ == "__main__":
    main()
