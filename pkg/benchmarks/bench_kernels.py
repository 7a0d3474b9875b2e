"""Time the numba and pure-numpy eigen kernels on op_N(h), with LAPACK as a reference.

    python3 benchmarks/bench_kernels.py --N 100 200 400 --numpy-max 400

Each size is diagonalised once per backend after a warm-up (numba compile);
eigenvalues are cross-checked against LAPACK.
"""

import argparse
import time

import numpy as np

from torusweyl.eigensolve import eigendecompose
from torusweyl.lattice import make_geometry
from torusweyl.symbols import assemble_appendixB


def timed(op, backend, want_vectors):
    t0 = time.perf_counter()
    rec = eigendecompose(op, want_vectors=want_vectors, backend=backend, check=False)
    return time.perf_counter() - t0, rec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[100, 200, 400, 800])
    p.add_argument("--numpy-max", type=int, default=400, help="skip the slow numpy path above this N")
    p.add_argument("--values-only", action="store_true")
    args = p.parse_args(argv)
    want = not args.values_only

    eigendecompose(assemble_appendixB(make_geometry(8)), backend="numba")  # compile / load cache

    print(f"{'N':>6} {'backend':>8} {'seconds':>10} {'max|dlam| vs lapack':>22} {'residual/norm':>14}")
    for N in args.N:
        op = assemble_appendixB(make_geometry(N))
        t_ref, ref = timed(op, "lapack", want)
        for backend in ("numba", "numpy", "lapack"):
            if backend == "numpy" and N > args.numpy_max:
                continue
            t, rec = (t_ref, ref) if backend == "lapack" else timed(op, backend, want)
            gap = float(np.max(np.abs(rec.eigenvalues - ref.eigenvalues)))
            res = "-" if rec.max_residual is None else f"{rec.max_residual / rec.norm_estimate:.1e}"
            print(f"{N:>6} {backend:>8} {t:>10.3f} {gap:>22.2e} {res:>14}", flush=True)


if __name__ == "__main__":
    main()
