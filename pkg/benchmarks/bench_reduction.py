"""Compare the numba and pure-python reduction backends on a fine grid.

Each backend runs in its own subprocess because the backend is chosen at
import time from CHORDAL_PH_DISABLE_NUMBA.  The default workload is the
m = 512 lower-star filtration of the Moebius band grid (786,944 simplices).

    python benchmarks/bench_reduction.py [-m 512] [--seed 3] [--repeat 1]
"""
import argparse
import json
import os
import subprocess
import sys
import tempfile

WORKER = r"""
import json, sys, time
import numpy as np
from chordal_ph import build_loop, check_nondegeneracy
from chordal_ph._accel import USE_NUMBA
from chordal_ph.oracle import build_grid
from chordal_ph.persistence import compute_persistence

m, seed, repeat, out = int(sys.argv[1]), int(sys.argv[2]), int(sys.argv[3]), sys.argv[4]
rng = np.random.default_rng(seed)
while True:
    loop = build_loop(rng.normal(size=(12, 3)))
    if check_nondegeneracy(loop).ok:
        break
# compile (or warm up) on a small grid first
compute_persistence(build_grid(loop, 16).filtered_complex(), 3)
t0 = time.perf_counter()
fc = build_grid(loop, m).filtered_complex()
t1 = time.perf_counter()
times = []
for _ in range(repeat):
    start = time.perf_counter()
    diag = compute_persistence(fc, 3)
    times.append(time.perf_counter() - start)
np.savez(out, dims=diag.dims, births=diag.births, deaths=diag.deaths)
print(json.dumps({"numba": USE_NUMBA, "simplices": len(fc), "build": t1 - t0,
                  "reduce": min(times), "pairs": len(diag)}))
"""


def run(backend, m, seed, repeat, out):
    env = dict(os.environ)
    env.pop("CHORDAL_PH_DISABLE_NUMBA", None)
    if backend == "python":
        env["CHORDAL_PH_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(m), str(seed), str(repeat), out],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    import numpy as np

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-m", type=int, default=512, help="grid resolution")
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--repeat", type=int, default=1, help="timed reductions per backend")
    args = parser.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        results = {}
        for backend in ("numba", "python"):
            out = os.path.join(tmp, f"{backend}.npz")
            results[backend] = run(backend, args.m, args.seed, args.repeat, out)
            results[backend]["diagram"] = dict(np.load(out))
        a, b = results["numba"]["diagram"], results["python"]["diagram"]
        same = all(np.array_equal(a[k], b[k]) for k in ("dims", "births", "deaths"))

    print(f"grid m = {args.m}, {results['numba']['simplices']} simplices, "
          f"{results['numba']['pairs']} diagram points")
    print(f"{'backend':<8} {'build (s)':>10} {'reduce (s)':>11}")
    for name, r in results.items():
        print(f"{name:<8} {r['build']:>10.3f} {r['reduce']:>11.3f}")
    speedup = results["python"]["reduce"] / results["numba"]["reduce"]
    print(f"speedup {speedup:.1f}x, diagrams identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
