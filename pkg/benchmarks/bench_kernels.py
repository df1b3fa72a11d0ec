"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times the full-search motion kernel, the xoshiro256** draws and one
end-to-end encode, and checks that both backends return the same values.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hiervc import kernels
from hiervc.synth import splitmix64

PAD = 24


def _state(seed: int):
    sm = splitmix64(seed)
    return [next(sm) for _ in range(4)]


def _search_case(seed: int = 7):
    rng = np.random.default_rng(seed)
    plane = rng.integers(0, 256, (64, 64), dtype=np.uint8)
    padded = np.pad(plane, PAD, mode="edge")
    cur = np.ascontiguousarray(np.roll(plane, (2, -3), axis=(0, 1))[16:24, 24:32])
    return cur, padded


def bench(backend, repeat: int) -> dict:
    cur, padded = _search_case()
    out = {}
    t = timeit.repeat(lambda: backend.full_search(cur, padded, 24, 16, PAD, 16), number=20, repeat=repeat)
    out["full_search r=16 (ms/call)"] = min(t) / 20 * 1e3
    t = timeit.repeat(lambda: backend.xoshiro_uint64(_state(1), 100_000), number=1, repeat=repeat)
    out["xoshiro_uint64 1e5 (ms)"] = min(t) * 1e3
    t = timeit.repeat(lambda: backend.xoshiro_gaussian(_state(1), 100_000), number=1, repeat=repeat)
    out["xoshiro_gaussian 1e5 (ms)"] = min(t) * 1e3
    return out


def agree() -> bool:
    py, cy = kernels.python_backend, kernels.compiled_backend
    cur, padded = _search_case()
    same = py.full_search(cur, padded, 24, 16, PAD, 16) == cy.full_search(cur, padded, 24, 16, PAD, 16)
    a, _ = py.xoshiro_uint64(_state(3), 1000)
    b, _ = cy.xoshiro_uint64(_state(3), 1000)
    g, _ = py.xoshiro_gaussian(_state(3), 1000)
    h, _ = cy.xoshiro_gaussian(_state(3), 1000)
    return bool(same and np.array_equal(a, b) and np.array_equal(g, h))


def encode_seconds(pure: bool) -> float:
    code = (
        "import time; from hiervc import CodecConfig, encode_sequence, StructureConfig;"
        "from hiervc.harness import synthetic_corpus;"
        "s = synthetic_corpus(1, n_frames=17)[0]; t = time.perf_counter();"
        "encode_sequence(s, CodecConfig(structure=StructureConfig(17)));"
        "print(time.perf_counter() - t)"
    )
    env = dict(os.environ)
    env.pop("HIERVC_PURE_PYTHON", None)
    if pure:
        env["HIERVC_PURE_PYTHON"] = "1"
    return float(subprocess.check_output([sys.executable, "-c", code], env=env, text=True))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled backend not built; reinstall with Cython available", file=sys.stderr)
        return 1
    py = bench(kernels.python_backend, args.repeat)
    cy = bench(kernels.compiled_backend, args.repeat)
    print(f"{'kernel':32s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for k in py:
        print(f"{k:32s} {py[k]:10.3f} {cy[k]:10.3f} {py[k] / cy[k]:7.1f}x")
    ep, ec = encode_seconds(True), encode_seconds(False)
    print(f"{'encode 17x64x64 (s)':32s} {ep:10.3f} {ec:10.3f} {ep / ec:7.1f}x")
    print(f"backends agree: {agree()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
