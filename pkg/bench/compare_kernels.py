"""Benchmark the numba kernels against the pure numpy fallbacks.

Runs each kernel on pipeline-realistic inputs (QVGA frame, ~400 centers)
plus one full superpixel iteration pass under each backend, and prints a
speedup table. The numba timings exclude JIT compilation (one warmup call
per kernel).

Usage: python3 bench/compare_kernels.py [--repeats N] [--scenes N]
"""

import argparse
import statistics
import time

import numpy as np

from freespace import dasp, kernels, synth
from freespace.kernels import numba_impl, numpy_impl
from freespace.types import DaspParams


def _scene_inputs(seed=0):
    spec = synth.make_random_scene(rng_seed=seed)
    scene = synth.generate_scene(spec, rng_seed=seed + 1000)
    p = DaspParams(rng_seed=seed)
    d = dasp.repair_depth(scene.depth)
    rho = dasp.compute_density(d, p)
    centers = dasp.poisson_disc_sample(rho, seed, scene.rgb, d)
    rgb = scene.rgb.data.astype(np.float64)
    z = d.data.astype(np.float64)
    cx = np.array([c.x for c in centers])
    cy = np.array([c.y for c in centers])
    ccol = np.array([c.color for c in centers])
    cdep = np.array([c.depth for c in centers])
    crad = np.array([c.radius for c in centers])
    return scene, p, rgb, z, cx, cy, ccol, cdep, crad


def _time(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_assign(impl, inputs, repeats):
    _, p, rgb, z, cx, cy, ccol, cdep, crad = inputs
    h, w = z.shape
    inv_mc2 = 1.0 / p.compactness_color**2
    inv_mz2 = 1.0 / p.compactness_depth**2
    labels_in = np.full((h, w), -1, np.int32)
    labels_out = np.empty((h, w), np.int32)
    dist = np.empty((h, w), np.float64)

    def run():
        impl.assign_pixels(rgb, z, cx, cy, ccol, cdep, crad,
                           inv_mc2, inv_mz2, labels_in, labels_out, dist)
        impl.assign_nearest(rgb, z, cx, cy, ccol, cdep, crad,
                            inv_mc2, inv_mz2, labels_out, dist)

    run()  # warmup / JIT
    return _time(run, repeats)


def bench_poisson(impl, inputs, repeats):
    scene, p, *_ = inputs
    d = dasp.repair_depth(scene.depth)
    rho = dasp.compute_density(d, p)
    r = rho.rho
    h, w = r.shape
    n = 50 * rho.target_count
    flat = r.ravel()
    cdf = np.cumsum(flat)
    rng = np.random.default_rng(0)
    idx = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], "right"),
                     flat.size - 1)
    pys, pxs = np.divmod(idx, w)
    px = pxs + 0.5
    py = pys + 0.5
    rr = 1.0 / np.sqrt(flat[idx] * np.pi)
    cell = float(max(1.0, 0.8 * float(np.median(rr)) / np.sqrt(2.0)))
    gw = max(int(np.ceil(w / cell)), 1)
    gh = max(int(np.ceil(h / cell)), 1)
    out = np.full(n, -1, np.int32)

    def run():
        impl.poisson_accept(px, py, rr, 0.8, rho.target_count, cell, gw, gh, out)

    run()
    return _time(run, repeats)


def bench_components(impl, inputs, repeats):
    scene, p, *_ = inputs
    d = dasp.repair_depth(scene.depth)
    rho = dasp.compute_density(d, p)
    centers = dasp.poisson_disc_sample(rho, 0, scene.rgb, d)
    sp = dasp.iterate_clusters(scene.rgb, d, centers, p)
    labels = np.ascontiguousarray(sp.labels)
    comp = np.empty(labels.shape, np.int32)

    def run():
        impl.connected_components(labels, comp)

    run()
    return _time(run, repeats)


def bench_full_iteration(impl_mod, inputs, repeats):
    """Full iterate_clusters with the kernel bindings swapped in place."""
    scene, p, *_ = inputs
    d = dasp.repair_depth(scene.depth)
    rho = dasp.compute_density(d, p)
    centers = dasp.poisson_disc_sample(rho, 0, scene.rgb, d)
    saved = {name: getattr(kernels, name) for name in
             ("assign_pixels", "assign_nearest", "poisson_accept",
              "connected_components")}
    for name in saved:
        setattr(kernels, name, getattr(impl_mod, name))
    try:
        def run():
            dasp.iterate_clusters(scene.rgb, d, centers, p)

        run()
        return _time(run, repeats)
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed repetitions per kernel (median reported)")
    args = ap.parse_args()

    inputs = _scene_inputs()
    rows = []
    benches = [
        ("assign sweep (QVGA, ~400 centers)", bench_assign),
        ("poisson acceptance (20k darts)", bench_poisson),
        ("connected components (QVGA)", bench_components),
        ("full superpixel pass (10 iters)", bench_full_iteration),
    ]
    for name, fn in benches:
        t_np = fn(numpy_impl, inputs, args.repeats)
        t_nb = fn(numba_impl, inputs, args.repeats)
        rows.append((name, t_np, t_nb, t_np / t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    print("-" * (width + 34))
    for name, t_np, t_nb, speed in rows:
        print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  "
              f"{speed:>7.1f}x")


if __name__ == "__main__":
    main()
