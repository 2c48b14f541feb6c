"""Compiled versus NumPy kernels: boundary-integral kernel assembly and direct convolution.

Run with ``python benchmarks/bench_kernels.py``.  Timings are the best of
several repeats, so they are fairly robust to a noisy machine.
"""

import argparse
import timeit

import numpy as np

from hwaves import _pykernels

try:
    from hwaves import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _surface(M, rng):
    x = 2 * np.pi * np.arange(M) / M
    k = np.fft.rfftfreq(M, 1.0 / M)
    c = np.zeros(M // 2 + 1, dtype=complex)
    c[1:9] = 0.1 * (rng.standard_normal(8) + 1j * rng.standard_normal(8)) / np.arange(1, 9) ** 2
    h = np.fft.irfft(c * M, n=M)
    hx = np.fft.irfft(1j * k * c * M, n=M)
    hxx = np.fft.irfft(-(k**2) * c * M, n=M)
    return x, h, hx, hxx


def best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    impls = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels is not None else [])
    if _ckernels is None:
        print("compiled extension not available; showing the NumPy fallback only")

    print(f"{'kernel':<28s}" + "".join(f"{name:>12s}" for name, _ in impls) + f"{'speedup':>10s}")
    for M in (256, 512, 1024):
        _, h, hx, hxx = _surface(M, rng)
        out = (np.empty((M, M)), np.empty((M, M)))
        times = [best(lambda m=m: m.bim_kernel_parts(h, hx, hxx, out, 1.0 / M, -0.5), args.repeat) for _, m in impls]
        ref = _pykernels.bim_kernel_parts(h, hx, hxx)
        for _, m in impls[1:]:
            got = m.bim_kernel_parts(h, hx, hxx)
            # near-diagonal entries cancel O(M) terms, so roundoff grows like M
            assert max(np.abs(got[0] - ref[0]).max(), np.abs(got[1] - ref[1]).max()) < 1e-14 * M
        _row(f"bim_kernel_parts M={M}", times)
    for T, half in ((500, 9), (200, 30), (50, 100)):
        n = 2 * half + 1
        a = rng.standard_normal((T, n)) + 1j * rng.standard_normal((T, n))
        b = rng.standard_normal((T, n)) + 1j * rng.standard_normal((T, n))
        times = [best(lambda m=m: m.conv_direct(a, b, half), args.repeat) for _, m in impls]
        for _, m in impls[1:]:
            assert np.abs(m.conv_direct(a, b, half) - _pykernels.conv_direct(a, b, half)).max() < 1e-10
        _row(f"conv_direct T={T} B={half}", times)


def _row(label, times):
    cols = "".join(f"{t * 1e3:10.3f}ms" for t in times)
    speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
    print(f"{label:<28s}{cols}{speed}")


if __name__ == "__main__":
    main()
