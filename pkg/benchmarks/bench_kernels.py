"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--batch B]

Each kernel runs on the shapes the backbone sees at 128x128 input, then a
whole backbone train step (forward and backward) runs once per backend by
swapping the functions that ``fgan.kernels`` exposes. Outputs of the two
backends are compared bit for bit along the way.
"""
import argparse
import time

import numpy as np

from fgan import _fallback, kernels
from fgan.diffcore import GradTape, Tensor, softmax_cross_entropy
from fgan.nets import BackboneSpec, forward_m, init_weights

try:
    from fgan import _kernels
except ImportError:  # extension not built
    _kernels = None

NAMES = ("im2col", "col2im", "maxpool2_forward", "maxpool2_backward")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(batch, rng):
    cases = []
    for c, size in ((1, 128), (16, 64), (32, 32), (64, 16)):
        x = rng.normal(size=(batch, c, size, size))
        cols_shape = (c * 9, batch * size * size)
        cols = rng.normal(size=cols_shape)
        cases.append((f"im2col    {c:>2}x{size}x{size}", "im2col", (x, 3, 1, 1, size, size)))
        cases.append((f"col2im    {c:>2}x{size}x{size}", "col2im",
                      (cols, batch, c, size, size, 3, 1, 1, size, size)))
    for c, size in ((16, 128), (32, 64), (64, 32)):
        x = rng.normal(size=(batch, c, size, size))
        _, arg = _fallback.maxpool2_forward(x)
        g = rng.normal(size=(batch, c, size // 2, size // 2))
        cases.append((f"pool fwd  {c:>2}x{size}x{size}", "maxpool2_forward", (x,)))
        cases.append((f"pool bwd  {c:>2}x{size}x{size}", "maxpool2_backward", (g, arg)))
    return cases


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def train_step(weights, x, labels):
    weights.set_trainable(True)
    with GradTape() as tape:
        loss = softmax_cross_entropy(forward_m(Tensor(x), weights), labels)
    tape.backward(loss)
    return loss.item()


def use_backend(mod):
    for name in NAMES:
        setattr(kernels, name, getattr(mod, name))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=16)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not available; build with `pip install -e .`")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'cython ms':>11}{'numpy ms':>11}{'speedup':>9}  identical")
    for label, name, a in kernel_cases(args.batch, rng):
        fast, slow = getattr(_kernels, name), getattr(_fallback, name)
        t_fast = best_of(lambda: fast(*a), args.repeat)
        t_slow = best_of(lambda: slow(*a), args.repeat)
        print(f"{label:<24}{t_fast * 1e3:>11.2f}{t_slow * 1e3:>11.2f}{t_slow / t_fast:>9.2f}"
              f"  {same(fast(*a), slow(*a))}")

    weights = init_weights(BackboneSpec(), 0)
    x = rng.random((args.batch, 1, 128, 128))
    labels = rng.integers(0, 7, args.batch)
    results = {}
    for label, mod in (("cython", _kernels), ("numpy", _fallback)):
        use_backend(mod)
        train_step(weights, x, labels)  # warm-up
        results[label] = (best_of(lambda: train_step(weights, x, labels), args.repeat),
                          train_step(weights, x, labels),
                          {k: v.grad.copy() for k, v in weights.items()})
    use_backend(_kernels if kernels.BACKEND == "cython" else _fallback)
    (tc, lc, gc), (tp, lp, gp) = results["cython"], results["numpy"]
    grads_same = lc == lp and all(np.array_equal(gc[k], gp[k]) for k in gc)
    print(f"\nbackbone train step, batch {args.batch}: cython {tc * 1e3:.1f} ms, numpy {tp * 1e3:.1f} ms,"
          f" speedup {tp / tc:.2f}x, identical loss and gradients: {grads_same}")


if __name__ == "__main__":
    main()
