"""Independent oracles shared by the test suite.

Everything here is written as plainly as possible (nested loops, two-pass
sums) so it cannot share a bug with the vectorized library paths it checks.
"""

import numpy as np


def naive_conv2d(x, w, b, stride, pad):
    """Sliding-window cross-correlation, element by element."""
    n, ci, h, wd = x.shape
    co, _, kh, kw = w.shape
    xp = np.zeros((n, ci, h + 2 * pad, wd + 2 * pad))
    xp[:, :, pad : pad + h, pad : pad + wd] = x
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    y = np.zeros((n, co, ho, wo))
    for ni in range(n):
        for o in range(co):
            for oy in range(ho):
                for ox in range(wo):
                    acc = 0.0
                    for c in range(ci):
                        for i in range(kh):
                            for j in range(kw):
                                acc += (
                                    xp[ni, c, oy * stride + i, ox * stride + j]
                                    * w[o, c, i, j]
                                )
                    y[ni, o, oy, ox] = acc + b[o]
    return y


def naive_tconv2d(x, w, b, stride, pad):
    """Scatter each input element through the kernel onto the output grid.

    w uses the (in_ch, out_ch, kh, kw) layout.
    """
    n, ci, h, wd = x.shape
    _, co, kh, kw = w.shape
    ho = stride * (h - 1) + kh - 2 * pad
    wo = stride * (wd - 1) + kw - 2 * pad
    yp = np.zeros((n, co, ho + 2 * pad, wo + 2 * pad))
    for ni in range(n):
        for c in range(ci):
            for iy in range(h):
                for ix in range(wd):
                    v = x[ni, c, iy, ix]
                    for o in range(co):
                        for i in range(kh):
                            for j in range(kw):
                                yp[ni, o, iy * stride + i, ix * stride + j] += (
                                    v * w[c, o, i, j]
                                )
    y = yp[:, :, pad : pad + ho, pad : pad + wo]
    return y + b[None, :, None, None]


def two_pass_mse(a, b):
    """Scalar-loop mean squared error."""
    fa = a.ravel()
    fb = b.ravel()
    total = 0.0
    for i in range(fa.size):
        d = fa[i] - fb[i]
        total += d * d
    return total / fa.size


def central_diff(f, arr, idx, h=1e-6):
    """Central finite difference of scalar f() w.r.t. arr[idx] (in place)."""
    old = arr[idx]
    arr[idx] = old + h
    fp = f()
    arr[idx] = old - h
    fm = f()
    arr[idx] = old
    return (fp - fm) / (2.0 * h)


def grad_close(got, fd, rtol=1e-5):
    """Relative agreement between an analytic and a finite-difference value."""
    return abs(got - fd) <= rtol * max(1.0, abs(got), abs(fd))


def check_grads_fd(loss_fn, tensors, rng, samples_per_tensor=12, rtol=1e-5):
    """Compare each tensor's accumulated grad against central differences.

    Checks up to ``samples_per_tensor`` randomly chosen entries per tensor
    (all entries when the tensor is small). ``loss_fn`` must recompute the
    scalar loss from the tensors' current data.
    """
    for t in tensors:
        flat = t.data.reshape(-1)
        gflat = t.grad.reshape(-1)
        if flat.size <= samples_per_tensor:
            picks = np.arange(flat.size)
        else:
            picks = rng.choice(flat.size, size=samples_per_tensor, replace=False)
        for i in picks:
            fd = central_diff(loss_fn, flat, int(i))
            assert grad_close(gflat[i], fd, rtol), (
                f"gradient mismatch for {t.name or 'tensor'}[{i}]: "
                f"analytic={gflat[i]!r} fd={fd!r}"
            )
