"""Dense tensor core with reverse-mode differentiation.

Layer inputs and outputs use the batch x channels x height x width layout.
Every operation takes an optional ``tape``: passing a :class:`Tape` arms the
forward pass for differentiation, passing ``None`` runs plain inference.
Gradients accumulate into the ``grad`` array of each :class:`Tensor`.

Only the layer set needed by the phase-feedback networks is implemented:
conv2d, tconv2d, relu, sigmoid, global average pooling, per-channel scaling,
elementwise add, flatten/reshape, and mean squared error.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided
from scipy.special import expit

from .errors import ConfigError, ShapeError, StateError


class Tensor:
    """A float64 array with a gradient slot of the same shape."""

    __slots__ = ("data", "grad", "name")

    def __init__(self, data, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape})"


class Tape:
    """Execution record of one armed forward pass.

    Each armed operation appends the tensor it produced together with a
    closure that maps the output gradient onto the operation's inputs.
    ``backward`` replays the closures exactly once, in reverse execution
    order, then marks the tape consumed.
    """

    def __init__(self):
        self._entries = []
        self._produced = set()
        self._consumed = False

    def record(self, out, backward_fn):
        if self._consumed:
            raise StateError("tape already consumed by a backward pass")
        self._entries.append((out, backward_fn))
        self._produced.add(id(out))

    def backward(self, loss):
        if self._consumed:
            raise StateError("tape already consumed by a backward pass")
        if not self._entries:
            raise StateError("backward requires an armed forward pass")
        if id(loss) not in self._produced:
            raise StateError("loss tensor was not produced on this tape")
        loss.grad = np.ones_like(loss.data)
        for out, backward_fn in reversed(self._entries):
            backward_fn(out.grad)
        self._entries.clear()
        self._produced.clear()
        self._consumed = True


def backward(loss, tape):
    """Run the reverse pass for ``loss`` over ``tape`` (consumes the tape)."""
    tape.backward(loss)


def _require_4d(x, op):
    if x.data.ndim != 4:
        raise ShapeError(f"{op} expects a 4-D tensor, got shape {x.data.shape}")


def _out_size(size, k, stride, pad, op):
    span = size + 2 * pad - k
    if span < 0 or span % stride != 0:
        raise ConfigError(
            f"{op}: input size {size} with kernel {k}, stride {stride}, "
            f"padding {pad} has no integral output size"
        )
    out = span // stride + 1
    if out <= 0:
        raise ConfigError(f"{op}: non-positive output size {out}")
    return out


def _pad_hw(x, pad):
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def _cols_view(xp, kh, kw, stride):
    # Sliding kernel windows of the padded input as a strided view:
    # (n, c, kh, kw, ho, wo), no copy.
    n, c, hp, wp = xp.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sn, sc, sh, sw = xp.strides
    return as_strided(
        xp,
        (n, c, kh, kw, ho, wo),
        (sn, sc, sh, sw, sh * stride, sw * stride),
        writeable=False,
    )


def _corr_forward(xp, w, stride):
    """Cross-correlate padded input (n,ci,hp,wp) with w (co,ci,kh,kw)."""
    cols = _cols_view(xp, w.shape[2], w.shape[3], stride)
    y = np.tensordot(w, cols, axes=([1, 2, 3], [1, 2, 3]))
    return np.ascontiguousarray(y.transpose(1, 0, 2, 3)), cols


def _corr_weight_grad(cols, gy):
    # cols: (n, ci, kh, kw, ho, wo), gy: (n, co, ho, wo) -> (co, ci, kh, kw)
    return np.tensordot(gy, cols, axes=([0, 2, 3], [0, 4, 5]))


def _corr_input_grad(gy, w, stride, pad, h_in, w_in):
    """Adjoint of `_corr_forward` w.r.t. its input.

    gy: (n, co, ho, wo), w: (co, ci, kh, kw) -> (n, ci, h_in, w_in).
    Each kernel tap scatters onto the strided output grid.
    """
    n, co, ho, wo = gy.shape
    _, ci, kh, kw = w.shape
    hp, wp = h_in + 2 * pad, w_in + 2 * pad
    gx = np.zeros((n, ci, hp, wp))
    for i in range(kh):
        for j in range(kw):
            tap = np.tensordot(gy, w[:, :, i, j], axes=([1], [0]))
            gx[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                tap.transpose(0, 3, 1, 2)
            )
    if pad:
        gx = np.ascontiguousarray(gx[:, :, pad : hp - pad, pad : wp - pad])
    return gx


def conv2d(x, weight, bias, stride=1, padding=0, tape=None):
    """Strided cross-correlation with bias.

    weight: (out_ch, in_ch, kh, kw); bias: (out_ch,).
    """
    _require_4d(x, "conv2d")
    if weight.data.ndim != 4:
        raise ShapeError(f"conv2d weight must be 4-D, got {weight.data.shape}")
    co, ci, kh, kw = weight.data.shape
    n, c, h, w = x.data.shape
    if c != ci:
        raise ShapeError(
            f"conv2d: input shape {x.data.shape} has {c} channels but kernel "
            f"shape {weight.data.shape} expects {ci}"
        )
    _out_size(h, kh, stride, padding, "conv2d")
    _out_size(w, kw, stride, padding, "conv2d")
    xp = _pad_hw(x.data, padding)
    y, cols = _corr_forward(xp, weight.data, stride)
    y += bias.data[None, :, None, None]
    out = Tensor(y)
    if tape is not None:

        def bwd(gy):
            bias.grad += gy.sum(axis=(0, 2, 3))
            weight.grad += _corr_weight_grad(cols, gy)
            x.grad += _corr_input_grad(gy, weight.data, stride, padding, h, w)

        tape.record(out, bwd)
    return out


def tconv2d(x, weight, bias, stride=1, padding=0, tape=None):
    """Transposed convolution: the exact adjoint of conv2d with the same kernel.

    weight: (in_ch, out_ch, kh, kw) so that tconv2d(x; W) equals the conv2d
    input gradient with kernel W applied to x. bias: (out_ch,). Output
    spatial size is stride*(size-1) + k - 2*padding.
    """
    _require_4d(x, "tconv2d")
    if weight.data.ndim != 4:
        raise ShapeError(f"tconv2d weight must be 4-D, got {weight.data.shape}")
    ci, co, kh, kw = weight.data.shape
    n, c, h, w = x.data.shape
    if c != ci:
        raise ShapeError(
            f"tconv2d: input shape {x.data.shape} has {c} channels but kernel "
            f"shape {weight.data.shape} expects {ci}"
        )
    ho = stride * (h - 1) + kh - 2 * padding
    wo = stride * (w - 1) + kw - 2 * padding
    if ho <= 0 or wo <= 0:
        raise ConfigError(f"tconv2d: non-positive output size {ho}x{wo}")
    y = _corr_input_grad(x.data, weight.data, stride, padding, ho, wo)
    y += bias.data[None, :, None, None]
    out = Tensor(y)
    if tape is not None:

        def bwd(gy):
            bias.grad += gy.sum(axis=(0, 2, 3))
            gyp = _pad_hw(gy, padding)
            cols = _cols_view(gyp, kh, kw, stride)
            # d/dW <gy, corr_input_grad(x; W)> = corr weight grad with the
            # roles of input and output gradient swapped.
            weight.grad += np.tensordot(x.data, cols, axes=([0, 2, 3], [0, 4, 5]))
            gx, _ = _corr_forward(gyp, weight.data, stride)
            x.grad += gx

        tape.record(out, bwd)
    return out


def relu(x, tape=None):
    out = Tensor(np.maximum(x.data, 0.0))
    if tape is not None:
        mask = x.data > 0.0

        def bwd(gy):
            x.grad += gy * mask

        tape.record(out, bwd)
    return out


def sigmoid(x, tape=None):
    y = expit(x.data)
    out = Tensor(y)
    if tape is not None:

        def bwd(gy):
            x.grad += gy * y * (1.0 - y)

        tape.record(out, bwd)
    return out


def global_avg_pool(x, tape=None):
    """Reduce each h x w channel plane to its mean, output (n, c, 1, 1)."""
    _require_4d(x, "global_avg_pool")
    n, c, h, w = x.data.shape
    out = Tensor(x.data.mean(axis=(2, 3), keepdims=True))
    if tape is not None:
        inv = 1.0 / (h * w)

        def bwd(gy):
            x.grad += gy * inv

        tape.record(out, bwd)
    return out


def channel_scale(x, scale, tape=None):
    """Multiply every channel plane of x by its per-channel scalar.

    scale must have shape (n, c, 1, 1) matching x's batch and channels.
    """
    _require_4d(x, "channel_scale")
    n, c = x.data.shape[:2]
    if scale.data.shape != (n, c, 1, 1):
        raise ShapeError(
            f"channel_scale: scale shape {scale.data.shape} does not match "
            f"(n, c, 1, 1) = {(n, c, 1, 1)} for input {x.data.shape}"
        )
    out = Tensor(x.data * scale.data)
    if tape is not None:

        def bwd(gy):
            x.grad += gy * scale.data
            scale.grad += (gy * x.data).sum(axis=(2, 3), keepdims=True)

        tape.record(out, bwd)
    return out


def add(x, y, tape=None):
    """Elementwise sum of two equal-shape tensors (residual skips, loss totals)."""
    if x.data.shape != y.data.shape:
        raise ShapeError(f"add: shapes {x.data.shape} and {y.data.shape} differ")
    out = Tensor(x.data + y.data)
    if tape is not None:

        def bwd(gy):
            x.grad += gy
            y.grad += gy

        tape.record(out, bwd)
    return out


def flatten_features(x, tape=None):
    """(n, c, h, w) -> (n, c, h*w), row-major within each channel."""
    _require_4d(x, "flatten_features")
    n, c, h, w = x.data.shape
    out = Tensor(x.data.reshape(n, c, h * w))
    if tape is not None:

        def bwd(gy):
            x.grad += gy.reshape(n, c, h, w)

        tape.record(out, bwd)
    return out


def reshape(x, shape, tape=None):
    if np.prod(x.data.shape, dtype=int) != np.prod(shape, dtype=int):
        raise ShapeError(f"reshape: cannot view {x.data.shape} as {tuple(shape)}")
    out = Tensor(x.data.reshape(shape))
    if tape is not None:
        old = x.data.shape

        def bwd(gy):
            x.grad += gy.reshape(old)

        tape.record(out, bwd)
    return out


def mse(a, b, tape=None):
    """Mean over all elements of squared differences, as a scalar tensor."""
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mse: shapes {a.data.shape} and {b.data.shape} differ")
    diff = a.data - b.data
    out = Tensor(np.mean(diff * diff))
    if tape is not None:
        inv = 2.0 / diff.size

        def bwd(gy):
            a.grad += (inv * gy) * diff
            b.grad -= (inv * gy) * diff

        tape.record(out, bwd)
    return out
