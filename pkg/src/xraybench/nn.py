"""Hand-written CNN: three conv/ReLU/maxpool blocks plus a two-layer MLP head.

Everything is plain numpy on row-major arrays.  There is no autograd graph:
the forward pass records the intermediates the fixed architecture needs and
``model_backward`` differentiates it by hand.  Training runs in float32;
gradient checks construct the model in float64.

The convolutions use stride 1 with zero padding 1.  That pair is not a free
choice: it is the only configuration under which 3x3 kernels and 2x2 pooling
reproduce the published per-block output shapes (16x32x32, 32x16x16, 64x8x8),
so it is hard-wired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, ShapeError, StateError

INPUT_SHAPE = (1, 64, 64)
NUM_CLASSES = 2

# Per-block output shapes of a single 1x64x64 input, in forward order.
BLOCK_OUTPUT_SHAPES = (
    (16, 32, 32),
    (32, 16, 16),
    (64, 8, 8),
    (4096,),
    (64,),
    (2,),
)

LAYER_NAMES = ("conv1", "conv2", "conv3", "fc1", "fc2")


@dataclass
class ConvLayer:
    weight: np.ndarray  # (out_channels, in_channels, 3, 3)
    bias: np.ndarray  # (out_channels,)


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out_features, in_features)
    bias: np.ndarray  # (out_features,)


def _kaiming_uniform(rng, shape, fan_in, dtype):
    # ReLU-gain Kaiming: U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases stay zero.
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class CnnModel:
    """The fixed 285,634-parameter network mapping 1x64x64 inputs to 2 logits."""

    def __init__(self, seed: int = 0, dtype=np.float32):
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

        def conv(cin, cout):
            w = _kaiming_uniform(rng, (cout, cin, 3, 3), cin * 9, self.dtype)
            return ConvLayer(w, np.zeros(cout, dtype=self.dtype))

        def dense(nin, nout):
            w = _kaiming_uniform(rng, (nout, nin), nin, self.dtype)
            return DenseLayer(w, np.zeros(nout, dtype=self.dtype))

        self.conv1 = conv(1, 16)
        self.conv2 = conv(16, 32)
        self.conv3 = conv(32, 64)
        self.fc1 = dense(4096, 64)
        self.fc2 = dense(64, 2)

    def layers(self):
        return {name: getattr(self, name) for name in LAYER_NAMES}

    def parameters(self) -> dict:
        """Named parameter tensors, in checkpoint order."""
        out = {}
        for name, layer in self.layers().items():
            out[f"{name}.weight"] = layer.weight
            out[f"{name}.bias"] = layer.bias
        return out

    def load_parameters(self, params: dict) -> None:
        """Overwrite this model's tensors with same-shaped arrays."""
        own = self.parameters()
        if set(params) != set(own):
            raise StateError("parameter name mismatch")
        for name, arr in params.items():
            if arr.shape != own[name].shape:
                raise StateError(
                    f"shape mismatch for {name}: {arr.shape} vs {own[name].shape}"
                )
            own[name][...] = arr

    def copy_parameters(self) -> dict:
        return {name: arr.copy() for name, arr in self.parameters().items()}


def parameter_counts(model: CnnModel) -> dict:
    """Per-layer parameter counts (weights + biases) and the total."""
    counts = {}
    for name, layer in model.layers().items():
        counts[name] = int(layer.weight.size + layer.bias.size)
    counts["total"] = sum(counts[name] for name in LAYER_NAMES)
    return counts


def _as_batch(x, core_ndim):
    x = np.asarray(x)
    if x.ndim == core_ndim:
        return x[None], True
    if x.ndim == core_ndim + 1:
        return x, False
    raise ShapeError(f"expected {core_ndim}- or {core_ndim + 1}-d input, got {x.ndim}-d")


def _im2col3x3(x):
    """(n, c, h, w) -> (n, h*w, c*9) patch matrix for stride 1, padding 1."""
    n, c, h, w = x.shape
    padded = np.zeros((n, c, h + 2, w + 2), dtype=x.dtype)
    padded[:, :, 1:-1, 1:-1] = x
    win = np.lib.stride_tricks.sliding_window_view(padded, (3, 3), axis=(2, 3))
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, h * w, c * 9)
    return np.ascontiguousarray(cols)


def conv2d_forward(x, layer: ConvLayer):
    """3x3 convolution, stride 1, zero padding 1; spatial dims are preserved."""
    x, squeeze = _as_batch(x, 3)
    n, c, h, w = x.shape
    cout, cin, kh, kw = layer.weight.shape
    if (kh, kw) != (3, 3):
        raise ShapeError(f"kernel must be 3x3, got {kh}x{kw}")
    if c != cin:
        raise ShapeError(f"input has {c} channels, layer expects {cin}")
    if h < 3 or w < 3:
        raise ShapeError(f"spatial dims must be at least 3x3, got {h}x{w}")
    cols = _im2col3x3(x)
    out = cols @ layer.weight.reshape(cout, cin * 9).T
    out += layer.bias
    out = out.transpose(0, 2, 1).reshape(n, cout, h, w)
    return out[0] if squeeze else out


def conv2d_backward(x, layer: ConvLayer, dout, need_dx: bool = True):
    """Gradients (dweight, dbias, dx) of the stride-1/padding-1 convolution.

    dx is the correlation of dout with the spatially flipped, channel-swapped
    kernel, which is exact for this stride/padding combination.
    """
    x, _ = _as_batch(x, 3)
    dout, _ = _as_batch(dout, 3)
    n, c, h, w = x.shape
    cout = layer.weight.shape[0]
    cols = _im2col3x3(x)
    dflat = dout.transpose(0, 2, 3, 1).reshape(n, h * w, cout)
    dw = np.tensordot(dflat, cols, axes=([0, 1], [0, 1])).reshape(layer.weight.shape)
    db = dout.sum(axis=(0, 2, 3))
    dx = None
    if need_dx:
        wt = layer.weight[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        flipped = ConvLayer(np.ascontiguousarray(wt), np.zeros(c, dtype=x.dtype))
        dx = conv2d_forward(dout, flipped)
    return dw, db, dx


def relu(x):
    return np.maximum(x, 0)


def maxpool2x2(x):
    """2x2 max pooling; returns (pooled, argmax indices).

    Indices are 0..3 in row-major window order; ties go to the first
    (row-major) position, which makes the backward routing deterministic.
    """
    x, squeeze = _as_batch(x, 3)
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"maxpool2x2 needs even spatial dims, got {h}x{w}")
    win = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    win = np.ascontiguousarray(win).reshape(n, c, h // 2, w // 2, 4)
    idx = win.argmax(axis=-1).astype(np.int8)
    out = np.take_along_axis(win, idx[..., None].astype(np.intp), axis=-1)[..., 0]
    if squeeze:
        return out[0], idx[0]
    return out, idx


def pool_index_rowcol(idx):
    """Unravel a stored 0..3 pooling index into its (row, col) window position."""
    return divmod(int(idx), 2)


def maxpool2x2_backward(dout, idx):
    """Route pooled gradients back to the stored argmax positions only."""
    dout, squeeze = _as_batch(dout, 3)
    idx, _ = _as_batch(idx, 3)
    n, c, oh, ow = dout.shape
    win = np.zeros((n, c, oh, ow, 4), dtype=dout.dtype)
    np.put_along_axis(win, idx[..., None].astype(np.intp), dout[..., None], axis=-1)
    dx = win.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    dx = dx.reshape(n, c, oh * 2, ow * 2)
    return dx[0] if squeeze else dx


def dense_forward(x, layer: DenseLayer):
    """out = W @ x + b (row-batched as x @ W.T + b)."""
    x = np.asarray(x)
    single = x.ndim == 1
    xb = x[None] if single else x
    if xb.ndim != 2 or xb.shape[1] != layer.weight.shape[1]:
        raise ShapeError(
            f"input length {xb.shape[-1]} does not match layer in-dim "
            f"{layer.weight.shape[1]}"
        )
    out = xb @ layer.weight.T + layer.bias
    return out[0] if single else out


@dataclass
class ForwardTrace:
    """Intermediates retained by a forward pass (batch-first arrays).

    ``act*`` are the post-ReLU, pre-pool conv activations; ``pool*`` the
    block outputs whose per-sample shapes match the published architecture
    table; ``pool_idx*`` the max-pool argmax indices needed by backward.
    """

    image: np.ndarray  # (n, 1, 64, 64)
    act1: np.ndarray
    pool_idx1: np.ndarray
    pool1: np.ndarray
    act2: np.ndarray
    pool_idx2: np.ndarray
    pool2: np.ndarray
    act3: np.ndarray
    pool_idx3: np.ndarray
    pool3: np.ndarray
    hidden: np.ndarray  # (n, 64) post-ReLU fc1
    logits: np.ndarray  # (n, 2)

    def block_shapes(self):
        """Per-sample output shape of each block, in forward order."""
        return (
            self.pool1.shape[1:],
            self.pool2.shape[1:],
            self.pool3.shape[1:],
            (int(np.prod(self.pool3.shape[1:])),),
            self.hidden.shape[1:],
            self.logits.shape[1:],
        )


def forward_batch(model: CnnModel, images):
    """Run (n, 1, 64, 64) inputs through the network; returns (logits, trace)."""
    images, _ = _as_batch(images, 3)
    if images.shape[1:] != INPUT_SHAPE:
        raise ShapeError(f"expected {INPUT_SHAPE} images, got {images.shape[1:]}")
    n = images.shape[0]
    act1 = relu(conv2d_forward(images, model.conv1))
    pool1, idx1 = maxpool2x2(act1)
    act2 = relu(conv2d_forward(pool1, model.conv2))
    pool2, idx2 = maxpool2x2(act2)
    act3 = relu(conv2d_forward(pool2, model.conv3))
    pool3, idx3 = maxpool2x2(act3)
    flat = pool3.reshape(n, -1)
    hidden = relu(dense_forward(flat, model.fc1))
    logits = dense_forward(hidden, model.fc2)
    trace = ForwardTrace(
        image=images,
        act1=act1, pool_idx1=idx1, pool1=pool1,
        act2=act2, pool_idx2=idx2, pool2=pool2,
        act3=act3, pool_idx3=idx3, pool3=pool3,
        hidden=hidden, logits=logits,
    )
    return logits, trace


def model_forward(model: CnnModel, image):
    """Single-image forward; returns (length-2 logits, trace with n=1)."""
    image = np.asarray(image)
    if image.shape != INPUT_SHAPE:
        raise ShapeError(f"expected a {INPUT_SHAPE} image, got {image.shape}")
    logits, trace = forward_batch(model, image[None])
    return logits[0], trace


def log_softmax(logits):
    logits = np.asarray(logits)
    m = logits.max(axis=-1, keepdims=True)
    z = logits - m
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_probs(logits):
    return np.exp(log_softmax(logits))


def cross_entropy_loss(logits, labels):
    """Mean negative log softmax-probability of the true class.

    Returns (loss, dlogits) with dlogits = (softmax - onehot) / batch_size.
    The log-sum-exp form keeps extreme logits from overflowing.
    """
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[0] == 0:
        raise InvalidArgument("need a non-empty (batch, classes) logit array")
    if labels.shape != (logits.shape[0],):
        raise InvalidArgument("labels must be a vector with one entry per row")
    if not np.isin(labels, (0, 1)).all():
        raise InvalidArgument("labels must be in {0, 1}")
    b = logits.shape[0]
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(b), labels].mean(dtype=np.float64))
    dlogits = np.exp(logp)
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b
    return loss, dlogits.astype(logits.dtype, copy=False)


def model_backward(model: CnnModel, trace: ForwardTrace, dlogits) -> dict:
    """Backpropagate dlogits through the trace; returns per-parameter grads.

    Pure function of (model, trace, dlogits): calling it twice yields
    identical gradients.  Max-pool routes gradient only to the stored argmax
    and ReLU gates by the sign of the recorded activation.
    """
    dlogits = np.asarray(dlogits)
    if dlogits.shape != trace.logits.shape:
        raise StateError(
            f"dlogits shape {dlogits.shape} does not match trace logits "
            f"{trace.logits.shape}"
        )
    n = trace.image.shape[0]
    if (
        trace.hidden.shape[1] != model.fc2.weight.shape[1]
        or trace.pool3.shape[1:] != (64, 8, 8)
        or trace.pool3[0].size != model.fc1.weight.shape[1]
    ):
        raise StateError("trace does not match this model's architecture")

    grads = {}
    grads["fc2.weight"] = dlogits.T @ trace.hidden
    grads["fc2.bias"] = dlogits.sum(axis=0)
    dhidden = dlogits @ model.fc2.weight
    dz4 = dhidden * (trace.hidden > 0)

    flat = trace.pool3.reshape(n, -1)
    grads["fc1.weight"] = dz4.T @ flat
    grads["fc1.bias"] = dz4.sum(axis=0)
    dflat = dz4 @ model.fc1.weight
    dpool3 = dflat.reshape(trace.pool3.shape)

    dact3 = maxpool2x2_backward(dpool3, trace.pool_idx3)
    dz3 = dact3 * (trace.act3 > 0)
    grads["conv3.weight"], grads["conv3.bias"], dpool2 = conv2d_backward(
        trace.pool2, model.conv3, dz3
    )

    dact2 = maxpool2x2_backward(dpool2, trace.pool_idx2)
    dz2 = dact2 * (trace.act2 > 0)
    grads["conv2.weight"], grads["conv2.bias"], dpool1 = conv2d_backward(
        trace.pool1, model.conv2, dz2
    )

    dact1 = maxpool2x2_backward(dpool1, trace.pool_idx1)
    dz1 = dact1 * (trace.act1 > 0)
    grads["conv1.weight"], grads["conv1.bias"], _ = conv2d_backward(
        trace.image, model.conv1, dz1, need_dx=False
    )
    return grads
