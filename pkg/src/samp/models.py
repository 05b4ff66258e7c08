"""Differentiable scalar-score models with exact input gradients.

Three kinds are supported: ``linear`` (one affine layer), ``mlp`` (dense
layers with ReLU or tanh between them) and ``counting`` (a smoothed pixel
counter). :class:`SumModel` composes models by adding their logits.

Scores are pre-softmax logits. Inputs may be passed flat or in the model's
``input_shape``; gradients come back in whatever shape went in.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .errors import InputError, NumericError

KINDS = ("linear", "mlp", "counting")
ACTIVATIONS = {"relu": ad.relu, "tanh": ad.tanh}


def as_tensor(x, name="x") -> np.ndarray:
    """Return ``x`` as a float64 array, refusing NaN/Inf."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite entries")
    return arr


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


class Model:
    """A differentiable classifier-like function ``R^d -> R^num_classes``.

    Instances are immutable; ``forward`` and ``gradient`` are reentrant.
    """

    def __init__(self, kind, params, input_shape, num_classes, activation="relu"):
        if kind not in KINDS:
            raise InputError(f"unknown model kind {kind!r}")
        if activation not in ACTIVATIONS:
            raise InputError(f"unknown activation {activation!r}")
        self.kind = kind
        self.params = {k: _frozen(v) for k, v in params.items()}
        self.input_shape = tuple(int(n) for n in input_shape)
        self.input_dim = int(np.prod(self.input_shape))
        self.num_classes = int(num_classes)
        self.activation = activation

    def __repr__(self):
        return f"Model(kind={self.kind!r}, input_shape={self.input_shape}, num_classes={self.num_classes})"

    @property
    def n_layers(self) -> int:
        return sum(1 for k in self.params if k.startswith("W"))

    def graph(self, x: ad.Node, params: dict | None = None) -> ad.Node:
        """Build logits for a flat input (``(d,)``) or a batch (``(n, d)``)."""
        p = params if params is not None else self.params
        if self.kind == "counting":
            return _counting_graph(x, p, self.input_shape)
        h = x
        n = self.n_layers
        act = ACTIVATIONS[self.activation]
        for i in range(n):
            h = ad.add(ad.matmul(h, p[f"W{i}"]), p[f"b{i}"])
            if i < n - 1:
                h = act(h)
        return h

    def _flat(self, x):
        x = as_tensor(x)
        if x.size != self.input_dim:
            raise InputError(f"input has {x.size} entries, model expects {self.input_dim}")
        return x.reshape(self.input_dim)

    def _check_class(self, cls):
        if not 0 <= int(cls) < self.num_classes:
            raise InputError(f"class {cls} out of range for {self.num_classes} classes")

    def logits(self, x) -> np.ndarray:
        out = self.graph(ad.Node(self._flat(x))).value
        if not np.all(np.isfinite(out)):
            raise NumericError("non-finite logits")
        return out

    def forward(self, x, cls=0) -> float:
        self._check_class(cls)
        return float(self.logits(x)[int(cls)])

    def gradient(self, x, cls=0) -> np.ndarray:
        self._check_class(cls)
        shape = np.shape(x)
        leaf = ad.Node(self._flat(x))
        score = ad.take(self.graph(leaf), int(cls))
        if not np.isfinite(score.value):
            raise NumericError("non-finite score")
        score.backward()
        grad = leaf.grad if leaf.grad is not None else np.zeros(self.input_dim)
        return grad.reshape(shape)

    def predict(self, inputs) -> np.ndarray:
        batch = np.asarray(inputs, dtype=np.float64).reshape(-1, self.input_dim)
        return self.graph(ad.Node(batch)).value.argmax(axis=1)

    def with_params(self, params) -> "Model":
        return Model(self.kind, params, self.input_shape, self.num_classes, self.activation)


class SumModel:
    """Logits of several models with a shared input layout, added together."""

    kind = "sum"

    def __init__(self, components):
        components = list(components)
        if not components:
            raise InputError("SumModel needs at least one component")
        first = components[0]
        for m in components[1:]:
            if m.input_dim != first.input_dim or m.num_classes != first.num_classes:
                raise InputError("SumModel components disagree on input_dim or num_classes")
        self.components = tuple(components)
        self.input_shape = first.input_shape
        self.input_dim = first.input_dim
        self.num_classes = first.num_classes

    def graph(self, x, params=None):
        out = self.components[0].graph(x)
        for m in self.components[1:]:
            out = ad.add(out, m.graph(x))
        return out

    logits = Model.logits
    forward = Model.forward
    gradient = Model.gradient
    predict = Model.predict
    _flat = Model._flat
    _check_class = Model._check_class


def _counting_graph(x, p, input_shape):
    target = p["target"]
    nch = target.size
    lead = x.shape[:-1]
    npix = int(np.prod(input_shape)) // nch
    xr = ad.reshape(x, lead + (npix, nch))
    r = ad.mul(ad.sub(xr, target), 1.0 / float(p["tolerance"][0]))
    bumps = ad.exp(ad.mul(-1.0, ad.sum_(ad.square(r), axis=-1)))
    total = ad.sum_(bumps, axis=-1)
    return ad.reshape(total, lead + (1,))


def forward(model, x, cls=0) -> float:
    """Pre-softmax score of class ``cls`` at ``x``."""
    return model.forward(x, cls)


def gradient(model, x, cls=0) -> np.ndarray:
    """Exact reverse-mode gradient of ``forward`` with respect to ``x``."""
    return model.gradient(x, cls)


def finite_diff_gradient(model, x, cls=0, h=1e-5) -> np.ndarray:
    """Central-difference gradient; ``h`` may be a scalar or per-coordinate array."""
    x = as_tensor(x)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), x.shape)
    if np.any(h <= 0):
        raise InputError("finite-difference step must be positive")
    flat = x.reshape(-1)
    hf = h.reshape(-1)
    out = np.empty(flat.size)
    for i in range(flat.size):
        xp = flat.copy()
        xm = flat.copy()
        xp[i] += hf[i]
        xm[i] -= hf[i]
        fp = model.forward(xp.reshape(x.shape), cls)
        fm = model.forward(xm.reshape(x.shape), cls)
        out[i] = (fp - fm) / (xp[i] - xm[i])
    return out.reshape(x.shape)


def build_linear_model(weights, bias=None, input_shape=None) -> Model:
    """Affine model; ``weights`` is ``(d,)`` for one class or ``(d, C)``."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim == 1:
        w = w[:, None]
    b = np.zeros(w.shape[1]) if bias is None else np.atleast_1d(np.asarray(bias, dtype=np.float64))
    shape = input_shape if input_shape is not None else (w.shape[0],)
    return Model("linear", {"W0": w, "b0": b}, shape, w.shape[1])


def build_mlp(layer_sizes, seed=0, activation="relu", input_shape=None, scale=1.0) -> Model:
    """Dense network with He-style random initialization.

    ``layer_sizes`` lists input, hidden and output widths, e.g. ``(64, 16, 2)``.
    """
    if len(layer_sizes) < 2:
        raise InputError("need at least input and output widths")
    rng = np.random.default_rng(seed)
    params = {}
    for i, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        params[f"W{i}"] = scale * rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out))
        params[f"b{i}"] = scale * rng.normal(0.0, 0.1, size=n_out)
    shape = input_shape if input_shape is not None else (layer_sizes[0],)
    return Model("mlp", params, shape, layer_sizes[-1], activation)


def build_counting_model(input_layout, target_value=1.0, tolerance=0.05) -> Model:
    """Smoothed counter of pixels whose value sits at ``target_value``.

    Each pixel contributes ``exp(-||x_p - target||^2 / tolerance^2)``, so the
    score is the pixel count when every matching pixel is exactly on target.
    ``input_layout`` is ``(H, W)`` for scalar pixels or ``(H, W, C)`` with a
    length-``C`` ``target_value``.
    """
    if tolerance <= 0:
        raise InputError("tolerance must be positive")
    layout = tuple(int(n) for n in np.atleast_1d(input_layout))
    target = np.atleast_1d(np.asarray(target_value, dtype=np.float64))
    nch = target.size
    if nch > 1 and layout[-1] != nch:
        raise InputError("last layout axis must match the number of target channels")
    params = {"target": target, "tolerance": np.array([float(tolerance)])}
    return Model("counting", params, layout, 1)


# ---------------------------------------------------------------------------
# persistence: JSON manifest + little-endian float64 blobs next to it


def save_model(model, path) -> list[Path]:
    """Write ``path`` (JSON manifest) and one ``.bin`` blob per parameter.

    Returns every file written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    manifest = _manifest(model, path.parent, path.stem, written)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.insert(0, path)
    return written


def _manifest(model, folder, stem, written):
    if isinstance(model, SumModel):
        return {
            "kind": "sum",
            "components": [
                _manifest(m, folder, f"{stem}.c{i}", written) for i, m in enumerate(model.components)
            ],
        }
    entries = []
    for name, arr in model.params.items():
        fname = f"{stem}.{name}.bin"
        (folder / fname).write_bytes(arr.astype("<f8").tobytes())
        written.append(folder / fname)
        entries.append({"name": name, "shape": list(arr.shape), "file": fname})
    return {
        "kind": model.kind,
        "input_shape": list(model.input_shape),
        "input_dim": model.input_dim,
        "num_classes": model.num_classes,
        "activation": model.activation,
        "params": entries,
    }


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"model manifest not found: {path}")
    return _from_manifest(json.loads(path.read_text()), path.parent)


def _from_manifest(m, folder):
    if m["kind"] == "sum":
        return SumModel(_from_manifest(c, folder) for c in m["components"])
    params = {}
    for e in m["params"]:
        blob = (folder / e["file"]).read_bytes()
        arr = np.frombuffer(blob, dtype="<f8").astype(np.float64)
        if arr.size != int(np.prod(e["shape"])):
            raise InputError(f"blob {e['file']} has {arr.size} values, expected shape {e['shape']}")
        params[e["name"]] = arr.reshape(e["shape"])
    return Model(m["kind"], params, m["input_shape"], m["num_classes"], m.get("activation", "relu"))
