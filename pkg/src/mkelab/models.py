"""Small differentiable maps: affine layers and MLPs with hand-written backprop.

Parameters live in a flat vector. Each layer stores its weight matrix
(row-major, shape ``(out, in)``) followed by its bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class Affine:
    """``x -> W x + b``; initialised to a rectangular identity with zero bias."""

    d_in: int
    d_out: int
    bias: bool = True

    def __post_init__(self):
        if self.d_in < 1 or self.d_out < 1:
            raise ValueError("affine dimensions must be >= 1")

    @property
    def layers(self):
        return (self.d_in, self.d_out)

    @property
    def activation(self):
        return None

    def layer_shapes(self):
        return [(self.d_out, self.d_in, self.bias)]

    def init_params(self, seed=0) -> np.ndarray:
        W = np.eye(self.d_out, self.d_in)
        parts = [W.ravel()]
        if self.bias:
            parts.append(np.zeros(self.d_out))
        return np.concatenate(parts)

    def to_config(self):
        return {"arch": "affine", "d_in": self.d_in, "d_out": self.d_out, "bias": self.bias}


@dataclass(frozen=True)
class MLP:
    """Fully connected network with a linear output layer."""

    layers: tuple
    activation: str = "tanh"

    def __post_init__(self):
        layers = tuple(int(k) for k in self.layers)
        if len(layers) < 2 or min(layers) < 1:
            raise ValueError("mlp needs at least two positive layer sizes")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        object.__setattr__(self, "layers", layers)

    @property
    def d_in(self):
        return self.layers[0]

    @property
    def d_out(self):
        return self.layers[-1]

    def layer_shapes(self):
        return [(o, i, True) for i, o in zip(self.layers[:-1], self.layers[1:])]

    def init_params(self, seed=0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        parts = []
        for out, inp, _ in self.layer_shapes():
            bound = 1.0 / np.sqrt(inp)
            parts.append(rng.uniform(-bound, bound, size=out * inp))
            parts.append(rng.uniform(-bound, bound, size=out))
        return np.concatenate(parts)

    def to_config(self):
        return {"arch": "mlp", "layers": list(self.layers), "activation": self.activation}


def n_params(arch) -> int:
    return sum(o * i + (o if b else 0) for o, i, b in arch.layer_shapes())


def arch_from_config(cfg):
    """Build an architecture from ``{"arch": "affine"|"mlp", ...}``."""
    if isinstance(cfg, (Affine, MLP)):
        return cfg
    kind = cfg.get("arch")
    if kind == "affine":
        return Affine(int(cfg["d_in"]), int(cfg["d_out"]), bool(cfg.get("bias", True)))
    if kind == "mlp":
        return MLP(tuple(cfg["layers"]), cfg.get("activation", "tanh"))
    raise ValueError(f"unknown architecture {kind!r}")


def _act(name, x):
    return np.maximum(x, 0.0) if name == "relu" else np.tanh(x)


def _act_deriv(name, pre, post):
    if name == "relu":
        return (pre > 0).astype(float)  # subgradient 0 at the kink
    return 1.0 - post * post


@dataclass(frozen=True, eq=False)
class ParamMap:
    """A parametric map ``x -> f(params, x)`` with its derivatives."""

    arch: object
    params: np.ndarray

    def __post_init__(self):
        params = np.array(self.params, dtype=float).reshape(-1)
        expected = n_params(self.arch)
        if params.shape[0] != expected:
            raise ValueError(f"{type(self.arch).__name__} needs {expected} params, got {params.shape[0]}")
        params.flags.writeable = False
        object.__setattr__(self, "params", params)

    @classmethod
    def init(cls, arch, seed=0):
        arch = arch_from_config(arch)
        return cls(arch, arch.init_params(seed))

    @property
    def input_dim(self):
        return self.arch.d_in

    @property
    def output_dim(self):
        return self.arch.d_out

    @property
    def n_params(self):
        return self.params.shape[0]

    def with_params(self, params) -> "ParamMap":
        return ParamMap(self.arch, params)

    def _unpack(self):
        out, pos = [], 0
        for o, i, has_b in self.arch.layer_shapes():
            W = self.params[pos:pos + o * i].reshape(o, i)
            pos += o * i
            if has_b:
                b = self.params[pos:pos + o]
                pos += o
            else:
                b = None
            out.append((W, b))
        return out

    def _batch(self, z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = z.reshape(1, -1) if single else z
        if Z.ndim != 2 or Z.shape[1] != self.input_dim:
            raise ValueError(f"map expects inputs of dimension {self.input_dim}, got shape {z.shape}")
        return Z, single

    def _forward_cache(self, Z):
        layers = self._unpack()
        acts, pres = [Z], []
        A = Z
        for k, (W, b) in enumerate(layers):
            P = A @ W.T
            if b is not None:
                P = P + b
            pres.append(P)
            A = P if k == len(layers) - 1 else _act(self.arch.activation, P)
            acts.append(A)
        return layers, acts, pres

    def forward(self, z) -> np.ndarray:
        Z, single = self._batch(z)
        out = self._forward_cache(Z)[1][-1]
        return out[0] if single else out

    __call__ = forward

    def _backward(self, Z, V):
        layers, acts, pres = self._forward_cache(Z)
        grads = []
        delta = V
        for k in range(len(layers) - 1, -1, -1):
            W, b = layers[k]
            gW = delta.T @ acts[k]
            grads.append((gW, delta.sum(axis=0) if b is not None else None))
            delta = delta @ W
            if k > 0:
                delta = delta * _act_deriv(self.arch.activation, pres[k - 1], acts[k])
        flat = []
        for gW, gb in reversed(grads):
            flat.append(gW.ravel())
            if gb is not None:
                flat.append(gb)
        return np.concatenate(flat), delta

    def _cotangent(self, V, n_rows, single):
        V = np.asarray(V, dtype=float)
        V = V.reshape(1, -1) if single else V
        if V.shape != (n_rows, self.output_dim):
            raise ValueError(f"cotangent must have shape ({n_rows}, {self.output_dim}), got {V.shape}")
        return V

    def vjp_params(self, z, v) -> np.ndarray:
        """``sum_i [d_params f(z_i)]^T v_i``; a single pair when ``z`` is 1-D."""
        Z, single = self._batch(z)
        V = self._cotangent(v, Z.shape[0], single)
        return self._backward(Z, V)[0]

    def vjp_input(self, z, v) -> np.ndarray:
        """Per-sample ``[d_z f(z_i)]^T v_i``."""
        Z, single = self._batch(z)
        V = self._cotangent(v, Z.shape[0], single)
        dz = self._backward(Z, V)[1]
        return dz[0] if single else dz

    def grad_input(self, x) -> np.ndarray:
        """Input gradient of a scalar-output map."""
        if self.output_dim != 1:
            raise ValueError("grad_input needs a scalar-output map")
        X, single = self._batch(x)
        return self.vjp_input(x, np.ones(1) if single else np.ones((X.shape[0], 1)))

    def clip(self, bound) -> "ParamMap":
        if not bound > 0:
            raise ValueError("clip bound must be > 0")
        return self.with_params(np.clip(self.params, -bound, bound))


def forward(g: ParamMap, z):
    return g.forward(z)


def vjp_params(g: ParamMap, z, v):
    return g.vjp_params(z, v)


def grad_input(h: ParamMap, x):
    return h.grad_input(x)


def clip_params(g: ParamMap, bound) -> ParamMap:
    return g.clip(bound)
