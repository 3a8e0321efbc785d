"""Graph autoencoder: variable-wise shared MLPs around a linear message-passing step.

The forward pass is xhat = g2(A^T g1(X)) applied per sample, where g1/g2 are MLPs
shared across all variables and A mixes the latent variable representations.
Identity g1/g2 reduce the model to the linear xhat = A^T X baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import acyclicity

ACTIVATIONS = ("relu", "identity")


@dataclass
class Layer:
    W: np.ndarray  # (in_dim, out_dim)
    b: np.ndarray  # (out_dim,)
    activation: str = "identity"


# A variable-wise MLP is just its layer list; dims must chain.
MlpParams = list


@dataclass
class GaeParams:
    A: np.ndarray  # (d, d); A[i, j] weights edge i -> j
    encoder: list[Layer]
    decoder: list[Layer]
    l: int
    l_latent: int

    @property
    def d(self) -> int:
        return self.A.shape[0]


@dataclass
class LayerGrads:
    dW: np.ndarray
    db: np.ndarray


@dataclass
class Gradients:
    dA: np.ndarray
    d_encoder: list[LayerGrads]
    d_decoder: list[LayerGrads]


@dataclass
class ForwardCache:
    n: int
    d: int
    enc_acts: list[np.ndarray]  # input of each encoder layer, flattened to (n*d, dim)
    H: np.ndarray  # (n, d, l_latent) latent representation
    H2: np.ndarray  # same values in latent-major layout (n*l_latent, d)
    Hp: np.ndarray  # (n, d, l_latent) after message passing
    dec_acts: list[np.ndarray]
    xhat: np.ndarray  # (n, d, l)


@dataclass
class ArchConfig:
    """Model architecture selection for training runs."""

    method: str = "gae"  # gae | gae-additive | linear
    l_latent: int | None = None  # None: 1 for gae, l for the reduced methods
    hidden: int = 16
    layers: int = 3
    # Self-loops are the degenerate shortcut of the reconstruction objective (a
    # variable copying itself through the autoencoder); masking the diagonal is
    # the default because the penalty alone does not stop that collapse.
    zero_diag: bool = True


def as_tensor3(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"expected an (n, d, l) tensor, got shape {X.shape}")
    return X


def mlp_dims(layers: list[Layer]) -> list[int]:
    """Chained layer dimensions, e.g. [1, 16, 16, 1]."""
    return [layers[0].W.shape[0]] + [layer.W.shape[1] for layer in layers]


def _check_mlp(layers: list[Layer]) -> None:
    if not layers:
        raise ValueError("MLP needs at least one layer")
    for i, layer in enumerate(layers):
        if layer.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {layer.activation!r}")
        if layer.W.shape[1] != layer.b.shape[0]:
            raise ValueError(f"layer {i}: bias shape {layer.b.shape} does not match W {layer.W.shape}")
        if i > 0 and layers[i - 1].W.shape[1] != layer.W.shape[0]:
            raise ValueError(f"layer {i}: input dim {layer.W.shape[0]} does not chain")


def _mlp_forward(layers: list[Layer], V: np.ndarray):
    """Returns (output, acts) where acts[i] is the input fed to layer i."""
    acts = []
    for layer in layers:
        acts.append(V)
        Z = V @ layer.W
        Z += layer.b
        if layer.activation == "relu":
            np.maximum(Z, 0.0, out=Z)
        V = Z
    return V, acts


def _mlp_backward(layers: list[Layer], acts, out, dout, need_input_grad: bool = True):
    """Reverse pass; the ReLU mask is read off the stored activations (out > 0).

    Mutates dout in place on ReLU layers; callers pass freshly built arrays.
    """
    grads: list[LayerGrads] = [None] * len(layers)  # type: ignore[list-item]
    for i in range(len(layers) - 1, -1, -1):
        if layers[i].activation == "relu":
            output = out if i == len(layers) - 1 else acts[i + 1]
            np.multiply(dout, output > 0.0, out=dout)
        grads[i] = LayerGrads(acts[i].T @ dout, dout.sum(axis=0))
        if i > 0 or need_input_grad:
            dout = dout @ layers[i].W.T
    return grads, dout


def _latent_major(flat: np.ndarray, n: int, d: int, l: int) -> np.ndarray:
    """(n*d, l) variable-major block to (n*l, d); free when l == 1."""
    return np.ascontiguousarray(flat.reshape(n, d, l).transpose(0, 2, 1)).reshape(n * l, d)


def _variable_major(flat: np.ndarray, n: int, d: int, l: int) -> np.ndarray:
    """(n*l, d) latent-major block to (n*d, l); free when l == 1."""
    return np.ascontiguousarray(flat.reshape(n, l, d).transpose(0, 2, 1)).reshape(n * d, l)


def encode(params: list[Layer], X) -> np.ndarray:
    """Apply the shared MLP to every (sample, variable) slice of X."""
    _check_mlp(params)
    X = as_tensor3(X)
    n, d, l = X.shape
    if l != params[0].W.shape[0]:
        raise ValueError(f"input dim {l} does not match MLP input dim {params[0].W.shape[0]}")
    out, _ = _mlp_forward(params, X.reshape(n * d, l))
    return out.reshape(n, d, -1)


def message_pass(A, H) -> np.ndarray:
    """Mix latent variable representations: out[:, k] = sum_i A[i, k] * H[:, i]."""
    A = np.asarray(A, dtype=np.float64)
    H = as_tensor3(H)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if H.shape[1] != A.shape[0]:
        raise ValueError(f"variable count mismatch: H has {H.shape[1]}, A has {A.shape[0]}")
    return np.matmul(A.T, H)


def forward(params: GaeParams, X) -> tuple[np.ndarray, ForwardCache]:
    """Full pass xhat = decode(message_pass(A, encode(X))), caching for backward."""
    X = as_tensor3(X)
    n, d, l = X.shape
    if d != params.d:
        raise ValueError(f"dataset has {d} variables, params expect {params.d}")
    if l != params.l:
        raise ValueError(f"dataset has per-variable dim {l}, params expect {params.l}")
    _check_mlp(params.encoder)
    _check_mlp(params.decoder)
    ll = params.l_latent

    Hf, enc_acts = _mlp_forward(params.encoder, X.reshape(n * d, l))
    H = Hf.reshape(n, d, ll)
    # message passing as one big product in latent-major layout
    H2 = _latent_major(Hf, n, d, ll)
    Hp_flat = _variable_major(H2 @ params.A, n, d, ll)
    Yf, dec_acts = _mlp_forward(params.decoder, Hp_flat)
    xhat = Yf.reshape(n, d, l)
    cache = ForwardCache(n, d, enc_acts, H, H2, Hp_flat.reshape(n, d, ll), dec_acts, xhat)
    return xhat, cache


def loss(params: GaeParams, X, lam: float) -> tuple[float, float, float]:
    """(total, recon, l1) where recon = 1/(2n) sum_j ||X_j - xhat_j||_F^2 and l1 = lam * ||A||_1."""
    if lam < 0:
        raise ValueError("l1 weight must be >= 0")
    X = as_tensor3(X)
    xhat, _ = forward(params, X)
    recon, l1 = loss_terms(X, xhat, params.A, lam)
    return recon + l1, recon, l1


def loss_terms(X, xhat, A, lam: float) -> tuple[float, float]:
    n = X.shape[0]
    diff = (X - xhat).ravel()
    recon = 0.5 / n * float(diff @ diff)
    l1 = lam * float(np.abs(A).sum())
    return recon, l1


def backward(params: GaeParams, X, cache: ForwardCache, lam: float, alpha: float, rho: float) -> Gradients:
    """Reverse-mode gradients of recon + lam*||A||_1 + alpha*h(A) + rho/2*h(A)^2.

    The l1 term uses the sign subgradient (0 at 0). The cache must come from
    forward() on the same (params, X).
    """
    X = as_tensor3(X)
    n, d, l = X.shape
    if (n, d) != (cache.n, cache.d) or cache.xhat.shape != X.shape:
        raise ValueError("stale cache: shapes do not match the given X")

    ll = params.l_latent
    dxhat = ((cache.xhat - X) / n).reshape(n * d, l)
    d_decoder, dHp_flat = _mlp_backward(params.decoder, cache.dec_acts, cache.xhat.reshape(n * d, l), dxhat)

    # Hp = A^T H  =>  dA[i, k] = sum_{s,j} H[s, i, j] * dHp[s, k, j],  dH = A dHp
    dHp2 = _latent_major(dHp_flat, n, d, ll)
    dA = cache.H2.T @ dHp2
    dH_flat = _variable_major(dHp2 @ params.A.T, n, d, ll)

    d_encoder, _ = _mlp_backward(params.encoder, cache.enc_acts, cache.H.reshape(n * d, ll),
                                 dH_flat, need_input_grad=False)

    h_val, gh = acyclicity.h_and_grad(params.A)
    dA += lam * np.sign(params.A) + (alpha + rho * h_val) * gh
    return Gradients(dA, d_encoder, d_decoder)


def init_mlp(dims: list[int], rng: np.random.Generator) -> list[Layer]:
    """ReLU hidden layers, linear output; fan-in-scaled symmetric uniform init.

    Weights use the ReLU-gain bound sqrt(6/fan_in) so activation scale survives
    the depth; biases are small but nonzero, keeping the hidden units responsive
    at the all-zero adjacency the optimizer starts from (a zero latent would
    otherwise silence every hidden gradient).
    """
    layers = []
    for i in range(len(dims) - 1):
        w_bound = np.sqrt(6.0 / dims[i])
        b_bound = 1.0 / np.sqrt(dims[i])
        W = rng.uniform(-w_bound, w_bound, size=(dims[i], dims[i + 1]))
        b = rng.uniform(-b_bound, b_bound, size=dims[i + 1])
        act = "relu" if i < len(dims) - 2 else "identity"
        layers.append(Layer(W, b, act))
    return layers


def identity_mlp(dim: int) -> list[Layer]:
    return [Layer(np.eye(dim), np.zeros(dim), "identity")]


def init_params(d: int, l: int, l_latent: int, hidden: int, layers: int, seed: int) -> GaeParams:
    """Zero adjacency plus freshly initialized encoder/decoder MLPs; deterministic per seed."""
    for name, value in (("d", d), ("l", l), ("l_latent", l_latent), ("hidden", hidden), ("layers", layers)):
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")
    rng = np.random.default_rng(seed)
    enc_dims = [l] + [hidden] * (layers - 1) + [l_latent]
    dec_dims = [l_latent] + [hidden] * (layers - 1) + [l]
    encoder = init_mlp(enc_dims, rng)
    decoder = init_mlp(dec_dims, rng)
    return GaeParams(np.zeros((d, d)), encoder, decoder, l, l_latent)


def build_params(arch: ArchConfig, d: int, l: int, seed: int) -> GaeParams:
    """Instantiate parameters for one of the supported model configurations."""
    if arch.method == "linear":
        if arch.l_latent is not None and arch.l_latent != l:
            raise ValueError(f"linear method fixes the latent dim to l={l}")
        return GaeParams(np.zeros((d, d)), identity_mlp(l), identity_mlp(l), l, l)
    if arch.method == "gae-additive":
        if arch.l_latent is not None and arch.l_latent != l:
            raise ValueError(f"gae-additive fixes the latent dim to l={l} (identity decoder)")
        rng = np.random.default_rng(seed)
        enc = init_mlp([l] + [arch.hidden] * (arch.layers - 1) + [l], rng)
        return GaeParams(np.zeros((d, d)), enc, identity_mlp(l), l, l)
    if arch.method == "gae":
        l_latent = arch.l_latent if arch.l_latent is not None else 1
        return init_params(d, l, l_latent, arch.hidden, arch.layers, seed)
    raise ValueError(f"unknown method {arch.method!r}")


def trainable_parts(arch: ArchConfig) -> tuple[bool, bool]:
    """(train_encoder, train_decoder): identity MLPs of the reduced models stay frozen."""
    if arch.method == "linear":
        return False, False
    if arch.method == "gae-additive":
        return True, False
    return True, True


def param_arrays(params: GaeParams) -> list[np.ndarray]:
    """Flat list view [A, enc W/b..., dec W/b...] used by the optimizer."""
    out = [params.A]
    for layer in params.encoder:
        out.extend((layer.W, layer.b))
    for layer in params.decoder:
        out.extend((layer.W, layer.b))
    return out


def grad_arrays(grads: Gradients) -> list[np.ndarray]:
    out = [grads.dA]
    for g in grads.d_encoder:
        out.extend((g.dW, g.db))
    for g in grads.d_decoder:
        out.extend((g.dW, g.db))
    return out


def copy_params(params: GaeParams) -> GaeParams:
    return GaeParams(
        params.A.copy(),
        [Layer(layer.W.copy(), layer.b.copy(), layer.activation) for layer in params.encoder],
        [Layer(layer.W.copy(), layer.b.copy(), layer.activation) for layer in params.decoder],
        params.l,
        params.l_latent,
    )
