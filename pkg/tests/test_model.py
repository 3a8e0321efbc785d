import numpy as np
import pytest

from gaedag import model
from gaedag.model import (
    ArchConfig,
    GaeParams,
    Layer,
    build_params,
    encode,
    forward,
    identity_mlp,
    init_params,
    loss,
    message_pass,
    mlp_dims,
)

from helpers import fd_check_gradients, random_fd_instance


def test_encode_identity_mlp_is_identity():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(4, 3, 2))
    assert np.array_equal(encode(identity_mlp(2), X), X)


def test_encode_relu_clamps():
    layer = [Layer(np.array([[-1.0]]), np.array([0.0]), "relu")]
    out = encode(layer, np.array([[[2.0]]]))
    assert out.ravel()[0] == 0.0


def test_encode_two_layer_hand_computed():
    # x=0.3:  z1 = [0.8, -1.1] -> relu [0.8, 0] -> 0.8*2 + 0.25 = 1.85
    # x=-1.0: z1 = [-0.5, 1.5] -> relu [0, 1.5] -> 1.5*1 + 0.25 = 1.75
    layers = [
        Layer(np.array([[1.0, -2.0]]), np.array([0.5, -0.5]), "relu"),
        Layer(np.array([[2.0], [1.0]]), np.array([0.25]), "identity"),
    ]
    out = encode(layers, np.array([[[0.3], [-1.0]]]))
    assert np.allclose(out, [[[1.85], [1.75]]], atol=1e-15)


def test_encode_dim_mismatch():
    with pytest.raises(ValueError, match="input dim"):
        encode(identity_mlp(2), np.zeros((1, 2, 3)))


def test_message_pass_zero_adjacency():
    H = np.random.default_rng(1).normal(size=(3, 4, 2))
    assert np.array_equal(message_pass(np.zeros((4, 4)), H), np.zeros_like(H))


def test_message_pass_identity_math_case():
    H = np.random.default_rng(2).normal(size=(3, 4, 2))
    assert np.allclose(message_pass(np.eye(4), H), H)


def test_message_pass_single_edge():
    w = 0.7
    A = np.array([[0.0, w], [0.0, 0.0]])
    H = np.random.default_rng(3).normal(size=(5, 2, 3))
    out = message_pass(A, H)
    assert np.allclose(out[:, 1], w * H[:, 0])
    assert np.array_equal(out[:, 0], np.zeros((5, 3)))


def test_message_pass_shape_mismatch():
    with pytest.raises(ValueError, match="variable count"):
        message_pass(np.eye(3), np.zeros((2, 4, 1)))


def test_forward_identity_mlps_reduce_to_linear():
    rng = np.random.default_rng(4)
    A = np.triu(rng.normal(size=(5, 5)), 1)
    X = rng.normal(size=(7, 5, 1))
    params = GaeParams(A, identity_mlp(1), identity_mlp(1), 1, 1)
    xhat, _ = forward(params, X)
    assert np.allclose(xhat, np.matmul(A.T, X), rtol=0, atol=1e-13)


def test_forward_zero_adjacency_gives_constant_decoder_output():
    rng = np.random.default_rng(5)
    params = init_params(d=4, l=1, l_latent=2, hidden=6, layers=2, seed=9)
    X = rng.normal(size=(6, 4, 1))
    xhat, _ = forward(params, X)
    # every (sample, variable) slice equals the decoder applied to the zero latent
    zero_latent = encode(params.decoder, np.zeros((1, 1, 2)))[0, 0]
    assert np.allclose(xhat, np.broadcast_to(zero_latent, xhat.shape))


def test_forward_hand_computed_small_case():
    # encoder relu(x), single edge 0 -> 1 with weight 0.5, decoder 2*h + 1
    params = GaeParams(
        np.array([[0.0, 0.5], [0.0, 0.0]]),
        [Layer(np.array([[1.0]]), np.array([0.0]), "relu")],
        [Layer(np.array([[2.0]]), np.array([1.0]), "identity")],
        1,
        1,
    )
    X = np.array([[[1.0], [-2.0]]])
    xhat, _ = forward(params, X)
    assert np.allclose(xhat, [[[1.0], [2.0]]], atol=1e-15)


def test_forward_is_deterministic():
    rng = np.random.default_rng(6)
    params = init_params(d=3, l=2, l_latent=2, hidden=5, layers=3, seed=0)
    params.A = rng.normal(size=(3, 3))
    X = rng.normal(size=(8, 3, 2))
    first, _ = forward(params, X)
    second, _ = forward(params, X)
    assert np.array_equal(first, second)


def test_forward_permutation_equivariance():
    rng = np.random.default_rng(7)
    d = 5
    params = init_params(d=d, l=2, l_latent=3, hidden=6, layers=3, seed=1)
    params.A = rng.normal(size=(d, d))
    X = rng.normal(size=(6, d, 2))
    perm = rng.permutation(d)
    P = np.eye(d)[:, perm]
    params_p = model.copy_params(params)
    params_p.A = P.T @ params.A @ P
    base, _ = forward(params, X)
    permuted, _ = forward(params_p, X[:, perm])
    assert np.allclose(permuted, base[:, perm], atol=1e-12)


def test_loss_perfect_reconstruction():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(4, 3, 1))
    params = GaeParams(np.eye(3), identity_mlp(1), identity_mlp(1), 1, 1)
    # A = I reproduces X exactly (identity message passing)
    total, recon, l1 = loss(params, X, 0.0)
    assert recon == 0.0
    assert total == 0.0


def test_loss_zero_adjacency_has_zero_l1():
    params = GaeParams(np.zeros((2, 2)), identity_mlp(1), identity_mlp(1), 1, 1)
    X = np.random.default_rng(9).normal(size=(3, 2, 1))
    _, _, l1 = loss(params, X, 1.0)
    assert l1 == 0.0


def test_loss_hand_computed():
    # X = [1, 2], xhat = [0, 0] -> recon = (1 + 4) / 2 = 2.5
    params = GaeParams(np.zeros((2, 2)), identity_mlp(1), identity_mlp(1), 1, 1)
    X = np.array([[[1.0], [2.0]]])
    total, recon, l1 = loss(params, X, 0.5)
    assert recon == pytest.approx(2.5, abs=1e-15)
    assert l1 == 0.0
    assert total == pytest.approx(2.5, abs=1e-15)


def test_loss_rejects_negative_lambda():
    params = GaeParams(np.zeros((2, 2)), identity_mlp(1), identity_mlp(1), 1, 1)
    with pytest.raises(ValueError, match=">= 0"):
        loss(params, np.zeros((1, 2, 1)), -0.1)


def test_backward_all_zero_case():
    zero_mlp = [Layer(np.zeros((1, 3)), np.zeros(3), "relu"), Layer(np.zeros((3, 1)), np.zeros(1), "identity")]
    params = GaeParams(np.zeros((3, 3)), zero_mlp, list(zero_mlp), 1, 1)
    X = np.zeros((4, 3, 1))
    xhat, cache = forward(params, X)
    grads = model.backward(params, X, cache, 0.1, 0.5, 2.0)
    for g in model.grad_arrays(grads):
        assert np.array_equal(g, np.zeros_like(g))


def test_backward_stale_cache_rejected():
    params = init_params(d=3, l=1, l_latent=1, hidden=4, layers=2, seed=2)
    X = np.zeros((5, 3, 1))
    _, cache = forward(params, X)
    with pytest.raises(ValueError, match="stale cache"):
        model.backward(params, np.zeros((6, 3, 1)), cache, 0.0, 0.0, 0.0)


def test_backward_matches_finite_differences_single_instance():
    # seed picked so no ReLU preactivation sits within the FD step of its kink
    params, X = random_fd_instance(8)
    worst = fd_check_gradients(params, X, lam=0.1, alpha=0.5, rho=2.0)
    assert worst <= 1e-5


def test_backward_linear_case_closed_form():
    # identity MLPs, lam = alpha = rho = 0: dA = (1/n) X^T (X A - X) over the data matrix
    rng = np.random.default_rng(10)
    d, n = 4, 9
    A = rng.normal(size=(d, d)) * 0.5
    X = rng.normal(size=(n, d, 1))
    params = GaeParams(A, identity_mlp(1), identity_mlp(1), 1, 1)
    _, cache = forward(params, X)
    grads = model.backward(params, X, cache, 0.0, 0.0, 0.0)
    Xd = X[:, :, 0]
    expected = Xd.T @ (Xd @ A - Xd) / n
    assert np.allclose(grads.dA, expected, atol=1e-12)


def test_init_params_deterministic_per_seed():
    a = init_params(d=4, l=1, l_latent=1, hidden=16, layers=3, seed=7)
    b = init_params(d=4, l=1, l_latent=1, hidden=16, layers=3, seed=7)
    for x, y in zip(model.param_arrays(a), model.param_arrays(b)):
        assert np.array_equal(x, y)
    c = init_params(d=4, l=1, l_latent=1, hidden=16, layers=3, seed=8)
    assert not np.array_equal(a.encoder[0].W, c.encoder[0].W)


def test_init_params_zero_adjacency_is_acyclic():
    from gaedag.acyclicity import h

    params = init_params(d=6, l=1, l_latent=1, hidden=16, layers=3, seed=0)
    assert h(params.A) == 0.0


def test_init_params_architecture_shapes():
    params = init_params(d=10, l=1, l_latent=1, hidden=16, layers=3, seed=0)
    assert [layer.W.shape for layer in params.encoder] == [(1, 16), (16, 16), (16, 1)]
    assert [layer.W.shape for layer in params.decoder] == [(1, 16), (16, 16), (16, 1)]
    assert mlp_dims(params.encoder) == [1, 16, 16, 1]
    assert params.encoder[0].activation == "relu"
    assert params.encoder[-1].activation == "identity"


def test_init_params_rejects_bad_counts():
    with pytest.raises(ValueError, match="layers"):
        init_params(d=3, l=1, l_latent=1, hidden=16, layers=0, seed=0)


def test_build_params_methods():
    linear = build_params(ArchConfig(method="linear"), 4, 2, 0)
    assert np.array_equal(linear.encoder[0].W, np.eye(2))
    assert linear.l_latent == 2

    additive = build_params(ArchConfig(method="gae-additive"), 4, 2, 0)
    assert np.array_equal(additive.decoder[0].W, np.eye(2))
    assert len(additive.encoder) == 3

    gae = build_params(ArchConfig(method="gae", l_latent=3), 4, 2, 0)
    assert gae.l_latent == 3

    with pytest.raises(ValueError, match="latent"):
        build_params(ArchConfig(method="linear", l_latent=5), 4, 2, 0)
    with pytest.raises(ValueError, match="unknown method"):
        build_params(ArchConfig(method="mystery"), 4, 2, 0)
