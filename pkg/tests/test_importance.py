import numpy as np
import pytest

from dldnet.importance import ImportanceError, importance_report, raw_importance, scale_importance
from dldnet.network import NetworkWeights, init_weights

from conftest import balanced


def net(w_in, v, bias_in=None, out_bias=0.0):
    """Build weights from an inputs x hidden matrix (no bias row) and hidden->output weights."""
    w_in = np.asarray(w_in, dtype=float)
    bias_in = np.zeros(w_in.shape[1]) if bias_in is None else np.asarray(bias_in, dtype=float)
    return NetworkWeights(np.vstack([w_in, bias_in]), np.append(v, out_bias), w_in.shape[0])


def garson_loop(w: NetworkWeights):
    """Plain-loop reference for the share computation."""
    n_in, size = w.n_inputs, w.size
    r = [0.0] * n_in
    for j in range(size):
        col = sum(abs(w.input_to_hidden[i, j]) for i in range(n_in))
        if col == 0:
            continue
        for i in range(n_in):
            r[i] += abs(w.input_to_hidden[i, j]) / col * abs(w.hidden_to_output[j])
    total = sum(r)
    return [100 * x / total for x in r]


def test_one_hidden_unit():
    shares = raw_importance(net([[2.0], [1.0]], [1.0]))
    assert shares == pytest.approx([200 / 3, 100 / 3], abs=1e-9)
    scaled, degenerate = scale_importance(shares)
    assert list(scaled) == [100.0, 0.0] and not degenerate


def test_disconnected_input_gets_zero():
    w = net([[0.5, -1.0], [0.0, 0.0], [2.0, 0.3]], [1.0, -2.0])
    shares = raw_importance(w)
    assert shares[1] == 0.0
    rep = importance_report(w)
    assert rep.scaled[1] == 0.0


def test_symmetric():
    shares = raw_importance(net([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0]))
    assert shares == pytest.approx([50.0, 50.0], abs=1e-12)


def test_biases_ignored():
    a = raw_importance(net([[2.0], [1.0]], [1.0], bias_in=[5.0], out_bias=-3.0))
    b = raw_importance(net([[2.0], [1.0]], [1.0]))
    assert np.array_equal(a, b)


def test_dead_hidden_unit_contributes_nothing():
    a = raw_importance(net([[2.0, 0.0], [1.0, 0.0]], [1.0, 7.0]))
    assert a == pytest.approx([200 / 3, 100 / 3])


def test_all_zero_rejected():
    with pytest.raises(ImportanceError, match="importance undefined"):
        raw_importance(net([[0.0], [0.0]], [1.0]))


def test_equal_shares_degenerate():
    scaled, degenerate = scale_importance([20.0] * 5)
    assert degenerate and list(scaled) == [100.0] * 5


def test_matches_loop_reference():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n_in, size = int(rng.integers(1, 6)), int(rng.integers(1, 9))
        w = net(rng.normal(size=(n_in, size)), rng.normal(size=size))
        assert raw_importance(w) == pytest.approx(garson_loop(w), rel=1e-12)


def test_properties_on_random_networks():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n_in, size = int(rng.integers(2, 6)), int(rng.integers(1, 9))
        w_in, v = rng.normal(size=(n_in, size)), rng.normal(size=size)
        base = raw_importance(net(w_in, v))
        assert base.sum() == pytest.approx(100.0, abs=1e-9)
        # sign flips
        signs = rng.choice([-1.0, 1.0], size=w_in.shape)
        assert np.allclose(raw_importance(net(w_in * signs, -v)), base, rtol=0, atol=1e-12)
        # permutation equivariance
        perm = rng.permutation(n_in)
        assert np.allclose(raw_importance(net(w_in[perm], v)), base[perm], rtol=0, atol=1e-12)
        # rescaling one hidden unit's inputs leaves its normalized ratios alone
        scaled_in = w_in.copy()
        scaled_in[:, 0] *= 7.5
        assert np.allclose(raw_importance(net(scaled_in, v)), base, rtol=0, atol=1e-12)


def test_report_from_model():
    from dldnet.network import Hyperparams, train

    m = train(balanced(8), Hyperparams(3, 0.01), seed=2)
    rep = importance_report(m)
    assert rep.features == m.feature_order
    assert max(rep.scaled) == 100.0 and min(rep.scaled) == 0.0
    assert importance_report(m) == rep
    lines = rep.to_csv().splitlines()
    assert lines[0] == "feature,raw_share,scaled"
    assert [float(l.split(",")[2]) for l in lines[1:]] == sorted(rep.scaled, reverse=True)


def test_forced_zero_column_is_minimum():
    w = init_weights(5, 8, 3)
    w_in = np.array(w.input_to_hidden)
    w_in[1, :] = 0.0  # rt_perception row
    rep = importance_report(NetworkWeights(w_in, w.hidden_to_output, 5), ("perception", "rt_perception", "vocabulary", "morphosyntax", "repetition"))
    assert rep.scaled[1] == 0.0
    assert rep.ranked()[-1][0] == "rt_perception"
