import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efdp.autodiff import ParameterStore, ShapeError, Tape, constant
from efdp.layers import BiLstm, LstmCell, Mlp, lstm_step, run_bilstm
from helpers import check_gradients


def make_cell(input_size=3, hidden_size=4, seed=0, name="cell"):
    store = ParameterStore()
    cell = LstmCell(store, name, input_size, hidden_size, np.random.default_rng(seed))
    return store, cell


def zero_cell(input_size, hidden_size):
    store, cell = make_cell(input_size, hidden_size)
    for _, p in store.items():
        p.value[:] = 0.0
    return store, cell


def test_zero_weights_zero_input_gives_zero_state():
    _, cell = zero_cell(3, 4)
    t = Tape()
    h, c = cell.step(t, *cell.initial_state(), constant(np.zeros((3, 1))))
    assert np.array_equal(h.value, np.zeros((4, 1)))
    assert np.array_equal(c.value, np.zeros((4, 1)))


def test_step_output_dims_fixed_by_hidden_size():
    _, cell = make_cell(5, 3)
    t = Tape()
    h, c = cell.step(t, *cell.initial_state(), constant(np.random.default_rng(1).uniform(-9, 9, (5, 1))))
    assert h.value.shape == (3, 1) and c.value.shape == (3, 1)


def test_step_rejects_wrong_input_size():
    _, cell = make_cell(3, 4)
    t = Tape()
    with pytest.raises(ShapeError, match="cell"):
        cell.step(t, *cell.initial_state(), constant(np.zeros((5, 1))))


def test_gradient_through_three_chained_steps():
    store, cell = make_cell(3, 4, seed=7)
    rng = np.random.default_rng(8)
    xs = [constant(rng.uniform(-1, 1, (3, 1))) for _ in range(3)]

    def build():
        t = Tape()
        h, c = cell.initial_state()
        for x in xs:
            h, c = cell.step(t, h, c, x)
        return t, t.sum_all(h)

    check_gradients(build, store)


def test_saturated_gates_freeze_the_cell_state():
    store, cell = make_cell(2, 3, seed=1)
    cell.b["forget"].value[:] = 20.0   # forget gate ~ 1
    cell.b["input"].value[:] = -20.0   # input gate ~ 0
    c0 = np.random.default_rng(2).uniform(-1, 1, (3, 1))
    t = Tape()
    _, c1 = cell.step(t, constant(np.zeros((3, 1))), constant(c0), constant(np.ones((2, 1))))
    assert np.abs(c1.value - c0).max() < 1e-6


def test_bilstm_single_input_concatenates_one_step_each_way():
    store = ParameterStore()
    rng = np.random.default_rng(3)
    net = BiLstm(store, "bi", 3, 4, 1, rng)
    x = constant(rng.uniform(-1, 1, (3, 1)))
    t = Tape()
    outputs, f_fin, b_fin = net.run(t, [x])
    assert len(outputs) == 1 and outputs[0].value.shape == (8, 1)
    t2 = Tape()
    hf, _ = net.fwd[0].step(t2, *net.fwd[0].initial_state(), x)
    hb, _ = net.bwd[0].step(t2, *net.bwd[0].initial_state(), x)
    assert np.array_equal(outputs[0].value, np.vstack([hf.value, hb.value]))
    assert np.array_equal(f_fin.value, hf.value)
    assert np.array_equal(b_fin.value, hb.value)


def copy_weights(src: LstmCell, dst: LstmCell):
    for gate in src.w_x:
        dst.w_x[gate].value[:] = src.w_x[gate].value
        dst.w_h[gate].value[:] = src.w_h[gate].value
        dst.b[gate].value[:] = src.b[gate].value


def test_reversed_input_swaps_directions_under_shared_weights():
    store = ParameterStore()
    rng = np.random.default_rng(4)
    net = BiLstm(store, "bi", 3, 4, 1, rng)
    copy_weights(net.fwd[0], net.bwd[0])
    xs = [constant(rng.uniform(-1, 1, (3, 1))) for _ in range(5)]
    fwd_out = run_bilstm(Tape(), net.fwd, net.bwd, xs)
    rev_out = run_bilstm(Tape(), net.fwd, net.bwd, xs[::-1])
    for i in range(5):
        a = fwd_out[i].value
        b = rev_out[4 - i].value
        assert np.allclose(a[:4], b[4:]) and np.allclose(a[4:], b[:4])


def test_two_layer_hundred_dim_outputs_are_two_hundred_wide():
    store = ParameterStore()
    net = BiLstm(store, "bi", 7, 100, 2, np.random.default_rng(5))
    xs = [constant(np.random.default_rng(6).uniform(-1, 1, (7, 1))) for _ in range(3)]
    outputs, f_fin, b_fin = net.run(Tape(), xs)
    assert len(outputs) == len(xs)
    assert all(o.value.shape == (200, 1) for o in outputs)
    assert f_fin.value.shape == (100, 1) and b_fin.value.shape == (100, 1)


def test_bilstm_rejects_empty_input():
    store = ParameterStore()
    net = BiLstm(store, "bi", 3, 4, 1, np.random.default_rng(0))
    with pytest.raises(ValueError, match="empty"):
        net.run(Tape(), [])


def test_stacked_bilstm_gradients():
    store = ParameterStore()
    rng = np.random.default_rng(9)
    net = BiLstm(store, "bi", 2, 3, 2, rng)
    xs = [constant(rng.uniform(-1, 1, (2, 1))) for _ in range(3)]

    def build():
        t = Tape()
        outputs, f_fin, b_fin = net.run(t, xs)
        return t, t.sum_all(t.concat(*outputs, f_fin, b_fin))

    check_gradients(build, store)


@settings(max_examples=10)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.integers(1, 4))
def test_bilstm_output_length_and_width(input_size, hidden, layers, n):
    store = ParameterStore()
    rng = np.random.default_rng(0)
    net = BiLstm(store, "bi", input_size, hidden, layers, rng)
    xs = [constant(rng.uniform(-1, 1, (input_size, 1))) for _ in range(n)]
    outputs = run_bilstm(Tape(), net.fwd, net.bwd, xs)
    assert len(outputs) == n
    assert all(o.value.shape == (2 * hidden, 1) for o in outputs)


# ---- MLP ----


def test_mlp_zero_weights_give_zero_output():
    store = ParameterStore()
    mlp = Mlp(store, "m", (4, 3, 2), np.random.default_rng(0))
    for _, p in store.items():
        p.value[:] = 0.0
    out = mlp.apply(Tape(), constant(np.ones((4, 1))))
    assert np.array_equal(out.value, np.zeros((2, 1)))


def test_mlp_output_sizes_for_both_scorers():
    store = ParameterStore()
    rng = np.random.default_rng(1)
    n_relations = 13
    unlabeled = Mlp(store, "u", (10, 5, 2), rng)
    labeled = Mlp(store, "r", (10, 5, 2 * n_relations), rng)
    x = constant(rng.uniform(-1, 1, (10, 1)))
    assert unlabeled.apply(Tape(), x).value.shape == (2, 1)
    assert labeled.apply(Tape(), x).value.shape == (26, 1)


def test_single_linear_layer_equals_matmul_plus_bias():
    store = ParameterStore()
    rng = np.random.default_rng(2)
    mlp = Mlp(store, "m", (3, 3), rng)
    x = constant(rng.uniform(-1, 1, (3, 1)))
    t = Tape()
    manual = t.add(t.matmul(store["m/layer0/W"], x), store["m/layer0/b"])
    assert np.array_equal(mlp.apply(Tape(), x).value, manual.value)


def test_mlp_gradients():
    store = ParameterStore()
    rng = np.random.default_rng(3)
    mlp = Mlp(store, "m", (3, 4, 2), rng)
    x = constant(rng.uniform(-1, 1, (3, 1)))

    def build():
        t = Tape()
        return t, t.sum_all(mlp.apply(t, x))

    check_gradients(build, store)


def test_mlp_rejects_wrong_input_width():
    store = ParameterStore()
    mlp = Mlp(store, "m", (3, 2), np.random.default_rng(0))
    with pytest.raises(ShapeError, match="m"):
        mlp.apply(Tape(), constant(np.zeros((4, 1))))


def test_lstm_step_free_function():
    store, cell = make_cell(2, 2, seed=11)
    t = Tape()
    h, c = lstm_step(t, cell, *cell.initial_state(), constant(np.ones((2, 1))))
    assert h.value.shape == (2, 1)
