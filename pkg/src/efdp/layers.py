"""LSTM cells, stacked bidirectional runners, and MLPs on the autodiff core.

Parameters are registered under ``layer_name/gate/param`` names so a model
file maps cleanly back onto the architecture that produced it.
"""

import numpy as np

from .autodiff import ShapeError, Tensor

GATES = ("input", "forget", "output", "cand")


def glorot(rng, rows: int, cols: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def embedding_init(rng, rows: int, cols: int) -> np.ndarray:
    return rng.uniform(-0.05, 0.05, size=(rows, cols))


class LstmCell:
    """Single LSTM cell: logistic input/forget/output gates, tanh candidate."""

    def __init__(self, store, name: str, input_size: int, hidden_size: int, rng):
        self.name = name
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.w_x = {}
        self.w_h = {}
        self.b = {}
        for gate in GATES:
            self.w_x[gate] = store.add(f"{name}/{gate}/W_x", glorot(rng, hidden_size, input_size))
            self.w_h[gate] = store.add(f"{name}/{gate}/W_h", glorot(rng, hidden_size, hidden_size))
            self.b[gate] = store.add(f"{name}/{gate}/b", np.zeros((hidden_size, 1)))

    def initial_state(self):
        zeros = np.zeros((self.hidden_size, 1))
        return Tensor(zeros.copy()), Tensor(zeros.copy())

    def step(self, tape, h_prev: Tensor, c_prev: Tensor, x: Tensor):
        if x.value.shape != (self.input_size, 1):
            raise ShapeError(
                f"{self.name}: input shape {x.value.shape}, expected ({self.input_size}, 1)"
            )

        def gate(name):
            pre = tape.add(
                tape.add(tape.matmul(self.w_x[name], x), tape.matmul(self.w_h[name], h_prev)),
                self.b[name],
            )
            return tape.tanh(pre) if name == "cand" else tape.logistic(pre)

        i = gate("input")
        f = gate("forget")
        o = gate("output")
        g = gate("cand")
        c = tape.add(tape.pointwise_mul(f, c_prev), tape.pointwise_mul(i, g))
        h = tape.pointwise_mul(o, tape.tanh(c))
        return h, c


def lstm_step(tape, cell: LstmCell, h_prev, c_prev, x):
    return cell.step(tape, h_prev, c_prev, x)


def run_lstm(tape, cell: LstmCell, inputs):
    """Run one cell over a sequence; returns the hidden state after each step."""
    h, c = cell.initial_state()
    hs = []
    for x in inputs:
        h, c = cell.step(tape, h, c, x)
        hs.append(h)
    return hs


def run_bilstm(tape, fwd_cells, bwd_cells, inputs):
    """Stacked bidirectional run.

    Layer k consumes layer k-1 outputs; output[i] is the concatenation of the
    forward state after i+1 steps with the backward state after n-i steps.
    """
    outputs, _, _ = _run_bilstm_layers(tape, fwd_cells, bwd_cells, inputs)
    return outputs


def _run_bilstm_layers(tape, fwd_cells, bwd_cells, inputs):
    if not inputs:
        raise ValueError("bilstm over an empty sequence")
    if len(fwd_cells) != len(bwd_cells):
        raise ValueError("forward/backward stacks differ in depth")
    seq = list(inputs)
    f_hs = b_hs = None
    for fwd, bwd in zip(fwd_cells, bwd_cells):
        f_hs = run_lstm(tape, fwd, seq)
        b_hs = run_lstm(tape, bwd, seq[::-1])[::-1]
        seq = [tape.concat(f, b) for f, b in zip(f_hs, b_hs)]
    # final backward state is the one aligned with the first position
    return seq, f_hs[-1], b_hs[0]


class BiLstm:
    """Parameter bundle for a stacked BiLSTM; layer k>0 takes 2*hidden inputs."""

    def __init__(self, store, name: str, input_size: int, hidden_size: int, layers: int, rng):
        self.name = name
        self.hidden_size = hidden_size
        self.fwd = []
        self.bwd = []
        for k in range(layers):
            size = input_size if k == 0 else 2 * hidden_size
            self.fwd.append(LstmCell(store, f"{name}/fwd{k}", size, hidden_size, rng))
            self.bwd.append(LstmCell(store, f"{name}/bwd{k}", size, hidden_size, rng))

    @property
    def output_size(self):
        return 2 * self.hidden_size

    def run(self, tape, inputs):
        """Returns (per-position outputs, final forward h, final backward h)."""
        return _run_bilstm_layers(tape, self.fwd, self.bwd, inputs)


class Mlp:
    """tanh hidden layers with a linear output layer of fixed size."""

    def __init__(self, store, name: str, sizes, rng):
        if len(sizes) < 2:
            raise ValueError("an MLP needs at least input and output sizes")
        self.name = name
        self.sizes = tuple(sizes)
        self.layers = []
        for k, (n_in, n_out) in enumerate(zip(sizes, sizes[1:])):
            w = store.add(f"{name}/layer{k}/W", glorot(rng, n_out, n_in))
            b = store.add(f"{name}/layer{k}/b", np.zeros((n_out, 1)))
            self.layers.append((w, b))

    @property
    def output_size(self):
        return self.sizes[-1]

    def apply(self, tape, x: Tensor) -> Tensor:
        if x.value.shape != (self.sizes[0], 1):
            raise ShapeError(
                f"{self.name}: input shape {x.value.shape}, expected ({self.sizes[0]}, 1)"
            )
        out = x
        last = len(self.layers) - 1
        for k, (w, b) in enumerate(self.layers):
            out = tape.add(tape.matmul(w, out), b)
            if k != last:
                out = tape.tanh(out)
        return out


def mlp_apply(tape, mlp: Mlp, x: Tensor) -> Tensor:
    return mlp.apply(tape, x)
