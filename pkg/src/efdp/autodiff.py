"""Dense 2-D tensors with taped reverse-mode differentiation and Adam.

The computation graph is dynamic: a fresh Tape is built per sentence (or per
update window), ops append (output, backward-closure) records in execution
order, and backward() replays them once in reverse. Everything is float64;
vectors are column-shaped (n, 1). Tensors produced on an older tape may be
consumed by a newer one, in which case they act as constants.
"""

import struct

import numpy as np

from .errors import DataError

MAGIC = b"EFDP"
FORMAT_VERSION = 1


class ShapeError(ValueError):
    pass


class SerializationError(DataError):
    pass


class Tensor:
    __slots__ = ("value", "grad", "name")

    def __init__(self, value, name: str = ""):
        v = np.asarray(value, dtype=np.float64)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {v.shape}")
        self.value = v
        self.grad = None
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def item(self) -> float:
        if self.value.size != 1:
            raise ShapeError(f"item() on shape {self.value.shape}")
        return float(self.value[0, 0])

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}{self.value.shape}"


def constant(value, name: str = "") -> Tensor:
    """A tensor that participates in forward values only (no gradient)."""
    return Tensor(value, name)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.value)
    t.grad += g


def _check_finite(op: str, value: np.ndarray) -> None:
    if not np.isfinite(value).all():
        raise FloatingPointError(f"{op} produced non-finite values")


class Tape:
    """Ordered record of executed ops; backward() visits them in reverse."""

    def __init__(self):
        self._records = []
        self._spent = False

    def __len__(self):
        return len(self._records)

    def _push(self, out: Tensor, backward) -> Tensor:
        self._records.append((out, backward))
        return out

    # ---- forward ops ----

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape[1] != b.value.shape[0]:
            raise ShapeError(f"matmul: {a.value.shape} @ {b.value.shape}")
        out = Tensor(a.value @ b.value)
        _check_finite("matmul", out.value)

        def backward(g):
            _accumulate(a, g @ b.value.T)
            _accumulate(b, a.value.T @ g)

        return self._push(out, backward)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape != b.value.shape:
            raise ShapeError(f"add: {a.value.shape} vs {b.value.shape}")
        out = Tensor(a.value + b.value)
        _check_finite("add", out.value)

        def backward(g):
            _accumulate(a, g)
            _accumulate(b, g)

        return self._push(out, backward)

    def sub(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape != b.value.shape:
            raise ShapeError(f"sub: {a.value.shape} vs {b.value.shape}")
        out = Tensor(a.value - b.value)
        _check_finite("sub", out.value)

        def backward(g):
            _accumulate(a, g)
            _accumulate(b, -g)

        return self._push(out, backward)

    def pointwise_mul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape != b.value.shape:
            raise ShapeError(f"pointwise_mul: {a.value.shape} vs {b.value.shape}")
        out = Tensor(a.value * b.value)
        _check_finite("pointwise_mul", out.value)

        def backward(g):
            _accumulate(a, g * b.value)
            _accumulate(b, g * a.value)

        return self._push(out, backward)

    def tanh(self, x: Tensor) -> Tensor:
        out = Tensor(np.tanh(x.value))
        _check_finite("tanh", out.value)

        def backward(g):
            _accumulate(x, g * (1.0 - out.value * out.value))

        return self._push(out, backward)

    def logistic(self, x: Tensor) -> Tensor:
        v = x.value
        # numerically stable split avoids overflow in exp for large |x|
        expnv = np.exp(-np.abs(v))
        out = Tensor(np.where(v >= 0, 1.0 / (1.0 + expnv), expnv / (1.0 + expnv)))
        _check_finite("logistic", out.value)

        def backward(g):
            _accumulate(x, g * out.value * (1.0 - out.value))

        return self._push(out, backward)

    def concat(self, *xs: Tensor) -> Tensor:
        if not xs:
            raise ShapeError("concat of nothing")
        for x in xs:
            if x.value.shape[1] != 1:
                raise ShapeError(f"concat expects column vectors, got {x.value.shape}")
        out = Tensor(np.concatenate([x.value for x in xs], axis=0))
        _check_finite("concat", out.value)
        sizes = [x.value.shape[0] for x in xs]

        def backward(g):
            offset = 0
            for x, size in zip(xs, sizes):
                _accumulate(x, g[offset : offset + size])
                offset += size

        return self._push(out, backward)

    def pick_row(self, x: Tensor, i: int) -> Tensor:
        if not 0 <= i < x.value.shape[0]:
            raise ShapeError(f"pick_row: row {i} of shape {x.value.shape}")
        out = Tensor(x.value[i, :].reshape(-1, 1).copy())
        _check_finite("pick_row", out.value)

        def backward(g):
            if x.grad is None:
                x.grad = np.zeros_like(x.value)
            x.grad[i, :] += g[:, 0]

        return self._push(out, backward)

    def sum_all(self, x: Tensor) -> Tensor:
        out = Tensor([[x.value.sum()]])
        _check_finite("sum_all", out.value)

        def backward(g):
            _accumulate(x, np.full_like(x.value, g[0, 0]))

        return self._push(out, backward)

    def scale(self, x: Tensor, c: float) -> Tensor:
        out = Tensor(x.value * c)
        _check_finite("scale", out.value)

        def backward(g):
            _accumulate(x, g * c)

        return self._push(out, backward)

    # ---- reverse pass ----

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(x) into .grad of every tensor on this tape."""
        if self._spent:
            raise RuntimeError("backward already ran on this tape; build a new one")
        if loss.value.shape != (1, 1):
            raise ShapeError(f"loss must be scalar-shaped (1, 1), got {loss.value.shape}")
        self._spent = True
        loss.grad = np.ones((1, 1))
        for out, backward in reversed(self._records):
            if out.grad is not None:
                backward(out.grad)


class ParameterStore:
    """Named trainable tensors plus their Adam moment buffers."""

    def __init__(self):
        self._params = {}
        self._m = {}
        self._v = {}
        self.step_count = 0

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(value, name)
        t.grad = np.zeros_like(t.value)
        self._params[name] = t
        self._m[name] = np.zeros_like(t.value)
        self._v[name] = np.zeros_like(t.value)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def zero_grads(self) -> None:
        for t in self._params.values():
            if t.grad is None:
                t.grad = np.zeros_like(t.value)
            else:
                t.grad[:] = 0.0

    def adam_step(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        """Standard Adam update with bias correction; grads are zeroed after."""
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - beta1**t
        bc2 = 1.0 - beta2**t
        for name, p in self._params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.value)
            m = self._m[name]
            v = self._v[name]
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * (g * g)
            p.value -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        self.zero_grads()

    def snapshot(self) -> dict:
        return {name: p.value.copy() for name, p in self._params.items()}

    def restore(self, snap: dict) -> None:
        for name, value in snap.items():
            self._params[name].value[:] = value

    # ---- serialization ----
    # layout: MAGIC, u32 version, u32 entry count, then per entry
    # u32 name length, UTF-8 name, u32 rank, u32 dims, little-endian f64 data

    def to_bytes(self) -> bytes:
        chunks = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(self._params))]
        for name, p in self._params.items():
            encoded = name.encode("utf-8")
            chunks.append(struct.pack("<I", len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack("<I", p.value.ndim))
            for dim in p.value.shape:
                chunks.append(struct.pack("<I", dim))
            chunks.append(np.ascontiguousarray(p.value, dtype="<f8").tobytes())
        return b"".join(chunks)

    def load_bytes(self, data: bytes, strict: bool = True) -> None:
        """Load values into existing parameters; strict rejects unknown names."""
        entries = _decode_entries(data)
        seen = set()
        for name, value in entries:
            if name not in self._params:
                if strict:
                    raise SerializationError(f"unknown parameter {name!r} in model file")
                continue
            p = self._params[name]
            if p.value.shape != value.shape:
                raise SerializationError(
                    f"parameter {name!r}: file shape {value.shape} != expected {p.value.shape}"
                )
            p.value[:] = value
            seen.add(name)
        if strict:
            missing = [n for n in self._params if n not in seen]
            if missing:
                raise SerializationError(f"model file is missing parameters: {missing[:5]}")


def save_params(store: ParameterStore) -> bytes:
    return store.to_bytes()


def load_params(data: bytes) -> ParameterStore:
    store = ParameterStore()
    for name, value in _decode_entries(data):
        store.add(name, value)
    return store


def _decode_entries(data: bytes):
    view = memoryview(data)
    if len(view) < 12 or bytes(view[:4]) != MAGIC:
        raise SerializationError("bad magic header: not a parser model file")
    (version,) = struct.unpack_from("<I", view, 4)
    if version != FORMAT_VERSION:
        raise SerializationError(f"unsupported model format version {version}")
    (count,) = struct.unpack_from("<I", view, 8)
    offset = 12
    entries = []
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", view, offset)
            offset += 4
            name = bytes(view[offset : offset + name_len]).decode("utf-8")
            if len(name.encode("utf-8")) != name_len:
                raise SerializationError("truncated model file")
            offset += name_len
            (rank,) = struct.unpack_from("<I", view, offset)
            offset += 4
            dims = struct.unpack_from(f"<{rank}I", view, offset)
            offset += 4 * rank
            n_values = int(np.prod(dims)) if dims else 1
            raw = bytes(view[offset : offset + 8 * n_values])
            if len(raw) != 8 * n_values:
                raise SerializationError("truncated model file")
            offset += 8 * n_values
            entries.append((name, np.frombuffer(raw, dtype="<f8").reshape(dims).copy()))
    except struct.error:
        raise SerializationError("truncated model file") from None
    if offset != len(view):
        raise SerializationError(f"{len(view) - offset} trailing bytes in model file")
    return entries
