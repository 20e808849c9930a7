"""Dense float64 tensors with reverse-mode automatic differentiation.

A dynamic tape underlies everything: each operation computes its result
eagerly with numpy, then appends a record (inputs, output, backward rule)
to a `Tape`. `Tape.backward` replays the records in reverse once,
accumulating d(loss)/d(x) into every tensor the graph touched. Gradients
add across fan-out, so a tensor used twice receives both contributions.

Shapes are always explicit: vectors are 1-d, weight matrices 2-d, losses
0-d. There is no broadcasting engine; batches are handled by the caller
looping per sample and averaging losses on the tape.

Passing ``tape=None`` to any operation computes the value without
recording, which keeps inference and finite-difference probing cheap.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, NumericError

__all__ = [
    "Tensor",
    "Tape",
    "OpRecord",
    "linear",
    "relu",
    "sigmoid",
    "hadamard",
    "concat",
    "add",
    "scale",
    "vsum",
    "softmax_cross_entropy",
    "softmax_values",
    "sigmoid_values",
    "gradient_check",
]


class Tensor:
    """A numeric array paired with an accumulated gradient.

    ``op_tag`` records provenance: "leaf" for inputs and parameters,
    otherwise the name of the producing operation. The gradient array is
    allocated lazily (first access) and always shares the value's shape.
    """

    __slots__ = ("value", "_grad", "op_tag")

    def __init__(self, value, op_tag: str = "leaf"):
        self.value = np.asarray(value, dtype=np.float64)
        self._grad: np.ndarray | None = None
        self.op_tag = op_tag

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            self._grad = np.zeros_like(self.value)
        return self._grad

    @grad.setter
    def grad(self, arr) -> None:
        self._grad = np.asarray(arr, dtype=np.float64)

    def zero_grad(self) -> None:
        if self._grad is not None:
            self._grad[...] = 0.0

    def __repr__(self) -> str:  # pragma: no cover
        return f"Tensor(shape={self.value.shape}, op={self.op_tag!r})"


class OpRecord:
    """One recorded operation: which tensors went in, which came out, and
    how to push gradients back through it."""

    __slots__ = ("name", "inputs", "output", "rule")

    def __init__(self, name: str, inputs: tuple, output: Tensor, rule: Callable[[], None]):
        self.name = name
        self.inputs = inputs
        self.output = output
        self.rule = rule


class Tape:
    """Ordered list of operation records; construction order is already
    topological, so one reverse sweep computes all gradients."""

    __slots__ = ("records",)

    def __init__(self):
        self.records: list[OpRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(x) into the grad of every tensor reachable
        from ``loss``. ``loss`` must be a scalar (size-1) tensor."""
        if loss.value.size != 1:
            raise DimensionError(
                f"backward requires a scalar loss, got shape {loss.value.shape}"
            )
        loss.grad[...] += 1.0
        for rec in reversed(self.records):
            rec.rule()


def _emit(tape: Tape | None, name: str, inputs: tuple, out: Tensor,
          rule: Callable[[], None]) -> Tensor:
    if tape is not None:
        tape.records.append(OpRecord(name, inputs, out, rule))
    return out


def linear(x: Tensor, w: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Affine map wᵀ·x + b for an n-vector x, n×m matrix w and m-vector b."""
    xv, wv, bv = x.value, w.value, b.value
    if (
        xv.ndim != 1
        or wv.ndim != 2
        or bv.ndim != 1
        or wv.shape[0] != xv.shape[0]
        or wv.shape[1] != bv.shape[0]
    ):
        raise DimensionError(
            f"linear: input {xv.shape} incompatible with weights {wv.shape} "
            f"and bias {bv.shape}"
        )
    out = Tensor(wv.T @ xv + bv, op_tag="linear")

    def rule():
        g = out._grad
        if g is None:
            return
        x.grad += wv @ g
        w.grad += np.outer(xv, g)
        b.grad += g

    return _emit(tape, "linear", (x, w, b), out, rule)


def relu(x: Tensor, tape: Tape | None = None) -> Tensor:
    """Elementwise max(0, x); the subgradient at exactly 0 is taken as 0."""
    out = Tensor(np.maximum(x.value, 0.0), op_tag="relu")

    def rule():
        g = out._grad
        if g is None:
            return
        x.grad += g * (x.value > 0.0)

    return _emit(tape, "relu", (x,), out, rule)


def sigmoid_values(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function, branching on sign so neither
    branch exponentiates a large positive argument."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Tensor, tape: Tape | None = None) -> Tensor:
    out = Tensor(sigmoid_values(x.value), op_tag="sigmoid")

    def rule():
        g = out._grad
        if g is None:
            return
        y = out.value
        x.grad += y * (1.0 - y) * g

    return _emit(tape, "sigmoid", (x,), out, rule)


def hadamard(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Elementwise product of two equal-length vectors."""
    if a.value.shape != b.value.shape:
        raise DimensionError(
            f"hadamard: shapes {a.value.shape} and {b.value.shape} differ"
        )
    out = Tensor(a.value * b.value, op_tag="hadamard")

    def rule():
        g = out._grad
        if g is None:
            return
        a.grad += g * b.value
        b.grad += g * a.value

    return _emit(tape, "hadamard", (a, b), out, rule)


def concat(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """a followed by b; the backward rule splits the upstream gradient at
    len(a), bit for bit."""
    if a.value.ndim != 1 or b.value.ndim != 1:
        raise DimensionError(
            f"concat expects vectors, got shapes {a.value.shape} and {b.value.shape}"
        )
    n = a.value.shape[0]
    out = Tensor(np.concatenate([a.value, b.value]), op_tag="concat")

    def rule():
        g = out._grad
        if g is None:
            return
        a.grad += g[:n]
        b.grad += g[n:]

    return _emit(tape, "concat", (a, b), out, rule)


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.value.shape != b.value.shape:
        raise DimensionError(
            f"add: shapes {a.value.shape} and {b.value.shape} differ"
        )
    out = Tensor(a.value + b.value, op_tag="add")

    def rule():
        g = out._grad
        if g is None:
            return
        a.grad += g
        b.grad += g

    return _emit(tape, "add", (a, b), out, rule)


def scale(x: Tensor, c: float, tape: Tape | None = None) -> Tensor:
    """Multiply by a Python constant (not differentiated through c)."""
    c = float(c)
    out = Tensor(x.value * c, op_tag="scale")

    def rule():
        g = out._grad
        if g is None:
            return
        x.grad += c * g

    return _emit(tape, "scale", (x,), out, rule)


def vsum(x: Tensor, tape: Tape | None = None) -> Tensor:
    """Sum of all entries, as a 0-d scalar tensor."""
    out = Tensor(x.value.sum(), op_tag="vsum")

    def rule():
        g = out._grad
        if g is None:
            return
        x.grad += g

    return _emit(tape, "vsum", (x,), out, rule)


def softmax_values(logits: np.ndarray) -> np.ndarray:
    """Softmax with the max-subtraction trick; safe for extreme logits."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    ez = np.exp(z)
    return ez / ez.sum()


def softmax_cross_entropy(logits: Tensor, target: int, tape: Tape | None = None) -> Tensor:
    """−log softmax(logits)[target] as a scalar tensor.

    The backward rule is the fused softmax − onehot form, so no separate
    softmax node ever appears on the tape.
    """
    lv = logits.value
    if lv.ndim != 1:
        raise DimensionError(f"softmax_cross_entropy expects a vector, got {lv.shape}")
    k = lv.shape[0]
    target = int(target)
    if not 0 <= target < k:
        raise IndexError(f"target {target} out of range for {k} classes")
    m = lv.max()
    z = lv - m
    ez = np.exp(z)
    sez = ez.sum()
    out = Tensor(np.log(sez) - z[target], op_tag="softmax_cross_entropy")
    probs = ez / sez

    def rule():
        g = out._grad
        if g is None:
            return
        delta = probs.copy()
        delta[target] -= 1.0
        logits.grad += delta * g

    return _emit(tape, "softmax_cross_entropy", (logits,), out, rule)


def gradient_check(
    f: Callable[[Tape | None], Tensor],
    params: Sequence[Tensor],
    epsilon: float = 1e-5,
) -> float:
    """Worst-case relative disagreement between tape gradients and central
    finite differences, over every entry of every parameter.

    ``f(tape)`` must rebuild the forward pass from the current parameter
    values and return the scalar loss; calls with ``tape=None`` are used
    for the finite-difference probes, where only the value matters.
    Relative error is |analytic − fd| / max(1e-8, |analytic| + |fd|).
    """
    if epsilon <= 0.0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")

    for p in params:
        p.grad[...] = 0.0
    tape = Tape()
    loss = f(tape)
    if not np.all(np.isfinite(loss.value)):
        raise NumericError("gradient_check: loss is not finite")
    tape.backward(loss)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, an in zip(params, analytic):
        flat = p.value.ravel()
        if not np.shares_memory(flat, p.value):
            # non-contiguous storage: work on a contiguous copy in place
            p.value = np.ascontiguousarray(p.value)
            flat = p.value.ravel()
        aflat = an.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            hi = float(f(None).value)
            flat[i] = orig - epsilon
            lo = float(f(None).value)
            flat[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise NumericError("gradient_check: perturbed loss is not finite")
            fd = (hi - lo) / (2.0 * epsilon)
            a = aflat[i]
            err = abs(a - fd) / max(1e-8, abs(a) + abs(fd))
            if err > worst:
                worst = err
    return worst
