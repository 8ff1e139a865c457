"""Dense float64 numeric core with reverse-mode gradients.

Matrices are C-order float64 numpy arrays (2-D, row-major); vectors are
1-D arrays; scalars are 0-D arrays.  Every primitive below works in two
modes:

* plain mode: inputs are numpy arrays (or untracked values), the result
  is a numpy array.  Used for inference and finite-difference probes.
* recording mode: a ``GradTape`` is active and at least one input is a
  ``Node``; the primitive caches what its backward pass needs, appends
  itself to the tape, and returns a ``Node``.

``GradTape.backward`` replays the recorded primitives in exact reverse
execution order, accumulating gradients into ``Node.grad``.  Any node
read by a recorded primitive ends up with a gradient array (possibly
all zeros).

This is deliberately not a general autodiff system: only the primitives
the sentence-pair model needs exist, and only scalar roots can be
differentiated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.special import expit

from .errors import ConfigError, ShapeError

_NORM_GUARD = 1e-12


_F64 = np.dtype(np.float64)


def as_f64(x) -> np.ndarray:
    if type(x) is np.ndarray and x.dtype == _F64:
        return x
    return np.asarray(x, dtype=np.float64)


class Node:
    """A value in the computation graph plus its accumulated gradient."""

    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = as_f64(value)
        self.grad = None

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


_ACTIVE: "GradTape | None" = None


class GradTape:
    """Ordered record of primitive applications for one backward pass.

    Use as a context manager around the forward computation; primitives
    executed inside register themselves.  One tape is active at a time
    (one training step runs on one logical thread).
    """

    def __init__(self):
        self._records: list[tuple[Node, tuple[Node, ...], Callable]] = []

    def __enter__(self):
        global _ACTIVE
        if _ACTIVE is not None:
            raise RuntimeError("a GradTape is already active")
        _ACTIVE = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _ACTIVE
        _ACTIVE = None
        return False

    def leaf(self, value) -> Node:
        """Wrap an array so gradients accumulate on it."""
        return Node(value)

    def record(self, out: Node, inputs: tuple[Node, ...], backward: Callable):
        self._records.append((out, inputs, backward))

    def backward(self, root: Node):
        """Accumulate d(root)/d(node) into every recorded node's .grad."""
        if not isinstance(root, Node):
            raise TypeError("backward root must be a Node")
        if root.value.shape != ():
            raise ShapeError(f"backward root must be scalar, got shape {root.value.shape}")
        for out, inputs, _ in self._records:
            out.grad = np.zeros_like(out.value)
            for n in inputs:
                if n.grad is None or n.grad.shape != n.value.shape:
                    n.grad = np.zeros_like(n.value)
        root.grad = np.ones_like(root.value)
        for out, _, backward in reversed(self._records):
            g = out.grad
            if g is not None:
                backward(g)


def _value(x) -> np.ndarray:
    if type(x) is Node:
        return x.value
    if type(x) is np.ndarray and x.dtype == _F64:
        return x
    return as_f64(x)


def _nodes(*xs) -> tuple[Node, ...]:
    return tuple(x for x in xs if isinstance(x, Node))


def _finish(value, inputs, backward):
    """Return raw value, or record a Node if a tape is listening."""
    tape = _ACTIVE
    nodes = _nodes(*inputs)
    if tape is None or not nodes:
        return value
    out = Node(value)
    tape.record(out, nodes, backward(out))
    return out


# ---------------------------------------------------------------------------
# affine maps


def linear(x, W, b=None):
    """W @ x (+ b) for W (m, n), x (n,), optional b (m,)."""
    xv, Wv = _value(x), _value(W)
    if Wv.ndim != 2 or xv.ndim != 1 or Wv.shape[1] != xv.shape[0]:
        raise ShapeError(f"linear: W {Wv.shape} incompatible with x {xv.shape}")
    y = Wv @ xv
    if b is not None:
        bv = _value(b)
        if bv.shape != (Wv.shape[0],):
            raise ShapeError(f"linear: b {bv.shape} incompatible with W {Wv.shape}")
        y = y + bv

    def backward(out):
        def run(g):
            if isinstance(x, Node):
                x.grad += Wv.T @ g
            if isinstance(W, Node):
                W.grad += np.outer(g, xv)
            if b is not None and isinstance(b, Node):
                b.grad += g
        return run

    return _finish(y, (x, W, b), backward)


def affine_rows(M, W, b=None):
    """Row-wise affine map: M @ W.T (+ b) for M (n, k), W (m, k)."""
    Mv, Wv = _value(M), _value(W)
    if Mv.ndim != 2 or Wv.ndim != 2 or Mv.shape[1] != Wv.shape[1]:
        raise ShapeError(f"affine_rows: M {Mv.shape} incompatible with W {Wv.shape}")
    Y = Mv @ Wv.T
    if b is not None:
        bv = _value(b)
        if bv.shape != (Wv.shape[0],):
            raise ShapeError(f"affine_rows: b {bv.shape} incompatible with W {Wv.shape}")
        Y = Y + bv

    def backward(out):
        def run(G):
            if isinstance(M, Node):
                M.grad += G @ Wv
            if isinstance(W, Node):
                W.grad += G.T @ Mv
            if b is not None and isinstance(b, Node):
                b.grad += G.sum(axis=0)
        return run

    return _finish(Y, (M, W, b), backward)


# ---------------------------------------------------------------------------
# elementwise


def sigmoid(x):
    """Logistic function 1 / (1 + e^-x); saturates to {0, 1} for huge |x|."""
    y = expit(_value(x))

    def backward(out):
        def run(g):
            x.grad += g * (y * (1.0 - y))
        return run

    return _finish(y, (x,), backward)


def tanh_op(x):
    y = np.tanh(_value(x))

    def backward(out):
        def run(g):
            x.grad += g * (1.0 - y * y)
        return run

    return _finish(y, (x,), backward)


def softmax(x):
    """Stable softmax of a vector: nonnegative, sums to one."""
    xv = _value(x)
    if xv.ndim != 1 or xv.shape[0] < 1:
        raise ShapeError(f"softmax: need a nonempty vector, got shape {xv.shape}")
    e = np.exp(xv - xv.max())
    y = e / e.sum()

    def backward(out):
        def run(g):
            x.grad += y * (g - np.dot(g, y))
        return run

    return _finish(y, (x,), backward)


def add(a, b):
    av, bv = _value(a), _value(b)
    if av.shape != bv.shape:
        raise ShapeError(f"add: shapes {av.shape} and {bv.shape} differ")
    y = av + bv

    def backward(out):
        def run(g):
            if isinstance(a, Node):
                a.grad += g
            if isinstance(b, Node):
                b.grad += g
        return run

    return _finish(y, (a, b), backward)


def scale(x, c: float):
    c = float(c)
    y = _value(x) * c

    def backward(out):
        def run(g):
            x.grad += g * c
        return run

    return _finish(y, (x,), backward)


def elementwise_mul(a, b):
    av, bv = _value(a), _value(b)
    if av.shape != bv.shape:
        raise ShapeError(f"elementwise_mul: shapes {av.shape} and {bv.shape} differ")
    y = av * bv

    def backward(out):
        def run(g):
            if isinstance(a, Node):
                a.grad += g * bv
            if isinstance(b, Node):
                b.grad += g * av
        return run

    return _finish(y, (a, b), backward)


def abs_diff(a, b):
    """|a - b| with subgradient 0 at exact ties."""
    av, bv = _value(a), _value(b)
    if av.shape != bv.shape:
        raise ShapeError(f"abs_diff: shapes {av.shape} and {bv.shape} differ")
    d = av - bv
    y = np.abs(d)

    def backward(out):
        s = np.sign(d)

        def run(g):
            if isinstance(a, Node):
                a.grad += g * s
            if isinstance(b, Node):
                b.grad -= g * s
        return run

    return _finish(y, (a, b), backward)


def vsum(x):
    """Sum of all entries, as a scalar."""
    xv = _value(x)
    y = as_f64(xv.sum())

    def backward(out):
        def run(g):
            x.grad += np.broadcast_to(g, xv.shape)
        return run

    return _finish(y, (x,), backward)


# ---------------------------------------------------------------------------
# structure


def concat(*parts):
    """Concatenate vectors (scalars are treated as length-1) in order."""
    vals = [np.atleast_1d(_value(p)) for p in parts]
    y = np.concatenate(vals)

    def backward(out):
        spans = []
        ofs = 0
        for p, v in zip(parts, vals):
            spans.append((p, ofs, ofs + v.shape[0]))
            ofs += v.shape[0]

        def run(g):
            for p, lo, hi in spans:
                if isinstance(p, Node):
                    p.grad += g[lo:hi].reshape(p.value.shape)
        return run

    return _finish(y, parts, backward)


def stack_rows(rows):
    """Stack equal-length vectors into a (n, k) matrix."""
    vals = [_value(r) for r in rows]
    if not vals:
        raise ShapeError("stack_rows: need at least one row")
    Y = np.stack(vals, axis=0)

    def backward(out):
        def run(G):
            for i, r in enumerate(rows):
                if isinstance(r, Node):
                    r.grad += G[i]
        return run

    return _finish(Y, tuple(rows), backward)


def row(M, i: int):
    """Copy of row i of a matrix."""
    Mv = _value(M)
    y = Mv[i].copy()

    def backward(out):
        def run(g):
            M.grad[i] += g
        return run

    return _finish(y, (M,), backward)


def flatten(M):
    """Row-major flattening of a matrix into a vector."""
    Mv = _value(M)
    y = Mv.reshape(-1).copy()

    def backward(out):
        def run(g):
            M.grad += g.reshape(Mv.shape)
        return run

    return _finish(y, (M,), backward)


def pad_rows(M, n_rows: int):
    """First min(n, n_rows) rows of M, zero-padded up to n_rows rows."""
    Mv = _value(M)
    if Mv.ndim != 2 or Mv.shape[0] < 1:
        raise ShapeError(f"pad_rows: need a nonempty matrix, got shape {Mv.shape}")
    m = min(Mv.shape[0], n_rows)
    Y = np.zeros((n_rows, Mv.shape[1]))
    Y[:m] = Mv[:m]

    def backward(out):
        def run(G):
            M.grad[:m] += G[:m]
        return run

    return _finish(Y, (M,), backward)


def prepend_to_rows(v, M):
    """Rows [v ++ M[i]]: the same vector prefixed to every row of M."""
    vv, Mv = _value(v), _value(M)
    n, k = Mv.shape
    d = vv.shape[0]
    Y = np.empty((n, d + k))
    Y[:, :d] = vv
    Y[:, d:] = Mv

    def backward(out):
        def run(G):
            if isinstance(v, Node):
                v.grad += G[:, :d].sum(axis=0)
            if isinstance(M, Node):
                M.grad += G[:, d:]
        return run

    return _finish(Y, (v, M), backward)


# ---------------------------------------------------------------------------
# similarity and pooling


def cosine(a, b):
    """Cosine similarity; 0 (with zero gradient) if either norm < 1e-12."""
    av, bv = _value(a), _value(b)
    if av.shape != bv.shape:
        raise ShapeError(f"cosine: shapes {av.shape} and {bv.shape} differ")
    na = float(np.sqrt(av @ av))
    nb = float(np.sqrt(bv @ bv))
    if na < _NORM_GUARD or nb < _NORM_GUARD:
        def backward(out):
            def run(g):
                pass
            return run
        return _finish(as_f64(0.0), (a, b), backward)
    c = float(av @ bv) / (na * nb)
    y = as_f64(c)

    def backward(out):
        def run(g):
            if isinstance(a, Node):
                a.grad += g * (bv / (na * nb) - av * (c / (na * na)))
            if isinstance(b, Node):
                b.grad += g * (av / (na * nb) - bv * (c / (nb * nb)))
        return run

    return _finish(y, (a, b), backward)


def cosine_rows(A, B):
    """All-pairs row cosines: C[i, j] = cosine(A[i], B[j]), zero-norm guarded."""
    Av, Bv = _value(A), _value(B)
    if Av.ndim != 2 or Bv.ndim != 2 or Av.shape[1] != Bv.shape[1]:
        raise ShapeError(f"cosine_rows: shapes {Av.shape} and {Bv.shape} differ in width")
    na = np.sqrt((Av * Av).sum(axis=1))
    nb = np.sqrt((Bv * Bv).sum(axis=1))
    ok_a = na >= _NORM_GUARD
    ok_b = nb >= _NORM_GUARD
    sa = np.where(ok_a, na, 1.0)
    sb = np.where(ok_b, nb, 1.0)
    C = (Av @ Bv.T) / np.outer(sa, sb)
    C *= np.outer(ok_a, ok_b)

    def backward(out):
        def run(G):
            Gm = G * np.outer(ok_a, ok_b)
            if isinstance(A, Node):
                A.grad += (Gm / sb) @ Bv / sa[:, None] \
                    - Av * ((Gm * C).sum(axis=1) / (sa * sa))[:, None]
            if isinstance(B, Node):
                B.grad += (Gm.T / sa) @ Av / sb[:, None] \
                    - Bv * ((Gm * C).sum(axis=0) / (sb * sb))[:, None]
        return run

    return _finish(C, (A, B), backward)


def max_over_time(M):
    """Per-column maximum over rows; gradient goes to the first max row."""
    Mv = _value(M)
    if Mv.ndim != 2 or Mv.shape[0] < 1:
        raise ShapeError(f"max_over_time: need a nonempty matrix, got shape {Mv.shape}")
    winners = Mv.argmax(axis=0)
    y = Mv[winners, np.arange(Mv.shape[1])]

    def backward(out):
        cols = np.arange(Mv.shape[1])

        def run(g):
            np.add.at(M.grad, (winners, cols), g)
        return run

    return _finish(y, (M,), backward)


# ---------------------------------------------------------------------------
# regularization


def dropout(x, p: float, training: bool, rng: np.random.Generator | None):
    """Inverted dropout: scale survivors by 1/(1-p) in training, identity otherwise."""
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    xv = _value(x)
    mask = (rng.random(xv.shape) >= p) / (1.0 - p)
    y = xv * mask

    def backward(out):
        def run(g):
            x.grad += g * mask
        return run

    return _finish(y, (x,), backward)


# ---------------------------------------------------------------------------
# recurrent unit

_GATES = ("i", "f", "o", "u")


def lstm_last_state(S, W, U, b):
    """Final hidden state of an LSTM run over the rows of S.

    S is (n, k); W, U, b are 4-tuples of per-gate parameters in the order
    (input, forget, output, candidate): W_* (l, k), U_* (l, l), b_* (l,).
    The gates at step t are

        i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)
        f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)
        o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)
        u_t = tanh(W_u x_t + U_u h_{t-1} + b_u)
        c_t = f_t * c_{t-1} + i_t * u_t
        h_t = o_t * tanh(c_t)

    with h_0 = c_0 = 0, returning h_n.  Forward and backward walk the
    steps as one fused primitive (one tape record), with the backward
    pass replaying the recurrence in reverse.
    """
    Sv = _value(S)
    if Sv.ndim != 2 or Sv.shape[0] < 1:
        raise ShapeError(f"lstm_last_state: need a nonempty matrix, got shape {Sv.shape}")
    Wv = [_value(w) for w in W]
    Uv = [_value(u) for u in U]
    bv = [_value(x) for x in b]
    l = Wv[0].shape[0]
    for g, w, u, x in zip(_GATES, Wv, Uv, bv):
        if w.shape != (l, Sv.shape[1]) or u.shape != (l, l) or x.shape != (l,):
            raise ShapeError(
                f"lstm_last_state: gate {g} shapes W {w.shape}, U {u.shape}, b {x.shape} "
                f"inconsistent with input {Sv.shape}")
    n = Sv.shape[0]
    Wall = np.vstack(Wv)            # (4l, k)
    Uall = np.vstack(Uv)            # (4l, l)
    ball = np.concatenate(bv)       # (4l,)
    X = Sv @ Wall.T + ball          # (n, 4l)

    recording = _ACTIVE is not None and len(_nodes(S, *W, *U, *b)) > 0
    if recording:
        gates = np.empty((n, 4 * l))
        cells = np.empty((n, l))
        tanhc = np.empty((n, l))
        hprev = np.zeros((n, l))    # row t holds h_{t-1}

    h = np.zeros(l)
    c = np.zeros(l)
    for t in range(n):
        act = X[t] + Uall @ h
        expit(act[: 3 * l], out=act[: 3 * l])
        np.tanh(act[3 * l:], out=act[3 * l:])
        i, f, o, u = act[:l], act[l:2 * l], act[2 * l:3 * l], act[3 * l:]
        if recording:
            if t > 0:
                hprev[t] = h
            gates[t] = act
            c = f * c + i * u
            cells[t] = c
            tc = np.tanh(c)
            tanhc[t] = tc
        else:
            c = f * c + i * u
            tc = np.tanh(c)
        h = o * tc

    if not recording:
        return h

    def backward(out):
        def run(g):
            dh = g.copy()
            dc = np.zeros(l)
            dZ = np.empty((n, 4 * l))
            for t in range(n - 1, -1, -1):
                act = gates[t]
                i, f, o, u = act[:l], act[l:2 * l], act[2 * l:3 * l], act[3 * l:]
                tc = tanhc[t]
                do = dh * tc
                dc = dc + dh * o * (1.0 - tc * tc)
                cprev = cells[t - 1] if t > 0 else 0.0
                dz = dZ[t]
                dz[:l] = (dc * u) * i * (1.0 - i)
                dz[l:2 * l] = (dc * cprev) * f * (1.0 - f)
                dz[2 * l:3 * l] = do * o * (1.0 - o)
                dz[3 * l:] = (dc * i) * (1.0 - u * u)
                dh = Uall.T @ dz
                dc = dc * f
            if isinstance(S, Node):
                S.grad += dZ @ Wall
            dWall = dZ.T @ Sv
            dUall = dZ.T @ hprev
            dball = dZ.sum(axis=0)
            for j in range(4):
                if isinstance(W[j], Node):
                    W[j].grad += dWall[j * l:(j + 1) * l]
                if isinstance(U[j], Node):
                    U[j].grad += dUall[j * l:(j + 1) * l]
                if isinstance(b[j], Node):
                    b[j].grad += dball[j * l:(j + 1) * l]
        return run

    return _finish(h, (S, *W, *U, *b), backward)


# ---------------------------------------------------------------------------
# losses on logits


def kl_from_logits(p, logits):
    """KL(p || softmax(logits)) with the 0*ln(0) = 0 convention."""
    pv = as_f64(p)
    zv = _value(logits)
    if pv.shape != zv.shape:
        raise ShapeError(f"kl_from_logits: shapes {pv.shape} and {zv.shape} differ")
    z = zv - zv.max()
    logq = z - np.log(np.exp(z).sum())
    pos = pv > 0.0
    y = as_f64(np.sum(pv[pos] * (np.log(pv[pos]) - logq[pos])))

    def backward(out):
        q = np.exp(logq)

        def run(g):
            logits.grad += g * (q - pv)
        return run

    return _finish(y, (logits,), backward)


def ce_from_logits(gold: int, logits):
    """Cross entropy -log softmax(logits)[gold]."""
    zv = _value(logits)
    if not 0 <= gold < zv.shape[0]:
        raise ShapeError(f"ce_from_logits: class {gold} out of range for {zv.shape[0]} logits")
    z = zv - zv.max()
    logq = z - np.log(np.exp(z).sum())
    y = as_f64(-logq[gold])

    def backward(out):
        q = np.exp(logq)

        def run(g):
            d = q.copy()
            d[gold] -= 1.0
            logits.grad += g * d
        return run

    return _finish(y, (logits,), backward)


# ---------------------------------------------------------------------------
# finite-difference gradient checking


@dataclass
class GradCheckGroup:
    name: str
    max_rel_err: float
    worst_index: int
    analytic: float
    numeric: float


@dataclass
class GradCheckReport:
    groups: list[GradCheckGroup]
    h: float

    @property
    def max_rel_err(self) -> float:
        return max((g.max_rel_err for g in self.groups), default=0.0)

    def failures(self, threshold: float) -> list[GradCheckGroup]:
        return [g for g in self.groups if g.max_rel_err >= threshold]

    def passed(self, threshold: float) -> bool:
        return not self.failures(threshold)


def grad_check(f, params: Mapping[str, np.ndarray], h: float = 1e-5,
               rel_floor: float = 1e-8) -> GradCheckReport:
    """Compare analytic gradients of f against central differences.

    ``f`` maps a name->array mapping to a scalar loss; it must be
    deterministic (dropout off) and is evaluated many times with single
    entries of ``params`` perturbed in place by +-h.  The analytic side
    runs once under a GradTape with the same mapping wrapped in leaf
    nodes.  Relative error per entry is
    |ga - gn| / max(|ga|, |gn|, rel_floor).

    ``rel_floor`` damps the error where the true gradient is near zero;
    it must sit above the probe's own rounding noise (a few ULP of the
    loss's internal scale divided by 2h) for the report to be
    meaningful there.
    """
    with GradTape() as tape:
        leaves = {k: tape.leaf(v) for k, v in params.items()}
        loss = f(leaves)
        if not isinstance(loss, Node):
            raise TypeError("grad_check: f must engage the tape and return a scalar Node")
        tape.backward(loss)
    analytic = {k: (n.grad if n.grad is not None else np.zeros_like(n.value))
                for k, n in leaves.items()}

    groups = []
    for name, arr in params.items():
        ga = analytic[name].reshape(-1)
        worst = (0.0, 0, 0.0, 0.0)
        flat = arr.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(_value(f(params)))
            flat[i] = orig - h
            fm = float(_value(f(params)))
            flat[i] = orig
            gn = (fp - fm) / (2.0 * h)
            rel = abs(ga[i] - gn) / max(abs(ga[i]), abs(gn), rel_floor)
            if rel > worst[0]:
                worst = (rel, i, float(ga[i]), gn)
        groups.append(GradCheckGroup(name, *worst))
    return GradCheckReport(groups, h)
