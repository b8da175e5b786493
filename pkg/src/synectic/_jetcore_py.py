"""Pure-Python tape evaluator, used when the compiled kernel is unavailable.

Each tape row is ``(opcode, a, b)``; slot ``k`` of the output arrays receives
the jet of row ``k``. The functions return the index of the first failing row,
or ``-1`` on success, exactly like the compiled kernel.
"""

from __future__ import annotations

from synectic import jet as _j

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7
OP_SIN = 8
OP_COS = 9
OP_TAN = 10
OP_EXP = 11
OP_LOG = 12
OP_SQRT = 13

_UNARY = {
    OP_SIN: _j.sin,
    OP_COS: _j.cos,
    OP_TAN: _j.tan,
    OP_EXP: _j.exp,
    OP_LOG: _j.log,
    OP_SQRT: _j.sqrt,
}


def _step(op, a, b, slots, consts, x, m):
    if op == OP_CONST:
        return _j.Jet2Scalar.constant(consts[a], m)
    if op == OP_VAR:
        return _j.Jet2Scalar.variable(x[a], a, m)
    if op == OP_ADD:
        return slots[a] + slots[b]
    if op == OP_SUB:
        return slots[a] - slots[b]
    if op == OP_MUL:
        return slots[a] * slots[b]
    if op == OP_DIV:
        return slots[a] / slots[b]
    if op == OP_NEG:
        return -slots[a]
    if op == OP_POW:
        return _j.pow_general(slots[a], slots[b])
    return _UNARY[op](slots[a])


def run_tape(code, consts, x, val, grad, hess) -> int:
    m = len(x)
    xs = [float(v) for v in x]
    cs = [float(c) for c in consts]
    slots = []
    for k, (op, a, b) in enumerate(code.tolist()):
        try:
            jet = _step(op, a, b, slots, cs, xs, m)
        except _j.DomainError:
            return k
        slots.append(jet)
        val[k] = jet.value
        grad[k] = jet.grad
        hess[k] = jet.hess
    return -1


def run_tape_batch(code, consts, outputs, xs, vals, grads, hesses):
    """Evaluate the tape at every row of ``xs``; keep only ``outputs`` slots.

    Returns ``(point, slot)`` of the first failure, or ``(-1, -1)``.
    """
    import numpy as np

    n_slots = code.shape[0]
    m = xs.shape[1]
    val = np.empty(n_slots)
    grad = np.empty((n_slots, m))
    hess = np.empty((n_slots, m, m))
    outs = np.asarray(outputs)
    for p in range(xs.shape[0]):
        status = run_tape(code, consts, xs[p], val, grad, hess)
        if status >= 0:
            return p, status
        vals[p] = val[outs]
        grads[p] = grad[outs]
        hesses[p] = hess[outs]
    return -1, -1
