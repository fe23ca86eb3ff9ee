"""Recurrent-layer kernels: batched forward pass and backpropagation
through time for one layer of standard LSTM cells (input/forget/output
gates, tanh candidate and cell output, zero initial state).

Gate rows in the stacked weight matrix are ordered input, forget,
candidate, output; each row block multiplies the concatenated
``(x_t, h_{t-1})`` vector. Sigmoids are computed as ``(1 + tanh(z/2))/2``
so the pure-numpy fallback path never overflows.
"""

import numpy as np

from ._accel import jit


@jit
def lstm_layer_forward(x_seq, W, b):
    """One layer over a window batch.

    x_seq: (B, T, D); W: (4H, D+H); b: (4H,).
    Returns (xh_seq, c_seq, gates, h_seq) where xh_seq (B, T, D+H) stacks
    the per-step gate inputs, c_seq/h_seq (B, T+1, H) carry the states with
    index 0 the zero initial state, and gates (B, T, 4H) the activated
    gate values, ordered as in W.
    """
    B, T, D = x_seq.shape
    H4, DH = W.shape
    H = H4 // 4
    WT = np.ascontiguousarray(W.T)

    xh_seq = np.empty((B, T, DH))
    gates = np.empty((B, T, H4))
    h_seq = np.zeros((B, T + 1, H))
    c_seq = np.zeros((B, T + 1, H))

    for t in range(T):
        xh = np.empty((B, DH))
        xh[:, :D] = x_seq[:, t]
        xh[:, D:] = h_seq[:, t]
        z = np.dot(xh, WT) + b
        i = 0.5 * (1.0 + np.tanh(0.5 * z[:, :H]))
        f = 0.5 * (1.0 + np.tanh(0.5 * z[:, H:2 * H]))
        g = np.tanh(z[:, 2 * H:3 * H])
        o = 0.5 * (1.0 + np.tanh(0.5 * z[:, 3 * H:]))
        c = f * c_seq[:, t] + i * g
        h = o * np.tanh(c)
        xh_seq[:, t] = xh
        gates[:, t, :H] = i
        gates[:, t, H:2 * H] = f
        gates[:, t, 2 * H:3 * H] = g
        gates[:, t, 3 * H:] = o
        c_seq[:, t + 1] = c
        h_seq[:, t + 1] = h
    return xh_seq, c_seq, gates, h_seq


@jit
def lstm_layer_backward(W, xh_seq, c_seq, gates, dh_out_seq):
    """Gradients for one layer given dL/dh_t at every step.

    Returns (dx_seq, dW, db) with dx_seq (B, T, D) the gradient w.r.t. the
    layer's inputs, for chaining into the layer below.
    """
    B, T, DH = xh_seq.shape
    H4 = W.shape[0]
    H = H4 // 4
    D = DH - H

    dz_seq = np.empty((B, T, H4))
    dx_seq = np.empty((B, T, D))
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))

    for t in range(T - 1, -1, -1):
        dh_t = dh + dh_out_seq[:, t]
        i = gates[:, t, :H]
        f = gates[:, t, H:2 * H]
        g = gates[:, t, 2 * H:3 * H]
        o = gates[:, t, 3 * H:]
        tc = np.tanh(c_seq[:, t + 1])
        dc = dc + dh_t * o * (1.0 - tc * tc)
        do = dh_t * tc
        dz = np.empty((B, H4))
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H:2 * H] = dc * c_seq[:, t] * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H:] = do * o * (1.0 - o)
        dz_seq[:, t] = dz
        dxh = np.dot(dz, W)
        dx_seq[:, t] = dxh[:, :D]
        dh = dxh[:, D:].copy()
        dc = dc * f

    dz_flat = dz_seq.reshape(B * T, H4)
    xh_flat = xh_seq.reshape(B * T, DH)
    dW = np.dot(dz_flat.T.copy(), xh_flat)
    db = dz_flat.sum(axis=0)
    return dx_seq, dW, db
