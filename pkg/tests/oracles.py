"""Independent reference implementations used only to check the package.

Everything here is written directly from the mathematical definitions with
naive loops or generic solvers, deliberately sharing no code with the package.
"""

from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------------------
# QP oracle for the SVM dual

def project_box_hyperplane(z: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection of z onto {a : 0 <= a <= C, y @ a = 0}, y in {-1,+1}.

    The projection is a_i = clip(z_i - lam * y_i, 0, C) for the multiplier lam
    solving y @ a(lam) = 0; g(lam) is piecewise linear and nonincreasing, so
    the root sits between two breakpoints and is solved exactly.
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def g(lam: float) -> float:
        return float(y @ np.clip(z - lam * y, 0.0, C))

    bps = np.unique(np.concatenate([(z - C) * y, z * y]))
    lo, hi = bps[0], bps[-1]
    g_lo, g_hi = g(lo), g(hi)
    if g_lo <= 0.0:
        lam = lo
    elif g_hi >= 0.0:
        lam = hi
    else:
        lam = lo
        for nxt in bps[1:]:
            g_nxt = g(nxt)
            if g_nxt <= 0.0:
                g_cur = g(lam)
                if g_cur == g_nxt:
                    lam = nxt
                else:
                    lam = lam + (nxt - lam) * g_cur / (g_cur - g_nxt)
                break
            lam = nxt
    return np.clip(z - lam * y, 0.0, C)


def qp_objective(K: np.ndarray, y: np.ndarray, a: np.ndarray) -> float:
    """SVM dual objective (to be maximized): sum a - 1/2 (a*y)' K (a*y)."""
    ay = a * y
    return float(a.sum() - 0.5 * ay @ K @ ay)


def _kkt_polish(K: np.ndarray, y: np.ndarray, a: np.ndarray, C: float) -> np.ndarray:
    """Refine by solving the equality-constrained QP on the free variables."""
    Q = K * np.outer(y, y)
    best = a.copy()
    for _ in range(8):
        eps = 1e-7 * max(1.0, C)
        free = (best > eps) & (best < C - eps)
        if not free.any():
            break
        f = np.flatnonzero(free)
        b = np.flatnonzero(~free)
        rhs_top = 1.0 - Q[np.ix_(f, b)] @ best[b]
        rhs_bot = -float(y[b] @ best[b])
        kkt = np.zeros((len(f) + 1, len(f) + 1))
        kkt[: len(f), : len(f)] = Q[np.ix_(f, f)]
        kkt[: len(f), -1] = y[f]
        kkt[-1, : len(f)] = y[f]
        rhs = np.concatenate([rhs_top, [rhs_bot]])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        x = sol[: len(f)]
        if np.any(x < -1e-9) or np.any(x > C + 1e-9):
            break
        cand = best.copy()
        cand[f] = np.clip(x, 0.0, C)
        cand = project_box_hyperplane(cand, y, C)
        if qp_objective(K, y, cand) < qp_objective(K, y, best) - 1e-12:
            break
        if np.allclose(cand, best, atol=1e-14):
            best = cand
            break
        best = cand
    return best


def qp_oracle(K: np.ndarray, y: np.ndarray, C: float, max_iter: int = 200_000) -> np.ndarray:
    """Solve the SVM dual by projected gradient with an exact projection,
    then polish the free variables through the KKT system."""
    y = np.asarray(y, dtype=np.float64)
    Q = K * np.outer(y, y)
    n = len(y)
    eigs = np.linalg.eigvalsh(Q)
    step = 1.0 / max(float(eigs[-1]), 1e-12)
    a = project_box_hyperplane(np.zeros(n), y, C)
    stall = 0
    for _ in range(max_iter):
        grad = Q @ a - 1.0
        a_new = project_box_hyperplane(a - step * grad, y, C)
        if float(np.max(np.abs(a_new - a))) < 1e-14:
            stall += 1
            if stall >= 3:
                a = a_new
                break
        else:
            stall = 0
        a = a_new
    return _kkt_polish(K, y, a, C)


# ---------------------------------------------------------------------------
# neural-network oracles

def conv1d_oracle(I_pad: np.ndarray, filters: np.ndarray, bias: np.ndarray, st: int) -> np.ndarray:
    """Sliding-window dot products with explicit loops; ReLU at the end."""
    v, l = I_pad.shape
    k, flat = filters.shape
    ws = flat // v
    m = (l - ws) // st + 1
    out = np.zeros((k, m))
    for fi in range(k):
        for j in range(m):
            acc = bias[fi]
            for w in range(ws):
                for r in range(v):
                    acc += filters[fi, w * v + r] * I_pad[r, j * st + w]
            out[fi, j] = acc if acc > 0.0 else 0.0
    return out


def lstm_oracle(xs, params) -> np.ndarray:
    """Hand-unrolled LSTM recurrence, one gate at a time."""
    u = params["b_i"].shape[0]
    h = np.zeros(u)
    c = np.zeros(u)
    for x in xs:
        i_gate = 1.0 / (1.0 + np.exp(-(params["w_i"] @ x + params["u_i"] @ h + params["b_i"])))
        f_gate = 1.0 / (1.0 + np.exp(-(params["w_f"] @ x + params["u_f"] @ h + params["b_f"])))
        o_gate = 1.0 / (1.0 + np.exp(-(params["w_o"] @ x + params["u_o"] @ h + params["b_o"])))
        g_cand = np.tanh(params["w_g"] @ x + params["u_g"] @ h + params["b_g"])
        c = f_gate * c + i_gate * g_cand
        h = o_gate * np.tanh(c)
    return h


def finite_diff_grads(loss_fn, params: dict[str, np.ndarray], h: float = 1e-5) -> dict[str, np.ndarray]:
    """Central finite differences of loss_fn() w.r.t. every tensor in params.

    loss_fn must read the (mutated in place) params dict on each call.
    """
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat_p = p.ravel()
        flat_g = g.ravel()
        for idx in range(flat_p.size):
            orig = flat_p[idx]
            flat_p[idx] = orig + h
            f_plus = loss_fn()
            flat_p[idx] = orig - h
            f_minus = loss_fn()
            flat_p[idx] = orig
            flat_g[idx] = (f_plus - f_minus) / (2.0 * h)
        grads[name] = g
    return grads


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    return float(np.linalg.norm(a - b)) / max(na + nb, 1e-12)


# ---------------------------------------------------------------------------
# metrics oracle

def f1_oracle(cm: np.ndarray) -> tuple[list[float], float, float]:
    """(per-class F1, macro-F1, micro-F1) straight from the definitions."""
    n = cm.shape[0]
    f1s = []
    tp_total = 0
    fp_total = 0
    fn_total = 0
    for i in range(n):
        tp = int(cm[i][i])
        fp = sum(int(cm[j][i]) for j in range(n) if j != i)
        fn = sum(int(cm[i][j]) for j in range(n) if j != i)
        tp_total += tp
        fp_total += fp
        fn_total += fn
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1s.append(2 * p * r / (p + r) if p + r > 0 else 0.0)
    macro = sum(f1s) / n
    micro_p = tp_total / (tp_total + fp_total) if tp_total + fp_total > 0 else 0.0
    micro_r = tp_total / (tp_total + fn_total) if tp_total + fn_total > 0 else 0.0
    micro = (
        2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r > 0 else 0.0
    )
    return f1s, macro, micro
