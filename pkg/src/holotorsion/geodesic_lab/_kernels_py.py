"""Pure numpy geodesic kernel, vectorised across rays.

Same contract as the compiled ``_kernels`` module; see :func:`rk4_batch`.
"""
import numpy as np

BACKEND = "python"
# EG - F^2 below this fraction of (E + G)^2 counts as degenerate
DEGENERACY_TOL = 1e-12

_CONST, _U, _V, _ADD, _SUB, _MUL, _DIV, _NEG, _POWI, _SIN, _COS = range(11)


def _run(code, consts, u, v):
    regs = []
    put = regs.append
    for op, a, b in code:
        if op == _CONST:
            put(consts[a])
        elif op == _U:
            put(u)
        elif op == _V:
            put(v)
        elif op == _ADD:
            put(regs[a] + regs[b])
        elif op == _SUB:
            put(regs[a] - regs[b])
        elif op == _MUL:
            put(regs[a] * regs[b])
        elif op == _DIV:
            put(regs[a] / regs[b])
        elif op == _NEG:
            put(-regs[a])
        elif op == _POWI:
            put(regs[a] ** b)
        elif op == _SIN:
            put(np.sin(regs[a]))
        else:
            put(np.cos(regs[a]))
    return regs


def _prepare(code, consts):
    return [tuple(int(x) for x in row) for row in np.asarray(code)], [float(c) for c in consts]


def eval_programs(code, consts, outputs, u, v):
    """Values of the output registers at the points ``(u[i], v[i])``; shape (nout, ...)."""
    u = np.asarray(u, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), u.shape)
    ins, cs = _prepare(code, consts)
    with np.errstate(all="ignore"):
        regs = _run(ins, cs, u, v)
        return np.array([np.broadcast_to(regs[int(k)], u.shape) for k in outputs], dtype=float)


def _rhs(ins, cs, outputs, y):
    u, v, p, q = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    regs = _run(ins, cs, u, v)
    E, F, G, Eu, Ev, Fu, Fv, Gu, Gv = (regs[k] for k in outputs)
    det = E * G - F * F
    ok = np.broadcast_to(det > DEGENERACY_TOL * (E + G) ** 2, u.shape)
    den = 2.0 * np.where(ok, det, 1.0)
    g111 = (Ev * F - 2.0 * Fu * F + Eu * G) / den
    g222 = (Gv * E - 2.0 * Fv * F + Gu * F) / den
    g211 = (-Ev * E + 2.0 * Fu * E - Eu * F) / den
    g122 = (-Gv * F + 2.0 * Fv * G - Gu * G) / den
    g112 = (Ev * G - Gu * F) / den
    g212 = (-Ev * F + Gu * E) / den
    pp, pq, qq = p * p, p * q, q * q
    out = np.empty_like(y)
    out[:, 0] = p
    out[:, 1] = q
    out[:, 2] = -(g111 * pp + 2.0 * g112 * pq + g122 * qq)
    out[:, 3] = -(g211 * pp + 2.0 * g212 * pq + g222 * qq)
    return out, ok & np.all(np.isfinite(out), axis=1)


def rk4_batch(code, consts, outputs, init, h, nsteps, last):
    """Classical RK4 for ``(u, v, p, q)' = (p, q, -e1, -e2)``.

    ``code``/``consts`` form a register program whose ``outputs`` are, in
    order, E, F, G, E_u, E_v, F_u, F_v, G_u, G_v.  Each ray takes ``nsteps``
    steps of size ``h`` and then one of size ``last`` when ``last > 0``.
    Returns ``(traj, nvalid)``: ``traj`` has shape (m, nsamples, 4) and rows
    from ``nvalid[i]`` on are NaN (the metric degenerated there).
    """
    ins, cs = _prepare(code, consts)
    outs = [int(k) for k in outputs]
    y = np.array(init, dtype=float, copy=True).reshape(-1, 4)
    m = y.shape[0]
    total = int(nsteps) + (1 if last > 0 else 0)
    traj = np.full((m, total + 1, 4), np.nan)
    traj[:, 0] = y
    nvalid = np.ones(m, dtype=np.int64)
    with np.errstate(all="ignore"):
        _, alive = _rhs(ins, cs, outs, y)
        for step in range(total):
            hh = h if step < nsteps else last
            k1, ok1 = _rhs(ins, cs, outs, y)
            k2, ok2 = _rhs(ins, cs, outs, y + 0.5 * hh * k1)
            k3, ok3 = _rhs(ins, cs, outs, y + 0.5 * hh * k2)
            k4, ok4 = _rhs(ins, cs, outs, y + hh * k3)
            ynew = y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            alive = alive & ok1 & ok2 & ok3 & ok4 & np.all(np.isfinite(ynew), axis=1)
            if not alive.any():
                break
            traj[alive, step + 1] = ynew[alive]
            nvalid[alive] = step + 2
            y = np.where(alive[:, None], ynew, y)
    return traj, nvalid
