"""Method of moving asymptotes with a primal-dual Newton subsolver.

One mma_step solves the convex separable approximation

    minimize    f0(x) + a0 z + sum(c_i y_i + 0.5 d_i y_i^2)
    subject to  f_i(x) - a_i z - y_i <= 0,   x in [alfa, beta],
                y >= 0, z >= 0

built from the current values and gradients, with asymptotes adapted by
the standard oscillation rule. Intended for n large and m small (a few
constraints); the subsolver works in the m-dimensional dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SubsolverError(Exception):
    """The interior-point subsolver failed to reach its target accuracy."""


@dataclass(frozen=True)
class MMAParams:
    move: float = 0.2
    asyinit: float = 0.5
    asyincr: float = 1.2
    asydecr: float = 0.7
    albefa: float = 0.1
    raa0: float = 1e-5
    epsimin: float = 1e-9
    c_penalty: float = 1e4

    def __post_init__(self):
        if not 0.0 < self.move <= 1.0:
            raise ValueError("move limit must lie in (0, 1]")


@dataclass
class MMAState:
    n: int
    low: np.ndarray = None
    upp: np.ndarray = None
    xold1: np.ndarray = None
    xold2: np.ndarray = None
    iteration: int = 0

    @classmethod
    def fresh(cls, n: int) -> "MMAState":
        return cls(n=n)


def mma_step(x, df0dx, fval, dfdx, state: MMAState,
             params: MMAParams = MMAParams(),
             xmin=0.0, xmax=1.0) -> np.ndarray:
    """One MMA update; mutates state (asymptotes, history) and returns x_next.

    x, df0dx: length n. fval: length m. dfdx: shape (m, n).
    """
    x = np.asarray(x, dtype=float)
    df0dx = np.asarray(df0dx, dtype=float)
    fval = np.atleast_1d(np.asarray(fval, dtype=float))
    dfdx = np.atleast_2d(np.asarray(dfdx, dtype=float))
    n = x.size
    m = fval.size
    if dfdx.shape != (m, n):
        raise ValueError(f"dfdx shape {dfdx.shape} != ({m}, {n})")
    if not (np.all(np.isfinite(df0dx)) and np.all(np.isfinite(dfdx))):
        raise ValueError("gradients must be finite")
    xmin = np.broadcast_to(np.asarray(xmin, dtype=float), (n,))
    xmax = np.broadcast_to(np.asarray(xmax, dtype=float), (n,))
    state.iteration += 1

    xrange = xmax - xmin
    if state.iteration <= 2:
        low = x - params.asyinit * xrange
        upp = x + params.asyinit * xrange
    else:
        osc = (x - state.xold1) * (state.xold1 - state.xold2)
        factor = np.ones(n)
        factor[osc > 0] = params.asyincr
        factor[osc < 0] = params.asydecr
        low = x - factor * (state.xold1 - state.low)
        upp = x + factor * (state.upp - state.xold1)
        low = np.clip(low, x - 10.0 * xrange, x - 0.01 * xrange)
        upp = np.clip(upp, x + 0.01 * xrange, x + 10.0 * xrange)

    alfa = np.maximum.reduce([low + params.albefa * (x - low),
                              x - params.move * xrange, xmin])
    beta = np.minimum.reduce([upp - params.albefa * (upp - x),
                              x + params.move * xrange, xmax])

    xmami = np.maximum(xrange, 1e-5)
    ux1 = upp - x
    xl1 = x - low
    ux2 = ux1**2
    xl2 = xl1**2

    p0 = np.maximum(df0dx, 0.0)
    q0 = np.maximum(-df0dx, 0.0)
    pq0 = 0.001 * (p0 + q0) + params.raa0 / xmami
    p0 = (p0 + pq0) * ux2
    q0 = (q0 + pq0) * xl2

    P = np.maximum(dfdx, 0.0)
    Q = np.maximum(-dfdx, 0.0)
    PQ = 0.001 * (P + Q) + params.raa0 / xmami[None, :]
    P = (P + PQ) * ux2[None, :]
    Q = (Q + PQ) * xl2[None, :]
    b = P @ (1.0 / ux1) + Q @ (1.0 / xl1) - fval

    x_new = _subsolve(m, n, params.epsimin, low, upp, alfa, beta,
                      p0, q0, P, Q, b, params.c_penalty)

    state.xold2 = state.xold1
    state.xold1 = x.copy()
    state.low = low
    state.upp = upp
    return x_new


def _subsolve(m, n, epsimin, low, upp, alfa, beta, p0, q0, P, Q, b, c_pen):
    """Primal-dual interior-point solve of the MMA subproblem (m << n)."""
    a0 = 1.0
    a = np.zeros(m)
    c = np.full(m, c_pen)
    d = np.ones(m)

    epsi = 1.0
    x = 0.5 * (alfa + beta)
    y = np.ones(m)
    z = 1.0
    lam = np.ones(m)
    xsi = np.maximum(1.0 / (x - alfa), 1.0)
    eta = np.maximum(1.0 / (beta - x), 1.0)
    mu = np.maximum(1.0, 0.5 * c)
    zet = 1.0
    s = np.ones(m)

    def residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi):
        ux1 = upp - x
        xl1 = x - low
        plam = p0 + lam @ P
        qlam = q0 + lam @ Q
        gvec = P @ (1.0 / ux1) + Q @ (1.0 / xl1)
        rex = plam / ux1**2 - qlam / xl1**2 - xsi + eta
        rey = c + d * y - mu - lam
        rez = a0 - zet - a @ lam
        relam = gvec - a * z - y + s - b
        rexsi = xsi * (x - alfa) - epsi
        reeta = eta * (beta - x) - epsi
        remu = mu * y - epsi
        rezet = zet * z - epsi
        res = lam * s - epsi
        parts = [rex, rey, np.array([rez]), relam, rexsi, reeta, remu,
                 np.array([rezet]), res]
        r = np.concatenate(parts)
        return float(np.linalg.norm(r)), float(np.max(np.abs(r)))

    resinorm, resimax = residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi)
    while epsi > epsimin:
        inner = 0
        while resimax > 0.9 * epsi:
            inner += 1
            if inner > 200:
                # accept the current point and continue the barrier path;
                # the next decade re-attacks the same residuals
                break
            ux1 = upp - x
            xl1 = x - low
            ux2 = ux1**2
            xl2 = xl1**2
            plam = p0 + lam @ P
            qlam = q0 + lam @ Q
            gvec = P @ (1.0 / ux1) + Q @ (1.0 / xl1)
            GG = P / ux2[None, :] - Q / xl2[None, :]
            dpsidx = plam / ux2 - qlam / xl2
            delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - a @ lam - epsi / z
            dellam = gvec - a * z - y - b + epsi / lam
            diagx = 2.0 * (plam / (ux1 * ux2) + qlam / (xl1 * xl2))
            diagx = diagx + xsi / (x - alfa) + eta / (beta - x)
            diagy = d + mu / y
            diaglamyi = s / lam + 1.0 / diagy

            # reduced (m+1) x (m+1) system in (dlam, dz)
            blam = dellam + dely / diagy - GG @ (delx / diagx)
            Alam = np.diag(diaglamyi) + (GG / diagx[None, :]) @ GG.T
            AA = np.zeros((m + 1, m + 1))
            AA[:m, :m] = Alam
            AA[:m, m] = a
            AA[m, :m] = a
            AA[m, m] = -zet / z
            bb = np.concatenate([blam, [delz]])
            try:
                solut = np.linalg.solve(AA, bb)
            except np.linalg.LinAlgError as exc:
                raise SubsolverError("singular subproblem system") from exc
            dlam = solut[:m]
            dz = solut[m]
            dx = -delx / diagx - (dlam @ GG) / diagx
            dy = -dely / diagy + dlam / diagy
            dxsi = -xsi + epsi / (x - alfa) - xsi * dx / (x - alfa)
            deta = -eta + epsi / (beta - x) + eta * dx / (beta - x)
            dmu = -mu + epsi / y - mu * dy / y
            dzet = -zet + epsi / z - zet * dz / z
            ds = -s + epsi / lam - s * dlam / lam

            # largest step keeping all positivity constraints
            xx = np.concatenate([y, [z], lam, xsi, eta, mu, [zet], s])
            dxx = np.concatenate([dy, [dz], dlam, dxsi, deta, dmu, [dzet], ds])
            stmxx = np.max(-1.01 * dxx / xx)
            stmalfa = np.max(-1.01 * dx / (x - alfa))
            stmbeta = np.max(1.01 * dx / (beta - x))
            steg = 1.0 / max(stmxx, stmalfa, stmbeta, 1.0)

            old = (x, y, z, lam, xsi, eta, mu, zet, s)
            resinew = 2.0 * resinorm
            for _ in range(50):
                x = old[0] + steg * dx
                y = old[1] + steg * dy
                z = old[2] + steg * dz
                lam = old[3] + steg * dlam
                xsi = old[4] + steg * dxsi
                eta = old[5] + steg * deta
                mu = old[6] + steg * dmu
                zet = old[7] + steg * dzet
                s = old[8] + steg * ds
                resinew, resimax = residuals(x, y, z, lam, xsi, eta, mu,
                                             zet, s, epsi)
                if resinew <= resinorm:
                    break
                steg *= 0.5
            resinorm = resinew
        epsi *= 0.1
        resinorm, resimax = residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi)
    return x
