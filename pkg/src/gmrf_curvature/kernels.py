"""Hot loops: lattice sweeps, lagged second moments, nested covariance sums.

Every kernel exists twice: a ``*_py`` reference written with plain Python
loops or vectorised numpy, and a numba twin compiled from the same source
(or a loop version of the numpy code). The public names dispatch on
:data:`gmrf_curvature._backend.BACKEND`.

Random numbers are always drawn by the caller and passed in, so both
backends consume identical streams and stay comparable.
"""
import math

import numpy as np

from . import _backend
from ._backend import njit

try:
    from numba import prange
except ImportError:  # pragma: no cover
    prange = range


# ---------------------------------------------------------------- sweeps

def sweep_raster_py(values, off_r, off_c, mu, sigma, beta, z, u, proposal_std, gibbs):
    """Sequential row-major sweep; returns the number of accepted moves."""
    n = values.shape[0]
    k = off_r.shape[0]
    inv2var = 1.0 / (2.0 * sigma * sigma)
    accepted = 0
    for r in range(n):
        for c in range(n):
            s = 0.0
            for t in range(k):
                s += values[(r + off_r[t]) % n, (c + off_c[t]) % n] - mu
            m = mu + beta * s
            if gibbs:
                values[r, c] = m + sigma * z[r, c]
                accepted += 1
            else:
                xo = values[r, c]
                xn = xo + proposal_std * z[r, c]
                d = ((xo - m) * (xo - m) - (xn - m) * (xn - m)) * inv2var
                if d >= 0.0 or u[r, c] < math.exp(d):
                    values[r, c] = xn
                    accepted += 1
    return accepted


_sweep_raster_nb = njit()(sweep_raster_py)


def sweep_colored_py(values, off_r, off_c, period, mu, sigma, beta, z, u, proposal_std, gibbs):
    """Block-coloured sweep: colour ``(r % period, c % period)``, colours in row-major order.

    Sites of one colour never neighbour each other (for ``period`` 2 with
    orders 1-2 and ``period`` 3 with order 3, on sides divisible by
    ``period``), so each colour is updated as one vectorised step.
    """
    inv2var = 1.0 / (2.0 * sigma * sigma)
    accepted = 0
    for a in range(period):
        for b in range(period):
            dev = values - mu
            s = np.zeros(values[a::period, b::period].shape)
            for dr, dc in zip(off_r, off_c):
                s += np.roll(dev, (-dr, -dc), axis=(0, 1))[a::period, b::period]
            m = mu + beta * s
            zs = z[a::period, b::period]
            if gibbs:
                values[a::period, b::period] = m + sigma * zs
                accepted += zs.size
            else:
                xo = values[a::period, b::period]
                xn = xo + proposal_std * zs
                d = ((xo - m) * (xo - m) - (xn - m) * (xn - m)) * inv2var
                take = (d >= 0.0) | (u[a::period, b::period] < np.exp(np.minimum(d, 0.0)))
                values[a::period, b::period] = np.where(take, xn, xo)
                accepted += int(take.sum())
    return accepted


@njit(parallel=True)
def _sweep_colored_nb(values, off_r, off_c, period, mu, sigma, beta, z, u, proposal_std, gibbs):
    n = values.shape[0]
    k = off_r.shape[0]
    inv2var = 1.0 / (2.0 * sigma * sigma)
    accepted = 0
    for a in range(period):
        for b in range(period):
            nrows = (n - a + period - 1) // period
            for ii in prange(nrows):
                r = a + ii * period
                for c in range(b, n, period):
                    s = 0.0
                    for t in range(k):
                        s += values[(r + off_r[t]) % n, (c + off_c[t]) % n] - mu
                    m = mu + beta * s
                    if gibbs:
                        values[r, c] = m + sigma * z[r, c]
                        accepted += 1
                    else:
                        xo = values[r, c]
                        xn = xo + proposal_std * z[r, c]
                        d = ((xo - m) * (xo - m) - (xn - m) * (xn - m)) * inv2var
                        if d >= 0.0 or u[r, c] < math.exp(d):
                            values[r, c] = xn
                            accepted += 1
    return accepted


# ------------------------------------------------------- lagged moments

def lag_moments_py(dev, lag_r, lag_c):
    """``out[t] = mean(dev * dev shifted by (lag_r[t], lag_c[t]))`` on the torus."""
    out = np.empty(lag_r.shape[0])
    for t in range(lag_r.shape[0]):
        shifted = np.roll(dev, (-lag_r[t], -lag_c[t]), axis=(0, 1))
        out[t] = np.mean(dev * shifted)
    return out


@njit()
def _lag_moments_nb(dev, lag_r, lag_c):
    n = dev.shape[0]
    out = np.empty(lag_r.shape[0])
    for t in range(lag_r.shape[0]):
        acc = 0.0
        for r in range(n):
            rr = (r + lag_r[t]) % n
            for c in range(n):
                acc += dev[r, c] * dev[rr, (c + lag_c[t]) % n]
        out[t] = acc / (n * n)
    return out


# ------------------------------------------------ nested covariance sums

def nested_sums_py(rho, sm):
    """The five neighbor sums feeding the closed-form Fisher components.

    Returns ``(sum_j s_ij, sum_jk s_jk, sum_jk s_ij s_ik,
    sum_jkl (s_ij s_kl + s_ik s_jl + s_il s_jk),
    sum_jklm (s_jk s_lm + s_jl s_km + s_jm s_kl))``.
    """
    s1 = np.einsum("j->", rho)
    s2 = np.einsum("jk->", sm)
    s3 = np.einsum("j,k->", rho, rho)
    s4 = (np.einsum("j,kl->", rho, sm)
          + np.einsum("k,jl->", rho, sm)
          + np.einsum("l,jk->", rho, sm))
    s5 = (np.einsum("jk,lm->", sm, sm)
          + np.einsum("jl,km->", sm, sm)
          + np.einsum("jm,kl->", sm, sm))
    return float(s1), float(s2), float(s3), float(s4), float(s5)


@njit()
def _nested_sums_nb(rho, sm):
    d = rho.shape[0]
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    s4 = 0.0
    s5 = 0.0
    for j in range(d):
        s1 += rho[j]
        for k in range(d):
            s2 += sm[j, k]
            s3 += rho[j] * rho[k]
            for l in range(d):
                s4 += rho[j] * sm[k, l] + rho[k] * sm[j, l] + rho[l] * sm[j, k]
                for m in range(d):
                    s5 += sm[j, k] * sm[l, m] + sm[j, l] * sm[k, m] + sm[j, m] * sm[k, l]
    return s1, s2, s3, s4, s5


# ------------------------------------------------------------- dispatch

def _pick(nb_fn, py_fn):
    return nb_fn if (_backend.BACKEND == "numba" and nb_fn is not None) else py_fn


def sweep_raster(*args):
    return _pick(_sweep_raster_nb, sweep_raster_py)(*args)


def sweep_colored(*args):
    return _pick(_sweep_colored_nb, sweep_colored_py)(*args)


def lag_moments(dev, lag_r, lag_c):
    return _pick(_lag_moments_nb, lag_moments_py)(dev, lag_r, lag_c)


def nested_sums(rho, sm):
    out = _pick(_nested_sums_nb, nested_sums_py)(
        np.ascontiguousarray(rho, dtype=np.float64),
        np.ascontiguousarray(sm, dtype=np.float64),
    )
    return tuple(float(v) for v in out)
