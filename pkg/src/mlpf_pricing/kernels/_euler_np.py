"""Pure-NumPy Euler propagation kernels (fallback backend).

The Cython backend mirrors these loops expression for expression; any
change here must be replicated there or the backends stop being
bit-identical (see tests/test_kernels.py).
"""

import math

import numpy as np

from ..models import GBM_KIND, LANGEVIN_KIND

PRICE_FLOOR = 1e-12


def _steps(s, v, w, b, kind, params, h, sqrt_h):
    """Advance (s, v) in place by one Euler step per draw column.

    Drift uses step h; diffusion uses the explicit sqrt_h factor, which
    differs from sqrt(h) only for the coarse side of a coupled pair (its
    summed increments keep the fine-step scaling).
    """
    n_steps = w.shape[1]
    if kind == GBM_KIND:
        r, sigma = params
        for m in range(n_steps):
            s[:] = s + r * s * h + sigma * s * sqrt_h * w[:, m]
            np.maximum(s, PRICE_FLOOR, out=s)
    elif kind == LANGEVIN_KIND:
        r, sigma, beta, dof = params
        for m in range(n_steps):
            wm = w[:, m]
            bm = b[:, m]
            s_new = s + r * s * h + np.abs(sigma * v * s) * sqrt_h * wm
            v_new = v + 0.5 * (-(dof + 1.0) * v / (dof + v * v)) * h + beta * sqrt_h * bm
            np.maximum(s_new, PRICE_FLOOR, out=s)
            v[:] = v_new
    else:
        raise ValueError(f"unknown model kind {kind}")


def propagate(s, v, w, b, kind, params, h):
    """Advance particle arrays (s, v) in place by w.shape[1] steps of size h."""
    _steps(s, v, w, b, kind, params, h, math.sqrt(h))


def propagate_coupled(sf, vf, sc, vc, w, b, kind, params, h_fine):
    """Advance a coupled fine/coarse pair in place over one segment.

    The fine chain takes one step of size h_fine per draw column; the
    coarse chain takes one step of size 2*h_fine per draw pair, driven by
    sqrt(h_fine) * (W(2m) + W(2m+1)) so its increment variance equals the
    coarse step size and the coarse marginal matches the single-level law.
    """
    if w.shape[1] % 2 != 0:
        raise ValueError("coupled propagation needs an even number of fine steps")
    _steps(sf, vf, w, b, kind, params, h_fine, math.sqrt(h_fine))
    w2 = w[:, 0::2] + w[:, 1::2]
    b2 = b[:, 0::2] + b[:, 1::2] if b is not None and b.size else b
    _steps(sc, vc, w2, b2, kind, params, 2.0 * h_fine, math.sqrt(h_fine))
