"""Compiled inner loop for Monte Carlo propagation of one qubit state."""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def survival_from_zero(cx, cy, cz, sample, delta, epsilon, out):
    """Propagate |0> through every sub-step for each noise realization.

    Sub-step ``k`` of realization ``r`` applies ``exp(-i (ax X + ay Y + az Z))`` with
    ``ax = (1 + eps) cx[k]``, ``ay = (1 + eps) cy[k]``, ``az = delta cz[k]``, where
    the noise values are ``delta[r, sample[k]]`` and ``epsilon[r, sample[k]]``.
    Writes ``|<0|psi_final>|^2`` into ``out[r]``.
    """
    n_real = delta.shape[0]
    n_steps = cx.shape[0]
    for r in range(n_real):
        a0 = 1.0 + 0.0j
        a1 = 0.0 + 0.0j
        for k in range(n_steps):
            s = sample[k]
            scale = 1.0 + epsilon[r, s]
            ax = scale * cx[k]
            ay = scale * cy[k]
            az = delta[r, s] * cz[k]
            rr = math.sqrt(ax * ax + ay * ay + az * az)
            if rr == 0.0:
                continue
            c = math.cos(rr)
            sn = math.sin(rr) / rr
            u00 = complex(c, -sn * az)
            u01 = complex(-sn * ay, -sn * ax)
            u10 = complex(sn * ay, -sn * ax)
            u11 = complex(c, sn * az)
            b0 = u00 * a0 + u01 * a1
            b1 = u10 * a0 + u11 * a1
            a0 = b0
            a1 = b1
        out[r] = a0.real * a0.real + a0.imag * a0.imag


def survival_probabilities(cx, cy, cz, sample, delta, epsilon) -> np.ndarray:
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    epsilon = np.ascontiguousarray(epsilon, dtype=np.float64)
    out = np.empty(delta.shape[0])
    survival_from_zero(
        np.ascontiguousarray(cx, dtype=np.float64),
        np.ascontiguousarray(cy, dtype=np.float64),
        np.ascontiguousarray(cz, dtype=np.float64),
        np.ascontiguousarray(sample, dtype=np.int64),
        delta,
        epsilon,
        out,
    )
    return out
