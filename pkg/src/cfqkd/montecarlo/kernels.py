"""Per-pulse sampling kernels (numba and numpy twins).

Both kernels fill ``out`` (shape ``(n, N_FIELDS)``, int16) for pulses
``start .. start + n - 1`` and produce identical bytes for identical inputs.
Draw slots within a pulse's stream:

    0 Alice's polarization   1 Bob's polarization   2 measure-or-not
    3 Eve's polarization / photon count   4 y, z or z0 decision
    5..9 detector branches (5 alone for single photons)   10 side measurement
"""
from __future__ import annotations

import numpy as np

from .._jit import njit
from .optics import BLINDED, BLIND_REDUCE, EMPTY, FORCED, HONEST, INFORMED, N_DETECTORS
from .rng import uniform, uniform_array

# record columns, in PulseRecord order
FIELDS = (
    "alice_pol",
    "bob_pol",
    "eve_action",
    "eve_value",
    "d0_click",
    "d1_click",
    "d2_click",
    "d0_blinded",
    "d1_blinded",
    "d2_blinded",
    "eve_knows_bob",
    "eve_knows_alice",
)
N_FIELDS = len(FIELDS)
ACTION_NONE, ACTION_BLIND_REDUCE, ACTION_MEASURE = 0, 1, 2


@njit(cache=True, nogil=True)
def sample_pulses_numba(key, start, out, code, single, x, y, z, z0, probs, modes, cdf, side):
    n = out.shape[0]
    last = cdf.shape[0] - 1
    clicks = np.zeros(N_DETECTORS, dtype=np.bool_)
    for j in range(n):
        i = start + j
        a = 0 if uniform(key, i, 0) < 0.5 else 1
        b = 0 if uniform(key, i, 1) < 0.5 else 1
        action = ACTION_NONE
        value = 0
        knows_bob = 0
        knows_alice = 0
        flag = 0
        branch = HONEST
        if code >= 1:
            knows_bob = 1
            if code >= 2 and uniform(key, i, 2) < x:
                action = ACTION_MEASURE
                u = uniform(key, i, 3)
                k = 0
                while k < last and u >= cdf[k]:
                    k += 1
                value = k
                d = uniform(key, i, 4)
                if k > 0:
                    branch = INFORMED
                    knows_alice = 1
                    if a == b:
                        flag = 1 if d < y else 0
                    elif code == 5:
                        flag = 1 if d < z0 else 0
                else:
                    branch = EMPTY
                    if code == 2:
                        flag = 1 if d < z else 0
            else:
                action = ACTION_BLIND_REDUCE
                branch = BLIND_REDUCE
                flag = 0 if uniform(key, i, 3) < 0.5 else 1
                value = flag
                if code >= 2 and flag == b and a == b:
                    knows_alice = 1 if uniform(key, i, 10) < side else 0
        s = ((branch * 2 + a) * 2 + b) * 2 + flag

        if single:
            u = uniform(key, i, 5)
            acc = 0.0
            hit = -1
            for det in range(N_DETECTORS):
                clicks[det] = modes[s, det] == FORCED
                if modes[s, det] == 0 and hit < 0:
                    acc += probs[s, det]
                    if u < acc:
                        hit = det
            if hit >= 0:
                clicks[hit] = True
        else:
            for det in range(N_DETECTORS):
                m = modes[s, det]
                if m == FORCED:
                    clicks[det] = True
                elif m == BLINDED:
                    clicks[det] = False
                else:
                    clicks[det] = uniform(key, i, 5 + det) < probs[s, det]

        out[j, 0] = a
        out[j, 1] = b
        out[j, 2] = action
        out[j, 3] = value
        out[j, 4] = clicks[0] or clicks[1]
        out[j, 5] = clicks[2] or clicks[3]
        out[j, 6] = clicks[4]
        out[j, 7] = modes[s, 0] == BLINDED and modes[s, 1] == BLINDED
        out[j, 8] = modes[s, 2] == BLINDED and modes[s, 3] == BLINDED
        out[j, 9] = modes[s, 4] == BLINDED
        out[j, 10] = knows_bob
        out[j, 11] = knows_alice


def sample_pulses_numpy(key, start, out, code, single, x, y, z, z0, probs, modes, cdf, side):
    n = out.shape[0]
    idx = np.arange(start, start + n, dtype=np.uint64)
    a = (uniform_array(key, idx, 0) >= 0.5).astype(np.int64)
    b = (uniform_array(key, idx, 1) >= 0.5).astype(np.int64)
    zeros = np.zeros(n, dtype=np.int64)
    action, value, flag = zeros.copy(), zeros.copy(), zeros.copy()
    branch = np.full(n, HONEST, dtype=np.int64)
    knows_bob = np.full(n, 1 if code >= 1 else 0, dtype=np.int64)
    knows_alice = zeros.copy()

    if code >= 1:
        measure = uniform_array(key, idx, 2) < x if code >= 2 else np.zeros(n, dtype=bool)
        u3 = uniform_array(key, idx, 3)

        brl = ~measure
        action[brl] = ACTION_BLIND_REDUCE
        branch[brl] = BLIND_REDUCE
        eve_pol = (u3 >= 0.5).astype(np.int64)
        flag[brl] = eve_pol[brl]
        value[brl] = eve_pol[brl]
        if code >= 2:
            mimic = brl & (eve_pol == b) & (a == b)
            knows_alice[mimic] = uniform_array(key, idx[mimic], 10) < side

            count = np.minimum(np.searchsorted(cdf, u3, side="right"), cdf.size - 1)
            d = uniform_array(key, idx, 4)
            action[measure] = ACTION_MEASURE
            value[measure] = count[measure]
            informed = measure & (count > 0)
            empty = measure & (count == 0)
            branch[informed] = INFORMED
            branch[empty] = EMPTY
            knows_alice[informed] = 1
            same = a == b
            flag[informed & same] = d[informed & same] < y
            if code == 5:
                flag[informed & ~same] = d[informed & ~same] < z0
            if code == 2:
                flag[empty] = d[empty] < z

    s = ((branch * 2 + a) * 2 + b) * 2 + flag
    m = modes[s]
    clicks = m == FORCED
    normal = m == 0
    if single:
        u = uniform_array(key, idx, 5)
        acc = np.zeros(n)
        hit = np.full(n, -1, dtype=np.int64)
        for det in range(N_DETECTORS):
            live = normal[:, det] & (hit < 0)
            acc = np.where(live, acc + probs[s, det], acc)
            hit = np.where(live & (u < acc), det, hit)
        for det in range(N_DETECTORS):
            clicks[:, det] |= hit == det
    else:
        for det in range(N_DETECTORS):
            clicks[:, det] |= normal[:, det] & (uniform_array(key, idx, 5 + det) < probs[s, det])

    blinded = m == BLINDED
    cols = (
        a,
        b,
        action,
        value,
        clicks[:, 0] | clicks[:, 1],
        clicks[:, 2] | clicks[:, 3],
        clicks[:, 4],
        blinded[:, 0] & blinded[:, 1],
        blinded[:, 2] & blinded[:, 3],
        blinded[:, 4],
        knows_bob,
        knows_alice,
    )
    for col, data in enumerate(cols):
        out[:, col] = data
