"""Inner trade loop, jitted when numba is available.

The loop consumes the same numpy Generator stream, in the same order, as the
pure-Python operations in ``rules`` and ``acceptance``: pair indices, then the
rule's draws, then the acceptance draws. That makes a kernel run replayable
step by step against the surface functions, which the test suite exploits.

Without numba the undecorated Python implementation runs as-is (slow but
identical, since both paths share one code object and one bit generator).
"""

from __future__ import annotations

import numpy as np

from .acceptance import _exponential_q, _linear_q, _relative_q

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

RULE_IMMEDIATE = 0
RULE_RESHUFFLE = 1
RULE_SAVING = 2
RULE_UNIDIRECTIONAL = 3
RULE_MIXED = 4

CRIT_ALWAYS = 0
CRIT_LINEAR = 1
CRIT_EXPONENTIAL = 2
CRIT_RELATIVE = 3
CRIT_ASYMMETRIC = 4
CRIT_HETERO_LINEAR = 5

STATUS_OK = 0
STATUS_NONFINITE = 1

if njit is not None:
    _q_linear = njit(cache=True)(_linear_q)
    _q_exponential = njit(cache=True)(_exponential_q)
    _q_relative = njit(cache=True)(_relative_q)
else:  # pragma: no cover
    _q_linear = _linear_q
    _q_exponential = _exponential_q
    _q_relative = _relative_q


def _simulate_impl(
    wealth,
    unit_scales,
    mean0,
    rule_code,
    saving,
    uni_prob,
    dir_prob,
    crit_code,
    crit_scale,
    crit_shift,
    crit_block,
    n_sweeps,
    snap_sweeps,
    snap_out,
    growth,
    rng,
):
    n = wealth.shape[0]
    attempted = 0
    accepted = 0
    snap_ptr = 0
    # Reference scale of the absolute criteria; compounds with the per-sweep
    # growth factor so a growing economy uses its current mean wealth.
    cur_mean = mean0
    cur_shift = crit_shift

    for sweep in range(n_sweeps):
        for _ in range(n):
            j = rng.integers(0, n)
            k = rng.integers(0, n - 1)
            if k >= j:
                k += 1
            x_j = wealth[j]
            x_k = wealth[k]

            code = rule_code
            if code == RULE_MIXED:
                if uni_prob <= 0.0:
                    code = RULE_IMMEDIATE
                elif uni_prob >= 1.0:
                    code = RULE_UNIDIRECTIONAL
                elif rng.random() < uni_prob:
                    code = RULE_UNIDIRECTIONAL
                else:
                    code = RULE_IMMEDIATE

            if code == RULE_IMMEDIATE:
                eps_j = 1.0 - rng.random()
                eps_k = 1.0 - rng.random()
                delta = eps_k * x_k - eps_j * x_j
            elif code == RULE_RESHUFFLE:
                eps = 1.0 - rng.random()
                delta = eps * x_k - (1.0 - eps) * x_j
            elif code == RULE_SAVING:
                eps = 1.0 - rng.random()
                delta = (1.0 - saving) * (eps * x_k - (1.0 - eps) * x_j)
            else:
                donor_is_j = rng.random() < dir_prob
                eps = 1.0 - rng.random()
                if donor_is_j:
                    delta = -eps * (1.0 - saving) * x_j
                else:
                    delta = eps * (1.0 - saving) * x_k

            if crit_code == CRIT_ALWAYS:
                accept = True
            elif crit_code == CRIT_ASYMMETRIC:
                if delta == 0.0:
                    accept = True
                else:
                    if delta > 0.0:
                        gainer = j
                        loser = k
                    else:
                        gainer = k
                        loser = j
                    if wealth[gainer] >= wealth[loser]:
                        accept = True
                    else:
                        accept = rng.random() >= crit_block
            else:
                if crit_code == CRIT_LINEAR:
                    span = crit_scale * cur_mean
                    q_j = _q_linear(delta, span)
                    q_k = _q_linear(-delta, span)
                elif crit_code == CRIT_EXPONENTIAL:
                    span = crit_scale * cur_mean
                    q_j = _q_exponential(delta, span, cur_shift)
                    q_k = _q_exponential(-delta, span, cur_shift)
                elif crit_code == CRIT_RELATIVE:
                    q_j = _q_relative(delta, x_j, crit_scale)
                    q_k = _q_relative(-delta, x_k, crit_scale)
                else:
                    q_j = _q_linear(delta, unit_scales[j] * cur_mean)
                    q_k = _q_linear(-delta, unit_scales[k] * cur_mean)
                u_j = rng.random()
                u_k = rng.random()
                accept = u_j < q_j and u_k < q_k

            attempted += 1
            if accept:
                wealth[j] = x_j + delta
                wealth[k] = x_k - delta
                accepted += 1

        if growth != 1.0:
            for i in range(n):
                wealth[i] *= growth
            cur_mean *= growth
            cur_shift *= growth

        for i in range(n):
            if not np.isfinite(wealth[i]):
                return attempted, accepted, sweep + 1, snap_ptr, STATUS_NONFINITE

        if snap_ptr < snap_sweeps.shape[0] and sweep + 1 == snap_sweeps[snap_ptr]:
            for i in range(n):
                snap_out[snap_ptr, i] = wealth[i]
            snap_ptr += 1

    return attempted, accepted, n_sweeps, snap_ptr, STATUS_OK


if njit is not None:
    simulate = njit(cache=True)(_simulate_impl)
else:  # pragma: no cover
    simulate = _simulate_impl

#: Undecorated version of the loop; bit-identical to ``simulate`` and usable
#: for step-by-step debugging.
simulate_python = _simulate_impl
