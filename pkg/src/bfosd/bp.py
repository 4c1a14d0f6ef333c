"""Sum-product belief propagation on the Tanner graph of a decoding matrix.

Two schedules share the same edge updates: ``flooding`` updates every check
from the previous iteration's variable messages, ``serial`` sweeps the checks
in ascending row order and refreshes the touched variable beliefs after each
check. A check whose syndrome bit is 1 flips the sign of its outgoing
messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .gf2 import BitVector
from .model import DecodingModel

LLR_MAX = 30.0
SCHEDULES = ("flooding", "serial")


@dataclass(frozen=True)
class BPConfig:
    iterations: int = 20
    schedule: str = "serial"
    llr_max: float = LLR_MAX
    early_exit: bool = False

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not self.llr_max > 0:
            raise ValueError("llr_max must be positive")


@dataclass(frozen=True, eq=False)
class SoftOutput:
    llrs: np.ndarray
    hard_decisions: BitVector
    iterations_run: int
    converged: bool
    message_updates: int = 0


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """CSR adjacency in both directions; edge ``e`` joins ``edge_check[e]`` and ``edge_var[e]``."""

    n_checks: int
    n_vars: int
    check_ptr: np.ndarray
    edge_var: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray

    @property
    def n_edges(self) -> int:
        return int(self.edge_var.shape[0])

    @classmethod
    def from_dense(cls, h: np.ndarray) -> TannerGraph:
        h = np.asarray(h, dtype=np.uint8)
        m, n = h.shape
        checks, vars_ = np.nonzero(h)  # row-major, so edges are grouped by check
        check_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(checks, minlength=m), out=check_ptr[1:])
        by_var = np.argsort(vars_, kind="stable")
        var_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(vars_, minlength=n), out=var_ptr[1:])
        return cls(
            n_checks=m,
            n_vars=n,
            check_ptr=check_ptr,
            edge_var=vars_.astype(np.int64),
            var_ptr=var_ptr,
            var_edges=by_var.astype(np.int64),
        )


def tanner_graph(model: DecodingModel) -> TannerGraph:
    g = model.__dict__.get("_tanner")
    if g is None:
        g = TannerGraph.from_dense(model.h_dense)
        model.__dict__["_tanner"] = g
    return g


def prior_llrs(model: DecodingModel, llr_max: float = LLR_MAX) -> np.ndarray:
    """``log((1 - p) / p)`` per column, clipped to ``[-llr_max, llr_max]``."""
    p = np.asarray(model.priors, dtype=np.float64)
    with np.errstate(divide="ignore"):
        llr = np.log1p(-p) - np.log(p)
    return np.clip(llr, -llr_max, llr_max)


@njit(cache=True)
def _check_update(c, check_ptr, edge_var, post, c2v, v2c, tbuf, fwd, ext, syn_sign, llr_max, serial, new_post):
    start = check_ptr[c]
    stop = check_ptr[c + 1]
    deg = stop - start
    # incoming variable-to-check messages; ``post`` holds the unclipped belief
    for e in range(start, stop):
        v = edge_var[e]
        x = post[v] - c2v[e]
        ext[e - start] = x
        if x > llr_max:
            x = llr_max
        elif x < -llr_max:
            x = -llr_max
        v2c[e] = x
        tbuf[e - start] = math.tanh(0.5 * x)
    # leave-one-out products via prefix/suffix sweeps
    acc = 1.0
    for i in range(deg):
        fwd[i] = acc
        acc *= tbuf[i]
    acc = 1.0
    lim = math.tanh(0.5 * llr_max)
    for i in range(deg - 1, -1, -1):
        prod = fwd[i] * acc * syn_sign
        acc *= tbuf[i]
        if prod >= lim:
            msg = llr_max
        elif prod <= -lim:
            msg = -llr_max
        else:
            msg = 2.0 * math.atanh(prod)
        e = start + i
        c2v[e] = msg
        v = edge_var[e]
        if serial:
            post[v] = ext[i] + msg
        else:
            new_post[v] += msg


@njit(cache=True)
def _bp_kernel(check_ptr, edge_var, prior, syndrome, iterations, serial, llr_max, early_exit):
    m = check_ptr.shape[0] - 1
    n = prior.shape[0]
    n_edges = edge_var.shape[0]
    c2v = np.zeros(n_edges)
    v2c = np.zeros(n_edges)
    post = prior.copy()
    new_post = prior.copy()
    max_deg = 0
    for c in range(m):
        d = check_ptr[c + 1] - check_ptr[c]
        if d > max_deg:
            max_deg = d
    tbuf = np.empty(max_deg + 1)
    fwd = np.empty(max_deg + 1)
    ext = np.empty(max_deg + 1)
    hard = np.zeros(n, dtype=np.uint8)
    updates = 0
    it = 0
    converged = False
    for it_ in range(iterations):
        if not serial:
            for v in range(n):
                new_post[v] = prior[v]
        for c in range(m):
            sign = -1.0 if syndrome[c] else 1.0
            _check_update(c, check_ptr, edge_var, post, c2v, v2c, tbuf, fwd, ext, sign, llr_max, serial, new_post)
        updates += 2 * n_edges
        if not serial:
            for v in range(n):
                post[v] = new_post[v]
        it = it_ + 1
        if early_exit:
            for v in range(n):
                hard[v] = 1 if post[v] < 0.0 else 0
            ok = True
            for c in range(m):
                parity = 0
                for e in range(check_ptr[c], check_ptr[c + 1]):
                    parity ^= hard[edge_var[e]]
                if parity != syndrome[c]:
                    ok = False
                    break
            if ok:
                converged = True
                break
    out = np.empty(n)
    for v in range(n):
        x = post[v]
        if x > llr_max:
            x = llr_max
        elif x < -llr_max:
            x = -llr_max
        out[v] = x
    return out, it, updates, converged


def bp_decode(
    model: DecodingModel,
    syndrome: BitVector,
    iterations: int = 20,
    schedule: str = "serial",
    llr_max: float = LLR_MAX,
    early_exit: bool = False,
) -> SoftOutput:
    """Run a fixed number of sum-product iterations and return posterior LLRs.

    With ``iterations=0`` the prior LLRs come back unchanged. ``converged`` is
    set iff the hard decisions (negative LLR means 1) reproduce the syndrome;
    with ``early_exit`` the sweep stops at the first such iteration.
    """
    if len(syndrome) != model.n_detectors:
        raise ValueError(f"syndrome length {len(syndrome)} != detector count {model.n_detectors}")
    BPConfig(iterations, schedule, llr_max, early_exit)
    graph = tanner_graph(model)
    prior = prior_llrs(model, llr_max)
    syn = syndrome.to_array()
    if iterations == 0:
        post, it, updates = prior, 0, 0
    else:
        post, it, updates, _ = _bp_kernel(
            graph.check_ptr, graph.edge_var, prior, syn, iterations, schedule == "serial", llr_max, early_exit
        )
    hard = (post < 0).astype(np.uint8)
    check = (model.h_dense.astype(np.int64) @ hard) & 1 if model.n_detectors else np.zeros(0, np.int64)
    converged = bool(np.array_equal(check, syn))
    post.setflags(write=False)
    return SoftOutput(
        llrs=post,
        hard_decisions=BitVector.from_bits(hard),
        iterations_run=int(it),
        converged=converged,
        message_updates=int(updates),
    )


def bp_decode_config(model: DecodingModel, syndrome: BitVector, config: BPConfig) -> SoftOutput:
    return bp_decode(model, syndrome, config.iterations, config.schedule, config.llr_max, config.early_exit)
