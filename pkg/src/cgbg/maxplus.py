"""Anytime approximate maximization by damped max-sum message passing.

Messages flow both ways over every factor-variable edge.  A variable tells a
factor how much payoff each of its values can collect elsewhere; a factor
tells a variable the best score its table can contribute per value.  Sent
messages are max-normalized (largest entry shifted to zero) and damped
toward the previously sent message.  After every iteration the per-variable
belief argmax is decoded and re-evaluated exactly; the best candidate seen
across all iterations and restarts is returned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _mpkernel
from .errors import DeadlineExceeded
from .factorgraph import FactorGraph

SCHEDULES = ("sequential-random", "sequential-fixed", "parallel")

_MAX_FACTOR_DEGREE = 64


@dataclass(frozen=True)
class MaxPlusParams:
    restarts: int = 10
    max_iterations: int = 25
    damping: float = 0.2
    schedule: str = "sequential-random"
    convergence_tolerance: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.convergence_tolerance < 0:
            raise ValueError("convergence_tolerance must be nonnegative")


@dataclass
class MaxPlusResult:
    assignment: tuple[int, ...]
    exact_value: float
    converged: bool
    iterations_used: tuple[int, ...]
    messages_sent: int
    operations: int = 0


class MaxPlusState:
    """Mutable message state for one solver run over an immutable graph."""

    def __init__(self, fg: FactorGraph, params: MaxPlusParams):
        self.params = params
        self.rng = np.random.default_rng(params.seed)
        self.dom = fg.domains()
        degrees = [len(f.variables) for f in fg.factors]
        if max(degrees) > _MAX_FACTOR_DEGREE:
            raise ValueError(f"factor degree above {_MAX_FACTOR_DEGREE} is unsupported")
        self.num_vars = len(fg.variables)
        self.fptr = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
        self.fvar = np.array(
            [v for f in fg.factors for v in f.variables], dtype=np.int64
        )
        self.e_fac = np.repeat(np.arange(len(fg.factors), dtype=np.int64), degrees)
        self.num_edges = int(self.fvar.shape[0])
        tables = [f.table.reshape(-1) for f in fg.factors]
        self.ftab = np.concatenate(tables)
        self.ftabptr = np.concatenate(
            [[0], np.cumsum([t.size for t in tables])]
        ).astype(np.int64)
        order = np.argsort(self.fvar, kind="stable")
        self.vedge = order.astype(np.int64)
        counts = np.bincount(self.fvar, minlength=self.num_vars)
        self.vptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.max_dom = int(self.dom.max())
        self.msg_vf = np.zeros((self.num_edges, self.max_dom))
        self.msg_fv = np.zeros((self.num_edges, self.max_dom))
        self._entry_mask = (
            np.arange(self.max_dom)[None, :] < self.dom[self.fvar][:, None]
        )
        self._noise_scale = float(np.mean(np.abs(self.ftab))) if self.ftab.size else 0.0
        # canonical directed-edge pool: variable sends (grouped by variable),
        # then factor sends (edge order)
        var_sends = self.vedge.copy()
        fac_sends = np.arange(self.num_edges, dtype=np.int64) + self.num_edges
        self.pool = np.concatenate([var_sends, fac_sends])
        self.messages_sent = 0
        self.operations = 0

    def reset_messages(self, randomize: bool) -> None:
        """Zero messages for the canonical run; uniform [-s, s] entries
        (s = mean absolute table entry) for later restarts."""
        if randomize and self._noise_scale > 0.0:
            s = self._noise_scale
            self.msg_vf[:] = self.rng.uniform(-s, s, size=self.msg_vf.shape)
            self.msg_fv[:] = self.rng.uniform(-s, s, size=self.msg_fv.shape)
            self.msg_vf *= self._entry_mask
            self.msg_fv *= self._entry_mask
        else:
            self.msg_vf[:] = 0.0
            self.msg_fv[:] = 0.0

    def run_iteration(self) -> tuple[float, int]:
        """Send one message over each direction of every edge.

        Returns (largest absolute change over all message entries, messages
        sent this iteration).
        """
        schedule = self.params.schedule
        if schedule == "parallel":
            old_vf = self.msg_vf.copy()
            old_fv = self.msg_fv.copy()
            delta, ops = _mpkernel.run_parallel(
                self.e_fac,
                self.fptr,
                self.fvar,
                self.dom,
                self.ftab,
                self.ftabptr,
                self.vptr,
                self.vedge,
                old_vf,
                old_fv,
                self.msg_vf,
                self.msg_fv,
                self.params.damping,
            )
        else:
            pool = self.pool
            if schedule == "sequential-random":
                pool = self.rng.permutation(pool)
            delta, ops = _mpkernel.run_sequential(
                pool,
                self.e_fac,
                self.fptr,
                self.fvar,
                self.dom,
                self.ftab,
                self.ftabptr,
                self.vptr,
                self.vedge,
                self.msg_vf,
                self.msg_fv,
                self.params.damping,
            )
        sent = int(self.pool.shape[0])
        self.messages_sent += sent
        self.operations += int(ops)
        return float(delta), sent

    def decode_beliefs(self) -> np.ndarray:
        """Per-variable argmax of summed incoming messages (ties: lowest)."""
        beliefs = np.zeros((self.num_vars, self.max_dom))
        np.add.at(beliefs, self.fvar, self.msg_fv)
        valid = np.arange(self.max_dom)[None, :] < self.dom[:, None]
        return np.where(valid, beliefs, -np.inf).argmax(axis=1).astype(np.int64)


def max_plus(
    fg: FactorGraph,
    params: MaxPlusParams | None = None,
    evaluate=None,
    deadline: float | None = None,
) -> MaxPlusResult:
    """Run damped max-sum with restarts and return the best exact candidate.

    ``evaluate`` maps a complete assignment to its exact value and defaults
    to summing the factor tables; candidates are never scored from beliefs.
    """
    params = params or MaxPlusParams()
    if evaluate is None:
        evaluate = fg.evaluate
    state = MaxPlusState(fg, params)
    best_assignment: np.ndarray | None = None
    best_value = -np.inf
    iterations_used = []
    all_converged = True
    for restart in range(params.restarts):
        state.reset_messages(randomize=restart > 0)
        converged = False
        iterations = 0
        for _ in range(params.max_iterations):
            if deadline is not None and time.monotonic() > deadline:
                raise DeadlineExceeded("per-solve time limit exceeded")
            delta, _ = state.run_iteration()
            iterations += 1
            assignment = state.decode_beliefs()
            value = evaluate(assignment)
            if best_assignment is None or value > best_value:
                best_assignment = assignment
                best_value = value
            if delta < params.convergence_tolerance:
                converged = True
                break
        iterations_used.append(iterations)
        all_converged = all_converged and converged
    return MaxPlusResult(
        assignment=tuple(int(x) for x in best_assignment),
        exact_value=float(best_value),
        converged=all_converged,
        iterations_used=tuple(iterations_used),
        messages_sent=state.messages_sent,
        operations=state.operations,
    )
