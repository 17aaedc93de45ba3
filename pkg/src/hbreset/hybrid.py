"""Continuous-time heavy-ball flows with momentum resets.

Simulates the plain flow (qdot, pdot) = (p, -K p - grad phi(q)), the
hybrid variant that jumps (q, p, tau) -> (q, 0, 0) once the timer tau
exceeds the dwell time T_min and <grad phi(q), p> >= 0, and the switched
variant that swaps the damping between K_lo and K_hi on the same sign
condition. Fixed-step classical RK4 with bisection event localization.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objectives import ObjectiveModel

Array = np.ndarray

MODE_HB = "hb"
MODE_HHB = "hhb"

GRAD_STOP = 1e-10
MAX_EVENT_BISECTIONS = 100


@dataclass
class HybridState:
    q: Array
    p: Array
    tau: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


@dataclass
class HybridParams:
    K: float = 1.0
    K_lo: float = 1.0
    K_hi: float = 1.0
    T_min: float = 1e-3
    step: float = 1e-3
    event_tol: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.K_lo <= self.K_hi):
            raise ValueError("need 0 < K_lo <= K_hi")
        if self.T_min <= 0 or self.step <= 0 or self.event_tol <= 0:
            raise ValueError("T_min, step, event_tol must be positive")


def default_dwell(lipschitz: float) -> float:
    """Small dwell time relative to the fastest period scale 1/sqrt(L)."""
    return 1e-3 / np.sqrt(max(lipschitz, 1e-12))


@dataclass
class HybridArc:
    """Solution samples over a hybrid time domain, plus the jump log."""

    t: Array
    j: Array
    q: Array
    p: Array
    tau: Array
    energy: Array
    jumps: list  # (t, j_after, q_at_jump) tuples

    def __len__(self) -> int:
        return len(self.t)

    def final_state(self) -> HybridState:
        return HybridState(q=self.q[-1].copy(), p=self.p[-1].copy(), tau=float(self.tau[-1]))

    def dwell_times(self) -> list[float]:
        """Flow durations between consecutive jumps."""
        times = [tj for tj, _, _ in self.jumps]
        out = []
        prev = float(self.t[0])
        for tj in times:
            out.append(tj - prev)
            prev = tj
        return out

    def to_csv(self, path) -> None:
        n = self.q.shape[1]
        cols = ["t", "j"] + [f"q{i}" for i in range(n)] + [f"p{i}" for i in range(n)] \
            + ["tau", "energy"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(len(self.t)):
                vals = [("%.17g" % self.t[i]), str(int(self.j[i]))]
                vals += ["%.17g" % v for v in self.q[i]]
                vals += ["%.17g" % v for v in self.p[i]]
                vals += ["%.17g" % self.tau[i], "%.17g" % self.energy[i]]
                fh.write(",".join(vals) + "\n")

    def jumps_json(self) -> str:
        return json.dumps(
            [{"t": tj, "j": jj, "q": list(qj)} for tj, jj, qj in self.jumps],
            sort_keys=True)


def flow_map(state: HybridState, params: HybridParams, model: ObjectiveModel,
             mode: str = MODE_HHB):
    """(qdot, pdot, taudot) = (p, -K p - grad phi(q), 1); HB mode omits tau."""
    g = model.gradient(state.q)
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient")
    dp = -params.K * state.p - g
    if mode == MODE_HB:
        return state.p.copy(), dp
    return state.p.copy(), dp, 1.0


def _inner(model: ObjectiveModel, q: Array, p: Array) -> float:
    return float(np.dot(model.gradient(q), p))


def in_flow_set(state: HybridState, params: HybridParams, model: ObjectiveModel) -> bool:
    if state.tau <= params.T_min:
        return True
    return _inner(model, state.q, state.p) <= 0.0


def in_jump_set(state: HybridState, params: HybridParams, model: ObjectiveModel) -> bool:
    return state.tau >= params.T_min and _inner(model, state.q, state.p) >= 0.0


def jump_map(state: HybridState) -> HybridState:
    return HybridState(q=state.q.copy(), p=np.zeros_like(state.p), tau=0.0)


def energy(state: HybridState, model: ObjectiveModel) -> float:
    return float(model.value(state.q)) + 0.5 * float(np.dot(state.p, state.p))


def kappa_select(state: HybridState, params: HybridParams, model: ObjectiveModel) -> float:
    """K_hi when momentum opposes descent (or near the boundary), else K_lo."""
    if _inner(model, state.q, state.p) < -params.event_tol:
        return params.K_lo
    return params.K_hi


def _rk4(q: Array, p: Array, dt: float, deriv) -> tuple[Array, Array]:
    k1q, k1p = deriv(q, p)
    k2q, k2p = deriv(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p)
    k3q, k3p = deriv(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p)
    k4q, k4p = deriv(q + dt * k3q, p + dt * k3p)
    qn = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    pn = p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return qn, pn


class _ArcBuilder:
    def __init__(self, model: ObjectiveModel):
        self.model = model
        self.t, self.j, self.q, self.p, self.tau, self.e = [], [], [], [], [], []
        self.jumps = []

    def sample(self, t: float, j: int, q: Array, p: Array, tau: float) -> None:
        self.t.append(t)
        self.j.append(j)
        self.q.append(q.copy())
        self.p.append(p.copy())
        self.tau.append(tau)
        self.e.append(float(self.model.value(q)) + 0.5 * float(np.dot(p, p)))

    def build(self) -> HybridArc:
        return HybridArc(
            t=np.array(self.t), j=np.array(self.j, dtype=int),
            q=np.array(self.q), p=np.array(self.p), tau=np.array(self.tau),
            energy=np.array(self.e), jumps=self.jumps)


def integrate_hhb(model: ObjectiveModel, params: HybridParams, z0: HybridState,
                  t_end: float) -> HybridArc:
    """Simulate the hybrid system: flow under damping K, jump to (q, 0, 0).

    RK4 fixed step; a jump triggers when tau >= T_min and the switching
    function g = <grad phi(q), p> reaches 0 from below, localized by
    bisection on the step to within event_tol in time.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")

    def deriv(q, p):
        return p, -params.K * p - model.gradient(q)

    arc = _ArcBuilder(model)
    q, p, tau = z0.q.astype(float).copy(), z0.p.astype(float).copy(), float(z0.tau)
    t, j = 0.0, 0

    def in_jump(qv, pv, tv) -> bool:
        return tv >= params.T_min and _inner(model, qv, pv) >= 0.0

    # a start inside the jump set jumps immediately
    if in_jump(q, p, tau):
        arc.sample(t, j, q, p, tau)
        j += 1
        p = np.zeros_like(p)
        tau = 0.0
        arc.jumps.append((t, j, q.copy()))
    arc.sample(t, j, q, p, tau)

    while t < t_end - 1e-15:
        if float(np.linalg.norm(model.gradient(q))) <= GRAD_STOP:
            break
        dt = min(params.step, t_end - t)
        q1, p1 = _rk4(q, p, dt, deriv)
        if in_jump(q1, p1, tau + dt):
            # earliest entry time into the jump set within (0, dt]
            lo, hi = 0.0, dt
            qe, pe = q1, p1
            for _ in range(MAX_EVENT_BISECTIONS):
                if hi - lo <= params.event_tol:
                    break
                mid = 0.5 * (lo + hi)
                qm, pm = _rk4(q, p, mid, deriv)
                if in_jump(qm, pm, tau + mid):
                    hi, qe, pe = mid, qm, pm
                else:
                    lo = mid
            else:
                raise RuntimeError(
                    f"event localization did not converge in {MAX_EVENT_BISECTIONS} bisections")
            t += hi
            tau += hi
            arc.sample(t, j, qe, pe, tau)
            j += 1
            q, p, tau = qe.copy(), np.zeros_like(pe), 0.0
            arc.jumps.append((t, j, q.copy()))
            arc.sample(t, j, q, p, tau)
        else:
            q, p, tau, t = q1, p1, tau + dt, t + dt
            arc.sample(t, j, q, p, tau)
    return arc.build()


def integrate_hihb(model: ObjectiveModel, params: HybridParams, x0: HybridState,
                   t_end: float) -> HybridArc:
    """Simulate the switched-damping flow; the damping is re-evaluated each
    RK4 stage via kappa_select. No jumps: j stays 0 and tau is unused."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")

    def deriv(q, p):
        g = model.gradient(q)
        kap = params.K_lo if float(np.dot(g, p)) < -params.event_tol else params.K_hi
        return p, -kap * p - g

    arc = _ArcBuilder(model)
    q, p = x0.q.astype(float).copy(), x0.p.astype(float).copy()
    t = 0.0
    arc.sample(t, 0, q, p, 0.0)
    while t < t_end - 1e-15:
        if float(np.linalg.norm(model.gradient(q))) <= GRAD_STOP:
            break
        dt = min(params.step, t_end - t)
        q, p = _rk4(q, p, dt, deriv)
        t += dt
        arc.sample(t, 0, q, p, 0.0)
    return arc.build()


def integrate_hb(model: ObjectiveModel, params: HybridParams, x0: HybridState,
                 t_end: float) -> HybridArc:
    """Plain heavy-ball flow with damping K (no switching, no jumps)."""
    fixed = HybridParams(K=params.K, K_lo=params.K, K_hi=params.K,
                         T_min=params.T_min, step=params.step,
                         event_tol=params.event_tol)
    return integrate_hihb(model, fixed, x0, t_end)
