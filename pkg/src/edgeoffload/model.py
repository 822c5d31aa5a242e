"""Latency/energy cost model for offloading a batch of independent tasks
from one mobile device to several wireless access points, with an optional
lossless compression step applied to uploaded data.

All quantities are SI base units: bits, bits/s, cycles, cycles/s, W, J, s.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Task",
    "Device",
    "Cap",
    "Instance",
    "Assignment",
    "Decision",
    "CostBreakdown",
    "g_coeff",
    "batch_latency",
    "energy",
    "objective",
]


@dataclass(frozen=True)
class Task:
    """One computation job: input size (bits), output size (bits), work (cycles)."""

    alpha: float
    beta: float
    omega: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"task alpha must be > 0, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"task beta must be >= 0, got {self.beta}")
        if not self.omega > 0:
            raise ValueError(f"task omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class Device:
    """Mobile device parameters.

    r0: local CPU rate (cycles/s); p_comp/p_tx/p_rx: computation, transmit
    and receive power (W); jc: cycles to compress one bit; ec: energy per
    compression cycle (J/cycle).  The derived ``p_compr`` (J/bit) is the
    energy to compress one bit.  jc and ec may be zero, which turns the
    compression stage into a no-op.
    """

    r0: float
    p_comp: float
    p_tx: float
    p_rx: float
    jc: float
    ec: float

    def __post_init__(self) -> None:
        for name in ("r0", "p_comp", "p_tx", "p_rx"):
            if not getattr(self, name) > 0:
                raise ValueError(f"device {name} must be > 0, got {getattr(self, name)}")
        for name in ("jc", "ec"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"device {name} must be >= 0, got {getattr(self, name)}")

    @property
    def p_compr(self) -> float:
        """Energy to compress one bit (J/bit)."""
        return self.jc * self.ec


@dataclass(frozen=True)
class Cap:
    """One access point: service rate (cycles/s) and link rates (bits/s)."""

    r: float
    c_ul: float
    c_dl: float

    def __post_init__(self) -> None:
        for name in ("r", "c_ul", "c_dl"):
            if not getattr(self, name) > 0:
                raise ValueError(f"cap {name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class Instance:
    """A full problem: device, access points, tasks, and objective weights."""

    device: Device
    caps: tuple[Cap, ...]
    tasks: tuple[Task, ...]
    lambda_t: float
    lambda_e: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "caps", tuple(self.caps))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if len(self.tasks) < 1:
            raise ValueError("instance needs at least one task")
        if len(self.caps) < 1:
            raise ValueError("instance needs at least one access point")
        for name in ("lambda_t", "lambda_e"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {w}")

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_caps(self) -> int:
        return len(self.caps)


@dataclass(frozen=True)
class Assignment:
    """Placement of each task: entry i is the CPU of task i, 0 = run locally.

    The equivalent one-hot matrix (one row per task, one column per CPU) is
    available via :meth:`matrix`.
    """

    cpu_of: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "cpu_of", tuple(int(k) for k in self.cpu_of))
        if any(k < 0 for k in self.cpu_of):
            raise ValueError(f"cpu indices must be >= 0, got {self.cpu_of}")

    def matrix(self, n_cpus: int) -> np.ndarray:
        """One-hot allocation matrix of shape (n_tasks, n_cpus)."""
        x = np.zeros((len(self.cpu_of), n_cpus))
        for i, k in enumerate(self.cpu_of):
            x[i, k] = 1.0
        return x


@dataclass(frozen=True)
class Decision:
    """An assignment plus the shared compression fraction gamma in [0, 1]."""

    assignment: Assignment
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class CostBreakdown:
    """Full cost decomposition of one decision."""

    per_cpu_latency: tuple[float, ...]
    latency: float
    e_comp: float
    e_compr: float
    e_tr: float
    energy: float
    psi: float


def _check_indices(instance: Instance, i: int, k: int) -> None:
    if not 0 <= i < instance.n_tasks:
        raise IndexError(f"task index {i} out of range [0, {instance.n_tasks})")
    if not 0 <= k <= instance.n_caps:
        raise IndexError(f"cpu index {k} out of range [0, {instance.n_caps}]")


def _check_decision(instance: Instance, decision: Decision) -> None:
    cpu_of = decision.assignment.cpu_of
    if len(cpu_of) != instance.n_tasks:
        raise ValueError(
            f"assignment covers {len(cpu_of)} tasks, instance has {instance.n_tasks}"
        )
    if any(k > instance.n_caps for k in cpu_of):
        raise ValueError(f"assignment uses cpu > {instance.n_caps}: {cpu_of}")


def g_coeff(instance: Instance, i: int, k: int, gamma: float) -> float:
    """End-to-end seconds contributed by task i when it runs on CPU k.

    For k >= 1 this covers compressing gamma of the input locally, uploading
    the remaining (1-gamma) fraction, decompressing and executing at the
    access point, and downloading the result.  For k == 0 only the local
    execution time remains and gamma is irrelevant.
    """
    _check_indices(instance, i, k)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    task = instance.tasks[i]
    dev = instance.device
    if k == 0:
        return task.omega / dev.r0
    cap = instance.caps[k - 1]
    return (
        task.alpha * dev.jc * gamma / dev.r0
        + task.alpha * (1.0 - gamma) / cap.c_ul
        + task.alpha * dev.jc * gamma / cap.r
        + task.omega / cap.r
        + task.beta / cap.c_dl
    )


def batch_latency(instance: Instance, decision: Decision) -> np.ndarray:
    """Per-CPU batch latencies: CPU k takes the sum of its tasks' g_coeff.

    CPUs with no tasks have latency 0.  Stages on one CPU do not overlap:
    an access point starts executing only after its whole batch arrived.
    """
    _check_decision(instance, decision)
    t = np.zeros(instance.n_caps + 1)
    for i, k in enumerate(decision.assignment.cpu_of):
        t[k] += g_coeff(instance, i, k, decision.gamma)
    return t


def energy(instance: Instance, decision: Decision) -> tuple[float, float, float]:
    """Device-side energy split: (local computation, compression, radio)."""
    _check_decision(instance, decision)
    dev = instance.device
    gamma = decision.gamma
    e_comp = 0.0
    e_compr = 0.0
    e_tr = 0.0
    for i, k in enumerate(decision.assignment.cpu_of):
        task = instance.tasks[i]
        if k == 0:
            e_comp += dev.p_comp * task.omega / dev.r0
        else:
            cap = instance.caps[k - 1]
            e_compr += dev.p_compr * task.alpha * gamma
            e_tr += dev.p_tx * (task.alpha / cap.c_ul) * (1.0 - gamma)
            e_tr += dev.p_rx * (task.beta / cap.c_dl)
    return e_comp, e_compr, e_tr


def objective(instance: Instance, decision: Decision) -> CostBreakdown:
    """Weighted latency/energy cost of one decision.

    Access points execute their batches in parallel, so the latency term is
    the max over per-CPU batch latencies; the energy term is the device's
    total consumption.
    """
    t = batch_latency(instance, decision)
    e_comp, e_compr, e_tr = energy(instance, decision)
    latency = float(np.max(t))
    total_e = e_comp + e_compr + e_tr
    psi = instance.lambda_t * latency + instance.lambda_e * total_e
    return CostBreakdown(
        per_cpu_latency=tuple(float(v) for v in t),
        latency=latency,
        e_comp=e_comp,
        e_compr=e_compr,
        e_tr=e_tr,
        energy=total_e,
        psi=psi,
    )
