"""Discrete-event simulation of the N-server cancel-on-completion redundancy
system under FCFS and PS.

One master seed derives three independent streams (arrival times, server
selection, replica sizes) so runs that differ only in the discipline see the
same arrival process and sizes (common random numbers)."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush

import numpy as np

from .distributions import (
    JobSizeDistribution,
    ReplicaDependence,
    sample,
)

FCFS = "fcfs"
PS = "ps"

# remaining work below this at a departure evaluation counts as zero
WORK_EPS = 1e-12


@dataclass(frozen=True)
class SimConfig:
    n_servers: int
    arrival_rate: float
    d: int
    discipline: str
    dist: JobSizeDistribution
    dep: ReplicaDependence = ReplicaDependence.IID
    horizon: float = 1e5
    warmup: float = None  # defaults to 10% of horizon
    seed: int = 0

    def __post_init__(self):
        if self.n_servers < 1:
            raise ValueError("need at least one server")
        if not 1 <= self.d <= self.n_servers:
            raise ValueError("need 1 <= d <= n_servers")
        if self.arrival_rate <= 0:
            raise ValueError("arrival rate must be positive")
        if self.discipline not in (FCFS, PS):
            raise ValueError(f"unknown discipline {self.discipline!r}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.1 * self.horizon)
        if not 0 <= self.warmup < self.horizon:
            raise ValueError("need 0 <= warmup < horizon")


class Replica:
    __slots__ = ("job", "server", "size", "remaining", "seq")

    def __init__(self, job, server, size, seq):
        self.job = job
        self.server = server
        self.size = size
        self.remaining = size
        self.seq = seq


class Job:
    __slots__ = ("id", "arrival", "replicas", "done")

    def __init__(self, job_id, arrival):
        self.id = job_id
        self.arrival = arrival
        self.replicas = []
        self.done = False


class FcfsServer:
    """Ordered queue; the head is in service at rate 1."""

    __slots__ = ("queue", "last_update", "busy_time", "cver")
    discipline = FCFS

    def __init__(self):
        self.queue = deque()
        self.last_update = 0.0
        self.busy_time = 0.0
        self.cver = 0


class PsServer:
    """Egalitarian processor sharing: rate 1/n per active replica."""

    __slots__ = ("active", "last_update", "busy_time", "cver")
    discipline = PS

    def __init__(self):
        self.active = []
        self.last_update = 0.0
        self.busy_time = 0.0
        self.cver = 0


class EventCalendar:
    """Min-heap of departure candidates, totally ordered by (time, seq).

    Candidates are lazily invalidated: each carries the server's candidate
    version at push time and is skipped when the server has moved on."""

    __slots__ = ("heap", "_seq")

    def __init__(self):
        self.heap = []
        self._seq = 0

    def push(self, time, server_idx, replica, version):
        self._seq += 1
        heappush(self.heap, (time, self._seq, server_idx, replica, version))

    def pop(self):
        return heappop(self.heap)

    def __len__(self):
        return len(self.heap)


def next_departure(server, now):
    """(time, replica) of the next departure from this server, or None."""
    if server.discipline == FCFS:
        if not server.queue:
            return None
        head = server.queue[0]
        return (now + max(head.remaining, 0.0), head)
    if not server.active:
        return None
    r = min(server.active, key=lambda a: (a.remaining, a.seq))
    return (now + len(server.active) * max(r.remaining, 0.0), r)


def apply_elapsed(server, start, end):
    """Advance server state over [start, end]; returns work served.

    Precondition: no departure strictly inside the interval."""
    dt = end - start
    if dt < 0:
        raise ValueError("negative interval")
    served = 0.0
    if server.discipline == FCFS:
        if server.queue:
            server.queue[0].remaining -= dt
            server.busy_time += dt
            served = dt
    else:
        n = len(server.active)
        if n:
            dec = dt / n
            for r in server.active:
                r.remaining -= dec
            server.busy_time += dt
            served = dt
    server.last_update = end
    return served


def _reschedule(server, idx, calendar, now):
    server.cver += 1
    nd = next_departure(server, now)
    if nd is not None:
        calendar.push(nd[0], idx, nd[1], server.cver)


def cancel_siblings(job, servers, calendar, now, completed=None):
    """Remove every replica of job except `completed`. Affected servers are
    brought up to `now` first and get fresh departure candidates.

    Returns (served, discarded): work rendered on those servers while catching
    up to `now`, and unfinished sibling work thrown away."""
    served = 0.0
    discarded = 0.0
    for r in job.replicas:
        if r is completed:
            continue
        s = servers[r.server]
        served += apply_elapsed(s, s.last_update, now)
        if s.discipline == FCFS:
            if s.queue and s.queue[0] is r:
                s.queue.popleft()
                _reschedule(s, r.server, calendar, now)
            else:
                try:
                    s.queue.remove(r)
                except ValueError:
                    continue  # already gone (simultaneous completion tie)
        else:
            try:
                s.active.remove(r)
            except ValueError:
                continue
            _reschedule(s, r.server, calendar, now)
        discarded += max(r.remaining, 0.0)
        r.remaining = 0.0
    return served, discarded


@dataclass
class SimOutput:
    arrival_times: np.ndarray
    latencies: np.ndarray
    jobs_completed: int
    jobs_observed: int
    busy_fractions: np.ndarray
    max_backlog: float
    backlog_times: np.ndarray
    backlog_values: np.ndarray


def run_simulation(cfg: SimConfig) -> SimOutput:
    """Simulate Poisson arrivals over [0, horizon]; jobs in flight at the
    horizon are drained to completion. Identical cfg implies identical output."""
    n, d, lam = cfg.n_servers, cfg.d, cfg.arrival_rate
    fcfs = cfg.discipline == FCFS
    identical = cfg.dep is ReplicaDependence.IDENTICAL
    dist = cfg.dist

    arr_rng = random.Random(f"{cfg.seed}:arrivals")
    sel_rng = random.Random(f"{cfg.seed}:selection")
    size_rng = random.Random(f"{cfg.seed}:sizes")

    servers = [FcfsServer() if fcfs else PsServer() for _ in range(n)]
    calendar = EventCalendar()
    heap = calendar.heap
    perm = list(range(n))

    work = 0.0
    max_work = 0.0
    jobs_completed = 0
    arrivals_out = []
    latencies_out = []
    backlog_t = []
    backlog_w = []

    job_id = 0
    rep_seq = 0
    next_arr = arr_rng.expovariate(lam)
    if next_arr > cfg.horizon:
        next_arr = None

    while heap or next_arr is not None:
        if heap and (next_arr is None or heap[0][0] <= next_arr):
            t, _, sidx, r, ver = heappop(heap)
            s = servers[sidx]
            if ver != s.cver:
                continue
            work -= apply_elapsed(s, s.last_update, t)
            # r departs; completion cancels its siblings before any other
            # candidate at the same timestamp is evaluated
            if fcfs:
                s.queue.popleft()
            else:
                s.active.remove(r)
            r.remaining = 0.0
            job = r.job
            job.done = True
            jobs_completed += 1
            if t > cfg.warmup:
                arrivals_out.append(job.arrival)
                latencies_out.append(t - job.arrival)
            served, discarded = cancel_siblings(job, servers, calendar, t, completed=r)
            work -= served + discarded
            _reschedule(s, sidx, calendar, t)
        else:
            t = next_arr
            job = Job(job_id, t)
            job_id += 1
            # partial Fisher-Yates, d uniforms from the selection stream
            for i in range(d):
                j = i + int(sel_rng.random() * (n - i))
                if j >= n:
                    j = n - 1
                perm[i], perm[j] = perm[j], perm[i]
            if identical:
                size = sample(dist, size_rng)
                sizes = [size] * d
            else:
                sizes = [sample(dist, size_rng) for _ in range(d)]
            for i in range(d):
                sidx = perm[i]
                s = servers[sidx]
                work -= apply_elapsed(s, s.last_update, t)
                rep_seq += 1
                r = Replica(job, sidx, sizes[i], rep_seq)
                job.replicas.append(r)
                work += r.size
                if fcfs:
                    s.queue.append(r)
                    if len(s.queue) == 1:
                        _reschedule(s, sidx, calendar, t)
                else:
                    s.active.append(r)
                    _reschedule(s, sidx, calendar, t)
            if work > max_work:
                max_work = work
            backlog_t.append(t)
            backlog_w.append(work)
            next_arr = t + arr_rng.expovariate(lam)
            if next_arr > cfg.horizon:
                next_arr = None

    end_time = max((s.last_update for s in servers), default=0.0)
    busy = np.array([s.busy_time / end_time if end_time > 0 else 0.0 for s in servers])
    return SimOutput(
        arrival_times=np.asarray(arrivals_out),
        latencies=np.asarray(latencies_out),
        jobs_completed=jobs_completed,
        jobs_observed=len(latencies_out),
        busy_fractions=busy,
        max_backlog=max_work,
        backlog_times=np.asarray(backlog_t),
        backlog_values=np.asarray(backlog_w),
    )
