"""Monte Carlo oracles: increments, exponential functionals, sliced splitting
of subordinators and the Lamperti time change.

Paths are split into fixed-size blocks and each block draws from its own
Philox stream keyed by (seed, stream tag, block index). Blocks may run on any
number of threads; outputs are concatenated in block order, so results do
not depend on the worker count.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sc

from .errors import DomainError, HorizonError, NumericalError, RegimeError, ValidationError
from .exponents import (
    Brownian,
    CPExpSub,
    JumpMeasure,
    LaplaceExponent,
    PoissonSub,
    Stable,
    StableSub,
    drift_at_zero,
)
from .transform import t_beta

__all__ = [
    "SimConfig",
    "PathSample",
    "ExpFunctionalSample",
    "CompareReport",
    "block_rng",
    "run_blocks",
    "kanter_stable",
    "cms_spectrally_negative",
    "sample_increments",
    "simulate_path",
    "sample_exp_functional",
    "sliced_splitting",
    "lamperti",
    "lamperti_eval",
    "sample_lamperti",
    "sample_factor",
    "mc_compare",
    "tail_slope",
    "hill_estimator",
]

_STREAMS = {"increments": 1, "expfun": 2, "slice": 3, "lamperti": 4, "path": 5, "factor": 6}


# ------------------------------------------------------------------- config

@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    paths: int = 10_000
    dt: float = 0.01
    horizon: float | None = None
    eps: float = 1e-10
    eta: float = 1e-3
    workers: int | None = None
    block: int = 4096
    max_horizon: float = 1e4

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if not self.dt > 0:
            raise ValidationError("time step must be positive")
        if not 0 < self.eps < 1:
            raise ValidationError("eps must lie in (0,1)")
        if self.paths < 1:
            raise ValidationError("paths must be >= 1")
        if not self.eta > 0:
            raise ValidationError("jump truncation level must be positive")
        if self.block < 1:
            raise ValidationError("block size must be >= 1")
        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError("horizon must be positive")
        if self.workers is not None and self.workers < 1:
            raise ValidationError("workers must be >= 1")

    def resolved_workers(self) -> int:
        cap = os.environ.get("LEVYX_THREADS")
        cap = int(cap) if cap and cap.isdigit() and int(cap) > 0 else None
        w = self.workers or cap or 1
        return min(w, cap) if cap else w

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d

    def digest(self) -> str:
        """Hash of everything that determines the output (not the worker count)."""
        s = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(s.encode()).hexdigest()[:16]


def block_rng(seed: int, block: int, stream: str | int = 0) -> np.random.Generator:
    tag = _STREAMS.get(stream, stream) if isinstance(stream, str) else int(stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(tag), int(block)])))


def run_blocks(cfg: SimConfig, fn: Callable[[np.random.Generator, int], np.ndarray],
               stream: str | int = 0, n: int | None = None) -> np.ndarray:
    """Apply fn(rng, size) to each block and concatenate in block order."""
    n = cfg.paths if n is None else n
    sizes = [min(cfg.block, n - i) for i in range(0, n, cfg.block)]

    def job(k):
        return np.asarray(fn(block_rng(cfg.seed, k, stream), sizes[k]))

    w = cfg.resolved_workers()
    if w == 1 or len(sizes) == 1:
        parts = [job(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=w) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    return np.concatenate(parts, axis=0)


# --------------------------------------------------------- exact samplers

def kanter_stable(alpha: float, n, rng: np.random.Generator) -> np.ndarray:
    """Positive stable S with E[e^{-uS}] = e^{-u^alpha}, 0 < alpha < 1."""
    if not 0 < alpha < 1:
        raise DomainError("Kanter sampler needs alpha in (0,1)")
    U = rng.uniform(0.0, math.pi, n)
    E = rng.exponential(1.0, n)
    A = (np.sin(alpha * U) ** (alpha / (1 - alpha)) * np.sin((1 - alpha) * U)
         / np.sin(U) ** (1 / (1 - alpha)))
    return (A / E) ** ((1 - alpha) / alpha)


def cms_spectrally_negative(alpha: float, n, rng: np.random.Generator) -> np.ndarray:
    """X with E[e^{uX}] = e^{u^alpha}, 1 < alpha < 2 (no positive jumps).

    X = -Y with Y totally skewed to the right (beta = 1) of scale
    |cos(pi alpha/2)|^{1/alpha}, drawn by the Chambers-Mallows-Stuck map.
    """
    if not 1 < alpha < 2:
        raise DomainError("CMS sampler needs alpha in (1,2)")
    V = rng.uniform(-math.pi / 2, math.pi / 2, n)
    W = rng.exponential(1.0, n)
    tpa = math.tan(math.pi * alpha / 2)
    B = math.atan(tpa) / alpha
    S = (1 + tpa * tpa) ** (1 / (2 * alpha))
    Y = (S * np.sin(alpha * (V + B)) / np.cos(V) ** (1 / alpha)
         * (np.cos(V - alpha * (V + B)) / W) ** ((1 - alpha) / alpha))
    sigma = abs(math.cos(math.pi * alpha / 2)) ** (1 / alpha)
    return -sigma * Y


# ----------------------------------------------------- jump size tables

class _TailTable:
    """Inverse-tail sampler for jumps r > eta of a jump measure."""

    def __init__(self, jumps: JumpMeasure, eta: float, points: int = 1200):
        self.atoms = [(s, m) for s, m in jumps.atoms() if s > eta]
        self.atom_mass = sum(m for _, m in self.atoms)
        self.has_cont = bool(jumps.components) and any(
            type(c).__name__ != "AtomJumps" for c in jumps.components)
        self.cont_mass = 0.0
        if self.has_cont:
            dens = _vectorized(jumps.density)
            hi = max(1.0, 10 * eta)
            while hi < 1e15 and dens(np.array([hi]))[0] * hi > 1e-18:
                hi *= 4.0
            lr = np.linspace(math.log(eta), math.log(hi), points)
            gx, gw = np.polynomial.legendre.leggauss(16)
            h = np.diff(lr)
            mid = 0.5 * (lr[1:] + lr[:-1])
            nodes = mid[:, None] + 0.5 * h[:, None] * gx[None, :]
            rr = np.exp(nodes)
            vals = dens(rr.ravel()).reshape(rr.shape) * rr
            pieces = 0.5 * h * (vals @ gw)
            d_hi = float(dens(np.array([hi]))[0])
            d_lo = float(dens(np.array([hi / 1.5]))[0])
            far = 0.0
            self.p = None
            if d_hi > 0 and d_lo > 0:
                p = math.log(d_lo / d_hi) / math.log(1.5) - 1.0
                if p > 0:
                    far = d_hi * hi / p
                    self.p = p
            tail = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + far
            self.lr, self.tail, self.hi, self.far = lr, tail, hi, far
            self.cont_mass = float(tail[0])
        self.rate = self.cont_mass + self.atom_mass

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty(n)
        u = rng.random(n) * self.rate
        is_atom = u >= self.cont_mass
        if self.atoms:
            v = u[is_atom] - self.cont_mass
            cum = np.cumsum([m for _, m in self.atoms])
            idx = np.minimum(np.searchsorted(cum, v, side="right"), len(self.atoms) - 1)
            out[is_atom] = np.array([s for s, _ in self.atoms])[idx]
        c = ~is_atom
        if np.any(c):
            v = u[c]
            far = v < self.far
            res = np.empty(v.size)
            if np.any(far):
                res[far] = self.hi * (self.far / v[far]) ** (1.0 / self.p)
            nf = ~far
            if np.any(nf):
                lt = np.log(np.maximum(self.tail, 1e-300))[::-1]
                res[nf] = np.exp(np.interp(np.log(v[nf]), lt, self.lr[::-1]))
            out[c] = res
        return out


def _vectorized(f):
    def g(r):
        r = np.asarray(r, dtype=float)
        try:
            v = np.asarray(f(r), dtype=float)
            if v.shape == r.shape:
                return v
        except (TypeError, ValueError):
            pass
        return np.array([float(f(float(x))) for x in r.ravel()]).reshape(r.shape)
    return g


# ---------------------------------------------------- subordinator models

@dataclass
class _SubModel:
    """Compound Poisson with drift: rate, jump sampler, drift, killing."""
    rate: float
    jumps: Callable[[np.random.Generator, int], np.ndarray] | None
    drift: float
    kappa: float
    eta: float | None
    small_second_moment: float
    exact: bool
    label: str


def _sub_model(phi: LaplaceExponent, eta: float) -> _SubModel:
    if not phi.is_subordinator:
        raise RegimeError("expected a subordinator exponent")
    if isinstance(phi, CPExpSub):
        b = phi.b
        return _SubModel(phi.c, lambda rng, n: rng.exponential(1.0 / b, n), 0.0, phi.kappa,
                         None, 0.0, True, phi.describe())
    if isinstance(phi, PoissonSub):
        s = phi.jump
        return _SubModel(phi.rate, lambda rng, n: np.full(n, s), 0.0, 0.0, None, 0.0, True,
                         phi.describe())
    if isinstance(phi, StableSub):
        a = phi.alpha
        w = a / float(sc.gamma(1 - a))
        rate = w * eta ** (-a) / a
        drift = w * eta ** (1 - a) / (1 - a)
        m2 = w * eta ** (2 - a) / (2 - a)
        return _SubModel(rate, lambda rng, n: eta * rng.random(n) ** (-1.0 / a), drift, 0.0,
                         eta, m2, False, phi.describe())
    try:
        t = phi.triple()
    except NotImplementedError:
        raise ValidationError(f"no sampler for {phi.describe()}") from None
    if t.sigma2 > 0:
        raise ValidationError("a subordinator triple cannot have a Gaussian part")
    table = _TailTable(t.jumps, eta)
    mid, _ = t.jumps.integral(lambda r: r, eta, 1.0) if eta < 1 else (0.0, 0.0)
    drift = -t.a - mid
    m2, _ = t.jumps.integral(lambda r: r * r, 0.0, eta)
    if drift < -1e-9:
        raise NumericalError(f"negative effective drift {drift:g} for {phi.describe()}")
    drift = max(drift, 0.0)
    return _SubModel(table.rate, table.sample if table.rate > 0 else None, drift, t.kappa, eta,
                     m2, table.rate > 0 and m2 == 0, phi.describe())


# ---------------------------------------------- spectrally negative models

@dataclass
class _SNModel:
    """xi_h = drift h + sqrt(var h) Z + (CP negative jumps) or an exact law."""
    drift: float
    var: float
    rate: float
    jumps: Callable[[np.random.Generator, int], np.ndarray] | None
    kappa: float
    stable_alpha: float | None
    eta: float | None
    label: str

    def increments(self, rng: np.random.Generator, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if self.stable_alpha is not None:
            return h ** (1 / self.stable_alpha) * cms_spectrally_negative(self.stable_alpha, h.shape, rng)
        out = self.drift * h
        if self.var > 0:
            out = out + np.sqrt(self.var * h) * rng.standard_normal(h.shape)
        if self.rate > 0:
            k = rng.poisson(self.rate * h)
            tot = int(k.sum())
            if tot:
                sizes = self.jumps(rng, tot)
                owner = np.repeat(np.arange(h.size), k.ravel())
                out = out - np.bincount(owner, weights=sizes, minlength=h.size).reshape(h.shape)
        return out


def _sn_model(psi: LaplaceExponent, eta: float) -> _SNModel:
    if psi.is_subordinator:
        raise RegimeError("expected a spectrally negative exponent")
    if isinstance(psi, Brownian):
        return _SNModel(psi.drift, psi.sigma2, 0.0, None, psi.kappa, None, None, psi.describe())
    if isinstance(psi, Stable) and psi.c == 0:
        return _SNModel(0.0, 0.0, 0.0, None, psi.kappa, psi.alpha, None, psi.describe())
    try:
        t = psi.triple()
    except NotImplementedError:
        raise ValidationError(f"no sampler for {psi.describe()}") from None
    table = _TailTable(t.jumps, eta)
    mid, _ = t.jumps.integral(lambda r: r, eta, 1.0) if eta < 1 else (0.0, 0.0)
    small, _ = t.jumps.integral(lambda r: r * r, 0.0, eta)
    return _SNModel(t.a + mid, t.sigma2 + small, table.rate,
                    table.sample if table.rate > 0 else None, t.kappa, None, eta, psi.describe())


def sample_increments(psi: LaplaceExponent, dt: float, n: int, rng: np.random.Generator,
                      eta: float = 1e-3) -> np.ndarray:
    """n i.i.d. increments over dt (killing ignored): S for subordinators, xi otherwise."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if psi.is_subordinator:
        if isinstance(psi, StableSub):
            return dt ** (1 / psi.alpha) * kanter_stable(psi.alpha, n, rng)
        m = _sub_model(psi, eta)
        k = rng.poisson(m.rate * dt, n)
        tot = int(k.sum())
        out = np.full(n, m.drift * dt)
        if tot:
            owner = np.repeat(np.arange(n), k)
            out += np.bincount(owner, weights=m.jumps(rng, tot), minlength=n)
        return out
    return _sn_model(psi, eta).increments(rng, np.full(n, float(dt)))


# -------------------------------------------------------------- paths

@dataclass
class PathSample:
    times: np.ndarray
    values: np.ndarray
    kill_time: float = math.inf
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValidationError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("path times must be strictly increasing")


def simulate_path(psi: LaplaceExponent, horizon: float, cfg: SimConfig = SimConfig(),
                  index: int = 0) -> PathSample:
    """One path on [0, horizon]; subordinators are recorded at jump times, other
    processes on the cfg.dt grid. ``index`` selects an independent stream."""
    rng = block_rng(cfg.seed, index, "path")
    meta = {"family": psi.describe(), "config": cfg.digest()}
    if psi.is_subordinator:
        m = _sub_model(psi, cfg.eta)
        kill = rng.exponential(1 / m.kappa) if m.kappa > 0 else math.inf
        ts, xs, t, x = [0.0], [0.0], 0.0, 0.0
        end = min(horizon, kill)
        while True:
            tau = rng.exponential(1 / m.rate) if m.rate > 0 else math.inf
            if t + tau >= end:
                if end > t:
                    ts.append(end)
                    xs.append(x + m.drift * (end - t))
                break
            t += tau
            x += m.drift * tau + float(m.jumps(rng, 1)[0])
            ts.append(t)
            xs.append(x)
        meta["eta"] = m.eta
        return PathSample(np.array(ts), np.array(xs), kill, meta)
    m = _sn_model(psi, cfg.eta)
    k = max(1, int(math.ceil(horizon / cfg.dt)))
    h = horizon / k
    inc = m.increments(rng, np.full(k, h))
    kill = rng.exponential(1 / m.kappa) if m.kappa > 0 else math.inf
    meta["eta"] = m.eta
    return PathSample(np.linspace(0, horizon, k + 1), np.concatenate([[0.0], np.cumsum(inc)]),
                      kill, meta)


# ---------------------------------------------------- exponential functional

@dataclass
class ExpFunctionalSample:
    samples: np.ndarray
    method: str
    residual_bound: float
    truncated: int
    eta: float | None
    config: str

    def summary(self) -> dict:
        x = self.samples
        return {"n": int(x.size), "mean": float(x.mean()),
                "se": float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf,
                "method": self.method, "residual_bound": self.residual_bound,
                "truncated": self.truncated, "eta": self.eta, "config": self.config,
                "digest": hashlib.sha256(x.tobytes()).hexdigest()[:16]}


def _segment(d: float, s: np.ndarray) -> np.ndarray:
    """int_0^s e^{-d r} dr."""
    if d == 0:
        return s
    return -np.expm1(-d * s) / d


def _sub_expfun_block(m: _SubModel, eps: float, max_events: int):
    def fn(rng, n):
        x = np.zeros(n)
        I = np.zeros(n)
        t = np.zeros(n)
        kill = rng.exponential(1 / m.kappa, n) if m.kappa > 0 else np.full(n, np.inf)
        act = np.arange(n)
        resid = np.zeros(n)
        for _ in range(max_events):
            if act.size == 0:
                break
            k = act.size
            tau = rng.exponential(1 / m.rate, k) if m.rate > 0 else np.full(k, np.inf)
            rem = kill[act] - t[act]
            step = np.minimum(tau, rem)
            ex = np.exp(-x[act])
            I[act] += ex * _segment(m.drift, step)
            finite = np.isfinite(step)
            x[act] += np.where(finite, m.drift * np.where(finite, step, 0.0), np.inf)
            t[act] += step
            killed = tau >= rem
            jump = ~killed
            nj = int(jump.sum())
            if nj:
                x[act[jump]] += m.jumps(rng, nj)
            e_now = np.exp(-x[act])
            small = e_now < eps * I[act]
            resid[act[small & ~killed]] = e_now[small & ~killed]
            act = act[~(killed | small)]
        if act.size:
            raise HorizonError(f"{act.size} paths exceeded {max_events} events")
        return np.stack([I, resid], axis=1)
    return fn


def _sn_expfun_block(m: _SNModel, dt: float, eps: float, max_horizon: float):
    def fn(rng, n):
        x = np.zeros(n)
        I = np.zeros(n)
        t = np.zeros(n)
        kill = rng.exponential(1 / m.kappa, n) if m.kappa > 0 else np.full(n, np.inf)
        act = np.arange(n)
        out_flag = np.zeros(n)
        while act.size:
            h = np.minimum(dt, kill[act] - t[act])
            U = rng.random(act.size)
            a1 = m.increments(rng, U * h)
            a2 = m.increments(rng, (1 - U) * h)
            I[act] += h * np.exp(-(x[act] + a1))
            x[act] += a1 + a2
            t[act] += h
            done = (t[act] >= kill[act]) | (np.exp(-x[act]) < eps * I[act])
            over = t[act] >= max_horizon
            out_flag[act[over & ~done]] = 1.0
            act = act[~(done | over)]
        return np.stack([I, out_flag], axis=1)
    return fn


def sample_exp_functional(psi: LaplaceExponent, cfg: SimConfig = SimConfig()) -> ExpFunctionalSample:
    """Samples of I = int_0^{e_kappa} e^{-xi_s} ds.

    Subordinators: exact integration between jumps of the compound Poisson
    model (jumps above eta plus their small-jump mean as drift). Spectrally
    negative: grid of step dt; on each step the integrand is evaluated at an
    independent uniform time, which makes E[I] unbiased.
    """
    if psi.is_subordinator:
        m = _sub_model(psi, cfg.eta)
        if m.kappa == 0 and m.rate == 0 and m.drift == 0:
            raise RegimeError("zero subordinator: I is infinite")
        out = run_blocks(cfg, _sub_expfun_block(m, cfg.eps, 10_000_000), "expfun")
        I, res = out[:, 0], out[:, 1]
        bound = float(res.mean() * I.mean())
        return ExpFunctionalSample(I, "event-driven" if m.exact else f"truncated(eta={cfg.eta:g})",
                                   bound, 0, m.eta, cfg.digest())
    m = _sn_model(psi, cfg.eta)
    if m.kappa == 0:
        d0 = drift_at_zero(psi)
        if not d0 > 0:
            raise RegimeError(f"psi'(0+) = {d0:g} <= 0: I is infinite almost surely")
    out = run_blocks(cfg, _sn_expfun_block(m, cfg.dt, cfg.eps, cfg.max_horizon), "expfun")
    I, trunc = out[:, 0], int(out[:, 1].sum())
    bound = cfg.eps * float(I.mean()) / (1 - cfg.eps)
    return ExpFunctionalSample(I, f"grid(dt={cfg.dt:g}, random point)", bound, trunc, m.eta,
                               cfg.digest())


# --------------------------------------------------------- sliced splitting

def _slice_block(m: _SubModel, beta: float, t_end: float, max_events: int):
    def fn(rng, n):
        base = np.zeros(n)    # S at the start of the current copy
        cur = np.zeros(n)     # current copy's value
        orig = np.zeros(n)    # coupled unspliced process
        time = np.zeros(n)
        lev = rng.exponential(1 / beta, n)
        done_val = np.zeros(n)
        act = np.arange(n)
        d = m.drift
        for _ in range(max_events):
            if act.size == 0:
                break
            k = act.size
            tau = rng.exponential(1 / m.rate, k) if m.rate > 0 else np.full(k, np.inf)
            end = t_end - time[act]
            gap = lev[act] - cur[act]
            cross = gap / d if d > 0 else np.full(k, np.inf)
            fin = (end <= tau) & (end <= cross)
            drift_x = ~fin & (cross < tau)
            jmp = ~fin & ~drift_x
            # finish at the horizon
            i = act[fin]
            if i.size:
                done_val[i] = base[i] + cur[i] + d * end[fin]
                orig[i] += d * end[fin]
            # crossing by drift: cap at the level and restart a copy
            i = act[drift_x]
            if i.size:
                s = cross[drift_x]
                base[i] += lev[i]
                orig[i] += d * s
                time[i] += s
                cur[i] = 0.0
                lev[i] = rng.exponential(1 / beta, i.size)
            # jump
            i = act[jmp]
            if i.size:
                s = tau[jmp]
                J = m.jumps(rng, i.size)
                cur[i] += d * s + J
                orig[i] += d * s + J
                time[i] += s
                over = cur[i] > lev[i]
                j = i[over]
                if j.size:
                    base[j] += lev[j]
                    cur[j] = 0.0
                    lev[j] = rng.exponential(1 / beta, j.size)
            act = act[~fin]
        if act.size:
            raise HorizonError(f"{act.size} paths exceeded {max_events} events")
        return np.stack([done_val, orig], axis=1)
    return fn


@dataclass
class SliceSample:
    spliced: np.ndarray
    unspliced: np.ndarray
    beta: float
    t: float
    eta: float | None
    config: str


def sliced_splitting(phi: LaplaceExponent, beta: float, t: float,
                     cfg: SimConfig = SimConfig()) -> SliceSample:
    """S_t = S_{T_{i-1}} + min(S^{(i)}_{t - T_{i-1}}, e_i) with e_i ~ Exp(beta) and
    T_i the first passage of the i-th copy above e_i. Copies reuse the future
    increments of one subordinator, which gives the pathwise coupling."""
    if not beta > 0:
        raise ValidationError("beta must be positive")
    if t < 0:
        raise ValidationError("t must be >= 0")
    m = _sub_model(phi, cfg.eta)
    if m.kappa > 0:
        raise RegimeError("sliced splitting is defined for subordinators without killing")
    if t == 0:
        z = np.zeros(cfg.paths)
        return SliceSample(z, z.copy(), beta, 0.0, m.eta, cfg.digest())
    out = run_blocks(cfg, _slice_block(m, beta, t, 10_000_000), "slice")
    return SliceSample(out[:, 0], out[:, 1], beta, t, m.eta, cfg.digest())


# ------------------------------------------------------------ Lamperti

def _lamperti_segments(xi: np.ndarray, h: float, alpha: float, x0: float):
    a, b = xi[..., :-1], xi[..., 1:]
    D = alpha * (b - a)
    ea = np.exp(alpha * a)
    with np.errstate(invalid="ignore", divide="ignore"):
        seg = np.where(np.abs(D) > 1e-12, h * ea * np.expm1(D) / D, h * ea * (1 + D / 2))
    seg = seg * x0 ** alpha
    return a, b, seg


def lamperti_eval(xi: np.ndarray, h: float, alpha: float, x0: float, t: float,
                  kill_index: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """X_t = x0 exp(xi_{A_t}) for piecewise-linear xi sampled every h (rows = paths).

    Sigma_s = x0^alpha int_0^s e^{alpha xi_u} du is integrated exactly on each
    segment and inverted in closed form. Returns (X_t, reached) where
    ``reached`` is False for rows whose clock never passes t.
    """
    xi = np.atleast_2d(xi)
    a, b, seg = _lamperti_segments(xi, h, alpha, x0)
    cum = np.concatenate([np.zeros((xi.shape[0], 1)), np.cumsum(seg, axis=1)], axis=1)
    reached = cum[:, -1] > t
    idx = (cum <= t).sum(axis=1) - 1
    idx = np.clip(idx, 0, seg.shape[1] - 1)
    rows = np.arange(xi.shape[0])
    r = t - cum[rows, idx]
    aa, bb = a[rows, idx], b[rows, idx]
    D = alpha * (bb - aa)
    scale = x0 ** alpha * np.exp(alpha * aa)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(np.abs(D) > 1e-12, h / D * np.log1p(r * D / (h * scale)), r / scale)
    val = aa + (bb - aa) * s / h
    X = x0 * np.exp(val)
    if kill_index is not None:
        X = np.where(idx >= kill_index, 0.0, X)
    return X, reached


def lamperti(path: PathSample, alpha: float, x0: float, times=None) -> PathSample:
    """Time-changed path X_t = x0 exp(xi_{A_t}) on the natural clock.

    Without ``times`` the output is sampled at the images Sigma(s_i) of the
    grid points of xi. Requesting times beyond the clock raises HorizonError.
    """
    if not x0 > 0:
        raise ValidationError("x0 must be positive")
    if not alpha > 0:
        raise ValidationError("self-similarity index must be positive")
    ts, xi = np.asarray(path.times, float), np.asarray(path.values, float)
    h = np.diff(ts)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValidationError("lamperti needs a path on a uniform grid")
    h0 = float(h[0])
    _, _, seg = _lamperti_segments(xi, h0, alpha, x0)
    clock = np.concatenate([[0.0], np.cumsum(seg)])
    meta = dict(path.meta, alpha=alpha, x0=x0)
    if times is None:
        return PathSample(clock, x0 * np.exp(xi), math.inf, meta)
    times = np.asarray(times, float)
    if np.any(times >= clock[-1]):
        raise HorizonError(f"path clock ends at {clock[-1]:.6g}; requested {times.max():.6g}")
    vals = np.array([lamperti_eval(xi[None, :], h0, alpha, x0, float(t))[0][0] for t in times])
    return PathSample(times, vals, math.inf, meta)


def sample_lamperti(psi: LaplaceExponent, alpha: float, x0: float, t: float,
                    cfg: SimConfig = SimConfig(), chunk: float = 1.0) -> np.ndarray:
    """Samples of X_t for the pssMp started at x0 (0 after killing).

    Paths of xi are extended in chunks until every clock passes t.
    """
    m = _sn_model(psi, cfg.eta)
    steps = max(1, int(round(chunk / cfg.dt)))

    def fn(rng, n):
        kill = rng.exponential(1 / m.kappa, n) if m.kappa > 0 else np.full(n, np.inf)
        xi = np.zeros((n, 1))
        for _ in range(int(cfg.max_horizon / chunk) + 1):
            inc = m.increments(rng, np.full((n, steps), cfg.dt))
            xi = np.concatenate([xi, xi[:, -1:] + np.cumsum(inc, axis=1)], axis=1)
            kidx = np.floor(kill / cfg.dt)
            X, ok = lamperti_eval(xi, cfg.dt, alpha, x0, t, kidx)
            if np.all(ok | (kidx < xi.shape[1] - 1)):
                return X
        raise HorizonError("Lamperti clock did not reach t within max_horizon")

    return run_blocks(cfg, fn, "lamperti")


def sample_factor(factor, cfg: SimConfig = SimConfig()) -> np.ndarray:
    """Samples of a DistributionFactor (product of independent primitive laws)."""
    return run_blocks(cfg, lambda rng, n: factor.sample(rng, n), "factor")


# ------------------------------------------------------------ comparison

@dataclass
class CompareReport:
    rows: list
    threshold: float = 3.0

    @property
    def passed(self) -> bool:
        return all(r["z"] <= self.threshold for r in self.rows)

    def to_json(self) -> dict:
        return {"passed": self.passed, "threshold": self.threshold, "rows": self.rows}


def _row(kind, key, est, se, target):
    diff = abs(est - target)
    if se == 0:
        if diff > 1e-12 * max(1.0, abs(target)):
            raise NumericalError(f"{kind}[{key}]: zero variance and estimate {est} != {target}")
        z = 0.0
    else:
        z = diff / se
    return {"kind": kind, "key": key, "estimate": est, "se": se, "target": target, "z": z}


def mc_compare(samples, moments: dict | None = None, laplace: dict | None = None,
               density=None, density_orders=(1, 2), threshold: float = 3.0) -> CompareReport:
    """z-scores |estimate - target|/SE for moment, Laplace and density-moment targets."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValidationError("no samples")
    n = x.size
    rows = []

    def stat(v):
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    for k, target in (moments or {}).items():
        est, se = stat(x ** float(k))
        rows.append(_row("moment", float(k), est, se, float(target)))
    for u, target in (laplace or {}).items():
        est, se = stat(np.exp(-float(u) * x))
        rows.append(_row("laplace", float(u), est, se, float(target)))
    if density is not None:
        for k in density_orders:
            target, _ = density.moment(float(k))
            est, se = stat(x ** float(k))
            rows.append(_row("density-moment", float(k), est, se, float(target)))
    return CompareReport(rows, threshold)


def tail_slope(samples, fraction: float = 0.1, bins: int = 25, min_count: int = 20) -> tuple[float, float]:
    """Slope of log density against log x over the top ``fraction`` of samples,
    by weighted least squares on logarithmic bins. Returns (slope, standard error)."""
    x = np.sort(np.asarray(samples, dtype=float))
    x = x[x > 0]
    lo = np.quantile(x, 1 - fraction)
    top = x[x >= lo]
    edges = np.geomspace(lo, top[-1] * (1 + 1e-12), bins + 1)
    cnt, _ = np.histogram(top, edges)
    keep = cnt >= min_count
    if keep.sum() < 3:
        raise NumericalError("too few populated bins for a tail fit")
    width = np.diff(edges)
    dens = cnt / (x.size * width)
    lx = np.log(np.sqrt(edges[:-1] * edges[1:]))[keep]
    ly = np.log(dens[keep])
    w = cnt[keep].astype(float)
    X = np.stack([np.ones_like(lx), lx], axis=1)
    W = np.diag(w)
    cov = np.linalg.inv(X.T @ W @ X)
    coef = cov @ X.T @ W @ ly
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


def hill_estimator(samples, fraction: float = 0.1) -> float:
    """Hill estimate of the tail index a in P(X > x) ~ x^{-a}; density slope is -(a+1)."""
    x = np.sort(np.asarray(samples, dtype=float))[::-1]
    k = max(2, int(fraction * x.size))
    return float(1.0 / np.mean(np.log(x[:k] / x[k])))
