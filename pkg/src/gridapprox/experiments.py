"""Randomised trial harness.

Three experiment kinds are supported:

``weak``
    sample a grid, label it by the target, build the hypothesis and measure
    its total loss against the target.
``fixed_grid``
    one grid per trial serves every target of an adversary list; each target
    is first approximated on its own grid and that approximant relabels the
    shared grid.
``uc``
    a fixed finite pool of hypotheses (plus the target) is checked for
    two-way representativeness on fresh grids.  Results are relative to the
    pool: the "for all hypotheses" of the underlying guarantee cannot be
    enumerated.

Every trial draws from ``seed ^ trial_id``, so outputs do not depend on how
trials are scheduled across threads.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from statistics import median

import numpy as np

from . import losses as L
from . import measures as M
from . import sets as S
from .errors import ConfigError, DegenerateGridError, GridApproxError
from .hypotheses import (AuxiliaryUnion, ConvexHull, EmptyHypothesis, Grid, Labeling,
                         auxiliary_sequence, auxiliary_union, convex_hull_hypothesis, label_grid,
                         random_alternation_labels, realizability_check, summary)
from .vcdim import UCBoundParams, m_uc

log = logging.getLogger(__name__)

MAX_RETRIES = 10
KINDS = ("weak", "fixed_grid", "uc")
FAMILIES = ("convex", "bounded_alternation", "finite_grid")
_CONVEX_TARGETS = (S.Disk, S.ConvexPolygon, S.HalfPlaneIntersection)


@dataclass
class ExperimentConfig:
    kind: str
    family: str
    targets: list
    mu0: object
    mu1: object
    m: int
    eps: float
    delta: float = 0.1
    trials: int = 1
    mc_samples: int = L.DEFAULT_MC_SAMPLES
    seed: int = 0
    pool_size: int = 20
    sub_m: int = 8
    D: int = 2
    render: int = 0
    source: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}", field="experiment")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}", field="family")
        if not self.eps > 0:
            raise ConfigError("eps must be positive", field="eps")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)", field="delta")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", field="trials")
        if self.m < 1:
            raise ConfigError("m must be >= 1", field="m")
        if self.mc_samples < 100:
            raise ConfigError("mc_samples must be >= 100", field="mc_samples")
        if not self.targets:
            raise ConfigError("at least one target is required", field="target")
        if self.kind == "fixed_grid" and len(self.targets) < 2:
            raise ConfigError("fixed_grid needs an adversary list of >= 2 targets", field="targets")
        if self.kind == "uc" and self.pool_size < 1:
            raise ConfigError("pool_size must be >= 1", field="pool_size")
        if self.family == "finite_grid" and not (M.is_atomic(self.mu0) and M.is_atomic(self.mu1)):
            raise ConfigError("finite_grid needs purely atomic measures", field="mu0")
        if self.family == "convex":
            for k, t in enumerate(self.targets):
                convex = isinstance(t, _CONVEX_TARGETS) or (isinstance(t, S.RectUnion) and len(t.rects) <= 1)
                if not convex:
                    raise ConfigError(f"target {k} is not convex", field="targets")

    @classmethod
    def from_dict(cls, obj, path=None) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object", path)
        known = {"experiment", "family", "target", "targets", "mu0", "mu1", "m", "eps", "delta", "trials",
                 "mc_samples", "seed", "pool_size", "sub_m", "render"}
        for key in obj:
            if key not in known:
                raise ConfigError("unknown key", path, key)

        def need(key):
            if key not in obj:
                raise ConfigError("missing required field", path, key)
            return obj[key]

        def number(key, kind, default=None):
            if key not in obj and default is not None:
                return default
            val = need(key)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"expected a number, got {val!r}", path, key)
            if kind is int and val != int(val):
                raise ConfigError(f"expected an integer, got {val!r}", path, key)
            return kind(val)

        family, D = need("family"), 2
        if isinstance(family, dict):
            if len(family) != 1:
                raise ConfigError("family object must have one key", path, "family")
            (family, D), = family.items()
            if not isinstance(D, int) or D < 0:
                raise ConfigError("alternation bound must be a nonnegative integer", path, "family")
        if "targets" in obj:
            raw = obj["targets"]
            if not isinstance(raw, list):
                raise ConfigError("targets must be a list", path, "targets")
            targets = [S.target_from_json(t, path, f"targets[{k}]") for k, t in enumerate(raw)]
        else:
            targets = [S.target_from_json(need("target"), path, "target")]
        try:
            return cls(
                kind=need("experiment"),
                family=family,
                targets=targets,
                mu0=M.measure_from_json(need("mu0"), path, "mu0"),
                mu1=M.measure_from_json(need("mu1"), path, "mu1"),
                m=number("m", int),
                eps=number("eps", float),
                delta=number("delta", float, 0.1),
                trials=number("trials", int, 1),
                mc_samples=number("mc_samples", int, L.DEFAULT_MC_SAMPLES),
                seed=number("seed", int, 0),
                pool_size=number("pool_size", int, 20),
                sub_m=number("sub_m", int, 8),
                D=D,
                render=number("render", int, 0),
                source=dict(obj),
            )
        except ConfigError as exc:
            if exc.path is None and path is not None:
                raise ConfigError(str(exc), path) from exc
            raise

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", path) from exc
        return cls.from_dict(obj, path)

    @property
    def svc_bound(self) -> int:
        return 2 if self.family == "convex" else self.D + 1

    def construct(self, lab: Labeling):
        return convex_hull_hypothesis(lab) if self.family == "convex" else auxiliary_union(lab)


@dataclass
class TrialRecord:
    trial_id: int
    grid_seed: int
    empirical_defect_on_grid: int
    total_loss_vs_target: float
    representative: str
    hypothesis: str
    target_id: int = 0
    ci: float = 0.0
    method: str = L.EXACT
    retries: int = 0
    loss_h0: float | None = None
    loss_h0_h1: float | None = None
    pairs_checked: int | None = None
    pairs_failed: int | None = None
    pairs_inconclusive: int | None = None
    max_gap: float | None = None


CSV_FIELDS = [f.name for f in fields(TrialRecord)]


def trial_seed(seed: int, trial_id: int) -> int:
    return (int(seed) ^ int(trial_id)) & M.SEED_MASK


def sample_grid(mu0, mu1, m, seed, stream=0) -> tuple[Grid, int]:
    """Grid whose auxiliary sequences exist, re-drawn on degenerate coordinates."""
    for attempt in range(MAX_RETRIES + 1):
        a = M.sample(mu0, m, L.derive_seed(seed, stream, 0, attempt)).values
        b = M.sample(mu1, m, L.derive_seed(seed, stream, 1, attempt)).values
        g = Grid(a, b)
        try:
            auxiliary_sequence(a)
            auxiliary_sequence(b)
        except DegenerateGridError:
            log.debug("degenerate grid (seed %d, attempt %d); resampling", seed, attempt)
            continue
        return g, attempt
    raise DegenerateGridError(f"no usable grid after {MAX_RETRIES} retries (seed {seed})")


def _run_trials(fn, n, threads):
    if threads and threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(k) for k in range(n)]


def _approximate(cfg, target, tseed, stream=0):
    g, retries = sample_grid(cfg.mu0, cfg.mu1, cfg.m, tseed, stream)
    lab = label_grid(target, g)
    return g, lab, cfg.construct(lab), retries


def run_weak_approx(cfg: ExperimentConfig, threads: int = 1) -> list[TrialRecord]:
    """Per trial: approximate the target from a fresh labeled grid and measure the loss."""
    target = cfg.targets[0]

    def one(t):
        tseed = trial_seed(cfg.seed, t)
        g, lab, h, retries = _approximate(cfg, target, tseed)
        defect = realizability_check(target, g, h)
        est, ci, method = L.total_loss(h, target, cfg.mu0, cfg.mu1, cfg.mc_samples, L.derive_seed(tseed, 2))
        rep = L.verdict(Fraction(defect, g.m * g.m), est, ci, cfg.eps / 2)
        return TrialRecord(t, tseed, defect, est, rep, summary(h), ci=ci, method=method, retries=retries)

    return _run_trials(one, cfg.trials, threads)



def run_fixed_grid(cfg: ExperimentConfig, threads: int = 1) -> list[TrialRecord]:
    """One shared grid per trial, relabeled through each target's own approximant.

    For target ``C``: ``H0`` is built from a private grid labeled by ``C``; the
    shared grid is labeled by ``H0`` and ``H1`` is built from that labeling.
    The losses ``(C,H1)``, ``(C,H0)`` and ``(H0,H1)`` come from one common
    measurement, so they obey the triangle inequality.
    """

    def one(t):
        tseed = trial_seed(cfg.seed, t)
        shared, retries = sample_grid(cfg.mu0, cfg.mu1, cfg.m, tseed, 0)
        out = []
        for k, target in enumerate(cfg.targets):
            # streams follow the target, not its slot, so repeated targets get the same H0
            key = cfg.targets.index(target)
            _, _, h0, r0 = _approximate(cfg, target, tseed, stream=10 + key)
            h1 = cfg.construct(label_grid(h0, shared))
            defect = realizability_check(h0, shared, h1)
            vals, method = L.total_losses([(target, h1), (target, h0), (h0, h1)], cfg.mu0, cfg.mu1,
                                          cfg.mc_samples, L.derive_seed(tseed, 3, key))
            (l1, ci), (l0, _), (l01, _) = vals
            rep = "yes" if l1 <= cfg.eps else ("inconclusive" if l1 - ci <= cfg.eps else "no")
            out.append(TrialRecord(t, tseed, defect, l1, rep, summary(h1), target_id=k, ci=ci,
                                   method=method, retries=retries + r0, loss_h0=l0, loss_h0_h1=l01))
        return out

    nested = _run_trials(one, cfg.trials, threads)
    return [rec for group in nested for rec in group]


def _labeling_from_distinct(g: Grid, labels) -> Labeling:
    _, ia = np.unique(g.a, return_inverse=True)
    _, ib = np.unique(g.b, return_inverse=True)
    return Labeling(g, np.asarray(labels)[np.ix_(ia.ravel(), ib.ravel())])


def build_pool(cfg: ExperimentConfig) -> list:
    """``pool_size`` hypotheses, each built from its own small sampled grid.

    Sub-grid ``k`` has ``sub_m`` points per axis and a random labeling with at
    most ``D`` (zero-padded) alternations per row and column.
    """
    pool = []
    for k in range(cfg.pool_size):
        g, _ = sample_grid(cfg.mu0, cfg.mu1, cfg.sub_m, L.derive_seed(cfg.seed, 100, k))
        shape = (np.unique(g.a).size, np.unique(g.b).size)
        rng = np.random.default_rng(L.derive_seed(cfg.seed, 200, k))
        pool.append(cfg.construct(_labeling_from_distinct(g, random_alternation_labels(shape, cfg.D, rng))))
    return pool


def run_uc_trials(cfg: ExperimentConfig, threads: int = 1, pool=None):
    """Fraction of sampled grids that are two-way ``eps``-representative for the pool.

    The pool is :func:`build_pool` plus the target; every unordered pair of
    distinct members is checked.  Total losses are computed once per pair.
    Returns ``(success_fraction, records)``.
    """
    target = cfg.targets[0]
    members = (list(pool) if pool is not None else build_pool(cfg)) + [target]
    pairs = [(i, j) for i in range(len(members)) for j in range(i + 1, len(members))]
    totals = []
    for i, j in pairs:
        est, ci, method = L.total_loss(members[i], members[j], cfg.mu0, cfg.mu1, cfg.mc_samples,
                                       L.derive_seed(cfg.seed, 300, i, j))
        totals.append((est, ci))

    def one(t):
        tseed = trial_seed(cfg.seed, t)
        g, lab, h, retries = _approximate(cfg, target, tseed)
        defect = realizability_check(target, g, h)
        est, ci, method = L.total_loss(h, target, cfg.mu0, cfg.mu1, cfg.mc_samples, L.derive_seed(tseed, 2))
        masks = np.stack([g.mask(s) for s in members])
        verdicts, worst = [], 0.0
        for (i, j), (tot, tci) in zip(pairs, totals):
            emp = Fraction(int(np.count_nonzero(masks[i] != masks[j])), g.m * g.m)
            verdicts.append(L.verdict(emp, tot, tci, cfg.eps))
            worst = max(worst, abs(float(emp) - tot))
        return TrialRecord(t, tseed, defect, est, L.combine_verdicts(verdicts), summary(h), ci=ci,
                           method=method, retries=retries, pairs_checked=len(pairs),
                           pairs_failed=verdicts.count("no"),
                           pairs_inconclusive=verdicts.count("inconclusive"), max_gap=worst)

    records = _run_trials(one, cfg.trials, threads)
    frac = sum(r.representative == "yes" for r in records) / len(records)
    return frac, records


# -- reporting ---------------------------------------------------------------

def wilson_interval(k: int, n: int, z: float = L.Z99) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def summarize(cfg: ExperimentConfig, records: list[TrialRecord]) -> dict:
    losses = [r.total_loss_vs_target for r in records]
    out = {
        "experiment": cfg.kind,
        "family": cfg.family,
        "m": cfg.m,
        "eps": cfg.eps,
        "delta": cfg.delta,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "mean_loss": math.fsum(losses) / len(losses),
        "median_loss": median(losses),
        "max_defect_on_grid": max(r.empirical_defect_on_grid for r in records),
        "svc_bound": cfg.svc_bound,
        "m_uc_two_way": m_uc(UCBoundParams.two_way(cfg.svc_bound, cfg.eps / 2, cfg.delta)),
    }
    if cfg.kind == "weak":
        k = sum(r.total_loss_vs_target <= cfg.eps / 2 for r in records)
        out["fraction_loss_within_half_eps"] = k / len(records)
        out["fraction_ci99"] = list(wilson_interval(k, len(records)))
    elif cfg.kind == "fixed_grid":
        by_trial: dict = {}
        for r in records:
            by_trial.setdefault(r.trial_id, []).append(r.total_loss_vs_target <= cfg.eps)
        k = sum(all(v) for v in by_trial.values())
        out["fraction_all_targets_within_eps"] = k / len(by_trial)
        out["fraction_ci99"] = list(wilson_interval(k, len(by_trial)))
        out["triangle_inequality_holds"] = all(
            r.total_loss_vs_target <= r.loss_h0 + r.loss_h0_h1 + 1e-9 for r in records)
    else:
        k = sum(r.representative == "yes" for r in records)
        out["pool_size"] = cfg.pool_size + 1
        out["representative_fraction"] = k / len(records)
        out["fraction_ci99"] = list(wilson_interval(k, len(records)))
        out["scope"] = ("pool-relative: representativeness is checked only for pairs from the finite "
                        "pool, a necessary condition for the guarantee over the whole class")
    return out


def _n(v) -> str:
    return repr(float(v))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return _n(v)
    return str(v)


def write_records_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([_fmt(getattr(r, name)) for name in CSV_FIELDS])


def run_experiment(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Run ``cfg`` and write ``results.csv``, ``summary.json`` and optional ``trial_<k>.svg``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GridApproxError(f"{out}: cannot create output directory: {exc}") from exc
    if cfg.kind == "weak":
        records = run_weak_approx(cfg, threads)
    elif cfg.kind == "fixed_grid":
        records = run_fixed_grid(cfg, threads)
    else:
        _, records = run_uc_trials(cfg, threads)
    write_records_csv(out / "results.csv", records)
    summ = summarize(cfg, records)
    with open(out / "summary.json", "w") as fh:
        json.dump(summ, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for t in range(min(cfg.render, cfg.trials)):
        g, lab, h, _ = _approximate(cfg, cfg.targets[0], trial_seed(cfg.seed, t))
        render_svg(g, cfg.targets[0], h, out / f"trial_{t}.svg", labels=lab)
    return summ


# -- SVG ---------------------------------------------------------------------

def _bbox_of(g, target, h):
    xs = list(g.a)
    ys = list(g.b)
    boxes = []
    if target is not None and hasattr(target, "bbox"):
        boxes.append(target.bbox())
    for r in getattr(h, "rects", ()):
        boxes.append(r)
    if isinstance(h, ConvexHull):
        hx, hy = zip(*h.vertices)
        boxes.append((min(hx), max(hx), min(hy), max(hy)))
    for b in boxes:
        if b is not None:
            xs += [b[0], b[1]]
            ys += [b[2], b[3]]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
    return x0 - pad, x1 + pad, y0 - pad, y1 + pad


def _target_svg(target):
    style = 'fill="none" stroke="#1f5fbf" vector-effect="non-scaling-stroke"'
    if isinstance(target, S.Disk):
        (cx, cy), r = target.center, target.radius
        return [f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r)}" {style}/>']
    if isinstance(target, S.ConvexPolygon):
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in target.vertices)
        return [f'<polygon points="{pts}" {style}/>']
    if hasattr(target, "rects"):
        return [f'<rect x="{_n(x0)}" y="{_n(y0)}" width="{_n(x1 - x0)}" height="{_n(y1 - y0)}" {style}/>'
                for x0, x1, y0, y1 in target.rects]
    return []  # half-planes and oracles have no finite outline


def _hypothesis_svg(h, dot):
    style = 'fill="#f0a030" fill-opacity="0.35" stroke="#c06000" vector-effect="non-scaling-stroke"'
    if isinstance(h, ConvexHull):
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in h.vertices)
        if len(h.vertices) >= 3:
            return [f'<polygon points="{pts}" {style}/>']
        if len(h.vertices) == 2:
            return [f'<polyline points="{pts}" {style}/>']
        (x, y), = h.vertices
        return [f'<circle cx="{_n(x)}" cy="{_n(y)}" r="{_n(2 * dot)}" {style}/>']
    return [f'<rect x="{_n(x0)}" y="{_n(y0)}" width="{_n(x1 - x0)}" height="{_n(y1 - y0)}" {style}/>'
            for x0, x1, y0, y1 in getattr(h, "rects", ())]


def render_svg(grid: Grid, target, hypothesis, path, labels: Labeling | None = None, size: int = 600) -> Path:
    """Draw grid points (1-labels filled), the hypothesis and the target outline.

    Shapes are written in data coordinates under one flipping transform, so
    coordinates in the file are the exact floats of the geometry.
    """
    if labels is None and target is not None:
        labels = label_grid(target, grid)
    x0, x1, y0, y1 = _bbox_of(grid, target, hypothesis)
    scale = size / max(x1 - x0, y1 - y0)
    width, height = (x1 - x0) * scale, (y1 - y0) * scale
    dot = 2.5 / scale
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" height="{height:.1f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
        f'<g transform="matrix({_n(scale)} 0 0 {_n(-scale)} {_n(-x0 * scale)} {_n(y1 * scale)})">',
        '<g id="hypothesis">', *_hypothesis_svg(hypothesis, dot), '</g>',
        '<g id="target">', *(_target_svg(target) if target is not None else []), '</g>',
        '<g id="grid">',
    ]
    if labels is not None:
        c, d, L_ = labels.distinct()
        for i, x in enumerate(c):
            for j, y in enumerate(d):
                cls = "label-1" if L_[i, j] else "label-0"
                fill = "#000000" if L_[i, j] else "#ffffff"
                lines.append(f'<circle class="{cls}" cx="{_n(x)}" cy="{_n(y)}" r="{_n(dot)}" fill="{fill}" '
                             'stroke="#000000" stroke-width="0.5" vector-effect="non-scaling-stroke"/>')
    else:
        for x in np.unique(grid.a):
            for y in np.unique(grid.b):
                lines.append(f'<circle class="label-0" cx="{_n(x)}" cy="{_n(y)}" r="{_n(dot)}" fill="#ffffff"/>')
    lines += ['</g>', '</g>', '</svg>', '']
    path = Path(path)
    try:
        path.write_text("\n".join(lines))
    except OSError as exc:
        raise GridApproxError(f"{path}: cannot write SVG: {exc}") from exc
    return path
