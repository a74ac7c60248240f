"""Derivative-free search for extremal inequality ratios.

The search hill-climbs over sequences parametrized as x_n = z_n* z_n, which
keeps every iterate exactly positive; adapted instances are reached by
projecting term n onto its filtration level. Ratios found this way are
empirical lower bounds on best constants, never upper-bound claims: the only
asserted ceilings are the proved ones exposed by the inequality catalogue.

Restarts are independent given (seed, restart index), so results do not
depend on evaluation order; one restart starts inside the coarsest
subalgebra, where the equality regime of the ratio-1 instances lives.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .expectation import Filtration, cond_exp, level_index, make_filtration
from .inequality import (
    RatioReport,
    default_lag,
    input_kind,
    is_searchable,
    run_inequality,
    uses_q,
    validate_exponents,
)
from .opcore import herm, psd_power, sample_projection_family, sample_unitary, _complex_gaussian

MIN_STEP = 1e-6
MAX_INITIAL_DRAWS = 100


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of one extremal-ratio search."""

    inequality_id: str
    p: float
    q: float | None = None
    dim: int = 4
    seq_len: int = 4
    filtration: str = "dyadic"  # 'dyadic' | 'tensor'
    local_dims: tuple[int, ...] | None = None
    lag: int | None = None  # None -> the inequality's printed form
    budget: int = 5000
    restarts: int = 8
    step_scale: float = 0.25
    seed: int = 0
    adapted_only: bool = False

    def __post_init__(self):
        if not self.budget >= self.restarts >= 1:
            raise ValueError(
                f"search requires budget >= restarts >= 1, got budget={self.budget}, "
                f"restarts={self.restarts}"
            )
        if self.dim < 1 or self.seq_len < 1:
            raise ValueError("dim and seq_len must be >= 1")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")


@dataclass(frozen=True)
class SearchResult:
    """Best ratio found, its witness sequence, and the search trace."""

    best_ratio: float
    witness: tuple[np.ndarray, ...]
    evaluations_used: int
    trajectory: tuple[tuple[int, float], ...]
    report: RatioReport


@dataclass(frozen=True)
class SweepRow:
    p: float
    q: float | None
    result: SearchResult | None = None
    error: str | None = None


def build_filtration(kind: str, dim: int,
                     local_dims: tuple[int, ...] | None = None) -> Filtration:
    """Stock filtration for a given total dimension."""
    if kind == "dyadic":
        return make_filtration("dyadic-pinching", dim=dim)
    if kind == "tensor":
        if local_dims is None:
            if dim < 1 or dim & (dim - 1):
                raise ValueError(
                    "tensor filtration needs explicit local_dims when dim is not a power of 2"
                )
            local_dims = (2,) * (dim.bit_length() - 1)
        if int(np.prod(local_dims)) != dim:
            raise ValueError(
                f"product of local_dims {local_dims} must equal dim {dim}"
            )
        return make_filtration("tensor", local_dims=local_dims)
    raise ValueError(f"unknown filtration kind {kind!r}")


def project_adapted(seq, filt: Filtration, lag: int = 0) -> list[np.ndarray]:
    """Feasibility projection onto adapted sequences: y_n = E_n(x_n).

    Idempotent, positivity preserving, and the output passes is_adapted
    under the same lag convention.
    """
    return [
        cond_exp(x, filt.levels[level_index(n, lag, len(filt))])
        for n, x in enumerate(seq)
    ]


def isometry_family(dim: int, seq_len: int, seed: int) -> list[np.ndarray]:
    """The deterministic unitary family paired with a (dim, seed) instance."""
    return [sample_unitary(dim, seed + 7_000_000 + n) for n in range(seq_len)]


def seeded_inputs(inequality_id: str, dim: int, seq_len: int, filt: Filtration,
                  seed: int) -> dict:
    """Deterministic checker inputs for one inequality instance."""
    kind = input_kind(inequality_id)
    rng = np.random.default_rng([int(seed), 0x5EED])
    if kind == "operator":
        z = _complex_gaussian(rng, dim)
        return {"x": herm(z.conj().T @ z)}
    if kind == "projections":
        return {"projections": sample_projection_family(dim, min(seq_len, dim), seed)}
    if kind == "process":
        raise ValueError(f"{inequality_id} inputs cannot be sampled from (dim, seq_len)")
    seq = [herm(g.conj().T @ g) for g in (_complex_gaussian(rng, dim) for _ in range(seq_len))]
    if kind == "adapted-seq":
        seq = project_adapted(seq, filt, 0)
    inputs: dict = {"seq": seq}
    if kind == "isometry-seq":
        inputs["isometries"] = isometry_family(dim, seq_len, seed)
    return inputs


def _resolved(cfg: SearchConfig) -> tuple[Filtration, int, float | None]:
    filt = build_filtration(cfg.filtration, cfg.dim, cfg.local_dims)
    lag = cfg.lag if cfg.lag is not None else default_lag(cfg.inequality_id)
    q = cfg.q if uses_q(cfg.inequality_id) else None
    validate_exponents(cfg.inequality_id, cfg.p, q)
    return filt, lag, q


def estimate_constant(cfg: SearchConfig) -> SearchResult:
    """Hill-climb the ratio functional of one inequality.

    Runs cfg.restarts independent climbs with additive Gaussian proposals on
    the z parameters and an adaptive step (halved after 20 consecutive
    rejections, restart abandoned below 1e-6). The returned witness is
    rescaled so its rhs equals 1, and best_ratio is the ratio of the checker
    replayed on that stored witness.
    """
    if not is_searchable(cfg.inequality_id):
        raise ValueError(f"{cfg.inequality_id} is not a searchable inequality")
    filt, lag, q = _resolved(cfg)
    kind = input_kind(cfg.inequality_id)
    adapted = kind == "adapted-seq" or cfg.adapted_only
    n_mats = 1 if kind == "operator" else cfg.seq_len
    isometries = None
    if kind == "isometry-seq":
        isometries = isometry_family(cfg.dim, n_mats, cfg.seed)

    def assemble(zs):
        xs = [herm(z.conj().T @ z) for z in zs]
        if adapted:
            xs = project_adapted(xs, filt, 0)
        inputs = {"x": xs[0]} if kind == "operator" else {"seq": xs}
        if isometries is not None:
            inputs["isometries"] = isometries
        return inputs, xs

    def evaluate(zs):
        inputs, xs = assemble(zs)
        report = run_inequality(cfg.inequality_id, inputs, filt, cfg.p, q, lag,
                                seed=cfg.seed)
        return report.ratio, xs

    evaluations = 0
    per_restart = cfg.budget // cfg.restarts
    best_ratio = -np.inf
    best_xs = None
    trajectory: list[tuple[int, float]] = []

    for restart in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, restart])
        start_evals = evaluations
        current = None
        current_ratio = -np.inf
        current_xs = None
        for _ in range(MAX_INITIAL_DRAWS):
            if evaluations - start_evals >= per_restart:
                break
            zs = [_complex_gaussian(rng, cfg.dim) for _ in range(n_mats)]
            if restart == 0:
                # equality-regime start inside the coarsest subalgebra
                zs = [
                    psd_power(cond_exp(herm(z.conj().T @ z), filt.levels[0]), 0.5)
                    for z in zs
                ]
            evaluations += 1
            try:
                ratio, xs = evaluate(zs)
            except ValueError:
                continue
            if ratio is not None:
                current, current_ratio, current_xs = zs, ratio, xs
                break
        if current is None:
            if evaluations - start_evals >= per_restart:
                continue
            raise RuntimeError(
                f"checker rejected {MAX_INITIAL_DRAWS} initial draws for "
                f"{cfg.inequality_id} (restart {restart})"
            )
        if current_ratio > best_ratio:
            best_ratio, best_xs = current_ratio, current_xs
            trajectory.append((evaluations, best_ratio))

        step = cfg.step_scale
        rejections = 0
        while evaluations - start_evals < per_restart and step >= MIN_STEP:
            proposal = [z + step * _complex_gaussian(rng, cfg.dim) for z in current]
            evaluations += 1
            try:
                ratio, xs = evaluate(proposal)
            except ValueError:
                ratio = None
            if ratio is not None and ratio > current_ratio:
                current, current_ratio = proposal, ratio
                rejections = 0
                if ratio > best_ratio:
                    best_ratio, best_xs = ratio, xs
                    trajectory.append((evaluations, best_ratio))
            else:
                rejections += 1
                if rejections >= 20:
                    step /= 2
                    rejections = 0

    if best_xs is None:
        raise RuntimeError("search produced no accepted evaluation")

    # store the witness normalized to rhs = 1 and replay it
    inputs = {"x": best_xs[0]} if kind == "operator" else {"seq": best_xs}
    if isometries is not None:
        inputs["isometries"] = isometries
    report = run_inequality(cfg.inequality_id, inputs, filt, cfg.p, q, lag, seed=cfg.seed)
    if report.rhs.value > 0:
        scale = 1.0 / report.rhs.value
        best_xs = [scale * x for x in best_xs]
        inputs = {"x": best_xs[0]} if kind == "operator" else {"seq": best_xs}
        if isometries is not None:
            inputs["isometries"] = isometries
        report = run_inequality(cfg.inequality_id, inputs, filt, cfg.p, q, lag,
                                seed=cfg.seed)
    return SearchResult(
        best_ratio=float(report.ratio),
        witness=tuple(best_xs),
        evaluations_used=evaluations,
        trajectory=tuple(trajectory),
        report=report,
    )


def sweep(points, base_cfg: SearchConfig) -> list[SweepRow]:
    """Run estimate_constant over a grid of (p, q) pairs.

    Per-point failures are recorded in the row instead of aborting the
    remaining grid. Total evaluations stay below len(points) * budget.
    """
    rows = []
    for p, q in points:
        cfg = dataclasses.replace(base_cfg, p=p, q=q)
        try:
            rows.append(SweepRow(p=float(p), q=None if q is None else float(q),
                                 result=estimate_constant(cfg)))
        except (ValueError, RuntimeError) as exc:
            rows.append(SweepRow(p=float(p), q=None if q is None else float(q),
                                 error=str(exc)))
    return rows
