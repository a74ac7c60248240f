"""Subalgebras of a matrix tracial space and their conditional expectations.

Three concrete subalgebra families are supported, each inducing the unique
trace-preserving conditional expectation onto it:

  * Pinching -- block-diagonal compression onto contiguous index blocks;
    the non-commutative analogue of revealing a coarse partition.
  * TensorFactor -- identity on a group of leading tensor factors composed
    with the normalized partial trace over the rest.
  * CellAverage -- block functions over a finite atom set, averaged over
    cells of a partition; this realizes a classical conditional expectation
    (uniform atom weights) tensored with a matrix block.

Filtrations are increasing chains of one family. Sequences pair with
filtration levels through ``level_index``: term n conditions on level
max(n - lag, 0), so lag 1 reproduces the one-step-behind convention with
the first term conditioned on the coarsest level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .opcore import (
    INF,
    as_operator,
    herm,
    ntrace,
    op_norm,
    schatten_norm,
    _complex_gaussian,
)

ADAPTED_TOL = 1e-10


@dataclass(frozen=True)
class Pinching:
    """Block-diagonal subalgebra over contiguous index blocks covering 0..d-1."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("pinching needs at least one block")
        seen: list[int] = []
        for b in blocks:
            if not b:
                raise ValueError("pinching blocks must be nonempty")
            if list(b) != list(range(b[0], b[-1] + 1)):
                raise ValueError(f"pinching block {b} is not a contiguous index range")
            seen.extend(b)
        if sorted(seen) != list(range(len(seen))) or len(seen) != len(set(seen)):
            raise ValueError("pinching blocks must disjointly cover 0..d-1")

    @property
    def dim(self) -> int:
        return sum(len(b) for b in self.blocks)


def pinching_from_sizes(sizes: Sequence[int]) -> Pinching:
    """Pinching whose consecutive blocks have the given sizes."""
    blocks = []
    start = 0
    for s in sizes:
        blocks.append(tuple(range(start, start + s)))
        start += s
    return Pinching(tuple(blocks))


@dataclass(frozen=True)
class TensorFactor:
    """Subalgebra of operators acting on the leading `retained` tensor factors."""

    local_dims: tuple[int, ...]
    retained: int

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        object.__setattr__(self, "local_dims", dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("local_dims must be positive integers")
        if not 0 <= self.retained <= len(dims):
            raise ValueError(
                f"retained must lie in [0, {len(dims)}], got {self.retained}"
            )

    @property
    def dim(self) -> int:
        return math.prod(self.local_dims)


@dataclass(frozen=True)
class CellAverage:
    """Block functions over a finite atom set, constant on each cell.

    The space is C^m (x) C^d with the atoms indexing d-sized diagonal
    blocks; conditional expectation pinches off-block entries and averages
    the diagonal blocks within each cell.
    """

    cells: tuple[tuple[int, ...], ...]
    block_dim: int

    def __post_init__(self):
        cells = tuple(tuple(int(i) for i in c) for c in self.cells)
        object.__setattr__(self, "cells", cells)
        if self.block_dim < 1:
            raise ValueError("block_dim must be >= 1")
        atoms = sorted(i for c in cells for i in c)
        if not cells or any(not c for c in cells):
            raise ValueError("cells must be nonempty")
        if atoms != list(range(len(atoms))):
            raise ValueError("cells must disjointly cover the atom indices")

    @property
    def atoms(self) -> int:
        return sum(len(c) for c in self.cells)

    @property
    def dim(self) -> int:
        return self.atoms * self.block_dim


SubalgebraSpec = Union[Pinching, TensorFactor, CellAverage]


def cond_exp(x, spec: SubalgebraSpec) -> np.ndarray:
    """Trace-preserving conditional expectation of x onto the subalgebra.

    Linear, positive, unital, and a bimodule map over the subalgebra; the
    normalized trace of the output equals that of the input.
    """
    a = as_operator(x)
    if a.shape[0] != spec.dim:
        raise ValueError(
            f"operator dimension {a.shape[0]} does not match subalgebra dimension {spec.dim}"
        )
    if isinstance(spec, Pinching):
        out = np.zeros_like(a)
        for b in spec.blocks:
            lo, hi = b[0], b[-1] + 1
            out[lo:hi, lo:hi] = a[lo:hi, lo:hi]
        return out
    if isinstance(spec, TensorFactor):
        keep = math.prod(spec.local_dims[: spec.retained])
        drop = spec.dim // keep
        t = a.reshape(keep, drop, keep, drop)
        partial = np.einsum("ibjb->ij", t) / drop
        return np.kron(partial, np.eye(drop))
    if isinstance(spec, CellAverage):
        d = spec.block_dim
        out = np.zeros_like(a)
        for cell in spec.cells:
            avg = sum(a[w * d : (w + 1) * d, w * d : (w + 1) * d] for w in cell) / len(cell)
            for w in cell:
                out[w * d : (w + 1) * d, w * d : (w + 1) * d] = avg
        return out
    raise TypeError(f"unknown subalgebra spec {type(spec).__name__}")


def _contains(outer: SubalgebraSpec, inner: SubalgebraSpec) -> bool:
    """Structural check that the inner subalgebra sits inside the outer one."""
    if isinstance(inner, Pinching) and isinstance(outer, Pinching):
        # outer blocks must be coarser: every inner block inside an outer one
        spans = [(b[0], b[-1]) for b in outer.blocks]
        return all(
            any(lo <= b[0] and b[-1] <= hi for lo, hi in spans) for b in inner.blocks
        )
    if isinstance(inner, TensorFactor) and isinstance(outer, TensorFactor):
        return inner.local_dims == outer.local_dims and inner.retained <= outer.retained
    if isinstance(inner, CellAverage) and isinstance(outer, CellAverage):
        if inner.block_dim != outer.block_dim or inner.atoms != outer.atoms:
            return False
        # finer partitions upward: every outer cell inside an inner cell
        inner_sets = [set(c) for c in inner.cells]
        return all(any(set(c) <= s for s in inner_sets) for c in outer.cells)
    return False


@dataclass(frozen=True)
class Filtration:
    """Increasing chain of subalgebras of one family over a common space."""

    levels: tuple[SubalgebraSpec, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("filtration needs at least one level")
        dims = {spec.dim for spec in levels}
        if len(dims) != 1:
            raise ValueError("all filtration levels must share one dimension")
        for lower, upper in zip(levels[:-1], levels[1:]):
            if not _contains(upper, lower):
                raise ValueError("filtration levels must be increasing")

    @property
    def dim(self) -> int:
        return self.levels[0].dim

    def __len__(self) -> int:
        return len(self.levels)


def make_filtration(kind: str, *, dim: int | None = None,
                    local_dims: Sequence[int] | None = None) -> Filtration:
    """Build one of the two stock filtration families.

    dyadic-pinching: dim = 2^N; level n pinches onto blocks of size 2^n, so
    level 0 is the diagonal algebra and level N the full algebra.
    tensor: level n retains the n leading factors of local_dims, from the
    scalars (n = 0) up to the full algebra.
    """
    if kind in ("dyadic-pinching", "dyadic"):
        if dim is None or dim < 1 or dim & (dim - 1):
            raise ValueError(f"dyadic pinching needs dim a power of 2, got {dim}")
        depth = dim.bit_length() - 1
        levels = [pinching_from_sizes([2**n] * (dim // 2**n)) for n in range(depth + 1)]
        return Filtration(tuple(levels))
    if kind == "tensor":
        if not local_dims:
            raise ValueError("tensor filtration needs local_dims")
        dims = tuple(int(d) for d in local_dims)
        levels = [TensorFactor(dims, r) for r in range(len(dims) + 1)]
        return Filtration(tuple(levels))
    raise ValueError(f"unknown filtration kind {kind!r}")


def level_index(n: int, lag: int, n_levels: int) -> int:
    """Filtration level paired with sequence term n under the lag convention."""
    if lag not in (0, 1):
        raise ValueError(f"lag must be 0 or 1, got {lag}")
    lvl = max(n - lag, 0)
    if lvl >= n_levels:
        raise ValueError(
            f"sequence term {n} needs filtration level {lvl} but only "
            f"{n_levels} levels exist (lag {lag})"
        )
    return lvl


class AdaptedCheck(NamedTuple):
    adapted: bool
    residual: float


def is_adapted(seq: Sequence[np.ndarray], filt: Filtration, lag: int = 0) -> AdaptedCheck:
    """Whether every term is fixed by its own level's conditional expectation.

    Term n is tested against level max(n - lag, 0); the residual is the
    largest operator-norm deviation ||E(x_n) - x_n|| over the sequence.
    """
    residual = 0.0
    for n, x in enumerate(seq):
        spec = filt.levels[level_index(n, lag, len(filt))]
        residual = max(residual, op_norm(cond_exp(x, spec) - as_operator(x)))
    return AdaptedCheck(residual <= ADAPTED_TOL, residual)


def sample_adapted_positive(filt: Filtration, length: int, seed: int,
                            lag: int = 0) -> list[np.ndarray]:
    """Seeded positive sequence adapted to the filtration: x_n = E_n(z* z)."""
    rng = np.random.default_rng(seed)
    seq = []
    for n in range(length):
        z = _complex_gaussian(rng, filt.dim)
        spec = filt.levels[level_index(n, lag, len(filt))]
        seq.append(cond_exp(herm(z.conj().T @ z), spec))
    return seq


@dataclass(frozen=True)
class AxiomResiduals:
    """Worst-case deviations from the conditional-expectation axioms."""

    projection: float
    bimodule: float
    trace: float
    positivity: float
    adjoint: float
    contractivity: dict[float, float] = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(
            self.projection,
            self.bimodule,
            self.trace,
            self.positivity,
            self.adjoint,
            max(self.contractivity.values(), default=0.0),
        )


def axiom_residuals(spec: SubalgebraSpec, trials: int, seed: int) -> AxiomResiduals:
    """Sample-based verification of the conditional-expectation axioms.

    Over `trials` seeded draws this reports the maxima of: the projection
    residual ||E(E(x)) - E(x)||, the bimodule residual ||E(axb) - a E(x) b||
    for a, b in the subalgebra, the trace residual |tr E(x) - tr x| / d, the
    positivity violation max(0, -min eig E(psd)), the adjoint residual
    ||E(x*) - E(x)*||, and the contractivity excess max(0, ||E(x)||_p -
    ||x||_p) for p in {1, 2, 3, inf}.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = spec.dim
    exponents = (1.0, 2.0, 3.0, INF)
    out = {
        "projection": 0.0,
        "bimodule": 0.0,
        "trace": 0.0,
        "positivity": 0.0,
        "adjoint": 0.0,
    }
    contract = {p: 0.0 for p in exponents}
    for _ in range(trials):
        x = _complex_gaussian(rng, d)
        a = cond_exp(_complex_gaussian(rng, d), spec)
        b = cond_exp(_complex_gaussian(rng, d), spec)
        z = _complex_gaussian(rng, d)
        psd = herm(z.conj().T @ z)

        ex = cond_exp(x, spec)
        out["projection"] = max(out["projection"], op_norm(cond_exp(ex, spec) - ex))
        out["bimodule"] = max(
            out["bimodule"], op_norm(cond_exp(a @ x @ b, spec) - a @ ex @ b)
        )
        out["trace"] = max(out["trace"], abs(ntrace(ex) - ntrace(x)))
        out["adjoint"] = max(out["adjoint"], op_norm(cond_exp(x.conj().T, spec) - ex.conj().T))
        w = np.linalg.eigvalsh(herm(cond_exp(psd, spec)))
        out["positivity"] = max(out["positivity"], max(0.0, -float(w[0])))
        for p in exponents:
            excess = schatten_norm(ex, p) - schatten_norm(x, p)
            contract[p] = max(contract[p], max(0.0, excess))
    return AxiomResiduals(contractivity=contract, **out)


def tower_residual(filt: Filtration, trials: int, seed: int) -> float:
    """Max deviation of E_m E_n from E_min(m,n) over sampled inputs and all pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = _complex_gaussian(rng, filt.dim)
        projected = [cond_exp(x, spec) for spec in filt.levels]
        for m, spec_m in enumerate(filt.levels):
            for n in range(len(filt)):
                composed = cond_exp(projected[n], spec_m)
                worst = max(worst, op_norm(composed - projected[min(m, n)]))
    return worst
