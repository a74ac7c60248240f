"""Inequality checkers: ratio reports, proved ceilings, reductions."""

import math
from fractions import Fraction

import numpy as np
import pytest

from ncstein import (
    CellAverage,
    ClassicalSpace,
    Filtration,
    check_adapted_s12,
    check_crp_stein,
    check_doob_maximal,
    check_dual_doob,
    check_projections,
    check_semicommutative,
    check_sp_inf,
    check_stein_isometry,
    check_stein_pq,
    column_q_norm,
    cond_exp,
    hard_ceiling,
    herm,
    jensen_gap,
    make_filtration,
    ntrace,
    pinching_from_sizes,
    project_adapted,
    sample_adapted_positive,
    sample_projection_family,
    sample_psd,
    sample_unitary,
    schatten_norm,
)
from ncstein.inequality import ceiling_violated, run_inequality, _make_report
from ncstein.seqnorm import NormValue

from oracles import scalar_cond_exp, scalar_lpq

INF = math.inf


def dyadic(dim):
    return make_filtration("dyadic-pinching", dim=dim)


def psd_seq(dim, n, seed):
    return [sample_psd(dim, 1000 * seed + k) for k in range(n)]


def diag_seq(rows):
    return [np.diag(np.asarray(r, dtype=float)).astype(complex) for r in rows]


# ---------------------------------------------------------------------------
# stein_pq
# ---------------------------------------------------------------------------


def test_stein_pq_fixed_terms_ratio_one():
    filt = dyadic(4)
    base = cond_exp(sample_psd(4, 0), filt.levels[0])
    rep = check_stein_pq([base] * 3, filt, 3, 2, lag=1)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 3.0])
def test_stein_pp_constant_one(q):
    filt = dyadic(8)
    for seed in range(10):
        rep = check_stein_pq(psd_seq(8, 4, seed), filt, q, q, lag=1, inequality_id="s_qq")
        assert rep.ratio <= 1 + 1e-8
        assert not ceiling_violated(rep)


def test_stein_pq_diagonal_oracle():
    rng = np.random.default_rng(4)
    fs = rng.uniform(0.1, 2.0, size=(3, 4))
    filt = dyadic(4)
    rep = check_stein_pq(diag_seq(fs), filt, 3, 2, lag=0)
    w = np.full(4, 0.25)
    # pinching fixes diagonal inputs, so both sides are plain column norms
    assert rep.lhs.value == pytest.approx(scalar_lpq(fs, 3, 2, w), abs=1e-10)
    assert rep.rhs.value == pytest.approx(scalar_lpq(fs, 3, 2, w), abs=1e-10)


def test_stein_pq_rejections():
    filt = dyadic(4)
    seq = psd_seq(4, 2, 0)
    with pytest.raises(ValueError, match="q <= p"):
        check_stein_pq(seq, filt, 1.5, 2, lag=0)
    with pytest.raises(ValueError, match="proved range"):
        check_stein_pq(seq, filt, 4, 3, lag=0)
    with pytest.raises(ValueError, match="not positive"):
        check_stein_pq([np.diag([1.0, -1.0, 0, 0])], filt, 3, 1.5, lag=0)
    # q = 2 admits non-positive entries
    rep = check_stein_pq([np.diag([1.0, -1.0, 0, 0])], filt, 3, 2, lag=0)
    assert rep.ratio is not None


def test_stein_pq_lag_consistency():
    # terms measurable one level behind are fixed by lag-1 conditioning
    filt = dyadic(8)
    seq = [cond_exp(sample_psd(8, k), filt.levels[max(k - 1, 0)]) for k in range(4)]
    rep = check_stein_pq(seq, filt, 3, 2, lag=1)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_report_determinism():
    filt = dyadic(4)
    seq = psd_seq(4, 3, 9)
    a = check_stein_pq(seq, filt, 2.5, 1.5, lag=1)
    b = check_stein_pq(seq, filt, 2.5, 1.5, lag=1)
    assert (a.lhs.value, a.rhs.value, a.ratio) == (b.lhs.value, b.rhs.value, b.ratio)


def test_zero_rhs_gives_undefined_ratio():
    rep = _make_report("s_pq", NormValue(0.0), NormValue(0.0), 2, 2, 0)
    assert rep.ratio is None
    assert not ceiling_violated(rep)


# ---------------------------------------------------------------------------
# adapted instance at (1, 2)
# ---------------------------------------------------------------------------


def test_adapted_s12_bound():
    filt = dyadic(8)
    for seed in range(20):
        seq = sample_adapted_positive(filt, 4, seed)
        rep = check_adapted_s12(seq, filt)
        assert rep.ratio <= 2 + 1e-6
    assert hard_ceiling("s_12_adapted", 1, 2) == ("le", 2.0, 1e-6)


def test_adapted_s12_rejects_unadapted():
    filt = dyadic(4)
    with pytest.raises(ValueError, match="not adapted"):
        check_adapted_s12(psd_seq(4, 3, 1), filt)


# ---------------------------------------------------------------------------
# isometry-conjugated variant
# ---------------------------------------------------------------------------


def test_isometry_identity_reduces_to_stein_pq():
    filt = dyadic(4)
    seq = psd_seq(4, 3, 2)
    eyes = [np.eye(4, dtype=complex)] * 3
    via_isom = check_stein_isometry(seq, eyes, filt, 3, 1.5)
    direct = check_stein_pq(seq, filt, 3, 1.5, lag=0)
    assert via_isom.lhs.value == direct.lhs.value
    assert via_isom.rhs.value == direct.rhs.value
    assert via_isom.ratio == direct.ratio


def test_isometry_scalar_reduction():
    filt = dyadic(4)
    coeffs = [0.7, 1.3, 0.4]
    seq = [c * np.eye(4) for c in coeffs]
    ys = [sample_unitary(4, s) for s in range(3)]
    rep = check_stein_isometry(seq, ys, filt, 3, 1.5)
    want = (sum(c**1.5 for c in coeffs)) ** (1 / 1.5)
    assert rep.lhs.value == pytest.approx(want, rel=1e-10)
    assert rep.rhs.value == pytest.approx(want, rel=1e-10)


def test_isometry_q1_matches_dual_doob():
    filt = dyadic(4)
    seq = psd_seq(4, 3, 5)
    ys = [sample_unitary(4, 50 + s) for s in range(3)]
    rep = check_stein_isometry(seq, ys, filt, 3, 1)
    conj = [u.conj().T @ x @ u for u, x in zip(ys, seq)]
    dd = check_dual_doob(conj, filt, 3)
    assert rep.lhs.value == pytest.approx(dd.lhs.value, rel=1e-12)
    assert rep.rhs.value == pytest.approx(dd.rhs.value, rel=1e-12)


def test_isometry_rejects_non_unitary():
    filt = dyadic(4)
    seq = psd_seq(4, 2, 1)
    bad = [np.eye(4), np.diag([1.0, 1.0, 1.0, 0.5])]
    with pytest.raises(ValueError, match="not unitary"):
        check_stein_isometry(seq, bad, filt, 3, 1.5)


# ---------------------------------------------------------------------------
# dual Doob
# ---------------------------------------------------------------------------


def test_dual_doob_trace_equality_at_p1():
    filt = dyadic(8)
    for seed in range(10):
        rep = check_dual_doob(psd_seq(8, 4, seed), filt, 1)
        assert abs(rep.lhs.value - rep.rhs.value) <= 1e-10
        assert not ceiling_violated(rep)


def test_dual_doob_fixed_terms():
    filt = dyadic(4)
    seq = [cond_exp(sample_psd(4, k), filt.levels[k]) for k in range(3)]
    rep = check_dual_doob(seq, filt, 2)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_dual_doob_deterministic():
    filt = dyadic(8)
    seq = psd_seq(8, 4, 3)
    r1 = check_dual_doob(seq, filt, 2)
    r2 = check_dual_doob(seq, filt, 2)
    assert r1.ratio == r2.ratio
    assert np.isfinite(r1.ratio)


# ---------------------------------------------------------------------------
# Doob maximal and ell_inf contraction
# ---------------------------------------------------------------------------


def test_doob_maximal_constant_martingale():
    filt = dyadic(4)
    x = cond_exp(sample_psd(4, 2), filt.levels[0])
    rep = check_doob_maximal(x, filt, 2)
    assert rep.ratio == pytest.approx(1.0, abs=1e-6)
    assert rep.ratio_interval[1] >= rep.ratio_interval[0]


def test_doob_maximal_identity():
    filt = dyadic(4)
    rep = check_doob_maximal(np.eye(4), filt, 3)
    assert rep.ratio == pytest.approx(1.0, abs=1e-6)


def test_doob_maximal_diagonal_oracle():
    rng = np.random.default_rng(8)
    f = rng.uniform(0.2, 2.0, size=4)
    filt = dyadic(4)
    rep = check_doob_maximal(np.diag(f).astype(complex), filt, 2)
    # pinching fixes a diagonal operator, so the chain is constant
    want = scalar_lpq(np.tile(f, (len(filt), 1)), 2, INF, np.full(4, 0.25))
    assert rep.lhs.value == pytest.approx(want, abs=1e-6)
    assert rep.lhs_upper.value == pytest.approx(want, abs=1e-6)
    assert rep.certifying


def test_doob_maximal_rejects_p1():
    with pytest.raises(ValueError, match="p = 1"):
        check_doob_maximal(np.eye(4), dyadic(4), 1)


def test_sp_inf_constant_level0():
    filt = dyadic(4)
    x = cond_exp(sample_psd(4, 1), filt.levels[0])
    rep = check_sp_inf([x] * 3, filt, 2)
    lo, hi = rep.ratio_interval
    assert lo <= 1 <= hi
    assert rep.certifying


def test_sp_inf_reduces_to_doob_on_constant_sequence():
    filt = dyadic(4)
    x = sample_psd(4, 6)
    rep = check_sp_inf([x] * len(filt), filt, 2)
    doob = check_doob_maximal(x, filt, 2)
    assert rep.lhs.value == pytest.approx(doob.lhs.value, rel=1e-6)
    assert rep.lhs_upper.value == pytest.approx(doob.lhs_upper.value, rel=1e-6)


def test_sp_inf_diagonal_oracle():
    rng = np.random.default_rng(12)
    fs = rng.uniform(0.1, 2.0, size=(3, 4))
    filt = dyadic(4)
    rep = check_sp_inf(diag_seq(fs), filt, 2)
    want = scalar_lpq(fs, 2, INF, np.full(4, 0.25))
    assert rep.rhs.value == pytest.approx(want, abs=1e-6)
    assert rep.rhs_lower.value == pytest.approx(want, abs=1e-6)
    lo, hi = rep.ratio_interval
    assert lo <= 1.0 + 1e-6 and hi >= 1.0 - 1e-6


# ---------------------------------------------------------------------------
# CR_p
# ---------------------------------------------------------------------------


def test_crp_stein_p2_matches_column_ratio():
    filt = dyadic(8)
    raw = [herm(sample_psd(8, 30 + k)) for k in range(3)]
    seq = project_adapted(raw, filt, 0)
    rep = check_crp_stein(seq, filt, 2)
    stein = check_stein_pq(seq, filt, 2, 2, lag=1)
    assert rep.ratio == pytest.approx(stein.ratio, rel=1e-10)
    assert rep.certifying


def test_crp_stein_fixed_terms():
    filt = dyadic(8)
    seq = [cond_exp(sample_psd(8, k), filt.levels[max(k - 1, 0)]) for k in range(3)]
    rep = check_crp_stein(seq, filt, 3)
    assert rep.ratio == pytest.approx(1.0, abs=1e-10)


def test_crp_stein_small_p_observational():
    filt = dyadic(2)
    seq = project_adapted(psd_seq(2, 2, 7), filt, 0)
    rep = check_crp_stein(seq, filt, 1.5, seed=1)
    assert np.isfinite(rep.ratio)
    assert rep.lhs.bound == "upper" and rep.rhs.bound == "upper"
    assert not rep.certifying


def test_crp_stein_rejects_unadapted():
    filt = dyadic(4)
    with pytest.raises(ValueError, match="not adapted"):
        check_crp_stein(psd_seq(4, 2, 3), filt, 2)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def test_projections_identity():
    filt = dyadic(4)
    rep = check_projections([np.eye(4)], filt, 3, 1)
    assert rep.ratio == pytest.approx(1.0, abs=1e-10)
    assert rep.rhs.value == 1.0


def test_projections_rank_one_diagonal():
    filt = make_filtration("tensor", local_dims=(2, 2))
    projs = [np.diag([1.0 if i == k else 0.0 for i in range(4)]) for k in range(3)]
    rep = check_projections(projs, filt, 3, 1)
    # scalar data: E_0 r = 1/4, E_1 r = (diagonal block average), E_2 r = r
    terms = [cond_exp(r, filt.levels[n]) for n, r in enumerate(projs)]
    want = schatten_norm(sum(terms), 3)
    assert rep.lhs.value == pytest.approx(want, rel=1e-10)


def test_projections_match_stein_formula():
    filt = dyadic(4)
    projs = sample_projection_family(4, 3, seed=4)
    rep = check_projections(projs, filt, 3, 2)
    stein = check_stein_pq(projs, filt, 3, 2, lag=0)
    assert rep.lhs.value == stein.lhs.value


def test_projections_reject_overlapping():
    filt = dyadic(4)
    p1 = np.diag([1.0, 0, 0, 0])
    with pytest.raises(ValueError, match="orthogonal"):
        check_projections([p1, p1], filt, 3, 1)


# ---------------------------------------------------------------------------
# Jensen gap
# ---------------------------------------------------------------------------


def test_jensen_gap_inside_subalgebra():
    spec = pinching_from_sizes([2, 2])
    x = cond_exp(sample_psd(4, 4), spec)
    gap, mn = jensen_gap(x, spec, 1.7)
    assert np.linalg.norm(gap) <= 1e-8
    assert mn >= -1e-10


def test_jensen_gap_linear_case():
    spec = pinching_from_sizes([1, 1, 2])
    _, mn = jensen_gap(sample_psd(4, 5), spec, 1)
    assert abs(mn) <= 1e-12


@pytest.mark.parametrize("q", [1.25, 1.5, 2.0])
def test_jensen_gap_convex_range(q):
    spec = pinching_from_sizes([2, 2])
    for seed in range(25):
        _, mn = jensen_gap(sample_psd(4, seed), spec, q)
        assert mn >= -1e-8


def test_jensen_gap_violation_beyond_convex_range():
    # t^3 is not operator convex; pinching onto 2x2 blocks detects it
    spec = pinching_from_sizes([2, 2])
    for seed in range(1000):
        _, mn = jensen_gap(sample_psd(4, seed), spec, 3)
        if mn < -1e-6:
            return
    pytest.fail("no convexity violation found for q = 3 at block size 2")


# ---------------------------------------------------------------------------
# semi-commutative embedding
# ---------------------------------------------------------------------------


def test_semicommutative_single_atom():
    trivial = (((0,),),) * 2  # repeat the only partition to cover both terms
    space = ClassicalSpace((Fraction(1),), trivial)
    process = [psd_seq(2, 2, 6)]
    rep = check_semicommutative(process, space, 3, 2)
    # one atom, trivial classical information: conditioning is the identity
    direct = column_q_norm(process[0], 3, 2).value
    assert rep.lhs.value == pytest.approx(direct, rel=1e-10)
    assert rep.rhs.value == pytest.approx(direct, rel=1e-10)


def test_semicommutative_scalar_oracle():
    # scalar process on two uniform atoms, trivial-then-full filtration
    rng = np.random.default_rng(13)
    fs = rng.uniform(0.1, 2.0, size=(2, 2))  # (n, atom)
    space = ClassicalSpace(
        (Fraction(1, 2), Fraction(1, 2)),
        (((0, 1),), ((0,), (1,))),
    )
    process = [[np.array([[fs[n, w]]], dtype=complex) for n in range(2)] for w in range(2)]
    rep = check_semicommutative(process, space, 3, 2)
    w = np.full(2, 0.5)
    conditioned = np.stack([
        scalar_cond_exp(fs[0], [(0, 1)], w),
        scalar_cond_exp(fs[1], [(0,), (1,)], w),
    ])
    assert rep.lhs.value == pytest.approx(scalar_lpq(conditioned, 3, 2, w), abs=1e-10)
    assert rep.rhs.value == pytest.approx(scalar_lpq(fs, 3, 2, w), abs=1e-10)


def test_semicommutative_weighted_embedding():
    from ncstein.inequality import embed_classical

    space = ClassicalSpace(
        (Fraction(1, 3), Fraction(2, 3)),
        (((0, 1),), ((0,), (1,))),
    )
    filt, slots = embed_classical(space, 2)
    # denominators force three slots of weight 1/3; atom 1 owns two of them
    assert filt.dim == 6 and slots == [[0], [1, 2]]
    eye = np.eye(2, dtype=complex)
    process = [[eye, eye], [eye, eye]]
    rep = check_semicommutative(process, space, 3, 2)
    # the embedded identity has unit normalized trace, so both sides are
    # ||sqrt(2) * 1||_3 = sqrt(2)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)
    assert rep.rhs.value == pytest.approx(2 ** 0.5, abs=1e-10)


def test_semicommutative_rejects_bad_probabilities():
    with pytest.raises(ValueError, match="sum to 1"):
        ClassicalSpace((Fraction(1, 2), Fraction(1, 3)), (((0, 1),),))


def test_classical_dyadic_chain_with_real_averaging():
    """Checkers against the scalar oracle on a filtration whose conditional
    expectations genuinely average (not the identity on diagonals)."""
    rng = np.random.default_rng(77)
    atoms = 4
    w = np.full(atoms, 1 / atoms)
    chains = [((0, 1, 2, 3),), ((0, 1), (2, 3)), ((0,), (1,), (2,), (3,))]
    filt = Filtration(tuple(CellAverage(cells, 1) for cells in chains))
    fs = rng.uniform(0.1, 2.0, size=(3, atoms))
    seq = [np.diag(f).astype(complex) for f in fs]

    conditioned = np.stack([scalar_cond_exp(fs[n], chains[n], w) for n in range(3)])

    stein = check_stein_pq(seq, filt, 3, 2, lag=0)
    assert stein.lhs.value == pytest.approx(scalar_lpq(conditioned, 3, 2, w), abs=1e-10)
    assert stein.rhs.value == pytest.approx(scalar_lpq(fs, 3, 2, w), abs=1e-10)

    dd = check_dual_doob(seq, filt, 2)
    assert dd.lhs.value == pytest.approx(
        float(np.sqrt(w @ conditioned.sum(axis=0) ** 2)), abs=1e-10)
    assert dd.rhs.value == pytest.approx(
        float(np.sqrt(w @ fs.sum(axis=0) ** 2)), abs=1e-10)

    f = fs[0]
    chain_values = np.stack([scalar_cond_exp(f, cells, w) for cells in chains])
    doob = check_doob_maximal(np.diag(f).astype(complex), filt, 2)
    doob_want = scalar_lpq(chain_values, 2, INF, w)
    assert doob.lhs.value == pytest.approx(doob_want, abs=1e-6)
    assert doob.lhs_upper.value == pytest.approx(doob_want, abs=1e-6)


def test_run_inequality_dispatch_and_validation():
    filt = dyadic(4)
    rep = run_inequality("dd_p", {"seq": psd_seq(4, 2, 2)}, filt, 2, None, 0)
    assert rep.inequality_id == "dd_p"
    with pytest.raises(ValueError, match="s_qq needs p = q"):
        run_inequality("s_qq", {"seq": psd_seq(4, 2, 2)}, filt, 2, 3, 1)
    with pytest.raises(ValueError, match="unknown inequality"):
        run_inequality("nope", {}, filt, 2, 2, 0)
