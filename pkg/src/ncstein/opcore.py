"""Dense complex-matrix kernel for a finite tracial probability space.

Everything here works with the normalized trace ntrace(x) = tr(x) / d, so
the identity has trace one and norm one for every exponent. To convert a
Schatten norm to the unnormalized convention multiply by d**(1/p).

Exponents live in [1, inf]; math.inf selects the operator-norm branch and
is treated as a first-class value, never as a large float.
"""

from __future__ import annotations

import math

import numpy as np

INF = math.inf

# Acceptance / drift tolerances, relative to max(1, operator norm).
HERMITIAN_TOL = 1e-8
EIG_CLAMP_REL = 1e-10
UNITARY_TOL = 1e-10
PSD_TOL = 1e-12


def as_operator(x) -> np.ndarray:
    """Validate x as a square complex matrix with finite entries."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("operator dimension must be >= 1")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValueError("operator entries must be finite")
    return a


def ntrace(x) -> complex:
    """Normalized trace tr(x)/d; equals 1 on the identity."""
    a = np.asarray(x)
    return complex(np.trace(a)) / a.shape[0]


def herm(x) -> np.ndarray:
    """Hermitian part (x + x*)/2, used to suppress round-off asymmetry."""
    a = np.asarray(x)
    return (a + a.conj().T) / 2


def op_norm(x) -> float:
    """Operator (spectral) norm, the p = inf Schatten norm."""
    return float(np.linalg.norm(np.asarray(x), 2))


def check_exponent(p) -> float:
    """Validate an exponent in [1, inf] and return it as a float."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")
    return p


def hermitian_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian operator.

    Returns (eigenvalues, transition) with eigenvalues ascending and
    h = transition @ diag(eigenvalues) @ transition*. The input may deviate
    from Hermitian by at most HERMITIAN_TOL * max(1, ||h||); it is
    symmetrized before decomposing. Larger asymmetry is rejected.
    """
    a = as_operator(h)
    residual = op_norm(a - a.conj().T)
    scale = max(1.0, op_norm(a))
    if residual > HERMITIAN_TOL * scale:
        raise ValueError(
            f"operator is not Hermitian: asymmetry {residual:.3e} exceeds "
            f"tolerance {HERMITIAN_TOL * scale:.3e}"
        )
    w, u = np.linalg.eigh(herm(a))
    return w, u


def _eig_clamp(w: np.ndarray) -> float:
    scale = max(1.0, float(abs(w[0])), float(abs(w[-1])))
    return EIG_CLAMP_REL * scale


def abs_op(x) -> np.ndarray:
    """Absolute value |x| = (x* x)^(1/2); always PSD."""
    a = as_operator(x)
    w, u = np.linalg.eigh(herm(a.conj().T @ a))
    s = np.sqrt(np.clip(w, 0.0, None))
    return herm((u * s) @ u.conj().T)


def psd_power(a, r) -> np.ndarray:
    """Fractional power a^r of a PSD operator through its eigenbasis.

    Eigenvalues in [-clamp, 0) are flushed to zero before powering, with
    clamp = EIG_CLAMP_REL * max(1, ||a||); spectrum below -clamp means the
    input is not PSD and is rejected.
    """
    r = float(r)
    if not r > 0:
        raise ValueError(f"power must be positive, got {r}")
    w, u = hermitian_eig(a)
    clamp = _eig_clamp(w)
    if w[0] < -clamp:
        raise ValueError(
            f"operator is not PSD: min eigenvalue {w[0]:.3e} below -{clamp:.3e}"
        )
    s = np.clip(w, 0.0, None) ** r
    return herm((u * s) @ u.conj().T)


def is_psd(x, rel_tol: float = EIG_CLAMP_REL) -> bool:
    """True when x is Hermitian and its spectrum clears the clamp threshold."""
    a = as_operator(x)
    if op_norm(a - a.conj().T) > HERMITIAN_TOL * max(1.0, op_norm(a)):
        return False
    w = np.linalg.eigvalsh(herm(a))
    return bool(w[0] >= -rel_tol * max(1.0, float(abs(w[0])), float(abs(w[-1]))))


def schatten_norm(x, p) -> float:
    """Schatten p-norm under the normalized trace.

    For finite p this is (mean of sigma_k^p)^(1/p) over the singular values;
    p = inf gives the operator norm. Nondecreasing in p since ntrace(1) = 1.
    """
    a = as_operator(x)
    p = check_exponent(p)
    if p == INF:
        return op_norm(a)
    s = np.linalg.svd(a, compute_uv=False)
    return float(np.mean(s**p) ** (1.0 / p))


def conjugate_exponent(p) -> float:
    """Dual exponent p' with 1/p + 1/p' = 1; 1 and inf are swapped."""
    p = check_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# Seeded generators. All randomness flows through explicit seeds; a fixed
# (kind, dim, seed, params) tuple always reproduces the same output.
# ---------------------------------------------------------------------------


def _complex_gaussian(rng: np.random.Generator, dim: int) -> np.ndarray:
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    # QR of a Ginibre matrix with the R-diagonal phase fix.
    q, r = np.linalg.qr(_complex_gaussian(rng, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_hermitian(dim: int, seed: int) -> np.ndarray:
    """Random Hermitian (G + G*)/2 with standard complex Gaussian entries."""
    rng = np.random.default_rng(seed)
    return herm(_complex_gaussian(rng, dim))


def sample_psd(dim: int, seed: int) -> np.ndarray:
    """Random PSD operator z* z with z a complex Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = _complex_gaussian(rng, dim)
    return herm(z.conj().T @ z)


def sample_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR orthonormalization."""
    rng = np.random.default_rng(seed)
    return _haar_unitary(rng, dim)


def sample_projection_family(dim: int, count: int, seed: int) -> list[np.ndarray]:
    """Pairwise-orthogonal projections r_1..r_count summing to the identity.

    A Haar unitary's columns are split into count nonempty groups; each
    group spans one projection's range.
    """
    if not 1 <= count <= dim:
        raise ValueError(f"need 1 <= count <= dim, got count={count}, dim={dim}")
    rng = np.random.default_rng(seed)
    u = _haar_unitary(rng, dim)
    inner = sorted(rng.choice(np.arange(1, dim), size=count - 1, replace=False).tolist())
    cuts = [0] + inner + [dim]
    family = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        cols = u[:, lo:hi]
        family.append(herm(cols @ cols.conj().T))
    return family


def sample(kind: str, dim: int, seed: int, **params):
    """Dispatch to one of the seeded generators by kind name.

    Kinds: hermitian | psd | unitary | projection-family | adapted-positive.
    projection-family takes count; adapted-positive takes filtration, length
    and an optional lag.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if kind == "hermitian":
        _reject_params(kind, params)
        return sample_hermitian(dim, seed)
    if kind == "psd":
        _reject_params(kind, params)
        return sample_psd(dim, seed)
    if kind == "unitary":
        _reject_params(kind, params)
        return sample_unitary(dim, seed)
    if kind == "projection-family":
        count = params.pop("count", dim)
        _reject_params(kind, params)
        return sample_projection_family(dim, count, seed)
    if kind == "adapted-positive":
        from .expectation import sample_adapted_positive

        filtration = params.pop("filtration")
        length = params.pop("length")
        lag = params.pop("lag", 0)
        _reject_params(kind, params)
        if filtration.dim != dim:
            raise ValueError("dim does not match the filtration's space")
        return sample_adapted_positive(filtration, length, seed, lag=lag)
    raise ValueError(f"unknown sample kind {kind!r}")


def _reject_params(kind: str, params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters for kind {kind!r}: {sorted(params)}")
