"""Closed moment system for mean position and momentum.

d/dt (X, P) = M (X, P) with M = [[Theta, I], [-diag(omega^2), Theta]],
Theta x = x ^ Omega. The nonlinearity does not enter. For an axis-aligned
rotation the in-plane block has characteristic polynomial
lambda^4 + b lambda^2 + c, which decides between bounded motion, linear
growth and exponential growth.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, NoResonanceError
from .rotation import theta_matrix

BOUNDED = "Bounded"
LINEAR = "Linear"
EXPONENTIAL = "Exponential"

C_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class MomentState:
    t: float
    Xi: np.ndarray

    @property
    def X(self):
        return self.Xi[: self.Xi.size // 2]

    @property
    def P(self):
        return self.Xi[self.Xi.size // 2:]


@dataclass
class GrowthClass:
    regime: str
    rate: float
    b: float = float("nan")
    c: float = float("nan")
    D: float = float("nan")
    dim_H: int = 0
    eigenvalues: np.ndarray | None = None
    indeterminate: bool = False
    beyond_axis_aligned: bool = False
    diagnostics: dict = dc_field(default_factory=dict)


def build_generator(params):
    d = params.dim
    theta = theta_matrix(params.rotation, d)
    M = np.zeros((2 * d, 2 * d))
    M[:d, :d] = theta
    M[:d, d:] = np.eye(d)
    M[d:, :d] = -np.diag(np.square(params.omegas))
    M[d:, d:] = theta
    return M


def _plane_omegas(params):
    if not params.axis_aligned:
        raise ConfigurationError("closed-form classification needs an axis-aligned rotation")
    p, q = (0, 1) if params.dim == 2 else params.rotation_plane
    return params.omegas[p], params.omegas[q], abs(params.rotation_speed)


def char_poly_coeffs(params):
    """(b, c, D) of lambda^4 + b lambda^2 + c for the in-plane block."""
    w1, w2, W = _plane_omegas(params)
    A, B, W2 = w1 * w1, w2 * w2, W * W
    b = 2.0 * W2 + A + B
    c = (W2 - A) * (W2 - B)
    D = (A - B) ** 2 + 8.0 * W2 * (A + B)
    return b, c, D


def classify_growth(params):
    b, c, D = char_poly_coeffs(params)
    w1, w2, _ = _plane_omegas(params)
    d = params.dim
    if abs(c) <= C_ZERO_TOL * b:
        if w1 != w2:
            return GrowthClass(LINEAR, 0.0, b, c, D, 2 * d - 1)
        return GrowthClass(BOUNDED, 0.0, b, c, D, 2 * d)
    if c < 0:
        lam = math.sqrt(0.5 * (-b + math.sqrt(D)))
        return GrowthClass(EXPONENTIAL, lam, b, c, D, 2 * (d - 1))
    return GrowthClass(BOUNDED, 0.0, b, c, D, 2 * d)


def _pade13(A):
    b = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0)
    n = A.shape[0]
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    return np.linalg.solve(V - U, V + U)


def expm(A):
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant."""
    A = np.asarray(A, dtype=float)
    norm = np.linalg.norm(A, 1)
    s = 0
    if norm > 5.371920351148152:
        s = int(math.ceil(math.log2(norm / 5.371920351148152)))
    E = _pade13(A / 2.0 ** s)
    for _ in range(s):
        E = E @ E
    return E


def expm_eig(A):
    """exp(A) through an eigendecomposition; invalid for defective A."""
    lam, V = np.linalg.eig(A)
    return (V @ np.diag(np.exp(lam)) @ np.linalg.inv(V)).real


def propagate_moments(Xi0, params, times):
    M = build_generator(params)
    Xi0 = np.asarray(Xi0, dtype=float)
    if Xi0.shape != (2 * params.dim,):
        raise ConfigurationError(f"Xi0 must have {2 * params.dim} entries")
    return [MomentState(float(t), expm(float(t) * M) @ Xi0) for t in np.atleast_1d(times)]


def _null_space(A, tol):
    u, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T, s


def _realify(v):
    v = np.asarray(v)
    k = np.argmax(np.abs(v))
    v = v * np.exp(-1j * np.angle(v[k]))
    v = v.real
    return v / np.linalg.norm(v)


def classify_general_omega(params, tol=1e-9, cluster_tol=1e-6):
    """Eigensolver-based classification valid for any rotation vector.

    Numerically computed eigenvalues of a defective matrix scatter by about
    sqrt(machine eps), so eigenvalues are first grouped into clusters of
    radius ``cluster_tol``; a cluster centred on the imaginary axis is tested
    for defectiveness through the rank of (M - lambda I).
    """
    M = build_generator(params)
    n = M.shape[0]
    lam = np.linalg.eigvals(M)
    scale = max(1.0, np.linalg.norm(M, 2))
    clusters = []
    for z in lam:
        for cl in clusters:
            if abs(z - np.mean(cl)) < cluster_tol * scale:
                cl.append(z)
                break
        else:
            clusters.append([z])
    regime, rate, indeterminate = BOUNDED, 0.0, False
    diag = {"clusters": []}
    for cl in clusters:
        centre = complex(np.mean(cl))
        m = len(cl)
        if centre.real > cluster_tol * scale:
            rate = max(rate, max(z.real for z in cl))
            regime = EXPONENTIAL
            continue
        if abs(centre.real) > cluster_tol * scale or m == 1:
            continue
        s = np.linalg.svd(M - centre * np.eye(n), compute_uv=False)
        rank_tol = tol * scale
        geometric = int(np.sum(s <= rank_tol))
        gap = s[n - geometric - 1] if geometric < n else np.inf
        floor = s[n - geometric] if geometric > 0 else 0.0
        margin = min(gap / rank_tol, rank_tol / max(floor, 1e-300))
        diag["clusters"].append(dict(centre=centre, multiplicity=m, geometric=geometric,
                                     margin=float(margin)))
        if margin < 10.0:
            indeterminate = True
        if geometric < m and regime != EXPONENTIAL:
            regime = LINEAR
    d = params.dim
    dim_H = {EXPONENTIAL: 2 * (d - 1), LINEAR: 2 * d - 1, BOUNDED: 2 * d}[regime]
    out = GrowthClass(regime, float(rate), dim_H=dim_H, eigenvalues=lam,
                      indeterminate=indeterminate,
                      beyond_axis_aligned=not params.axis_aligned,
                      diagnostics=diag)
    if params.axis_aligned:
        out.b, out.c, out.D = char_poly_coeffs(params)
    return out


@dataclass
class ResonantSubspace:
    regime: str
    dim: int
    H_basis: np.ndarray          # columns span the non-growing initial data
    left_vectors: np.ndarray     # rows l with l . Xi0 = 0 for Xi0 in H
    growing_modes: list          # (left, right) pairs
    complement_basis: np.ndarray  # orthogonal complement of the real/defective eigenspace
    defective_direction: np.ndarray | None = None
    generalized_vector: np.ndarray | None = None

    def coefficients(self, Xi0):
        return self.left_vectors @ np.asarray(Xi0, dtype=float)

    def contains(self, Xi0, tol=1e-10):
        Xi0 = np.asarray(Xi0, dtype=float)
        return bool(np.all(np.abs(self.coefficients(Xi0)) <= tol * max(1.0, np.linalg.norm(Xi0))))


def resonant_subspace(params):
    """Growing modes and the subspace H of initial data that does not grow.

    H is characterized by vanishing coefficients along the left eigenvectors
    of the growing modes. ``complement_basis`` additionally records the
    orthogonal complement of the right eigenspace of the real eigenvalue(s),
    which differs from H because M is not normal.
    """
    gc = classify_growth(params)
    if gc.regime == BOUNDED:
        raise NoResonanceError("parameters are in the bounded regime; no resonant subspace")
    M = build_generator(params)
    n = M.shape[0]
    if gc.regime == EXPONENTIAL:
        lam, VL, VR = scipy.linalg.eig(M, left=True, right=True)
        modes = []
        for target in (gc.rate, -gc.rate):
            j = int(np.argmin(np.abs(lam - target)))
            r = _realify(VR[:, j])
            left = _realify(VL[:, j])
            left = left / (left @ r)
            modes.append((left, r))
        left_rows = np.array([m[0] for m in modes])
        H, _ = _null_space(left_rows, 1e-12)
        comp, _ = _null_space(np.array([m[1] for m in modes]), 1e-12)
        return ResonantSubspace(gc.regime, H.shape[1], H, left_rows, modes, comp)
    # linear regime: zero is a double eigenvalue with a single eigenvector
    tol = 1e-9 * max(1.0, np.linalg.norm(M, 2))
    ker, _ = _null_space(M, tol)
    lker, _ = _null_space(M.T, tol)
    v0 = ker[:, 0].real
    v0 = v0 / np.linalg.norm(v0)
    if abs(v0[np.argmax(np.abs(v0))]) > 0 and v0[np.argmax(np.abs(v0))] < 0:
        v0 = -v0
    g = np.linalg.lstsq(M, v0, rcond=None)[0]
    g = g - (g @ v0) * v0
    left = lker[:, 0].real
    left = left / (left @ g)
    H, _ = _null_space(left[None, :], 1e-12)
    comp, _ = _null_space(v0[None, :], 1e-12)
    return ResonantSubspace(gc.regime, H.shape[1], H, left[None, :], [(left, v0)], comp,
                            defective_direction=v0, generalized_vector=g)
