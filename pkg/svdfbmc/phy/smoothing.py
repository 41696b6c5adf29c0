"""
Per-tone SVD beamformers and their smoothing across frequency.

Two smoothing methods are provided. Phase-factor optimization recomputes the SVD
at every tone, pairs the singular vectors with the previous tone's streams and
rotates each one onto its predecessor. Orthogonal iteration warm-starts a QR
subspace iteration from the previous tone's beamformer, which keeps adjacent
beamformers close without an explicit alignment step.
"""

import logging
from fractions import Fraction
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svdvals

from svdfbmc.core.errors import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

SMOOTHING_NONE = "none"
SMOOTHING_PHASE = "phase"
SMOOTHING_ORTHO = "ortho"
SMOOTHING_CHOICES = (SMOOTHING_NONE, SMOOTHING_PHASE, SMOOTHING_ORTHO)

# |v_hat^H v_prev| below this leaves the phase undefined
PHASE_EPS = 1e-15


@dataclass(eq=False)
class BeamformerSet:
    """
    Transmit/receive beamformers, singular values and ZF gains per tone.

    Arrays cover every tone 0..N-1; tones outside ``tones`` hold zeros.

    Attributes:
        V (np.ndarray): (N, Nt, L) transmit beamformers
        U (np.ndarray): (N, Nr, L) receive beamformers
        D (np.ndarray): (N, L) singular values per stream
        E (np.ndarray): (N, L) equalizer gains
        tones (np.ndarray): Tone indices in sweep order
    """

    V: np.ndarray
    U: np.ndarray
    D: np.ndarray
    E: np.ndarray
    tones: np.ndarray
    zf_clamped: np.ndarray = None
    phase_undefined: np.ndarray = None
    qr_breakdown: np.ndarray = None
    completed: np.ndarray = None

    def __post_init__(self):
        shape = self.D.shape
        for name in ("zf_clamped", "phase_undefined", "completed"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(shape, dtype=bool))
        if self.qr_breakdown is None:
            self.qr_breakdown = np.zeros(shape[0], dtype=bool)

    @property
    def num_tones(self) -> int:
        return self.V.shape[0]

    @property
    def num_streams(self) -> int:
        return self.V.shape[2]

    @classmethod
    def identity(cls, num_tones: int, num_antennas: int, tones: Sequence[int] = None) -> "BeamformerSet":
        """
        Identity beamformers with unit gains, for back-to-back links.

        Args:
            num_tones (int): Number of tones N
            num_antennas (int): Antennas on both sides, equal to the stream count
            tones (Sequence[int]): Covered tones, all tones when omitted

        Returns:
            BeamformerSet: V = U = I, D = E = 1 on the covered tones
        """
        tones = np.arange(num_tones) if tones is None else np.asarray(tones)
        eye = np.zeros((num_tones, num_antennas, num_antennas), dtype=complex)
        eye[tones] = np.eye(num_antennas)
        gains = np.zeros((num_tones, num_antennas))
        gains[tones] = 1.0
        return cls(V=eye, U=eye.copy(), D=gains, E=gains.copy(), tones=tones)

    def adjacent_distances(self) -> np.ndarray:
        """
        Euclidean distance ||V_k - V_{k-1}||_F between consecutive swept tones.

        Returns:
            np.ndarray: One distance per adjacent pair
        """
        v = self.V[self.tones]
        return np.linalg.norm(v[1:] - v[:-1], axis=(1, 2))


@dataclass
class PerturbationDiagnostic:
    """
    Singular value and subspace perturbation between two channel matrices.

    Attributes:
        delta_norm (float): ||H2 - H1||_2
        singular_value_gaps (np.ndarray): |lambda2_l - lambda1_l| per stream
        separation_delta (float): delta used for the subspace bound
        wedin_lhs (float): Combined sin-angle measure of both subspaces
        wedin_rhs (float): Combined residual bound divided by delta
        wedin_rhs_crude (float): Bound using ||Delta H|| in place of the residuals
        applicable (bool): Whether the separation conditions hold
        satisfied (bool): Whether the checked bound holds
    """

    delta_norm: float
    singular_value_gaps: np.ndarray
    separation_delta: float = 0.0
    wedin_lhs: float = 0.0
    wedin_rhs: float = 0.0
    wedin_rhs_crude: float = 0.0
    applicable: bool = True
    satisfied: bool = True


def _canonical_completion(Q: np.ndarray, bad: np.ndarray) -> np.ndarray:
    """Replace flagged columns of Q by canonical basis vectors orthogonalized against the rest."""
    Q = Q.copy()
    n = Q.shape[0]
    for col in np.flatnonzero(bad):
        keep = [c for c in range(Q.shape[1]) if c != col and (not bad[c] or c < col)]
        basis = Q[:, keep]
        for e in np.eye(n, dtype=complex):
            r = e - basis @ (basis.conj().T @ e)
            norm = np.linalg.norm(r)
            if norm > 1e-8:
                Q[:, col] = r / norm
                break
    return Q


def svd_decompose(H: np.ndarray, L: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Thin SVD of H truncated to the L largest singular values.

    Each column of V is rotated so its largest-magnitude entry is real positive
    (first index on ties) and U is rotated with it; columns with a zero singular
    value get canonical basis vectors.

    Args:
        H (np.ndarray): (Nr, Nt) channel matrix
        L (int): Number of streams

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: U (Nr, L), D (L,), V (Nt, L)
    """
    H = np.asarray(H, dtype=complex)
    if L > min(H.shape):
        raise ShapeError(f"L={L} exceeds min{H.shape}")
    u, s, vh = np.linalg.svd(H)
    U = u[:, :L]
    D = s[:L].copy()
    V = vh.conj().T[:, :L]

    zero = D <= 0.0
    if zero.any():
        V = _canonical_completion(V, zero)
        U = _canonical_completion(U, zero)
        D[zero] = 0.0

    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(L)]
    phase = np.conj(lead) / np.abs(lead)
    return U * phase, D, V * phase


def _alignment_phase(v_hat: np.ndarray, v_prev: np.ndarray) -> Tuple[complex, bool]:
    inner = np.vdot(v_hat, v_prev)
    mag = abs(inner)
    if mag < PHASE_EPS:
        return 1.0 + 0j, True
    return inner / mag, False


def phase_align(v_hat: np.ndarray, v_prev: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    Rotate v_hat by the phase that minimizes its distance to v_prev.

    Args:
        v_hat (np.ndarray): Unit vector to rotate
        v_prev (np.ndarray): Unit reference vector

    Returns:
        Tuple[np.ndarray, bool]: Rotated vector, and True when the vectors are
        orthogonal and v_hat was returned unchanged
    """
    phase, undefined = _alignment_phase(v_hat, v_prev)
    return v_hat * phase, undefined


def subspace_distance(v: np.ndarray, w: np.ndarray) -> float:
    """
    Spectral norm of v v^H - w w^H for unit vectors.

    Args:
        v (np.ndarray): Unit vector
        w (np.ndarray): Unit vector

    Returns:
        float: Distance in [0, 1]
    """
    overlap = min(abs(np.vdot(v, w)) ** 2, 1.0)
    return float(np.sqrt(1.0 - overlap))


def pair_streams(
    d_hat: np.ndarray,
    v_hat: np.ndarray,
    v_prev: np.ndarray,
    closeness_threshold: float = 0.05,
) -> np.ndarray:
    """
    Assign the candidate singular vectors of a tone to the previous tone's streams.

    Candidates whose singular values are within ``closeness_threshold`` (relative
    gap) of each other form a cluster; inside a cluster, streams in ascending
    order take the unused candidate nearest in subspace distance.

    Args:
        d_hat (np.ndarray): (L,) candidate singular values, descending
        v_hat (np.ndarray): (Nt, L) candidate singular vectors
        v_prev (np.ndarray): (Nt, L) previous tone's beamformer
        closeness_threshold (float): Relative gap below which values are close

    Returns:
        np.ndarray: perm with stream l taking candidate perm[l]
    """
    L = len(d_hat)
    perm = np.arange(L)
    clusters = [[0]] if L else []
    for i in range(L - 1):
        top = d_hat[i]
        close = top <= 0.0 or (top - d_hat[i + 1]) / top < closeness_threshold
        if close:
            clusters[-1].append(i + 1)
        else:
            clusters.append([i + 1])

    for cluster in clusters:
        if len(cluster) == 1:
            continue
        free = list(cluster)
        for stream in cluster:
            best, best_dist = None, np.inf
            for cand in free:
                dist = subspace_distance(v_hat[:, cand], v_prev[:, stream])
                if dist < best_dist:
                    best, best_dist = cand, dist
            perm[stream] = best
            free.remove(best)
    return perm


def orthogonal_iteration(
    H: np.ndarray, Q0: np.ndarray, n_iter: int, tol: float = 1e-12
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """
    Orthogonal iteration on A = H^H H warm-started from Q0.

    Args:
        H (np.ndarray): (Nr, Nt) channel matrix
        Q0 (np.ndarray): (Nt, L) orthonormal starting basis
        n_iter (int): Number of multiply/QR steps
        tol (float): Relative size of a diagonal of R treated as breakdown

    Returns:
        Tuple: V (Nt, L), R (L, L) upper triangular with real positive
        diagonal, D (L,) = sqrt(diag R), and a QR breakdown flag
    """
    if n_iter < 1:
        raise ConfigurationError("n_iter must be at least 1")
    H = np.asarray(H, dtype=complex)
    A = H.conj().T @ H
    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    Q = np.asarray(Q0, dtype=complex)
    breakdown = False

    for _ in range(n_iter):
        B = A @ Q
        Q, R = np.linalg.qr(B)
        diag = np.diag(R)
        mag = np.abs(diag)
        phases = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
        Q = Q * phases
        R = np.conj(phases)[:, None] * R
        bad = mag < tol * scale
        if bad.any():
            breakdown = True
            Q = _canonical_completion(Q, bad)

    D = np.sqrt(np.maximum(np.real(np.diag(R)), 0.0))
    return Q, R, D, breakdown


def derive_receive_beamformer(
    H: np.ndarray, V: np.ndarray, D: np.ndarray, floor: float = 1e-6
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Receive beamformer U = H V diag(D)^-1.

    Args:
        H (np.ndarray): (Nr, Nt) channel matrix
        V (np.ndarray): (Nt, L) transmit beamformer
        D (np.ndarray): (L,) singular values
        floor (float): Streams with D below floor * max(D) are completed canonically

    Returns:
        Tuple[np.ndarray, np.ndarray]: U (Nr, L) and a per-stream completion flag
    """
    D = np.asarray(D, dtype=float)
    peak = D.max() if D.size else 0.0
    weak = D <= floor * peak if peak > 0 else np.ones(D.shape, dtype=bool)
    safe = np.where(weak, 1.0, D)
    U = (np.asarray(H) @ V) / safe
    if weak.any():
        U = _canonical_completion(U, weak)
    return U, weak


def zf_equalizer(D: np.ndarray, floor: float = 1e-6) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-forcing gains 1/lambda, clamped at floor * max(lambda).

    Args:
        D (np.ndarray): (..., L) singular values
        floor (float): Relative singularity floor

    Returns:
        Tuple[np.ndarray, np.ndarray]: Gains and a clamped flag of the same shape
    """
    D = np.asarray(D, dtype=float)
    peak = D.max(axis=-1, keepdims=True)
    limit = floor * peak
    clamped = D < limit
    denom = np.maximum(D, limit)
    E = np.divide(1.0, denom, out=np.zeros_like(D), where=denom > 0)
    return E, clamped | (peak == 0)


def smooth_sweep(
    H: np.ndarray,
    tones: Sequence[int],
    L: int,
    method: str = SMOOTHING_ORTHO,
    n_iter: int = 3,
    closeness_threshold: float = 0.05,
    zf_floor: float = 1e-6,
    phase_rng: Optional[np.random.Generator] = None,
) -> BeamformerSet:
    """
    Beamformers for a sequence of tones, smoothed in sweep order.

    With method "none" every tone keeps its own SVD. The SVD only fixes each
    singular vector up to a unit phase; when ``phase_rng`` is given that phase is
    drawn uniformly per tone and stream, otherwise the pinned convention of
    svd_decompose is kept.

    Args:
        H (np.ndarray): (N, Nr, Nt) channel response per tone
        tones (Sequence[int]): Tones to cover, in sweep order
        L (int): Number of streams
        method (str): "none", "phase" or "ortho"
        n_iter (int): Orthogonal iteration steps per tone
        closeness_threshold (float): Relative gap for stream pairing
        zf_floor (float): Singularity floor for ZF and receive completion
        phase_rng (Optional[np.random.Generator]): Phase draws for method "none"

    Returns:
        BeamformerSet: Beamformers on the swept tones
    """
    if method not in SMOOTHING_CHOICES:
        raise ConfigurationError(f"Unknown smoothing method '{method}'")
    H = np.asarray(H, dtype=complex)
    tones = np.asarray(tones, dtype=int)
    N, Nr, Nt = H.shape

    V = np.zeros((N, Nt, L), dtype=complex)
    U = np.zeros((N, Nr, L), dtype=complex)
    D = np.zeros((N, L))
    phase_undefined = np.zeros((N, L), dtype=bool)
    qr_breakdown = np.zeros(N, dtype=bool)
    completed = np.zeros((N, L), dtype=bool)

    prev = None
    for k in tones:
        if method == SMOOTHING_NONE:
            U[k], D[k], V[k] = svd_decompose(H[k], L)
            if phase_rng is not None:
                phases = np.exp(2j * np.pi * phase_rng.random(L))
                U[k] *= phases
                V[k] *= phases
        elif prev is None:
            U[k], D[k], V[k] = svd_decompose(H[k], L)
        elif method == SMOOTHING_PHASE:
            u, d, v = svd_decompose(H[k], L)
            perm = pair_streams(d, v, V[prev], closeness_threshold)
            u, d, v = u[:, perm], d[perm], v[:, perm]
            for l in range(L):
                phase, phase_undefined[k, l] = _alignment_phase(v[:, l], V[prev][:, l])
                v[:, l] *= phase
                u[:, l] *= phase
            U[k], D[k], V[k] = u, d, v
        else:
            V[k], _, D[k], qr_breakdown[k] = orthogonal_iteration(H[k], V[prev], n_iter)
            U[k], completed[k] = derive_receive_beamformer(H[k], V[k], D[k], zf_floor)
        prev = k

    E = np.zeros((N, L))
    zf_clamped = np.zeros((N, L), dtype=bool)
    E[tones], zf_clamped[tones] = zf_equalizer(D[tones], zf_floor)

    for name, flags in (
        ("ZF floor clamps", zf_clamped),
        ("undefined phase alignments", phase_undefined),
        ("QR breakdowns", qr_breakdown),
        ("receive beamformer completions", completed),
    ):
        count = int(flags.sum())
        if count:
            logger.warning(f"{count} {name} during '{method}' sweep")

    return BeamformerSet(
        V=V,
        U=U,
        D=D,
        E=E,
        tones=tones,
        zf_clamped=zf_clamped,
        phase_undefined=phase_undefined,
        qr_breakdown=qr_breakdown,
        completed=completed,
    )


def weyl_check(H1: np.ndarray, H2: np.ndarray) -> PerturbationDiagnostic:
    """
    Compare singular value gaps against ||H2 - H1||_2.

    Args:
        H1 (np.ndarray): Reference matrix
        H2 (np.ndarray): Perturbed matrix of the same shape

    Returns:
        PerturbationDiagnostic: gaps, norm and whether every gap is within the norm
    """
    if np.shape(H1) != np.shape(H2):
        raise ShapeError(f"Shape mismatch {np.shape(H1)} vs {np.shape(H2)}")
    delta = float(np.linalg.norm(np.asarray(H2) - np.asarray(H1), 2))
    gaps = np.abs(svdvals(H2) - svdvals(H1))
    return PerturbationDiagnostic(
        delta_norm=delta,
        singular_value_gaps=gaps,
        satisfied=bool(np.all(gaps <= delta + 1e-12)),
    )


def _sin_theta_sq(Lm: np.ndarray, Mm: np.ndarray) -> Optional[float]:
    """Squared Frobenius norm of sin Theta(L, M), None without full column rank."""
    l = Lm.shape[1]
    if np.linalg.matrix_rank(Lm) < l or np.linalg.matrix_rank(Mm) < l:
        return None
    ql, _ = np.linalg.qr(Lm)
    qm, _ = np.linalg.qr(Mm)
    # ||(I - P_M) Q_L||_F^2 is the sum of squared sines of the principal angles
    residual = ql - qm @ (qm.conj().T @ ql)
    return float(np.linalg.norm(residual, "fro") ** 2)


def wedin_check(H1: np.ndarray, H2: np.ndarray, l: int, delta: float) -> PerturbationDiagnostic:
    """
    Evaluate the combined subspace-angle bound between two channel matrices.

    H1 is the previous tone and H2 the current one. The bound is only evaluated
    when the top-l singular values of H2 are at least ``delta`` away from the
    remaining singular values of H1 and from zero.

    The sines come from the projector residual ||(I - Q1 Q1^H) Q2||_F, which
    equals the root sum of sin^2(arccos s_i) over the singular values s_i of
    Q1^H Q2.

    Args:
        H1 (np.ndarray): Previous tone channel
        H2 (np.ndarray): Current tone channel
        l (int): Dimension of the compared singular subspaces
        delta (float): Separation

    Returns:
        PerturbationDiagnostic: Both sides of the bound and the crude variant
    """
    diag = weyl_check(H1, H2)
    diag.separation_delta = float(delta)
    H1 = np.asarray(H1, dtype=complex)
    H2 = np.asarray(H2, dtype=complex)

    s1 = svdvals(H1)
    s2 = svdvals(H2)
    rest = s1[l:]
    separated = s2[l - 1] >= delta and (
        rest.size == 0 or np.min(np.abs(s2[:l, None] - rest[None, :])) >= delta
    )
    if not separated or delta <= 0:
        diag.applicable = False
        return diag

    U1, _, V1 = svd_decompose(H1, l)
    U2, d2, V2 = svd_decompose(H2, l)
    sin_v = _sin_theta_sq(V2, V1)
    sin_u = _sin_theta_sq(U2, U1)
    if sin_v is None or sin_u is None:
        diag.applicable = False
        return diag

    right = H1 @ V2 - U2 * d2
    left = H1.conj().T @ U2 - V2 * d2
    diag.wedin_lhs = float(np.sqrt(sin_v + sin_u))
    diag.wedin_rhs = float(
        np.sqrt(np.linalg.norm(right, "fro") ** 2 + np.linalg.norm(left, "fro") ** 2) / delta
    )
    diag.wedin_rhs_crude = float(np.sqrt(2 * l) * diag.delta_norm / delta)
    diag.satisfied = diag.wedin_lhs <= diag.wedin_rhs + 1e-10
    return diag


def flops_rows(nt: int, nr: int, n_iter: int = 3) -> dict:
    """
    FLOP counts of the steps of the orthogonally iterated SVD for one tone.

    Args:
        nt (int): Transmit antennas
        nr (int): Receive antennas
        n_iter (int): Orthogonal iteration steps

    Returns:
        dict: Step description to exact (Fraction) count
    """
    nt, nr = Fraction(nt), Fraction(nr)
    return {
        "A = H^H H": nt * nt * nr + nt * nr - nt * nt / 2 - nt / 2,
        "B = A V (x n_iter)": (2 * nt ** 3 - nt * nt) * n_iter,
        "QR of B (x n_iter)": Fraction(4, 3) * nt ** 3 * n_iter,
        "U from H = U D V^H": 2 * nt * nt * nr,
    }


def flops_estimate(nt: int, nr: int, method: str = SMOOTHING_ORTHO, n_iter: int = 3) -> int:
    """
    FLOPS per tone of a smoothing method.

    Args:
        nt (int): Transmit antennas
        nr (int): Receive antennas
        method (str): "ortho" or "phase"
        n_iter (int): Orthogonal iteration steps

    Returns:
        int: Count rounded to the nearest integer
    """
    if method == SMOOTHING_ORTHO:
        total = sum(flops_rows(nt, nr, n_iter).values())
    elif method == SMOOTHING_PHASE:
        # direct SVD dominates
        total = Fraction(4 * nt * nt * nr + 8 * nt * nr * nr + 9 * nr ** 3)
    else:
        raise ConfigurationError(f"No FLOPS model for method '{method}'")
    return int(round(total))
