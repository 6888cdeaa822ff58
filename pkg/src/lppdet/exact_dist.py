"""Exact distribution laws assembled from circle-recursion data.

Every model's cumulative law is a ratio of Toeplitz-type determinants of
its symbol.  The square law is a plain determinant; the triangle law at
odd thresholds couples polynomial boundary values with two infinite
products over odd-index norms; the external-sources law takes a rank-two
correction of the square determinant with a removable singularity where
the two boundary rates multiply to one.  A low-dimensional orthogonal
group quadrature provides an independent route to the triangle law.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_chebyt, roots_chebyu, roots_jacobi

from .errors import TruncationError, ValidationError, VerificationError
from .symbols import (
    ModelKind,
    ModelSpec,
    SymbolSpec,
    build_symbol,
    evaluate_symbol,
    fourier_coeffs,
    normalization_log_z,
)
from .opuc import (
    OpucData,
    levinson,
    square_opuc_highprec,
    toeplitz_log_det,
    eval_pi,
)

__all__ = [
    "DistTable",
    "square_opuc",
    "model_opuc",
    "prob_square",
    "prob_square_product",
    "prob_triangle_odd",
    "triangle_tail_bound",
    "prob_external",
    "prob_lattice",
    "weyl_ogroup_expectation",
    "weyl_ogroup_expectation_spec",
    "prob_triangle_fs_via_ogroup",
    "symmetrized_lattice_prob",
    "scaled_cdf",
    "build_dist_table",
]

# beyond roughly 2t + 8 t^{1/3} the reflection data is numerically zero,
# so this cutoff covers every product tail the formulas need
def _default_cutoff(t: float, ell: int) -> int:
    return int(2.0 * t + 10.0 * t ** (1.0 / 3.0) + 20.0) + max(0, ell)


_HIGHPREC_T = 6.0


def square_opuc(t: float, cutoff: int | None = None, ell: int = 0) -> OpucData:
    """Circle-recursion data for the exponential symbol at rate t.

    Switches to the extended-precision moment path once e^{2t} starts
    eating double-precision headroom.
    """
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    if cutoff is None:
        cutoff = _default_cutoff(t, ell)
    if t > _HIGHPREC_T:
        return square_opuc_highprec(t, cutoff)
    spec = build_symbol(ModelSpec(kind=ModelKind.POISSON_SQUARE, t=t))
    table = fourier_coeffs(spec, half_width=cutoff + 2)
    return levinson(table, cutoff)


def model_opuc(model: ModelSpec, cutoff: int) -> OpucData:
    spec = build_symbol(model)
    table = fourier_coeffs(spec, half_width=cutoff + 2)
    return levinson(table, cutoff)


def prob_square(t: float, ell: int, opuc: OpucData) -> float:
    """P(longest chain <= ell) for the rate-t square process."""
    if ell < 0:
        return 0.0
    if ell > opuc.cutoff:
        raise ValidationError(
            f"ell = {ell} exceeds recursion cutoff {opuc.cutoff}"
        )
    return math.exp(-t * t + toeplitz_log_det(opuc, ell))


def prob_square_product(
    t: float, ell: int, opuc: OpucData
) -> tuple[float, float]:
    """Same law through the complementary product over norms >= ell.

    Returns (probability, truncation bound).  The representation
    exp(-sum_{k>=ell} log N_k) uses that the log-norms sum to t^2; the
    truncation bound is the geometric remainder of the unsummed terms.
    """
    logs = opuc.log_norms[ell:]
    tail = _geometric_remainder(np.abs(logs))
    return math.exp(-float(np.sum(logs))), tail


def _geometric_remainder(terms: np.ndarray) -> float:
    """Bound sum of the continuation of a decaying positive sequence.

    Computed terms decay until they sit on the roundoff plateau of the
    recursion's dot products, where monotonicity is lost.  Every adjacent
    decreasing pair yields a candidate bound: later terms at face value
    plus a geometric continuation at that pair's ratio.  The smallest
    candidate wins; one extra step at the final term covers the
    continuation past arrays that end on the plateau.
    """
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0 or float(terms.max()) == 0.0:
        return 0.0
    if terms.size == 1:
        return float(terms[0])
    suffix = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    best = math.inf
    for i in range(1, terms.size):
        prev, cur = float(terms[i - 1]), float(terms[i])
        if prev <= 0.0 or cur >= prev:
            continue
        r = cur / prev
        best = min(best, float(suffix[i + 1]) + cur * r / (1.0 - r))
    if not math.isfinite(best):
        # no decreasing pair: either the whole window sits on the flat
        # roundoff plateau (bounded wobble, charge at face value) or the
        # recursion is genuinely diverging
        if float(terms[-1]) <= 8.0 * float(terms[0]):
            return float(terms.sum()) + float(terms[-1])
        raise TruncationError(
            "trailing terms are not decaying; increase the recursion cutoff"
        )
    return best + float(terms[-1])


def triangle_tail_bound(opuc: OpucData, ell: int, k_tail: int) -> float:
    """Bound on dropping product factors past index ell + k_tail.

    Factor k of the boundary products differs from 1 by at most
    |log N_{2k+1}| + |b(2k+1)| up to second order, so the sum of those
    beyond the truncation, plus a geometric continuation, bounds the
    relative truncation error.
    """
    start = ell + k_tail
    idx = np.arange(2 * start + 1, opuc.cutoff + 1, 2)
    if len(idx) == 0:
        raise ValidationError(
            f"cutoff {opuc.cutoff} leaves no margin past the truncation "
            f"point 2*(ell + k_tail) = {2 * start}; rebuild with a larger cutoff"
        )
    terms = np.abs(opuc.log_norms[idx]) + np.abs(opuc.reflection[idx])
    return float(np.sum(terms)) + _geometric_remainder(terms)


def prob_triangle_odd(
    t: float,
    alpha: float,
    ell: int,
    opuc: OpucData,
    k_tail: int = 40,
    tail_tol: float = 1e-12,
) -> float:
    """P(longest chain <= 2*ell + 1) for the triangle process.

    Combines the degree-2*ell polynomial pair at -alpha with the two
    half-index norm products; the products are truncated after k_tail
    factors and the dropped mass is bounded by ``triangle_tail_bound``.
    """
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    if ell < 0:
        return 0.0
    if 2 * (ell + k_tail) + 1 > opuc.cutoff:
        k_tail = (opuc.cutoff - 1) // 2 - ell
        if k_tail < 4:
            raise ValidationError(
                f"cutoff {opuc.cutoff} too small for ell = {ell}; need at "
                f"least {2 * ell + 9}"
            )
    bound = triangle_tail_bound(opuc, ell, k_tail)
    if bound > tail_tol:
        raise TruncationError(
            f"product truncation bound {bound:.3e} exceeds {tail_tol:.1e}; "
            "increase k_tail or the recursion cutoff"
        )
    log_h_plus = 0.0
    log_h_minus = 0.0
    for k in range(ell, ell + k_tail):
        b = float(opuc.reflection[2 * k + 1])
        log_n = float(opuc.log_norms[2 * k + 1])
        log_h_plus += -log_n + math.log1p(b)
        log_h_minus += -log_n + math.log1p(-b)
    pair = eval_pi(opuc, 2 * ell, -alpha)
    a_plus = pair.pi_star_mantissa + alpha * pair.pi_mantissa
    a_minus = pair.pi_star_mantissa - alpha * pair.pi_mantissa
    value = 0.5 * (
        a_plus * math.exp(pair.log_scale + log_h_plus)
        + a_minus * math.exp(pair.log_scale + log_h_minus)
    )
    return math.exp(-alpha * t) * value


_EXTERNAL_SINGULAR_TOL = 1e-4
_EXTERNAL_FD_STEP = 1e-3


def prob_external(
    t: float, a_plus: float, a_minus: float, ell: int, opuc: OpucData
) -> float:
    """P(longest chain <= ell) with boundary sources of rates a_plus/a_minus.

    Within 1e-4 of the removable singularity a_plus*a_minus = 1 the value
    is recovered by a symmetric two-point evaluation in a_minus with
    Richardson extrapolation instead of the cancelling direct quotient.
    """
    if a_plus < 0 or a_minus < 0:
        raise ValidationError("boundary rates must be >= 0")
    if ell < 1:
        raise ValidationError(f"ell must be >= 1, got {ell}")
    if ell > opuc.cutoff:
        raise ValidationError(f"ell = {ell} exceeds cutoff {opuc.cutoff}")
    if abs(a_plus * a_minus - 1.0) >= _EXTERNAL_SINGULAR_TOL:
        return _external_direct(t, a_plus, a_minus, ell, opuc)
    h1 = _EXTERNAL_FD_STEP
    coarse = 0.5 * (
        _external_direct(t, a_plus, a_minus - h1, ell, opuc)
        + _external_direct(t, a_plus, a_minus + h1, ell, opuc)
    )
    h2 = 0.5 * h1
    fine = 0.5 * (
        _external_direct(t, a_plus, a_minus - h2, ell, opuc)
        + _external_direct(t, a_plus, a_minus + h2, ell, opuc)
    )
    return (4.0 * fine - coarse) / 3.0


def _external_log_dprime(
    a_plus: float, a_minus: float, ell: int, opuc: OpucData
) -> tuple[float, float]:
    """(mantissa, log-scale) of the corrected determinant at index ell."""
    pp = eval_pi(opuc, ell, -a_plus)
    pm = eval_pi(opuc, ell, -a_minus)
    num = (
        pp.pi_star_mantissa * pm.pi_star_mantissa
        - a_plus * a_minus * pp.pi_mantissa * pm.pi_mantissa
    )
    mant = num / (1.0 - a_plus * a_minus)
    scale = pp.log_scale + pm.log_scale + toeplitz_log_det(opuc, ell)
    return mant, scale


def _external_direct(
    t: float, a_plus: float, a_minus: float, ell: int, opuc: OpucData
) -> float:
    m1, s1 = _external_log_dprime(a_plus, a_minus, ell, opuc)
    m0, s0 = _external_log_dprime(a_plus, a_minus, ell - 1, opuc)
    log_z = (a_plus + a_minus) * t + t * t
    # rebase both terms onto the larger scale before subtracting
    s = max(s1, s0)
    combined = m1 * math.exp(s1 - s) - a_plus * a_minus * m0 * math.exp(s0 - s)
    if combined <= 0.0:
        # exact zero or rounding residue at tiny probabilities
        return 0.0
    return math.exp(s - log_z) * combined


def prob_lattice(model: ModelSpec, ell: int) -> float:
    """Cumulative law of any Toeplitz-catalog lattice or lines model."""
    if model.kind not in (
        ModelKind.LATTICE_A,
        ModelKind.LATTICE_B,
        ModelKind.LATTICE_C,
        ModelKind.POISSON_LINES_D,
        ModelKind.POISSON_LINES_E,
    ):
        raise ValidationError(
            f"prob_lattice does not handle kind {model.kind.value}"
        )
    if ell < 0:
        return 0.0
    data = model_opuc(model, ell + 2)
    return math.exp(-normalization_log_z(model) + toeplitz_log_det(data, ell))


def _component_quadrature(
    ell: int, minus_component: bool, n_nodes: int
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Eigenvalue-angle quadrature for one component of the orthogonal group.

    Returns (cosine nodes, combined weights, fixed eigenvalues).  The
    paired angles carry the squared Vandermonde in the cosines times a
    component-specific one-dimensional weight:

      even size, det +1 : arcsine weight (pure Chebyshev)
      even size, det -1 : fixed +1 and -1, sine-squared weight
      odd size,  det +1 : fixed +1, half-angle sine-squared  -> Jacobi(1/2,-1/2)
      odd size,  det -1 : fixed -1, half-angle cosine-squared -> Jacobi(-1/2,1/2)
    """
    if ell % 2 == 0:
        m = ell // 2
        if not minus_component:
            x, w = roots_chebyt(n_nodes)
            return x, w, []
        x, w = roots_chebyu(n_nodes)
        return x, w, [1.0, -1.0]
    if not minus_component:
        x, w = roots_jacobi(n_nodes, 0.5, -0.5)
        return x, w, [1.0]
    x, w = roots_jacobi(n_nodes, -0.5, 0.5)
    return x, w, [-1.0]


def _weyl_component_mean(
    spec: SymbolSpec, ell: int, minus_component: bool, n_nodes: int
) -> float:
    x, w, fixed = _component_quadrature(ell, minus_component, n_nodes)
    m = (ell - len(fixed)) // 2
    fixed_value = 1.0
    for lam in fixed:
        fixed_value *= float(np.real(evaluate_symbol(spec, lam)))
    if m == 0:
        return fixed_value
    # each conjugate eigenvalue pair contributes |psi(e^{i theta})|^2,
    # a function of cos theta alone for real-coefficient psi
    z = x + 1j * np.sqrt(1.0 - x * x)
    pair_1d = np.abs(evaluate_symbol(spec, z)) ** 2
    grids = np.meshgrid(*([x] * m), indexing="ij")
    vandermonde = np.ones_like(grids[0])
    for i in range(m):
        for j in range(i + 1, m):
            vandermonde = vandermonde * (grids[i] - grids[j]) ** 2
    num_w = np.ones_like(grids[0])
    den_w = np.ones_like(grids[0])
    for axis in range(m):
        shape = [1] * m
        shape[axis] = n_nodes
        num_w = num_w * (w * pair_1d).reshape(shape)
        den_w = den_w * w.reshape(shape)
    return fixed_value * float(
        np.sum(vandermonde * num_w) / np.sum(vandermonde * den_w)
    )


def weyl_ogroup_expectation_spec(
    spec: SymbolSpec, ell: int, n_nodes: int = 48
) -> float:
    """Mean of det(psi(U)) over the full orthogonal group O(ell).

    Averages the two determinant components; eigenvalue-pair angles are
    integrated by the Gauss rules matching each component's weight.
    """
    if not 1 <= ell <= 8:
        raise ValidationError(
            f"group-quadrature path supports 1 <= ell <= 8, got {ell}"
        )
    plus = _weyl_component_mean(spec, ell, False, n_nodes)
    minus = _weyl_component_mean(spec, ell, True, n_nodes)
    return 0.5 * (plus + minus)


def weyl_ogroup_expectation(
    t: float, alpha: float, ell: int, n_nodes: int = 48
) -> float:
    """Orthogonal-group mean of det((1 + alpha U) e^{t U})."""
    if alpha < 0 or t < 0:
        raise ValidationError("need alpha >= 0 and t >= 0")
    spec = SymbolSpec(exp_plus_t=t, zeros_plus=(alpha,))
    return weyl_ogroup_expectation_spec(spec, ell, n_nodes)


def prob_triangle_fs_via_ogroup(t: float, alpha: float, ell: int) -> float:
    """Triangle law via the orthogonal-group average (validation path)."""
    expectation = weyl_ogroup_expectation(t, alpha, ell)
    return expectation * math.exp(-(alpha * t + 0.5 * t * t))


def symmetrized_lattice_prob(
    model: ModelSpec, ell: int, n_nodes: int = 48
) -> float:
    """Law of the symmetric-array lattice models via the group average."""
    if model.kind not in (ModelKind.LATTICE_A_SYM, ModelKind.LATTICE_C_SYM):
        raise ValidationError(
            f"symmetrized path does not handle kind {model.kind.value}"
        )
    if ell < 1:
        return 0.0 if ell < 0 else _symmetrized_zero_prob(model)
    expectation = weyl_ogroup_expectation_spec(build_symbol(model), ell, n_nodes)
    return expectation * math.exp(-normalization_log_z(model))


def _symmetrized_zero_prob(model: ModelSpec) -> float:
    # empty-group expectation is 1, so P(L <= 0) = 1/Z
    return math.exp(-normalization_log_z(model))


def scaled_cdf(t: float, x: float, opuc: OpucData | None = None) -> float:
    """P(L <= floor(2t + x t^{1/3})), the edge-scaled staircase CDF."""
    if t <= 0:
        raise ValidationError(f"t must be > 0, got {t}")
    ell = math.floor(2.0 * t + x * t ** (1.0 / 3.0))
    if ell < 0:
        return 0.0
    if opuc is None:
        opuc = square_opuc(t, ell=ell)
    if ell >= opuc.cutoff:
        # far right of the edge window: the distribution has converged
        return prob_square(t, opuc.cutoff, opuc)
    return prob_square(t, ell, opuc)


@dataclass(frozen=True)
class DistTable:
    """Cumulative table p(ell) for one model, with provenance metadata."""

    model: ModelSpec
    entries: dict[int, tuple[float, float]]  # ell -> (log_p, p)
    truncation_info: dict = field(default_factory=dict)

    def probability(self, ell: int) -> float:
        return self.entries[ell][1]

    def check_monotone(self, slack: float = 1e-10) -> None:
        ells = sorted(self.entries)
        probs = [self.entries[e][1] for e in ells]
        for p in probs:
            if not (-slack <= p <= 1.0 + slack):
                raise VerificationError(f"probability {p} outside [0,1]")
        for lo, hi in zip(probs, probs[1:]):
            if hi < lo - slack:
                raise VerificationError("table is not nondecreasing")

    def csv_rows(self) -> list[tuple[int, float, float]]:
        return [
            (ell, self.entries[ell][1], self.entries[ell][0])
            for ell in sorted(self.entries)
        ]

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": json.loads(self.model.to_json()),
                "entries": {
                    str(ell): {"log_p": lp, "p": p}
                    for ell, (lp, p) in sorted(self.entries.items())
                },
                "truncation_info": self.truncation_info,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "DistTable":
        raw = json.loads(text)
        return cls(
            model=ModelSpec.from_json(json.dumps(raw["model"])),
            entries={
                int(k): (v["log_p"], v["p"])
                for k, v in raw["entries"].items()
            },
            truncation_info=raw.get("truncation_info", {}),
        )


def _log_or_neg_inf(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def build_dist_table(model: ModelSpec, lmax: int) -> DistTable:
    """Fill a cumulative table for ell = 0..lmax (odd ell only for triangle)."""
    if lmax < 0:
        raise ValidationError(f"lmax must be >= 0, got {lmax}")
    entries: dict[int, tuple[float, float]] = {}
    info: dict = {}
    kind = model.kind
    if kind == ModelKind.POISSON_SQUARE:
        opuc = square_opuc(model.t, ell=lmax)
        for ell in range(lmax + 1):
            p = prob_square(model.t, ell, opuc)
            entries[ell] = (_log_or_neg_inf(p), p)
        info = {"cutoff": opuc.cutoff}
    elif kind == ModelKind.POISSON_TRIANGLE:
        ell_top = (lmax - 1) // 2
        opuc = square_opuc(
            model.t, cutoff=_default_cutoff(model.t, 2 * ell_top + 1) + 80
        )
        for j in range(ell_top + 1):
            p = float(prob_triangle_odd(model.t, model.alpha, j, opuc))
            entries[2 * j + 1] = (_log_or_neg_inf(p), p)
        info = {
            "cutoff": opuc.cutoff,
            "tail_bound": triangle_tail_bound(opuc, 0, 40),
            "note": "odd thresholds only; even ones bracket between neighbors",
        }
    elif kind == ModelKind.POISSON_EXTERNAL:
        opuc = square_opuc(model.t, ell=lmax)
        for ell in range(1, lmax + 1):
            p = float(
                prob_external(model.t, model.alpha_plus, model.alpha_minus, ell, opuc)
            )
            entries[ell] = (_log_or_neg_inf(p), p)
        info = {"cutoff": opuc.cutoff}
    elif kind == ModelKind.TRIANGLE_POISSON_FS:
        p0 = math.exp(-(model.alpha * model.t + 0.5 * model.t**2))
        entries[0] = (_log_or_neg_inf(p0), p0)
        for ell in range(1, min(lmax, 8) + 1):
            p = float(prob_triangle_fs_via_ogroup(model.t, model.alpha, ell))
            entries[ell] = (_log_or_neg_inf(p), p)
        info = {"path": "orthogonal-group quadrature", "max_ell": 8}
    elif kind in (ModelKind.LATTICE_A_SYM, ModelKind.LATTICE_C_SYM):
        for ell in range(min(lmax, 8) + 1):
            p = float(symmetrized_lattice_prob(model, ell))
            entries[ell] = (_log_or_neg_inf(p), p)
        info = {"path": "orthogonal-group quadrature", "max_ell": 8}
    else:
        for ell in range(lmax + 1):
            p = float(prob_lattice(model, ell))
            entries[ell] = (_log_or_neg_inf(p), p)
    table = DistTable(model=model, entries=entries, truncation_info=info)
    table.check_monotone()
    return table
