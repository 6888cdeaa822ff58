"""Samplers and enumeration oracles for every percolation model.

This module is the ground truth the determinant formulas are tested
against: direct simulation of the point processes and lattice arrays,
exhaustive enumeration over small permutation groups, and an exact
hook-length route to the permutation distribution for sizes far beyond
enumeration range.

Path semantics, resolved against the determinant normalizations:
weak-direction steps may repeat a coordinate and sums accumulate entry
values; along a strictly increasing chain a cell can contribute at most
one point, so the strict/strict models count occupied cells.  The two
line-process models differ in whether a chain may use several points of
the same line (weak) or at most one (strict); position along the lines
is strictly ordered almost surely either way.
"""

from __future__ import annotations

import bisect
import functools
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .symbols import ModelKind, ModelSpec, SymbolSpec, evaluate_symbol

__all__ = [
    "SimConfig",
    "EmpiricalCdf",
    "patience_lis",
    "lis_quadratic",
    "longest_chain_2d",
    "sample_poisson_square",
    "sample_triangle",
    "sample_external",
    "sample_g_prime",
    "g_prime_pmf_check",
    "lattice_chain_fast",
    "lattice_chain_reference",
    "sample_lattice_matrix",
    "lattice_lpp",
    "symmetrized_lattice_sample",
    "brute_force_lis_distribution",
    "plancherel_lis_cdf",
    "poissonized_square_cdf",
    "haar_orthogonal_expectation",
    "run_simulation",
]


def patience_lis(values, strict: bool = True) -> int:
    """Longest increasing subsequence length by patience sorting.

    ``strict=True`` counts strictly increasing subsequences,
    ``strict=False`` nondecreasing ones.
    """
    tops: list = []
    insert = bisect.bisect_left if strict else bisect.bisect_right
    for v in values:
        idx = insert(tops, v)
        if idx == len(tops):
            tops.append(v)
        else:
            tops[idx] = v
    return len(tops)


def lis_quadratic(values, strict: bool = True) -> int:
    """O(n^2) dynamic-programming oracle for ``patience_lis``."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 0:
        return 0
    best = np.ones(n, dtype=np.int64)
    for i in range(1, n):
        mask = v[:i] < v[i] if strict else v[:i] <= v[i]
        if mask.any():
            best[i] = 1 + best[:i][mask].max()
    return int(best.max())


def longest_chain_2d(
    xs: np.ndarray, ys: np.ndarray, strict: bool = True
) -> int:
    """Longest chain of planar points increasing in both coordinates.

    Sorting is by x ascending; equal x (possible only for boundary
    points, measure zero otherwise) is broken by y descending in the
    strict case and y ascending in the weak case, so that patience
    sorting over y realizes exactly the admissible chains.
    """
    if len(xs) == 0:
        return 0
    order = np.lexsort((-ys, xs) if strict else (ys, xs))
    return patience_lis(ys[order].tolist(), strict=strict)


def sample_poisson_square(t: float, rng: np.random.Generator) -> int:
    """One draw of the longest chain among Poisson points in a square."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    n = rng.poisson(t * t)
    if n == 0:
        return 0
    return longest_chain_2d(rng.random(n), rng.random(n), strict=True)


def sample_triangle(t: float, alpha: float, rng: np.random.Generator) -> int:
    """Longest chain for bulk points below the diagonal plus diagonal points.

    The diagonal one-dimensional process has rate alpha per unit of the
    x coordinate; bulk points are uniform on the open triangle y < x.
    """
    if t < 0 or alpha < 0:
        raise ValidationError("need t >= 0 and alpha >= 0")
    n_bulk = rng.poisson(0.5 * t * t)
    u = rng.random(n_bulk) * t
    v = rng.random(n_bulk) * t
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    n_diag = rng.poisson(alpha * t)
    d = rng.random(n_diag) * t
    xs = np.concatenate([hi, d])
    ys = np.concatenate([lo, d])
    return longest_chain_2d(xs, ys, strict=True)


def sample_external(
    t: float, a_plus: float, a_minus: float, rng: np.random.Generator
) -> int:
    """Longest chain for the square process with sources on both axes.

    Axis points share a coordinate, so chains are taken in the weak
    (product) order; in the bulk this coincides with strict chains
    almost surely.  The corner carries no point.
    """
    if t < 0 or a_plus < 0 or a_minus < 0:
        raise ValidationError("rates must be >= 0")
    n = rng.poisson(t * t)
    xs = [rng.random(n) * t]
    ys = [rng.random(n) * t]
    n_x = rng.poisson(a_plus * t)
    xs.append(rng.random(n_x) * t)
    ys.append(np.zeros(n_x))
    n_y = rng.poisson(a_minus * t)
    xs.append(np.zeros(n_y))
    ys.append(rng.random(n_y) * t)
    return longest_chain_2d(np.concatenate(xs), np.concatenate(ys), strict=False)


def g_prime_pmf_check(alpha: float, q: float, tol: float = 1e-12) -> None:
    """Verify the parity-weighted geometric law sums to one.

    The law P(k) proportional to alpha^(k mod 2) q^k normalizes to
    (1 - q^2)/(1 + alpha q); this check sums the series numerically with
    a geometric tail bound before any sampling uses it.
    """
    if not (0.0 <= q < 1.0) or alpha < 0.0:
        raise ValidationError(
            f"need q in [0,1) and alpha >= 0, got q={q}, alpha={alpha}"
        )
    if q == 0.0:
        return
    c = (1.0 - q * q) / (1.0 + alpha * q)
    total = 0.0
    k_top = 400
    for k in range(k_top + 1):
        total += c * (alpha if k % 2 else 1.0) * q**k
    tail = c * max(1.0, alpha) * q ** (k_top + 1) / (1.0 - q)
    if abs(total - 1.0) > tol + tail:
        raise ValidationError(
            f"parity-geometric law fails to normalize: sum={total!r}"
        )


def sample_g_prime(
    alpha: float, q: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Sample the parity-weighted geometric diagonal law.

    Conditioned on parity the law is geometric in k//2 with ratio q^2,
    and the even branch has probability 1/(1 + alpha q); sampling is
    exact, no truncated table.
    """
    if q == 0.0:
        return np.zeros(size, dtype=np.int64)
    half = rng.geometric(1.0 - q * q, size=size) - 1
    odd = rng.random(size) >= 1.0 / (1.0 + alpha * q)
    return 2 * half + odd.astype(np.int64)


def _geom(rng: np.random.Generator, p, shape) -> np.ndarray:
    # numpy's geometric counts trials >= 1; the models count failures >= 0
    return rng.geometric(1.0 - np.asarray(p), size=shape) - 1


def sample_lattice_matrix(
    model: ModelSpec, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Batch of entry arrays, shape (size, M, N), per the model's law."""
    kind = model.kind
    rows = np.asarray(model.row_params)
    cols = np.asarray(model.col_params)
    if kind in (ModelKind.LATTICE_A, ModelKind.LATTICE_C):
        p = np.outer(rows, cols)
        return _geom(rng, p, (size,) + p.shape)
    if kind == ModelKind.LATTICE_B:
        p = np.outer(rows, cols)
        return (rng.random((size,) + p.shape) < p / (1.0 + p)).astype(np.int64)
    if kind in (ModelKind.LATTICE_A_SYM, ModelKind.LATTICE_C_SYM):
        n = len(rows)
        p = np.outer(rows, rows)
        x = _geom(rng, p, (size, n, n))
        upper = np.triu_indices(n, k=1)
        x[:, upper[1], upper[0]] = x[:, upper[0], upper[1]]
        for i in range(n):
            if kind == ModelKind.LATTICE_A_SYM:
                x[:, i, i] = _geom(rng, model.alpha * rows[i], size)
            else:
                x[:, i, i] = sample_g_prime(model.alpha, rows[i], rng, size)
        return x
    raise ValidationError(f"no entry law for kind {kind.value}")


def lattice_chain_fast(x: np.ndarray, kind: ModelKind) -> np.ndarray:
    """Vectorized longest-path values for a batch of arrays (size, M, N).

    weak/weak sums entries along weakly monotone chains; weak-up/
    strict-right sums with a strict column step; strict/strict counts
    occupied cells along strictly monotone chains via running 2-d prefix
    maxima.
    """
    size, m, n = x.shape
    if kind in (ModelKind.LATTICE_A, ModelKind.LATTICE_A_SYM):
        best = np.zeros((size, m + 1, n + 1), dtype=x.dtype)
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                best[:, i, j] = x[:, i - 1, j - 1] + np.maximum(
                    best[:, i - 1, j], best[:, i, j - 1]
                )
        return best[:, m, n]
    if kind == ModelKind.LATTICE_B:
        # chain value ending at (i, j); predecessors have j' < j, i' <= i
        end = np.zeros((size, m, n), dtype=x.dtype)
        prefix = np.zeros((size, m), dtype=x.dtype)
        for j in range(n):
            end[:, :, j] = x[:, :, j] + prefix
            col_best = np.maximum.accumulate(end[:, :, j], axis=1)
            prefix = np.maximum(prefix, col_best)
        return end.max(axis=(1, 2))
    if kind in (ModelKind.LATTICE_C, ModelKind.LATTICE_C_SYM):
        occ = (x > 0).astype(np.int64)
        best = np.zeros((size, m + 1, n + 1), dtype=np.int64)
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                here = occ[:, i - 1, j - 1] * (1 + best[:, i - 1, j - 1])
                best[:, i, j] = np.maximum(
                    here,
                    np.maximum(best[:, i - 1, j], best[:, i, j - 1]),
                )
        return best[:, m, n]
    raise ValidationError(f"no path rule for kind {kind.value}")


def lattice_chain_reference(x: np.ndarray, kind: ModelKind) -> int:
    """O((MN)^2) oracle over all admissible predecessor pairs; one array."""
    m, n = x.shape
    cells = [(i, j) for i in range(m) for j in range(n)]
    if kind in (ModelKind.LATTICE_A, ModelKind.LATTICE_A_SYM):
        admissible = lambda a, b: a[0] <= b[0] and a[1] <= b[1]
        value = lambda c: x[c]
    elif kind == ModelKind.LATTICE_B:
        admissible = lambda a, b: a[0] <= b[0] and a[1] < b[1]
        value = lambda c: x[c]
    elif kind in (ModelKind.LATTICE_C, ModelKind.LATTICE_C_SYM):
        admissible = lambda a, b: a[0] < b[0] and a[1] < b[1]
        value = lambda c: int(x[c] > 0)
    else:
        raise ValidationError(f"no path rule for kind {kind.value}")
    if kind in (ModelKind.LATTICE_C, ModelKind.LATTICE_C_SYM):
        cells = [c for c in cells if x[c] > 0]
        if not cells:
            return 0
    best = {}
    out = 0
    for b in cells:  # row-major order dominates the partial orders
        best[b] = value(b) + max(
            (best[a] for a in best if admissible(a, b)), default=0
        )
        out = max(out, best[b])
    return int(out)


def _sample_lines(model: ModelSpec, rng: np.random.Generator) -> int:
    rates = model.col_params
    t = model.t
    idx: list[np.ndarray] = []
    pos: list[np.ndarray] = []
    for i, q in enumerate(rates):
        k = rng.poisson(q * t)
        idx.append(np.full(k, i))
        pos.append(rng.random(k) * t)
    line = np.concatenate(idx) if idx else np.empty(0)
    x = np.concatenate(pos) if pos else np.empty(0)
    if len(x) == 0:
        return 0
    order = np.argsort(x, kind="stable")
    strict = model.kind == ModelKind.POISSON_LINES_E
    return patience_lis(line[order].tolist(), strict=strict)


def lattice_lpp(model: ModelSpec, rng: np.random.Generator) -> int:
    """One longest-path draw for a lattice or line-process model."""
    if model.kind in (ModelKind.POISSON_LINES_D, ModelKind.POISSON_LINES_E):
        return _sample_lines(model, rng)
    x = sample_lattice_matrix(model, rng, 1)
    return int(lattice_chain_fast(x, model.kind)[0])


def symmetrized_lattice_sample(
    model: ModelSpec, rng: np.random.Generator
) -> int:
    """One draw for the symmetric-array models."""
    if model.kind not in (ModelKind.LATTICE_A_SYM, ModelKind.LATTICE_C_SYM):
        raise ValidationError(
            f"symmetrized sampler does not handle {model.kind.value}"
        )
    x = sample_lattice_matrix(model, rng, 1)
    return int(lattice_chain_fast(x, model.kind)[0])


_BRUTE_FORCE_MAX = 8


def brute_force_lis_distribution(n: int) -> dict[int, int]:
    """Exact counts of longest-increasing-subsequence lengths over S_n."""
    if not 0 <= n <= _BRUTE_FORCE_MAX:
        raise ValidationError(
            f"enumeration supports n <= {_BRUTE_FORCE_MAX}, got {n}"
        )
    if n == 0:
        return {0: 1}
    counts: dict[int, int] = {}
    for perm in itertools.permutations(range(n)):
        ell = patience_lis(perm, strict=True)
        counts[ell] = counts.get(ell, 0) + 1
    return counts


def _partitions_capped(n: int, max_part: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions_capped(n - first, first):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def _dimension_squared(shape: tuple[int, ...]) -> int:
    # hook length formula; exact integers throughout
    n = sum(shape)
    cols = [0] * (shape[0] if shape else 0)
    for row_len in shape:
        for j in range(row_len):
            cols[j] += 1
    hooks = 1
    for i, row_len in enumerate(shape):
        for j in range(row_len):
            hooks *= (row_len - j) + (cols[j] - i) - 1
    dim, rem = divmod(math.factorial(n), hooks)
    if rem:
        raise ValidationError("hook product does not divide n! (bug)")
    return dim * dim


_PLANCHEREL_MAX = 40


@functools.lru_cache(maxsize=None)
def plancherel_lis_cdf(n: int, ell: int) -> Fraction:
    """Exact P(LIS <= ell) on S_n via squared dimensions of shapes.

    Sums (dim of the shape)^2 over partitions of n with first row at
    most ell; exact integer arithmetic, valid far beyond enumeration
    range.
    """
    if n < 0 or n > _PLANCHEREL_MAX:
        raise ValidationError(
            f"supported range is 0 <= n <= {_PLANCHEREL_MAX}, got {n}"
        )
    if ell <= 0:
        return Fraction(1 if n == 0 else 0)
    if n == 0:
        return Fraction(1)
    total = sum(
        _dimension_squared(shape) for shape in _partitions_capped(n, ell)
    )
    return Fraction(total, math.factorial(n))


def poissonized_square_cdf(t: float, ell: int, n_max: int = _PLANCHEREL_MAX):
    """Poisson(t^2)-size mixture of the permutation laws, with tail bound.

    Returns (value, truncation bound); the bound is the unassigned
    Poisson mass beyond n_max, since each conditional law is at most 1.
    """
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    lam = t * t
    value = 0.0
    mass = 0.0
    for n in range(n_max + 1):
        if lam == 0.0:
            weight = 1.0 if n == 0 else 0.0
        else:
            weight = math.exp(-lam + n * math.log(lam) - math.lgamma(n + 1))
        mass += weight
        value += weight * float(plancherel_lis_cdf(n, ell))
    return value, 1.0 - mass


def haar_orthogonal_expectation(
    psi: SymbolSpec,
    ell: int,
    trials: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo mean of det(psi(U)) over Haar orthogonal matrices.

    Returns (estimate, standard error).  QR factors are sign-corrected
    so the law is exactly Haar on the full group, covering both
    determinant components with equal mass; det psi(U) is a product over
    eigenvalues.
    """
    if not 1 <= ell <= 12:
        raise ValidationError(f"supported range is 1 <= ell <= 12, got {ell}")
    if trials < 2:
        raise ValidationError("need at least 2 trials for a standard error")
    vals = np.empty(trials)
    done = 0
    while done < trials:
        batch = min(4096, trials - done)
        g = rng.standard_normal((batch, ell, ell))
        q, r = np.linalg.qr(g)
        signs = np.where(np.diagonal(r, axis1=-2, axis2=-1) >= 0.0, 1.0, -1.0)
        q = q * signs[:, np.newaxis, :]
        lam = np.linalg.eigvals(q)
        vals[done : done + batch] = np.real(
            np.prod(evaluate_symbol(psi, lam), axis=-1)
        )
        done += batch
    est = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(trials))
    return est, err


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation run."""

    model: ModelSpec
    trials: int
    seed: int
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials <= 0:
            raise ValidationError(f"trials must be positive, got {self.trials}")
        if self.workers <= 0:
            raise ValidationError(f"workers must be positive, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")

    @classmethod
    def from_kv_text(cls, text: str, model: ModelSpec) -> "SimConfig":
        """Parse ``key=value`` lines (trials, seed, workers)."""
        fields = {"trials": 10000, "seed": 0, "workers": 1}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in fields:
                raise ValidationError(f"unknown config key {key!r}")
            fields[key] = int(val.strip())
        return cls(model=model, **fields)


@dataclass
class EmpiricalCdf:
    """Integer value counts from simulation, with binomial error bars."""

    counts: dict[int, int]
    trials: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.trials:
            raise ValidationError("counts do not sum to trials")

    def cdf_at(self, ell: int) -> float:
        hits = sum(c for v, c in self.counts.items() if v <= ell)
        return hits / self.trials

    def stderr_at(self, ell: int) -> float:
        p = self.cdf_at(ell)
        return math.sqrt(p * (1.0 - p) / self.trials)

    def merge(self, other: "EmpiricalCdf") -> "EmpiricalCdf":
        merged = dict(self.counts)
        for v, c in other.counts.items():
            merged[v] = merged.get(v, 0) + c
        return EmpiricalCdf(counts=merged, trials=self.trials + other.trials)

    def csv_rows(self) -> list[tuple[int, int, float, float]]:
        return [
            (v, self.counts[v], self.cdf_at(v), self.stderr_at(v))
            for v in sorted(self.counts)
        ]


_BLOCK_SIZE = 2048


def _draw_one(model: ModelSpec, rng: np.random.Generator) -> int:
    kind = model.kind
    if kind == ModelKind.POISSON_SQUARE:
        return sample_poisson_square(model.t, rng)
    if kind in (ModelKind.POISSON_TRIANGLE, ModelKind.TRIANGLE_POISSON_FS):
        return sample_triangle(model.t, model.alpha, rng)
    if kind == ModelKind.POISSON_EXTERNAL:
        return sample_external(model.t, model.alpha_plus, model.alpha_minus, rng)
    if kind in (ModelKind.POISSON_LINES_D, ModelKind.POISSON_LINES_E):
        return _sample_lines(model, rng)
    raise ValidationError(f"no sampler for kind {kind.value}")


_BATCH_KINDS = (
    ModelKind.LATTICE_A,
    ModelKind.LATTICE_B,
    ModelKind.LATTICE_C,
    ModelKind.LATTICE_A_SYM,
    ModelKind.LATTICE_C_SYM,
)


def _run_block(args) -> dict[int, int]:
    model_json, seed, block_index, count = args
    model = ModelSpec.from_json(model_json)
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(block_index,)))
    )
    counts: dict[int, int] = {}
    if model.kind in _BATCH_KINDS:
        values = lattice_chain_fast(
            sample_lattice_matrix(model, rng, count), model.kind
        )
        uniq, freq = np.unique(values, return_counts=True)
        for v, c in zip(uniq.tolist(), freq.tolist()):
            counts[int(v)] = int(c)
        return counts
    for _ in range(count):
        v = _draw_one(model, rng)
        counts[v] = counts.get(v, 0) + 1
    return counts


def run_simulation(config: SimConfig) -> EmpiricalCdf:
    """Simulate the configured model and collect value counts.

    Trials are partitioned into fixed-size blocks, each with its own
    counter-based stream keyed by (seed, block index), so the merged
    integer counts do not depend on the worker count or scheduling.
    """
    n_blocks = (config.trials + _BLOCK_SIZE - 1) // _BLOCK_SIZE
    model_json = config.model.to_json()
    jobs = [
        (
            model_json,
            config.seed,
            b,
            min(_BLOCK_SIZE, config.trials - b * _BLOCK_SIZE),
        )
        for b in range(n_blocks)
    ]
    totals: dict[int, int] = {}
    if config.workers == 1 or n_blocks == 1:
        results = map(_run_block, jobs)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_block, jobs, chunksize=4))
    for block in results:
        for v, c in block.items():
            totals[v] = totals.get(v, 0) + c
    return EmpiricalCdf(counts=totals, trials=config.trials)
