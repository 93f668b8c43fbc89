"""
Gaussian band matrices with a variance profile, their limit moments from
the operator-valued semicircular model over L∞[0,1], and the block-Haar
conjugation experiment.
"""
import asyncio
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.linalg import block_diag

from app.config import config
from app.core import freeness
from app.core.algebra import AlgebraContext, Element, SubalgebraSpec, haar_unitary
from app.core.cumulants import moment_from_cumulants
from app.core.schemas import (BandVerdict, HaarConjugationReport, HaarConjugationStep,
                              HistogramResult, ResidualReport, Target, Verdict)

logger = logging.getLogger(__name__)

MIN_GRID = 16


class VarianceProfile:
    """
    σ(x, y) sampled on the midpoints of a g×g grid over [0,1]².

    Raises:
        ValueError: if the grid is not square, not symmetric or has negative entries
    """

    def __init__(self, grid, name: str = "custom"):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
            raise ValueError(f"Variance profile must be a square grid, got shape {grid.shape}")
        if not np.array_equal(grid, grid.T):
            raise ValueError("Variance profile must be symmetric: σ(x,y) = σ(y,x)")
        if (grid < 0).any():
            raise ValueError("Variance profile must be non-negative")
        self.grid = grid
        self.name = name

    @property
    def size(self) -> int:
        return self.grid.shape[0]

    @staticmethod
    def midpoints(g: int) -> np.ndarray:
        return (np.arange(g) + 0.5) / g

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray, np.ndarray], np.ndarray], g: Optional[int] = None,
                      name: str = "custom") -> "VarianceProfile":
        g = g or config.GRID_SIZE
        x = cls.midpoints(g)
        grid = f(x[:, None], x[None, :]) * np.ones((g, g))
        return cls((grid + grid.T) / 2, name=name)

    @classmethod
    def constant(cls, value: float = 1.0, g: Optional[int] = None) -> "VarianceProfile":
        g = g or config.GRID_SIZE
        return cls(np.full((g, g), float(value)), name=f"constant({value})")

    @classmethod
    def sum_profile(cls, g: Optional[int] = None) -> "VarianceProfile":
        """σ(x, y) = x + y; rows integrate to x + 1/2."""
        return cls.from_function(lambda x, y: x + y, g, name="x+y")

    @classmethod
    def circulant(cls, amplitude: float = 1.0, g: Optional[int] = None) -> "VarianceProfile":
        """σ(x, y) = 1 + a·cos(2π(x − y)), |a| ≤ 1; every row integrates to 1."""
        if abs(amplitude) > 1:
            raise ValueError("Amplitude above 1 makes the profile negative")
        return cls.from_function(lambda x, y: 1 + amplitude * np.cos(2 * np.pi * (x - y)), g,
                                 name=f"circulant({amplitude})")

    def row_integrals(self) -> np.ndarray:
        """r(x) = ∫ σ(x, y) dy by the midpoint rule."""
        return self.grid.mean(axis=1)

    def kernel(self) -> np.ndarray:
        """Matrix of η(f)(x) = ∫ f(y) σ(x, y) dy on the grid."""
        return self.grid / self.size

    def cell_index(self, t: np.ndarray) -> np.ndarray:
        return np.minimum((np.asarray(t) * self.size).astype(int), self.size - 1)

    def variances(self, n: int) -> np.ndarray:
        """
        E|g_ij|² = σ(x_i, x_j)/n at the cell midpoints x_i = (i + 1/2)/n, not at
        i/n. For a Lipschitz σ the two grids differ by O(1/n) per entry, the
        order of the finite-n bias of the moments.
        """
        idx = self.cell_index((np.arange(n) + 0.5) / n)
        return self.grid[np.ix_(idx, idx)] / n


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_band_matrix(n: int, profile: VarianceProfile, rng: np.random.Generator) -> np.ndarray:
    """
    Hermitian G(n): complex Gaussian entries above the diagonal (real and
    imaginary parts each of variance S_ij/2), real diagonal of variance S_ii.

    Raises:
        ValueError: if n < 2
    """
    if n < 2:
        raise ValueError(f"Band matrices need n ≥ 2, got {n}")
    S = profile.variances(n)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * np.sqrt(S / 2)
    upper = np.triu(z, 1)
    diagonal = rng.standard_normal(n) * np.sqrt(np.diag(S))
    return upper + upper.conj().T + np.diag(diagonal)


def _eigenvalues(sample: np.ndarray) -> np.ndarray:
    sample = np.asarray(sample)
    if sample.ndim == 1:
        return sample.real
    return np.linalg.eigvalsh(sample)


def semicircle_cdf(x, variance: float = 1.0):
    """CDF of the centred semicircle law of the given variance (radius 2σ)."""
    t = np.clip(np.asarray(x, dtype=float) / (2 * np.sqrt(variance)), -1.0, 1.0)
    return (t * np.sqrt(1.0 - t ** 2) + np.arcsin(t)) / np.pi + 0.5


def ks_distance_to_semicircle(eigenvalues: np.ndarray, variance: float = 1.0) -> float:
    return float(stats.kstest(np.asarray(eigenvalues), lambda x: semicircle_cdf(x, variance)).statistic)


def empirical_spectrum(samples: Sequence[np.ndarray], bins: int = 50, seed: Optional[int] = None,
                       semicircle_variance: Optional[float] = None) -> HistogramResult:
    """
    Pooled eigenvalue histogram and moments (1/n)Tr(G^k), k = 1..8.

    Samples are Hermitian matrices or precomputed eigenvalue arrays. With
    two or more samples, moment_errors holds the Monte-Carlo standard error
    of each pooled moment across samples.
    """
    if len(samples) == 0:
        raise ValueError("At least one sample is required")
    spectra = [_eigenvalues(s) for s in samples]
    pooled = np.concatenate(spectra)
    lo, hi = float(pooled.min()), float(pooled.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(pooled, bins=bins, range=(lo, hi))
    masses = counts / counts.sum()
    moments = [float(np.mean(pooled ** k)) for k in range(1, 9)]
    errors = None
    if len(spectra) > 1:
        per_sample = np.array([[np.mean(s ** k) for k in range(1, 9)] for s in spectra])
        errors = stats.sem(per_sample, axis=0, ddof=1).tolist()
    ks = ks_distance_to_semicircle(pooled, semicircle_variance) if semicircle_variance else None
    return HistogramResult(n=len(spectra[0]), trials=len(spectra), seed=seed, bin_edges=edges.tolist(),
                           masses=masses.tolist(), moments=moments, moment_errors=errors, ks_distance=ks)


async def simulate_band(profile: VarianceProfile, n: int, trials: int, seed: int, bins: int = 50,
                        workers: Optional[int] = None,
                        semicircle_variance: Optional[float] = None) -> HistogramResult:
    """
    Monte-Carlo spectrum of G(n). Trial t uses the generator built from the
    t-th child of SeedSequence(seed); results are merged in trial order.
    """
    if trials < 1:
        raise ValueError("At least one trial is required")
    children = np.random.SeedSequence(seed).spawn(trials)
    semaphore = asyncio.Semaphore(workers or config.WORKERS)

    def one_trial(child: np.random.SeedSequence) -> np.ndarray:
        return np.linalg.eigvalsh(sample_band_matrix(n, profile, np.random.default_rng(child)))

    async def run(child):
        async with semaphore:
            return await asyncio.to_thread(one_trial, child)

    spectra = await asyncio.gather(*(run(child) for child in children))
    result = empirical_spectrum(spectra, bins=bins, seed=seed, semicircle_variance=semicircle_variance)
    logger.info(f"✅ Simulated {trials} band matrices of size {n} (profile {profile.name})")
    return result


# ---------------------------------------------------------------------------
# Limit moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _KernelArgument:
    """X followed by multiplication with a grid function."""
    weight: np.ndarray


def _kernel_multiply(a, b):
    if isinstance(a, _KernelArgument):
        return _KernelArgument(a.weight * b)
    return a * b


def limit_moments_band(profile: VarianceProfile, order: int) -> List[float]:
    """
    m_0..m_order of the limit spectral law: moments of the L∞[0,1]-valued
    semicircular element with covariance η, integrated with the midpoint rule.

    Raises:
        ValueError: for an odd order or a grid coarser than 16
    """
    if order < 2 or order % 2:
        raise ValueError(f"Limit moments are requested up to an even order ≥ 2, got {order}")
    if profile.size < MIN_GRID:
        raise ValueError(f"Grid resolution {profile.size} below {MIN_GRID}")
    K = profile.kernel()
    g = profile.size
    zero = np.zeros(g)

    def series(block_args):
        if len(block_args) != 2:
            return zero
        return (K @ block_args[0].weight) * block_args[1].weight

    moments = [1.0]
    for k in range(1, order + 1):
        if k % 2:
            moments.append(0.0)
            continue
        args = [_KernelArgument(np.ones(g)) for _ in range(k)]
        moments.append(float(np.mean(moment_from_cumulants(series, args, _kernel_multiply))))
    return moments


def band_semicircle_verdict(profile: VarianceProfile, order: int = 8, tol_row: float = 1e-9,
                            tol: Optional[float] = None) -> BandVerdict:
    """
    Constant row integrals against semicircularity of the limit moments; the
    two must agree.
    """
    rows = profile.row_integrals()
    deviation = float(np.max(np.abs(rows - rows.mean())))
    constant_rows = deviation <= tol_row
    moments = limit_moments_band(profile, order)
    semicircle = freeness.test_semicircularity_scalar(moments[1:], tol)
    consistent = constant_rows == (semicircle.verdict == Verdict.PASS)
    mark = "✅" if consistent else "⚠️"
    logger.info(f"{mark} profile {profile.name}: rows constant={constant_rows}, "
                f"semicircular={semicircle.verdict.value}")
    return BandVerdict(grid_size=profile.size, row_integrals=rows.tolist(), row_deviation=deviation,
                       tol_row=tol_row, constant_rows=constant_rows, moments=moments,
                       semicircle=semicircle, consistent=consistent)


def monte_carlo_check(histogram: HistogramResult, profile: VarianceProfile, order: int = 6,
                      rel_tol: float = 0.05) -> ResidualReport:
    """
    Relative error of the even empirical moments up to order against
    limit_moments_band. The notes place m_4 against the semicircle of the
    same variance in units of its Monte-Carlo standard error.

    Raises:
        ValueError: if the histogram carries no standard errors (one trial)
            or order exceeds the recorded moments
    """
    if histogram.moment_errors is None:
        raise ValueError("Standard errors need at least two trials")
    if order > len(histogram.moments):
        raise ValueError(f"Only {len(histogram.moments)} empirical moments are recorded, got order {order}")
    limit = limit_moments_band(profile, order)
    report = ResidualReport(equation="monte_carlo_moments", max_order=order, tolerance=rel_tol)
    for k in range(2, order + 1, 2):
        report.record(f"relative_error|m={k}", abs(histogram.moments[k - 1] - limit[k]) / abs(limit[k]))
    semicircle = 2 * limit[2] ** 2
    m4, se4 = histogram.moments[3], histogram.moment_errors[3]
    deviation = (m4 - semicircle) / se4
    same_side = np.sign(m4 - semicircle) == np.sign(limit[4] - semicircle)
    report.notes.append(f"m_4 = {m4:.4f} ± {se4:.1e}: {deviation:+.1f} standard errors from the semicircle "
                        f"value {semicircle:.4f}; limit {limit[4]:.4f}, same side: {bool(same_side)}")
    mark = "✅" if report.verdict == Verdict.PASS else "⚠️"
    logger.info(f"{mark} profile {profile.name}: Monte-Carlo moments within {report.max_residual:.2%} of the limit")
    return report



# ---------------------------------------------------------------------------
# Block-Haar conjugation
# ---------------------------------------------------------------------------

def block_haar_unitary(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """u = Σ_i e_ii ⊗ U_i with independent Haar U_i ∈ U(k); commutes with diag(M_d) ⊗ 1."""
    return block_diag(*(haar_unitary(k, rng) for _ in range(d)))


def _d_valued_moments(ctx: AlgebraContext, x: Element, max_order: int) -> List[np.ndarray]:
    projections = [ctx.embed_B(p) for p in ctx.subalgebra.central_projections()]
    values = []
    for order in range(1, max_order + 1):
        for picks in np.ndindex(*([len(projections)] * (order - 1))):
            word = x
            for p in picks:
                word = word @ projections[p] @ x
            values.append(ctx.cond_exp_D(word).matrix)
    return values


def haar_conjugation_experiment(d: int, ks: Sequence[int], trials: int, rng: np.random.Generator,
                                x_factory: Optional[Callable[[AlgebraContext, np.random.Generator], Element]] = None,
                                cumulant_trials: Optional[int] = None, moment_order: int = 3,
                                seed: Optional[int] = None) -> HaarConjugationReport:
    """
    Conjugate X by block-diagonal Haar unitaries in M_d ⊗ M_k, D = diagonal
    of M_d. Per k: cyclic D-valued moment deviation between uXu* and X, the
    trial-averaged ‖E_D(u^m)‖ for m = 1, 2, and the mixed D-valued cumulant
    residual of uXu* against B (orders 2–3), averaged over the first
    cumulant_trials trials (all of them by default).

    The default X is b₀ ⊗ 1 for one random Hermitian b₀ ∈ M_d.
    """
    b0 = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    b0 = (b0 + b0.conj().T) / 2
    b1 = rng.standard_normal((d, d))
    b1 = (b1 + b1.T) / 2
    report = HaarConjugationReport(d=d, seed=seed)
    for k in ks:
        ctx = AlgebraContext(d, k, SubalgebraSpec.diagonal(d))
        x = x_factory(ctx, rng) if x_factory else ctx.embed_B(b0)
        reference = _d_valued_moments(ctx, x, moment_order)
        norms = {1: 0.0, 2: 0.0}
        cyclic = 0.0
        mixed = 0.0
        sampled = trials if cumulant_trials is None else max(1, min(cumulant_trials, trials))
        for trial in range(trials):
            u = ctx.element(block_haar_unitary(d, k, rng))
            y = u @ x @ u.H
            for m in norms:
                power = u if m == 1 else u @ u
                norms[m] += ctx.cond_exp_D(power).norm() / trials
            moments = _d_valued_moments(ctx, y, moment_order)
            cyclic = max(cyclic, max(float(np.abs(a - b).max()) for a, b in zip(moments, reference)))
            if trial < sampled:
                result = freeness.test_mixed_cumulants(ctx, [y], [ctx.embed_B(b1)], Target.D, max_order=3,
                                                       tol=np.inf, coeff_draws=2, rng=rng)
                mixed += result.max_residual / sampled
        report.steps.append(HaarConjugationStep(k=k, trials=trials, power_norms=norms,
                                                cyclic_moment_deviation=cyclic,
                                                mixed_cumulant_residual=mixed))
        logger.info(f"✅ k={k}: ‖E_D(u)‖≈{norms[1]:.3f}, ‖E_D(u²)‖≈{norms[2]:.3f}, mixed κ residual {mixed:.3e}")
    steps = report.steps
    report.powers_decreasing = all(
        later.power_norms[m] < earlier.power_norms[m]
        for earlier, later in zip(steps, steps[1:]) for m in (1, 2)
    )
    report.cumulants_decreasing = all(
        later.mixed_cumulant_residual < earlier.mixed_cumulant_residual for earlier, later in zip(steps, steps[1:])
    )
    return report
