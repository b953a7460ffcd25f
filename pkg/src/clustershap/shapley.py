"""Shapley-value estimation of the cluster-probability outputs.

kernel_shap_explain is the production estimator: a weighted least-squares
fit over sampled coalitions with the Shapley kernel weights and the empty /
full coalitions enforced as hard constraints. exact_shapley is the
independent subset-enumeration oracle used to verify it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .annotation import ClusterAssignment
from .cluster_model import CentroidSet
from .dataset import Dataset
from .errors import (
    BadBudget,
    BoundaryCoalition,
    ClusterTooSmall,
    DimensionMismatch,
    InvariantViolation,
    SingularSystem,
    TooManyFeatures,
)

EXACT_MAX_FEATURES = 15
LOCAL_ACCURACY_TOL = 1e-6
_CHUNK_ELEMENTS = 8_000_000  # cap on n_masks * B * K per marginalize chunk


@dataclass(frozen=True)
class ExplanationConfig:
    fraction: float = 0.2
    seed: int = 42
    budget: int | None = None  # None -> min(2^m - 2, 2m + 2048)
    background: int = 100
    threads: int = 1


@dataclass(frozen=True)
class ExplanationMatrix:
    """Shapley values phi (n_test, m, K) with base values, model outputs and
    the raw feature values of the explained rows. Slicing phi at a fixed
    output c gives that cluster's n_test x m explanation matrix."""

    phi: np.ndarray
    base: np.ndarray
    fx: np.ndarray
    test_indices: np.ndarray
    feature_values: np.ndarray
    feature_names: tuple[str, ...]
    k: int

    def __post_init__(self):
        for name in ("phi", "base", "fx", "test_indices", "feature_values"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name)))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_test(self) -> int:
        return self.phi.shape[0]

    @property
    def m(self) -> int:
        return self.phi.shape[1]

    def validate(self, tol: float = LOCAL_ACCURACY_TOL) -> None:
        """Raise InvariantViolation unless every row/output satisfies
        local accuracy: sum_j phi + base = fx."""
        n_test, m, k = self.phi.shape
        if self.base.shape != (k,) or self.fx.shape != (n_test, k):
            raise InvariantViolation("shape", "phi/base/fx shapes disagree")
        if self.feature_values.shape != (n_test, m) or self.test_indices.shape != (n_test,):
            raise InvariantViolation("shape", "feature_values/test_indices shapes disagree")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.fx)) and np.all(np.isfinite(self.base))):
            raise InvariantViolation("finite", "non-finite explanation values")
        resid = np.abs(self.phi.sum(axis=1) + self.base[None, :] - self.fx)
        worst = float(resid.max()) if resid.size else 0.0
        if worst > tol:
            raise InvariantViolation("local_accuracy", f"worst residual {worst:.3e} exceeds {tol:.1e}")


def default_budget(m: int) -> int:
    return min(2**m - 2, 2 * m + 2048)


def split(
    d: Dataset, a: ClusterAssignment, fraction: float = 0.2, seed: int = 42
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/test split over assigned rows (-1 rows are dropped).

    Each cluster contributes round(fraction * size) test rows, clamped to
    [1, size - 1] so every cluster keeps at least one training row.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if a.n != d.n:
        raise DimensionMismatch(f"assignment has {a.n} labels for a dataset of {d.n} rows")
    rng = np.random.default_rng(seed)
    train: list[np.ndarray] = []
    test: list[np.ndarray] = []
    for c in range(a.k):
        members = np.flatnonzero(a.labels == c)
        if members.size < 2:
            raise ClusterTooSmall(f"cluster {c} has {members.size} members; need >= 2")
        n_test = int(round(fraction * members.size))
        n_test = max(1, min(n_test, members.size - 1))
        perm = rng.permutation(members.size)
        test.append(members[perm[:n_test]])
        train.append(members[perm[n_test:]])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def kernel_weight(m: int, s: int) -> float:
    """Shapley kernel weight (m-1) / (C(m, s) * s * (m-s)) for 0 < s < m."""
    if s <= 0 or s >= m:
        raise BoundaryCoalition(f"coalition size {s} of {m} is handled by constraints, not weights")
    return (m - 1) / (math.comb(m, s) * s * (m - s))


def sample_coalitions(m: int, budget: int, seed: int = 42) -> np.ndarray:
    """Boolean coalition masks (budget, m), every row with 0 < size < m.

    budget >= 2^m - 2 returns the full enumeration, each proper coalition
    exactly once. Otherwise complete size layers are taken outward from
    sizes 1 and m-1 while they fit (they carry the largest kernel weight),
    and the first layer that does not fit is filled by seeded sampling
    without replacement.
    """
    if m < 2:
        raise BadBudget(f"coalition sampling needs m >= 2, got m={m}")
    if budget < 2:
        raise BadBudget(f"budget must be >= 2, got {budget}")
    total = 2**m - 2
    if budget >= total:
        return _all_proper_masks(m)

    rng = np.random.default_rng(seed)
    layer_order: list[int] = []
    for s in range(1, m // 2 + 1):
        layer_order.append(s)
        if m - s != s:
            layer_order.append(m - s)

    rows: list[np.ndarray] = []
    remaining = budget
    for s in layer_order:
        layer_size = math.comb(m, s)
        if layer_size <= remaining:
            rows.append(_full_layer(m, s))
            remaining -= layer_size
        else:
            if remaining > 0:
                rows.append(_sample_layer(m, s, remaining, rng))
                remaining = 0
            break
        if remaining == 0:
            break
    masks = np.concatenate(rows, axis=0)
    return masks


def _all_proper_masks(m: int) -> np.ndarray:
    codes = np.arange(1, 2**m - 1, dtype=np.int64)
    return (codes[:, None] >> np.arange(m)[None, :]) & 1 == 1


def _full_layer(m: int, s: int) -> np.ndarray:
    from itertools import combinations

    combos = list(combinations(range(m), s))
    masks = np.zeros((len(combos), m), dtype=bool)
    for i, combo in enumerate(combos):
        masks[i, list(combo)] = True
    return masks


def _sample_layer(m: int, s: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """count distinct size-s masks, sampled without replacement."""
    layer_size = math.comb(m, s)
    if layer_size <= 4 * count or layer_size <= 4096:
        full = _full_layer(m, s)
        pick = rng.choice(layer_size, size=count, replace=False)
        return full[np.sort(pick)]
    seen: set[tuple[int, ...]] = set()
    masks = np.zeros((count, m), dtype=bool)
    while len(seen) < count:
        combo = tuple(np.sort(rng.choice(m, size=s, replace=False)))
        if combo in seen:
            continue
        masks[len(seen), list(combo)] = True
        seen.add(combo)
    return masks


def marginalize(cs: CentroidSet, x: np.ndarray, mask: np.ndarray, bg: np.ndarray) -> np.ndarray:
    """Interventional expectation for one coalition: features in the mask
    take x's value, the rest take each background row's value; returns the
    mean cluster-probability vector over the background."""
    x = np.asarray(x, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if x.shape != (cs.m,) or mask.shape != (cs.m,):
        raise DimensionMismatch(f"x and mask must have length {cs.m}")
    bg = _check_background(bg, cs.m)
    return _marginalize_many(cs, x, mask[None, :], bg)[0]


def _check_background(bg: np.ndarray, m: int) -> np.ndarray:
    bg = np.asarray(bg, dtype=np.float64)
    if bg.ndim != 2 or bg.shape[1] != m or bg.shape[0] < 1:
        raise DimensionMismatch(f"background must be (B >= 1, {m}), got shape {bg.shape}")
    return bg


def _sq_dist_parts(cs: CentroidSet, x: np.ndarray, bg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature squared distance terms: px (K, m) for x, pb (B, K, m) for
    the background rows. d2(coalition, b, k) = mask @ px[k] + (1-mask) @ pb[b, k]."""
    c = cs.centroids
    px = (x[None, :] - c) ** 2
    pb = (bg[:, None, :] - c[None, :, :]) ** 2
    return px, pb


def _masked_probability_means(
    masks: np.ndarray, px: np.ndarray, pb: np.ndarray, k: int
) -> np.ndarray:
    """Mean cluster probabilities (n_masks, K) given precomputed parts."""
    b = pb.shape[0]
    m = px.shape[1]
    masks_f = masks.astype(np.float64)
    pb_flat = pb.transpose(2, 0, 1).reshape(m, b * k)
    a1 = masks_f @ px.T  # (n_masks, K)
    bg_term = (1.0 - masks_f) @ pb_flat  # (n_masks, B*K)
    return _combine_probability_means(a1, bg_term, b, k)


def _combine_probability_means(a1: np.ndarray, bg_term: np.ndarray, b: int, k: int) -> np.ndarray:
    """L1-normalize per-hybrid distances and average over the background."""
    n = a1.shape[0]
    out = np.empty((n, k))
    step = max(1, _CHUNK_ELEMENTS // max(b * k, 1))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        d2 = a1[lo:hi, None, :] + bg_term[lo:hi].reshape(hi - lo, b, k)
        np.maximum(d2, 0.0, out=d2)
        dist = np.sqrt(d2)
        totals = dist.sum(axis=2)
        zero = totals == 0.0
        totals[zero] = 1.0
        probs = dist / totals[:, :, None]
        probs[zero] = 1.0 / k
        out[lo:hi] = probs.mean(axis=1)
    return out


def _marginalize_many(cs: CentroidSet, x: np.ndarray, masks: np.ndarray, bg: np.ndarray) -> np.ndarray:
    px, pb = _sq_dist_parts(cs, x, bg)
    return _masked_probability_means(np.asarray(masks, dtype=bool), px, pb, cs.k)


def exact_shapley(cs: CentroidSet, x: np.ndarray, bg: np.ndarray) -> np.ndarray:
    """Subset-enumeration oracle: phi (m, K) via the weighted sum of
    marginal contributions over all 2^m coalitions. m <= 15."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cs.m,):
        raise DimensionMismatch(f"expected a vector of length {cs.m}, got shape {x.shape}")
    bg = _check_background(bg, cs.m)
    m = cs.m
    if m > EXACT_MAX_FEATURES:
        raise TooManyFeatures(f"exact enumeration needs m <= {EXACT_MAX_FEATURES}, got {m}")

    codes = np.arange(2**m, dtype=np.int64)
    masks = (codes[:, None] >> np.arange(m)[None, :]) & 1 == 1
    values = _marginalize_many(cs, x, masks, bg)  # (2^m, K)
    sizes = masks.sum(axis=1)

    fact = [math.factorial(i) for i in range(m + 1)]
    weight_by_size = np.array([fact[s] * fact[m - s - 1] / fact[m] for s in range(m)])

    phi = np.empty((m, cs.k))
    for j in range(m):
        without = codes[~masks[:, j]]
        w = weight_by_size[sizes[without]]
        diff = values[without + (1 << j)] - values[without]
        phi[j] = w @ diff
    return phi


def kernel_shap_explain(
    cs: CentroidSet,
    x: np.ndarray,
    bg: np.ndarray,
    budget: int | None = None,
    seed: int = 42,
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted least-squares Shapley estimate for one sample.

    Returns (phi, base) with phi of shape (m, K). One regression per output
    shares the same coalition sample and marginalize evaluations. The empty
    and full coalitions enter as hard constraints: base is the mean model
    output over the background, and efficiency is enforced by eliminating
    the last unknown before solving the reduced normal equations (Cholesky).
    Raises SingularSystem when the reduced normal matrix is singular; retry
    with a larger budget.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cs.m,):
        raise DimensionMismatch(f"expected a vector of length {cs.m}, got shape {x.shape}")
    bg = _check_background(bg, cs.m)
    ex = _Explainer(cs, bg, budget, seed)
    phi, _ = ex.explain(x)
    return phi, ex.base


class _Explainer:
    """Shared per-run state: coalition sample, kernel weights, the
    x-independent background term of every coalition's squared distances,
    and the factorized normal matrix. explain() is pure and thread-safe,
    so test rows can be mapped in parallel."""

    def __init__(self, cs: CentroidSet, bg: np.ndarray, budget: int | None, seed: int):
        self.cs = cs
        self.bg = _check_background(bg, cs.m)
        m = cs.m
        b = self.bg.shape[0]
        c = cs.centroids
        self.pb = (self.bg[:, None, :] - c[None, :, :]) ** 2  # (B, K, m)
        self.pb_flat = self.pb.transpose(2, 0, 1).reshape(m, b * cs.k)
        # base via the same masked path the oracle uses (empty coalition)
        zero_px = np.zeros((cs.k, m))
        self.base = _masked_probability_means(np.zeros((1, m), dtype=bool), zero_px, self.pb, cs.k)[0]
        if m == 1:
            self.masks = None
            return
        self.budget = default_budget(m) if budget is None else int(budget)
        self.masks = sample_coalitions(m, self.budget, seed)
        self.masks_f = self.masks.astype(np.float64)
        self.bg_term = (1.0 - self.masks_f) @ self.pb_flat  # (n_coal, B*K)
        sizes = self.masks.sum(axis=1)
        self.weights = np.array([kernel_weight(m, int(s)) for s in sizes])
        z = self.masks_f
        design = z[:, : m - 1] - z[:, m - 1 :]  # eliminate the last unknown
        self.z_last = z[:, m - 1]
        wd = design * self.weights[:, None]
        normal = design.T @ wd
        try:
            self.chol = np.linalg.cholesky(normal)
        except np.linalg.LinAlgError:
            raise SingularSystem(
                f"reduced normal matrix is singular with budget {self.budget}; retry with a larger budget"
            ) from None
        self.wdesign = wd

    def _values(self, px: np.ndarray, masks_f: np.ndarray, bg_term: np.ndarray) -> np.ndarray:
        b, k = self.bg.shape[0], self.cs.k
        a1 = masks_f @ px.T  # (n, K)
        return _combine_probability_means(a1, bg_term, b, k)

    def explain(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(phi (m, K), fx (K,)) for one sample."""
        cs = self.cs
        m = cs.m
        px = (np.asarray(x, dtype=np.float64)[None, :] - cs.centroids) ** 2  # (K, m)
        full = np.ones((1, m))
        fx = self._values(px, full, (1.0 - full) @ self.pb_flat)[0]
        if m == 1:
            phi = (fx - self.base)[None, :]
            return phi, fx
        values = self._values(px, self.masks_f, self.bg_term)  # (n_coal, K)
        gap = fx - self.base  # (K,)
        targets = values - self.base[None, :] - np.outer(self.z_last, gap)
        rhs = self.wdesign.T @ targets  # (m-1, K)
        y = np.linalg.solve(self.chol, rhs)
        phi_head = np.linalg.solve(self.chol.T, y)  # (m-1, K)
        phi_last = gap[None, :] - phi_head.sum(axis=0, keepdims=True)
        phi = np.concatenate([phi_head, phi_last], axis=0)
        return phi, fx


def explain_all(
    d: Dataset,
    a: ClusterAssignment,
    cs: CentroidSet,
    config: ExplanationConfig = ExplanationConfig(),
    on_progress=None,
) -> ExplanationMatrix:
    """Explain every test row of the stratified split.

    The background is the training split, subsampled (seeded) to
    config.background rows when larger. Test rows are independent work
    units; results are written back by row index, so the output does not
    depend on scheduling. on_progress(done, total), when given, is called
    after each completed row (from worker threads)."""
    train_idx, test_idx = split(d, a, config.fraction, config.seed)
    rng = np.random.default_rng(config.seed)
    if config.background < 1:
        raise ValueError(f"background size must be >= 1, got {config.background}")
    if train_idx.size > config.background:
        keep = np.sort(rng.choice(train_idx.size, size=config.background, replace=False))
        bg = d.rows[train_idx[keep]]
    else:
        bg = d.rows[train_idx]

    ex = _Explainer(cs, bg, config.budget, config.seed)
    n_test = test_idx.size
    phi = np.empty((n_test, d.m, cs.k))
    fx = np.empty((n_test, cs.k))
    done = [0]

    def run_row(i: int) -> None:
        p, f = ex.explain(d.rows[test_idx[i]])
        phi[i] = p
        fx[i] = f
        if on_progress is not None:
            done[0] += 1
            on_progress(done[0], n_test)

    threads = max(1, int(config.threads))
    if threads == 1:
        for i in range(n_test):
            run_row(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_row, range(n_test)))

    em = ExplanationMatrix(
        phi=phi,
        base=ex.base,
        fx=fx,
        test_indices=test_idx,
        feature_values=d.rows[test_idx],
        feature_names=d.feature_names,
        k=cs.k,
    )
    em.validate()
    return em
