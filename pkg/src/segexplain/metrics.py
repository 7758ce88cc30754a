"""Explanation-aware segment distances and within-segment variances.

Two segments are close when each one's top explanation list explains the
other well. "Explains well" is a discounted-cumulative-gain score: a ranked
explanation's relevance towards a target segment is its difference score
there, rectified to zero when its change effect flips between the two
segments. The normalized score against the target's own ideal list gives an
NDCG in [0, 1]; segment distance is one minus the symmetric NDCG mean.

Within-segment variance treats unit segments (adjacent point pairs) as
objects and the enclosing segment as its own centroid. Eight metric variants
are supported: the production metric averages object-to-centroid distances;
alternatives use one-sided NDCG, all object pairs, or squared distances.

Everything in this module is vectorized over objects; the SegmentScorer is
the single shared cache for top lists and contribution tables.
"""

from __future__ import annotations

import time
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import DataError, SeriesCube
from .diffs import (
    TAU_PLUS,
    ScoredExplanation,
    SegmentRef,
    signed_contributions,
    unit_contributions,
)
from .topk import TopExplanations, TopKEngine

VARIANCE_METRICS = ("tse", "dist1", "dist2", "allpair", "Stse", "Sdist1", "Sdist2", "Sallpair")


class TopList(NamedTuple):
    """Array view of a segment's top explanations (rows into the cube)."""

    idx: np.ndarray  # (q,) candidate rows, gamma-descending
    gammas: np.ndarray  # (q,)
    taus: np.ndarray  # (q,) +1 / -1
    idcg: float


class SegmentScorer:
    """Shared per-cube cache: contributions, top lists, NDCG, distance, variance."""

    def __init__(
        self,
        cube: SeriesCube,
        m: int = 3,
        guess_verify: bool = True,
        m_bar0: int = 30,
    ):
        if m < 1:
            raise DataError("m must be >= 1")
        self.cube = cube
        self.m = m
        self.guess_verify = guess_verify
        self.m_bar0 = m_bar0
        self.engine = TopKEngine(cube.explanations, m)
        self.disc = 1.0 / np.log2(np.arange(m) + 2.0)
        self.unit = unit_contributions(cube)  # (eps, n-1)
        self.ca_seconds = 0.0
        self._tops: dict[tuple[int, int], TopList] = {}
        self._contribs: dict[tuple[int, int], np.ndarray] = {}
        self._var_cache: dict[tuple[int, int, str], float] = {}
        self._objects: tuple | None = None
        self._pair_prefix: dict[str, np.ndarray] = {}

    # -- contributions and top lists ----------------------------------------

    @property
    def n(self) -> int:
        return self.cube.n

    def contrib(self, i: int, j: int) -> np.ndarray:
        if j == i + 1:
            return self.unit[:, i]
        key = (i, j)
        found = self._contribs.get(key)
        if found is None:
            found = signed_contributions(self.cube, i, j)
            self._contribs[key] = found
        return found

    def top(self, i: int, j: int) -> TopList:
        key = (i, j)
        found = self._tops.get(key)
        if found is None:
            found = self._compute_top(self.contrib(i, j))
            self._tops[key] = found
        return found

    def _compute_top(self, contrib: np.ndarray) -> TopList:
        started = time.perf_counter()
        gammas = np.abs(contrib)
        idx, _best = self.engine.select_auto(gammas, self.guess_verify, self.m_bar0)
        g = gammas[idx]
        taus = np.where(contrib[idx] >= 0, 1, -1).astype(np.int8)
        idcg = float(g @ self.disc[: len(idx)])
        self.ca_seconds += time.perf_counter() - started
        return TopList(idx, g, taus, idcg)

    def scored_list(self, i: int, j: int) -> TopExplanations:
        """The segment's top list as ranked ScoredExplanation objects."""
        top = self.top(i, j)
        ranked = tuple(
            ScoredExplanation(
                self.cube.explanations[int(r)],
                float(g),
                TAU_PLUS if t > 0 else "-",
            )
            for r, g, t in zip(top.idx, top.gammas, top.taus)
        )
        return TopExplanations(ranked, float(top.gammas.sum()))

    # -- NDCG and distance ---------------------------------------------------

    def ndcg(self, target: SegmentRef, source_top: TopList | TopExplanations) -> float:
        """How well a source segment's ranked list explains the target segment."""
        if isinstance(source_top, TopExplanations):
            source_top = self._as_toplist(source_top)
        d = self.contrib(target.start, target.end)
        idcg = self.top(target.start, target.end).idcg
        return self._ndcg_scalar(d, idcg, source_top)

    def _as_toplist(self, top: TopExplanations) -> TopList:
        idx = np.array([self.cube.index_of(s.explanation) for s in top.ranked], dtype=np.int64)
        gammas = np.array([s.gamma for s in top.ranked], dtype=np.float64)
        taus = np.array([1 if s.tau == TAU_PLUS else -1 for s in top.ranked], dtype=np.int8)
        return TopList(idx, gammas, taus, float(gammas @ self.disc[: len(idx)]))

    def _ndcg_scalar(self, target_contrib: np.ndarray, target_idcg: float, source: TopList) -> float:
        q = len(source.idx)
        if q == 0:
            dcg = 0.0
        else:
            vals = target_contrib[source.idx]
            match = np.where(vals >= 0, 1, -1) == source.taus
            dcg = float((np.abs(vals) * match) @ self.disc[:q])
        if target_idcg > 0.0:
            return min(1.0, dcg / target_idcg)
        # Degenerate flat target: nothing to explain. Both lists explain it
        # "equally" only when the source also scores zero there.
        return 1.0 if dcg == 0.0 else 0.0

    def distance(self, a: SegmentRef, b: SegmentRef) -> float:
        """Symmetric explanation distance in [0, 1]; zero iff the lists agree."""
        return 1.0 - 0.5 * (self.ndcg(a, self.top(b.start, b.end)) + self.ndcg(b, self.top(a.start, a.end)))

    # -- object (unit segment) tables ----------------------------------------

    def _object_tables(self):
        if self._objects is None:
            n_obj = self.n - 1
            idx = np.full((n_obj, self.m), -1, dtype=np.int64)
            taus = np.zeros((n_obj, self.m), dtype=np.int8)
            idcg = np.zeros(n_obj, dtype=np.float64)
            for x in range(n_obj):
                top = self.top(x, x + 1)
                q = len(top.idx)
                idx[x, :q] = top.idx
                taus[x, :q] = top.taus
                idcg[x] = top.idcg
            self._objects = (idx, taus, idcg)
        return self._objects

    def _ndcg_objects_from_centroid(self, i: int, j: int, ctop: TopList) -> np.ndarray:
        """NDCG(object_x, centroid top) for every object x in [i, j)."""
        _idx, _taus, obj_idcg = self._object_tables()
        span = slice(i, j)
        q = len(ctop.idx)
        if q == 0:
            dcg = np.zeros(j - i)
        else:
            vals = self.unit[ctop.idx, span]  # (q, len)
            match = np.where(vals >= 0, 1, -1) == ctop.taus[:, None]
            dcg = self.disc[:q] @ (np.abs(vals) * match)
        return _ndcg_vector(dcg, obj_idcg[span])

    def _ndcg_centroid_from_objects(self, i: int, j: int, d: np.ndarray, idcg: float) -> np.ndarray:
        """NDCG(centroid, object_x top) for every object x in [i, j)."""
        obj_idx, obj_taus, _ = self._object_tables()
        span_idx = obj_idx[i:j]  # (len, m), -1 padded
        vals = d[np.clip(span_idx, 0, None)]
        mask = span_idx >= 0
        match = (np.where(vals >= 0, 1, -1) == obj_taus[i:j]) & mask
        dcg = (np.abs(vals) * match) @ self.disc[: span_idx.shape[1]]
        return _ndcg_vector(dcg, np.full(j - i, idcg))

    # -- variance --------------------------------------------------------------

    def variance(self, i: int, j: int, metric: str = "tse") -> float:
        if metric not in VARIANCE_METRICS:
            raise DataError(f"unknown variance metric {metric!r}; pick one of {VARIANCE_METRICS}")
        key = (i, j, metric)
        found = self._var_cache.get(key)
        if found is None:
            found = self.variance_profile(i, j, (metric,))[metric]
        return found

    def variance_profile(
        self, i: int, j: int, metrics: Sequence[str] = VARIANCE_METRICS
    ) -> dict[str, float]:
        """Within-segment variance for several metrics, sharing the NDCG work."""
        if not (0 <= i < j <= self.n - 1):
            raise DataError(f"invalid segment ({i}, {j})")
        for metric in metrics:
            if metric not in VARIANCE_METRICS:
                raise DataError(f"unknown variance metric {metric!r}")
        length = j - i
        out: dict[str, float] = {}
        if length == 1:
            for metric in metrics:
                out[metric] = 0.0
                self._var_cache[(i, j, metric)] = 0.0
            return out

        a = b = None
        targets = set(metrics)
        if targets & {"tse", "Stse", "dist2", "Sdist2"}:
            a = self._ndcg_objects_from_centroid(i, j, self.top(i, j))
        if targets & {"tse", "Stse", "dist1", "Sdist1"}:
            b = self._ndcg_centroid_from_objects(i, j, self.contrib(i, j), self.top(i, j).idcg)
        for metric in metrics:
            if metric in ("allpair", "Sallpair"):
                total = _window_sum(self._pair_prefix_matrix(metric), i, j - 1)
                value = float(total * 2.0 / (length * (length - 1)))  # mean over C(len,2) pairs
            else:
                if metric in ("tse", "Stse"):
                    dist = 1.0 - 0.5 * (a + b)
                elif metric in ("dist1", "Sdist1"):
                    # one-sided: how well each object's list explains the centroid
                    dist = 1.0 - b
                else:  # dist2 / Sdist2: how well the centroid's list explains each object
                    dist = 1.0 - a
                if metric.startswith("S"):
                    dist = dist * dist
                value = float(dist.mean())
            out[metric] = value
            self._var_cache[(i, j, metric)] = value
        return out

    # -- batched per-length computation (sketch nomination pass) ---------------

    def contrib_band(self, length: int) -> np.ndarray:
        """Signed contributions of every explanation over every segment of one length."""
        if self.cube.agg.function.value == "AVG":
            return np.stack(
                [signed_contributions(self.cube, s, s + length) for s in range(self.n - length)],
                axis=1,
            )
        return self.cube.values[:, length:] - self.cube.values[:, : self.n - length]

    def precompute_length_bands(self, max_len: int, metric: str) -> None:
        """Fill the variance cache for every segment of length <= max_len.

        Vectorizes each length across all its start positions; for
        single-attribute candidate sets the top lists batch too, otherwise
        they go through the regular per-segment selector.
        """
        for length in range(1, min(max_len, self.n - 1) + 1):
            self._variance_band(length, metric)

    def _variance_band(self, length: int, metric: str) -> None:
        count = self.n - length
        if length == 1:
            for s in range(count):
                self._var_cache[(s, s + 1, metric)] = 0.0
            return
        if metric in ("allpair", "Sallpair"):
            prefix = self._pair_prefix_matrix(metric)
            for s in range(count):
                total = _window_sum(prefix, s, s + length - 1)
                self._var_cache[(s, s + length, metric)] = float(
                    total * 2.0 / (length * (length - 1))
                )
            return

        contribs = self.contrib_band(length)  # (eps, count)
        gammas = np.abs(contribs)
        m = self.m
        if self.engine.mode == "single":
            started = time.perf_counter()
            order = np.argsort(-gammas, axis=0, kind="stable")[: min(m, gammas.shape[0])]
            top_idx = order.T.copy()  # (count, q)
            top_g = np.take_along_axis(gammas, order, axis=0).T
            top_idx[top_g == 0.0] = -1  # zero-gamma entries drop out of the list
            self.ca_seconds += time.perf_counter() - started
        else:
            top_idx = np.full((count, m), -1, dtype=np.int64)
            for s in range(count):
                started = time.perf_counter()
                idx, _ = self.engine.select_auto(gammas[:, s], self.guess_verify, self.m_bar0)
                self.ca_seconds += time.perf_counter() - started
                top_idx[s, : len(idx)] = idx
        q = top_idx.shape[1]
        mask = top_idx >= 0
        safe_idx = np.clip(top_idx, 0, None)
        cols = np.arange(count)
        top_gamma = gammas[safe_idx, cols[:, None]] * mask
        top_tau = np.where(contribs[safe_idx, cols[:, None]] >= 0, 1, -1).astype(np.int8)
        idcg_c = top_gamma @ self.disc[:q]

        starts = cols
        obj_idx, obj_taus, obj_idcg = self._object_tables()
        dist_parts: dict[str, np.ndarray] = {}
        if metric in ("tse", "Stse", "dist2", "Sdist2"):
            # NDCG(object, centroid list) for objects t = 0..length-1 of each segment
            window = starts[:, None] + np.arange(length)[None, :]  # (count, length)
            vals = self.unit[safe_idx[:, :, None], window[:, None, :]]  # (count, q, length)
            m_ok = (np.where(vals >= 0, 1, -1) == top_tau[:, :, None]) & mask[:, :, None]
            dcg = np.einsum("sqt,q->st", np.abs(vals) * m_ok, self.disc[:q])
            a = _ndcg_vector(dcg, obj_idcg[window])
            dist_parts["a"] = a
        if metric in ("tse", "Stse", "dist1", "Sdist1"):
            # NDCG(centroid, object lists)
            window = starts[:, None] + np.arange(length)[None, :]
            oi = obj_idx[window]  # (count, length, m)
            ot = obj_taus[window]
            o_mask = oi >= 0
            vals = contribs[np.clip(oi, 0, None), starts[:, None, None]]  # (count, length, m)
            m_ok = (np.where(vals >= 0, 1, -1) == ot) & o_mask
            dcg = (np.abs(vals) * m_ok) @ self.disc[: oi.shape[2]]
            b = _ndcg_vector(dcg, np.broadcast_to(idcg_c[:, None], dcg.shape).copy())
            dist_parts["b"] = b

        if metric in ("tse", "Stse"):
            dist = 1.0 - 0.5 * (dist_parts["a"] + dist_parts["b"])
        elif metric in ("dist1", "Sdist1"):
            dist = 1.0 - dist_parts["b"]
        else:
            dist = 1.0 - dist_parts["a"]
        if metric.startswith("S"):
            dist = dist * dist
        values = dist.mean(axis=1)
        for s in range(count):
            self._var_cache[(s, s + length, metric)] = float(values[s])

    def _pair_prefix_matrix(self, metric: str) -> np.ndarray:
        found = self._pair_prefix.get(metric)
        if found is not None:
            return found
        m_pairs = self._object_pair_distances()
        base = m_pairs * m_pairs if metric == "Sallpair" else m_pairs
        prefix = base.cumsum(axis=0).cumsum(axis=1)
        self._pair_prefix[metric] = prefix
        return prefix

    def _object_pair_distances(self) -> np.ndarray:
        """Full (n-1, n-1) distance matrix between unit objects."""
        obj_idx, obj_taus, obj_idcg = self._object_tables()
        vals = self.unit[np.clip(obj_idx, 0, None), :]  # (y, m, x)
        mask = (obj_idx >= 0)[:, :, None]
        match = (np.where(vals >= 0, 1, -1) == obj_taus[:, :, None]) & mask
        dcg = np.einsum("ymx,m->yx", np.abs(vals) * match, self.disc[: obj_idx.shape[1]])
        nd = _ndcg_vector(dcg, obj_idcg[None, :].repeat(dcg.shape[0], axis=0))
        return 1.0 - 0.5 * (nd + nd.T)


def _ndcg_vector(dcg: np.ndarray, idcg: np.ndarray) -> np.ndarray:
    out = np.zeros_like(dcg, dtype=np.float64)
    positive = idcg > 0.0
    np.divide(dcg, idcg, out=out, where=positive)
    np.clip(out, 0.0, 1.0, out=out)
    # flat targets: NDCG is 1 when the source also explains nothing, else 0
    out[~positive] = np.where(dcg[~positive] == 0.0, 1.0, 0.0)
    return out


def _window_sum(prefix: np.ndarray, lo: int, hi: int) -> float:
    """Sum of the symmetric pair matrix over rows/cols lo..hi, halved."""
    total = prefix[hi, hi]
    if lo > 0:
        total = total - prefix[lo - 1, hi] - prefix[hi, lo - 1] + prefix[lo - 1, lo - 1]
    return float(total) / 2.0


def distance(
    pi: SegmentRef, pj: SegmentRef, cube: SeriesCube, scorer: SegmentScorer | None = None
) -> float:
    """Module-level convenience over SegmentScorer.distance."""
    scorer = scorer or SegmentScorer(cube)
    return scorer.distance(pi, pj)


def variance(
    seg: SegmentRef,
    cube: SeriesCube,
    scorer: SegmentScorer | None = None,
    metric: str = "tse",
) -> float:
    scorer = scorer or SegmentScorer(cube)
    return scorer.variance(seg.start, seg.end, metric)
