"""Top-m non-overlapping explanation selection.

The selector simulates an analyst drilling down one dimension at a time: at
every node (a predicate prefix) it either keeps the node itself as one
explanation or drills into a dimension unused on the path, splitting its
selection quota across that dimension's children by a small knapsack. Values
are computed per exact selection size so that Best[m'] for every m' <= m
falls out of the same dynamic program, which the guess-and-verify
acceleration needs for its certificate.

All code paths share one comparator -- higher total score, ties broken by the
lexicographically smaller selection under the score-sorted candidate order --
so the fast paths return bit-identical results to the generic recursion.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations as iter_combinations
from typing import Sequence

import numpy as np

from .dataset import DataError, Explanation, overlaps
from .diffs import ScoredExplanation

NEG = float("-inf")

# A DP cell: (total gamma, selection as a sorted tuple of chi ranks).
Cell = tuple[float, tuple[int, ...]]

_ZERO: Cell = (0.0, ())
_DEAD: Cell = (NEG, ())


def _better(a: Cell, b: Cell) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    return a[1] < b[1]


def _combine(a: Cell, b: Cell, gamma_by_rank: list[float]) -> Cell:
    # Recompute the total canonically (ascending rank order) so every code
    # path produces bit-identical scores for the same selection.
    sel = tuple(sorted(a[1] + b[1]))
    total = 0.0
    for r in sel:
        total += gamma_by_rank[r]
    return (total, sel)


@dataclass(frozen=True)
class TopExplanations:
    """Ranked non-overlapping explanations, descending by gamma."""

    ranked: tuple[ScoredExplanation, ...]
    total_score: float

    def __len__(self) -> int:
        return len(self.ranked)

    def explanation_set(self) -> frozenset:
        return frozenset(s.explanation for s in self.ranked)

    def check_non_overlapping(self) -> None:
        for a, b in iter_combinations(self.ranked, 2):
            if overlaps(a.explanation, b.explanation):
                raise AssertionError(
                    f"overlapping selection: {a.explanation.label()} / {b.explanation.label()}"
                )


@dataclass(frozen=True)
class CAResult:
    top: TopExplanations
    best: tuple[float, ...]  # Best[q] for q = 0..m, "at most q" semantics


def _chi_order(gammas: np.ndarray) -> np.ndarray:
    """Candidate indices sorted descending by gamma, ties by list position.

    Candidate lists coming from the cube are already in canonical
    (attribute, value) enumeration order, so positional tie-breaking is
    deterministic end to end.
    """
    return np.argsort(-gammas, kind="stable")


# ---------------------------------------------------------------------------
# Generic drill-down DP over the subset closure of the candidates
# ---------------------------------------------------------------------------


class _Closure:
    """Subset closure of candidate predicate sets, with drill edges."""

    def __init__(self, predicate_sets: Sequence[tuple]):
        node_id: dict[frozenset, int] = {frozenset(): 0}
        keys: list[frozenset] = [frozenset()]
        for preds in predicate_sets:
            for r in range(1, len(preds) + 1):
                for sub in iter_combinations(preds, r):
                    key = frozenset(sub)
                    if key not in node_id:
                        node_id[key] = len(keys)
                        keys.append(key)
        self.cand_at = [-1] * len(keys)
        for ci, preds in enumerate(predicate_sets):
            nid = node_id[frozenset(preds)]
            if self.cand_at[nid] != -1:
                raise DataError(f"duplicate candidate explanation: {preds}")
            self.cand_at[nid] = ci
        children: list[dict[str, list[int]]] = [{} for _ in keys]
        for nid, key in enumerate(keys):
            for pred in key:
                parent = node_id[frozenset(key - {pred})]
                children[parent].setdefault(pred[0], []).append(nid)
        # deterministic iteration: attrs sorted, children by node key
        self.children = [
            [(attr, sorted(set(kids))) for attr, kids in sorted(ch.items())] for ch in children
        ]
        self.order = sorted(range(len(keys)), key=lambda i: -len(keys[i]))


def _conv(
    cells: list[list[Cell]], child_ids: list[int], m: int, gamma_by_rank: list[float]
) -> list[Cell]:
    acc: list[Cell] = [_ZERO] + [_DEAD] * m
    for ch in child_ids:
        cvec = cells[ch]
        for q in range(m, 0, -1):
            best = acc[q]
            for s in range(1, q + 1):
                if cvec[s][0] == NEG or acc[q - s][0] == NEG:
                    continue
                cand = _combine(acc[q - s], cvec[s], gamma_by_rank)
                if _better(cand, best):
                    best = cand
            acc[q] = best
    return acc


def _dp_generic(
    closure: _Closure,
    gammas: np.ndarray,
    rank_of: np.ndarray,
    m: int,
    gamma_by_rank: list[float],
) -> list[Cell]:
    cells: list[list[Cell]] = [None] * len(closure.cand_at)  # type: ignore[list-item]
    for nid in closure.order:
        vec: list[Cell] = [_ZERO] + [_DEAD] * m
        ci = closure.cand_at[nid]
        if ci >= 0 and m >= 1:
            take: Cell = (float(gammas[ci]), (int(rank_of[ci]),))
            if _better(take, vec[1]):
                vec[1] = take
        for _attr, kids in closure.children[nid]:
            acc = _conv(cells, kids, m, gamma_by_rank)
            for q in range(1, m + 1):
                if _better(acc[q], vec[q]):
                    vec[q] = acc[q]
        cells[nid] = vec
    return cells[0]


# ---------------------------------------------------------------------------
# Fast paths (identical comparator, vectorized grouping)
# ---------------------------------------------------------------------------


def _dp_single_attr(gammas: np.ndarray, rank_of: np.ndarray, chi: np.ndarray, m: int) -> list[Cell]:
    # One attribute: every pair of distinct values is non-overlapping, so the
    # exact-q optimum is simply the first q candidates in chi order.
    vec: list[Cell] = [_ZERO] + [_DEAD] * m
    sel: list[int] = []
    total = 0.0
    for q in range(1, m + 1):
        if q > len(chi):
            break
        ci = int(chi[q - 1])
        total += float(gammas[ci])
        sel.append(int(rank_of[ci]))
        vec[q] = (total, tuple(sel))
    return vec


class _Depth2Structure:
    """Precomputed grouping for candidate sets of order <= 2 (any #attributes)."""

    def __init__(self, predicate_sets: Sequence[tuple]):
        self.single_of: dict[tuple, int] = {}
        self.pair_groups: dict[tuple, tuple[str, str]] = {}
        self.nodes_by_attr: dict[str, list[tuple]] = {}
        node_seen: set[tuple] = set()

        def add_node(attr: str, value) -> None:
            if (attr, value) not in node_seen:
                node_seen.add((attr, value))
                self.nodes_by_attr.setdefault(attr, []).append((attr, value))

        for ci, preds in enumerate(predicate_sets):
            if len(preds) == 1:
                (attr, value) = preds[0]
                self.single_of[(attr, value)] = ci
                add_node(attr, value)
            else:
                (a1, v1), (a2, v2) = preds
                add_node(a1, v1)
                add_node(a2, v2)
        for attr in self.nodes_by_attr:
            self.nodes_by_attr[attr].sort(key=lambda nv: repr(nv[1]))


def _dp_depth2(
    structure: _Depth2Structure,
    predicate_sets: Sequence[tuple],
    gammas: np.ndarray,
    rank_of: np.ndarray,
    chi: np.ndarray,
    m: int,
    gamma_by_rank: list[float],
) -> list[Cell]:
    # Pass over pair candidates in chi order, keeping the first m per
    # (depth-1 node, drill attribute) group: that prefix is the group's
    # exact-q optimum for every q <= m.
    groups: dict[tuple, dict[str, list[int]]] = {}
    for ci in chi.tolist():
        preds = predicate_sets[ci]
        if len(preds) != 2:
            continue
        (a1, v1), (a2, v2) = preds
        for node, drill in (((a1, v1), a2), ((a2, v2), a1)):
            by_drill = groups.setdefault(node, {})
            lst = by_drill.setdefault(drill, [])
            if len(lst) < m:
                lst.append(ci)

    node_cells: dict[tuple, list[Cell]] = {}
    for attr, nodes in structure.nodes_by_attr.items():
        for node in nodes:
            vec: list[Cell] = [_ZERO] + [_DEAD] * m
            single = structure.single_of.get(node)
            if single is not None:
                vec[1] = (float(gammas[single]), (int(rank_of[single]),))
            for members in groups.get(node, {}).values():
                total = 0.0
                sel: list[int] = []
                for q, ci in enumerate(members, start=1):
                    total += float(gammas[ci])
                    sel.append(int(rank_of[ci]))
                    cand = (total, tuple(sorted(sel)))
                    if _better(cand, vec[q]):
                        vec[q] = cand
            node_cells[node] = vec

    root: list[Cell] = [_ZERO] + [_DEAD] * m
    for attr in sorted(structure.nodes_by_attr):
        cells = [node_cells[node] for node in structure.nodes_by_attr[attr]]
        acc: list[Cell] = [_ZERO] + [_DEAD] * m
        for cvec in cells:
            for q in range(m, 0, -1):
                best = acc[q]
                for s in range(1, q + 1):
                    if cvec[s][0] == NEG or acc[q - s][0] == NEG:
                        continue
                    cand = _combine(acc[q - s], cvec[s], gamma_by_rank)
                    if _better(cand, best):
                        best = cand
                acc[q] = best
        for q in range(1, m + 1):
            if _better(acc[q], root[q]):
                root[q] = acc[q]
    return root


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class TopKEngine:
    """Reusable selector over a fixed candidate list; gammas vary per segment."""

    def __init__(self, explanations: Sequence[Explanation], m: int = 3):
        if m < 1:
            raise DataError("m must be >= 1")
        self.m = m
        self.explanations = list(explanations)
        self.predicate_sets = [e.predicates for e in self.explanations]
        if len(set(self.predicate_sets)) != len(self.predicate_sets):
            raise DataError("duplicate candidate explanation")
        attrs = {a for preds in self.predicate_sets for a, _ in preds}
        max_order = max((len(p) for p in self.predicate_sets), default=0)
        if len(attrs) <= 1:
            self.mode = "single"
            self.structure = None
        elif max_order <= 2:
            self.mode = "depth2"
            self.structure = _Depth2Structure(self.predicate_sets)
        else:
            self.mode = "generic"
            self.structure = _Closure(self.predicate_sets)

    def root_cells(self, gammas: np.ndarray) -> tuple[list[Cell], np.ndarray]:
        gammas = np.asarray(gammas, dtype=np.float64)
        chi = _chi_order(gammas)
        rank_of = np.empty(len(chi), dtype=np.int64)
        rank_of[chi] = np.arange(len(chi))
        gamma_by_rank = gammas[chi].tolist()
        if self.mode == "single":
            root = _dp_single_attr(gammas, rank_of, chi, self.m)
        elif self.mode == "depth2":
            root = _dp_depth2(
                self.structure, self.predicate_sets, gammas, rank_of, chi, self.m, gamma_by_rank
            )
        else:
            root = _dp_generic(self.structure, gammas, rank_of, self.m, gamma_by_rank)
        return root, chi

    def select(self, gammas: np.ndarray) -> tuple[np.ndarray, tuple[float, ...]]:
        """Selected candidate indices (gamma-descending) and Best[0..m]."""
        root, chi = self.root_cells(gammas)
        best_cells = _at_most(root, self.m)
        sel_ranks = best_cells[self.m][1]
        indices = chi[list(sel_ranks)] if sel_ranks else np.empty(0, dtype=np.int64)
        return indices, tuple(c[0] for c in best_cells)

    def select_auto(
        self, gammas: np.ndarray, guess_verify: bool = True, m_bar0: int = 30
    ) -> tuple[np.ndarray, tuple[float, ...]]:
        """select(), accelerated by guess-and-verify when enabled.

        Guaranteed to return the same selection as the full run: the prefix
        answer is only accepted once the verification bound certifies it.
        """
        gammas = np.asarray(gammas, dtype=np.float64)
        total = len(gammas)
        m_bar = max(self.m, m_bar0)
        if not guess_verify or m_bar >= total or self.mode == "single":
            # single attribute: the full run is already a sort-and-take
            return self.select(gammas)
        chi = _chi_order(gammas)
        while True:
            prefix = chi[: min(m_bar, total)]
            sub = TopKEngine([self.explanations[int(i)] for i in prefix], self.m)
            local_idx, best = sub.select(gammas[prefix])
            if m_bar >= total or _verified(best, gammas, chi, m_bar, self.m):
                idx = prefix[local_idx] if len(local_idx) else np.empty(0, dtype=np.int64)
                return idx, best
            m_bar *= 2


def _at_most(root: list[Cell], m: int) -> list[Cell]:
    out = [root[0]]
    for q in range(1, m + 1):
        cell = root[q] if _better(root[q], out[q - 1]) else out[q - 1]
        out.append(cell)
    return out


# ---------------------------------------------------------------------------
# Public operations on ScoredExplanation lists
# ---------------------------------------------------------------------------


def _unpack(scores: Sequence[ScoredExplanation]) -> tuple[list[Explanation], np.ndarray]:
    return [s.explanation for s in scores], np.array([s.gamma for s in scores], dtype=np.float64)


def _as_top(scores: Sequence[ScoredExplanation], indices: np.ndarray) -> TopExplanations:
    ranked = tuple(scores[int(i)] for i in indices)
    return TopExplanations(ranked, float(sum(s.gamma for s in ranked)))


def ca_top_m(
    scores: Sequence[ScoredExplanation],
    explain_by: Sequence[str] | None = None,
    m: int = 3,
) -> CAResult:
    """Exact top-(at most m) non-overlapping selection, plus Best[m'] for all m' <= m.

    ``explain_by`` restricts the admissible predicate attributes when given.
    """
    if m < 1:
        raise DataError("m must be >= 1")
    if explain_by is not None:
        allowed = set(explain_by)
        for s in scores:
            extra = set(s.explanation.attrs) - allowed
            if extra:
                raise DataError(f"candidate uses attributes outside explain_by: {sorted(extra)}")
    explanations, gammas = _unpack(scores)
    engine = TopKEngine(explanations, m)
    indices, best = engine.select(gammas)
    return CAResult(_as_top(scores, indices), best)


def brute_force_top_m(
    scores: Sequence[ScoredExplanation], m: int, max_candidates: int = 20
) -> tuple[TopExplanations, TopExplanations | None]:
    """Exhaustive oracle: (best of size <= m, best of size exactly m or None).

    Only intended for tests; refuses large candidate lists.
    """
    if m < 1:
        raise DataError("m must be >= 1")
    if len(scores) > max_candidates:
        raise DataError(f"brute force capped at {max_candidates} candidates, got {len(scores)}")
    explanations = [s.explanation for s in scores]
    n = len(scores)
    ok = [[not overlaps(explanations[i], explanations[j]) for j in range(n)] for i in range(n)]

    best_at_most: tuple[float, tuple[int, ...]] = (0.0, ())
    best_exact: tuple[float, tuple[int, ...]] | None = None
    for size in range(1, m + 1):
        for combo in iter_combinations(range(n), size):
            if any(not ok[a][b] for a, b in iter_combinations(combo, 2)):
                continue
            total = sum(scores[i].gamma for i in combo)
            entry = (total, combo)
            if total > best_at_most[0]:
                best_at_most = entry
            if size == m and (best_exact is None or total > best_exact[0]):
                best_exact = entry

    def build(entry: tuple[float, tuple[int, ...]]) -> TopExplanations:
        ranked = sorted(entry[1], key=lambda i: (-scores[i].gamma, i))
        return _as_top(scores, np.array(ranked, dtype=np.int64))

    return build(best_at_most), (build(best_exact) if best_exact is not None else None)


def guess_and_verify(
    scores: Sequence[ScoredExplanation],
    explain_by: Sequence[str] | None = None,
    m: int = 3,
    m_bar0: int = 30,
) -> TopExplanations:
    """Run the selector on a score-sorted prefix, certify optimality, double on failure.

    The certificate: a candidate solution with m' members inside the prefix
    and m-m' outside scores at most Best[m'] plus the next m-m' gammas after
    the prefix; once Best[m] dominates that bound for every m' < m, the
    prefix answer is globally optimal. Terminates with the exact answer at
    the latest when the prefix covers every candidate.
    """
    if m < 1:
        raise DataError("m must be >= 1")
    if explain_by is not None:
        allowed = set(explain_by)
        for s in scores:
            extra = set(s.explanation.attrs) - allowed
            if extra:
                raise DataError(f"candidate uses attributes outside explain_by: {sorted(extra)}")
    explanations, gammas = _unpack(scores)
    engine = TopKEngine(explanations, m)
    indices, _best = engine.select_auto(gammas, guess_verify=True, m_bar0=m_bar0)
    return _as_top(scores, indices)


def _verified(
    best: tuple[float, ...], gammas: np.ndarray, chi: np.ndarray, m_bar: int, m: int
) -> bool:
    tail = gammas[chi[m_bar:]]
    for m_prime in range(m):
        bound = best[m_prime] + float(tail[: m - m_prime].sum())
        if best[m] < bound:
            return False
    return True
