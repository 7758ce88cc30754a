"""Deterministic relations shaped like the case-study datasets.

Each builder plants piecewise-linear per-slice series whose breakpoints and
slope rankings are chosen so the pipeline's output (segment boundaries, K,
per-segment top lists) is known by construction. Dominant slices within a
segment get strictly separated slope magnitudes; background slices stay
linear end-to-end so they add no breakpoints of their own.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from segexplain.dataset import AttributeSchema, Relation

COVID_START = date(2020, 1, 22)
COVID_END = date(2020, 12, 31)

COVID_NAMED_STATES = ["NY", "NJ", "MA", "WA", "CA", "FL", "TX", "IL", "WI"]
COVID_BACKGROUND_STATES = [f"S{i:02d}" for i in range(49)]  # 49 + 9 named = 58


def covid_dates() -> list[date]:
    out = []
    day = COVID_START
    while day <= COVID_END:
        out.append(day)
        day += timedelta(days=1)
    return out


def day_index(d: date) -> int:
    return (d - COVID_START).days


# Table layout: per segment, the three dominant states with signed slopes,
# strictly separated magnitudes. Everything else creeps upward slowly.
COVID_DAILY_SEGMENTS = [
    (date(2020, 3, 7), [("WA", 30.0), ("NY", 24.0), ("CA", 18.0)]),
    (date(2020, 4, 7), [("NY", 40.0), ("NJ", 32.0), ("MA", 26.0)]),
    (date(2020, 5, 25), [("NY", -36.0), ("NJ", -30.0), ("CA", 22.0)]),
    (date(2020, 7, 16), [("FL", 38.0), ("TX", 31.0), ("CA", 24.0)]),
    (date(2020, 9, 9), [("FL", -34.0), ("TX", -28.0), ("CA", -21.0)]),
    (date(2020, 11, 10), [("IL", 39.0), ("TX", 30.0), ("WI", 24.0)]),
    (COVID_END, [("CA", 42.0), ("NY", 34.0), ("IL", -27.0)]),
]

def _state_universe() -> list[str]:
    states = sorted(COVID_NAMED_STATES + COVID_BACKGROUND_STATES)
    assert len(states) == 58
    return states


def _piecewise_from_segments(segment_slopes: list[tuple[int, dict[str, float]]], n: int,
                             states: list[str], base: float) -> dict[str, np.ndarray]:
    """Per-state series built from per-segment slopes (background slope 1.5)."""
    series = {s: np.full(n, base + 17.0 * hash_stable(s), dtype=np.float64) for s in states}
    for s in states:
        level = series[s][0]
        prev = 0
        for end_idx, slopes in segment_slopes:
            slope = slopes.get(s, 1.5)
            steps = np.arange(1, end_idx - prev + 1, dtype=np.float64)
            series[s][prev + 1 : end_idx + 1] = level + slope * steps
            level = series[s][end_idx]
            prev = end_idx
    return series


def hash_stable(name: str) -> float:
    return (sum(ord(c) * (i + 1) for i, c in enumerate(name)) % 29) / 29.0


def covid_daily_relation() -> Relation:
    """58 states, 345 days, seven regimes matching the daily case-trend table."""
    dates = covid_dates()
    n = len(dates)
    states = _state_universe()
    segment_slopes = [
        (day_index(end), dict(slopes)) for end, slopes in COVID_DAILY_SEGMENTS
    ]
    series = _piecewise_from_segments(segment_slopes, n, states, base=2500.0)
    return _relation_from_state_series(dates, series, measure="daily_cases")


COVID_TOTAL_SEGMENTS = [
    (date(2020, 3, 14), [("WA", 28.0), ("NY", 23.0), ("CA", 17.0)]),
    (date(2020, 5, 4), [("NY", 41.0), ("NJ", 33.0), ("MA", 25.0)]),
    (date(2020, 5, 29), [("IL", 36.0), ("CA", 29.0), ("NY", 22.0)]),
    (date(2020, 9, 25), [("CA", 40.0), ("TX", 32.0), ("FL", 26.0)]),
    (date(2020, 11, 27), [("IL", 37.0), ("TX", 30.0), ("WI", 23.0)]),
    (COVID_END, [("CA", 44.0), ("TX", 35.0), ("FL", 27.0)]),
]


def covid_total_relation() -> Relation:
    """Cumulative case counts: six regimes with the documented cut dates."""
    dates = covid_dates()
    n = len(dates)
    states = _state_universe()
    segment_slopes = [
        (day_index(end), dict(slopes)) for end, slopes in COVID_TOTAL_SEGMENTS
    ]
    series = _piecewise_from_segments(segment_slopes, n, states, base=4000.0)
    return _relation_from_state_series(dates, series, measure="total_cases")


def _relation_from_state_series(dates, series: dict[str, np.ndarray], measure: str) -> Relation:
    n = len(dates)
    states = sorted(series)
    state_col = np.repeat(np.array(states, dtype=object), n)
    date_col = np.concatenate([np.array(dates, dtype=object)] * len(states))
    value_col = np.concatenate([series[s] for s in states])
    return Relation(
        schema=[
            AttributeSchema("date", "time", "date"),
            AttributeSchema("state", "dimension", "text"),
            AttributeSchema(measure, "measure", "decimal"),
        ],
        columns={"date": date_col, "state": state_col, measure: value_col},
    )


# ---------------------------------------------------------------------------
# S&P-shaped fixture: category / subcategory / stock hierarchy, 151 trading days
# ---------------------------------------------------------------------------

SP_START = date(2020, 1, 2)
SP_CUTS = [date(2020, 2, 6), date(2020, 3, 24), date(2020, 8, 25)]
SP_END = date(2020, 10, 1)

SP_HIERARCHY = {
    "technology": ["software", "hardware"],
    "financial": ["banks", "insurance"],
    "communication": ["media", "telecom"],
    "consumer_cyclical": ["internet_retail", "apparel"],
    "energy": ["oil", "gas"],
}
SP_STOCKS_PER_SUB = 5


def sp500_dates() -> list[date]:
    out = []
    day = SP_START
    while day <= SP_END:
        if day.weekday() < 5:
            out.append(day)
        day += timedelta(days=1)
    return out


def sp500_relation() -> Relation:
    """Four regimes: rally (internet retail outpaces its parent), crash,
    recovery, pullback. Subcategory slopes are split across five stocks each.
    """
    dates = sp500_dates()
    n = len(dates)
    idx = {d: i for i, d in enumerate(dates)}
    cut_idx = [min(idx[c] if c in idx else _nearest(dates, c), n - 1) for c in SP_CUTS]
    boundaries = [0, *cut_idx, n - 1]

    # per-segment slope per subcategory (category slope = sum of its subs)
    seg_slopes = [
        {  # rally: tech leads, energy drags, internet retail beats its own
            # parent because its sibling moves the other way
            "software": 30.0, "hardware": 24.0,
            "banks": -3.0, "insurance": 1.0,
            "media": 6.0, "telecom": 4.0,
            "internet_retail": 36.0, "apparel": -28.0,
            "oil": -26.0, "gas": -18.0,
        },
        {  # crash: tech, financial, communication all down hard
            "software": -40.0, "hardware": -32.0,
            "banks": -34.0, "insurance": -26.0,
            "media": -30.0, "telecom": -22.0,
            "internet_retail": -10.0, "apparel": 4.0,
            "oil": -8.0, "gas": -6.0,
        },
        {  # recovery: tech leads, consumer cyclical next, communication third
            "software": 34.0, "hardware": 28.0,
            "banks": 2.0, "insurance": 1.0,
            "media": 16.0, "telecom": 12.0,
            "internet_retail": 26.0, "apparel": 14.0,
            "oil": 3.0, "gas": 2.0,
        },
        {  # pullback
            "software": -30.0, "hardware": -24.0,
            "media": -18.0, "telecom": -14.0,
            "banks": -12.0, "insurance": -9.0,
            "internet_retail": -6.0, "apparel": 2.0,
            "oil": -4.0, "gas": -2.0,
        },
    ]

    rows_t, rows_cat, rows_sub, rows_stock, rows_val = [], [], [], [], []
    for cat, subs in SP_HIERARCHY.items():
        for sub in subs:
            for k in range(SP_STOCKS_PER_SUB):
                stock = f"{sub[:4].upper()}{k}"
                share = (k + 1) / sum(range(1, SP_STOCKS_PER_SUB + 1))
                level = 900.0 + 40.0 * k + 13.0 * hash_stable(sub)
                values = np.empty(n)
                values[0] = level
                prev = 0
                for seg, slopes in enumerate(seg_slopes):
                    end_idx = boundaries[seg + 1]
                    steps = np.arange(1, end_idx - prev + 1, dtype=np.float64)
                    values[prev + 1 : end_idx + 1] = values[prev] + slopes[sub] * share * steps
                    prev = end_idx
                rows_t.extend(dates)
                rows_cat.extend([cat] * n)
                rows_sub.extend([sub] * n)
                rows_stock.extend([stock] * n)
                rows_val.append(values)
    return Relation(
        schema=[
            AttributeSchema("date", "time", "date"),
            AttributeSchema("category", "dimension", "text"),
            AttributeSchema("subcategory", "dimension", "text"),
            AttributeSchema("stock", "dimension", "text"),
            AttributeSchema("weighted_price", "measure", "decimal"),
        ],
        columns={
            "date": np.array(rows_t, dtype=object),
            "category": np.array(rows_cat, dtype=object),
            "subcategory": np.array(rows_sub, dtype=object),
            "stock": np.array(rows_stock, dtype=object),
            "weighted_price": np.concatenate(rows_val),
        },
    )


def _nearest(dates, target):
    return min(range(len(dates)), key=lambda i: abs((dates[i] - target).days))


# ---------------------------------------------------------------------------
# Liquor-shaped fixtures
# ---------------------------------------------------------------------------


def liquor_perf_relation(n: int = 128, n_bv: int = 45, n_pack: int = 40, seed: int = 0) -> Relation:
    """Two wide attributes whose pair explanations all clear the support filter.

    Every (bottle volume, pack) pair has a quiet baseline plus a handful of
    big spike days, so roughly 1.8k pair candidates survive the default
    low-support filter, matching the transaction-data workload shape.
    """
    rng = np.random.default_rng(seed)
    bvs = [250 + 50 * i for i in range(n_bv)]
    packs = [1 + i for i in range(n_pack)]
    t_col, bv_col, p_col, v_col = [], [], [], []
    for bv in bvs:
        for p in packs:
            base = rng.uniform(5.0, 15.0, n)
            spikes = rng.choice(n, size=4, replace=False)
            base[spikes] += rng.uniform(150.0, 400.0, 4)
            t_col.append(np.arange(n, dtype=np.int64))
            bv_col.append(np.full(n, bv, dtype=np.int64))
            p_col.append(np.full(n, p, dtype=np.int64))
            v_col.append(base)
    return Relation(
        schema=[
            AttributeSchema("day", "time", "integer"),
            AttributeSchema("bottle_volume", "dimension", "integer"),
            AttributeSchema("pack", "dimension", "integer"),
            AttributeSchema("bottles_sold", "measure", "decimal"),
        ],
        columns={
            "day": np.concatenate(t_col),
            "bottle_volume": np.concatenate(bv_col),
            "pack": np.concatenate(p_col),
            "bottles_sold": np.concatenate(v_col),
        },
    )


def liquor_scale_relation(seed: int = 1) -> Relation:
    """Four attributes at transaction-data scale: thousands of candidate
    conjunctions, most of them rare one-offs the support filter removes.
    """
    rng = np.random.default_rng(seed)
    n = 128
    bvs = np.array([200 + 50 * i for i in range(30)])
    packs = np.arange(1, 21)
    cats = np.array([f"cat{i:02d}" for i in range(60)], dtype=object)
    vendors = np.array([f"vend{i:03d}" for i in range(120)], dtype=object)

    t_col, bv_col, p_col, c_col, vn_col, v_col = [], [], [], [], [], []

    def add_rows(count, bv, p, c, vn, value):
        t = rng.choice(n, size=count)
        t_col.append(t.astype(np.int64))
        bv_col.append(np.full(count, bv, dtype=np.int64))
        p_col.append(np.full(count, p, dtype=np.int64))
        c_col.append(np.full(count, c, dtype=object))
        vn_col.append(np.full(count, vn, dtype=object))
        v_col.append(np.full(count, value, dtype=np.float64))

    # a popular core: big recurring combos that dominate volume
    for _ in range(250):
        bv = int(rng.choice(bvs[:10]))
        p = int(rng.choice(packs[:8]))
        c = str(rng.choice(cats[:20]))
        vn = str(rng.choice(vendors[:30]))
        add_rows(int(rng.integers(40, 90)), bv, p, c, vn, float(rng.uniform(40, 120)))
    # a long tail of rare combos contributing almost nothing
    for _ in range(700):
        bv = int(rng.choice(bvs))
        p = int(rng.choice(packs))
        c = str(rng.choice(cats))
        vn = str(rng.choice(vendors))
        add_rows(int(rng.integers(1, 3)), bv, p, c, vn, float(rng.uniform(0.1, 0.8)))

    # ensure a full time grid
    t_col.append(np.arange(n, dtype=np.int64))
    bv_col.append(np.full(n, int(bvs[0]), dtype=np.int64))
    p_col.append(np.full(n, int(packs[0]), dtype=np.int64))
    c_col.append(np.full(n, str(cats[0]), dtype=object))
    vn_col.append(np.full(n, str(vendors[0]), dtype=object))
    v_col.append(np.full(n, 50.0))

    return Relation(
        schema=[
            AttributeSchema("day", "time", "integer"),
            AttributeSchema("bottle_volume", "dimension", "integer"),
            AttributeSchema("pack", "dimension", "integer"),
            AttributeSchema("category_name", "dimension", "text"),
            AttributeSchema("vendor_name", "dimension", "text"),
            AttributeSchema("bottles_sold", "measure", "decimal"),
        ],
        columns={
            "day": np.concatenate(t_col),
            "bottle_volume": np.concatenate(bv_col),
            "pack": np.concatenate(p_col),
            "category_name": np.concatenate(c_col),
            "vendor_name": np.concatenate(vn_col),
            "bottles_sold": np.concatenate(v_col),
        },
    )
