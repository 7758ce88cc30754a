import numpy as np
import pytest

from segexplain.dataset import (
    AggFunction,
    AggSpec,
    AttributeSchema,
    Relation,
    enumerate_explanations,
    materialize_cube,
)


def relation_from_rows(columns: dict, time_attr: str, kinds: dict | None = None) -> Relation:
    """Build a Relation from plain python lists, inferring array dtypes."""
    kinds = kinds or {}
    schema = []
    arrays = {}
    for name, values in columns.items():
        first = values[0]
        if isinstance(first, str):
            arr, vtype = np.array(values, dtype=object), "text"
        elif isinstance(first, float):
            arr, vtype = np.array(values, dtype=np.float64), "decimal"
        else:
            arr, vtype = np.array(values, dtype=np.int64), "integer"
        if name == time_attr:
            kind = "time"
        else:
            kind = kinds.get(name, "measure" if vtype == "decimal" else "dimension")
        schema.append(AttributeSchema(name, kind, vtype))
        arrays[name] = arr
    return Relation(schema, arrays)


@pytest.fixture
def four_row_relation() -> Relation:
    return relation_from_rows(
        {"t": [1, 1, 2, 2], "cat": ["a", "b", "a", "b"], "v": [10.0, 5.0, 30.0, 6.0]},
        time_attr="t",
    )


@pytest.fixture
def four_row_cube(four_row_relation):
    expls = enumerate_explanations(four_row_relation, ["cat"], 3)
    return materialize_cube(four_row_relation, AggSpec("v", AggFunction.SUM), expls)


def random_sum_cube(rng: np.random.Generator, n_times: int = 8, n_values: int = 4):
    """Random single-attribute SUM cube for property tests."""
    times = list(range(n_times))
    cats = [f"c{i}" for i in range(n_values)]
    t_col, c_col, v_col = [], [], []
    for t in times:
        for c in cats:
            t_col.append(t)
            c_col.append(c)
            v_col.append(float(rng.integers(-20, 50)))
    rel = relation_from_rows({"t": t_col, "cat": c_col, "v": v_col}, time_attr="t")
    expls = enumerate_explanations(rel, ["cat"], 1)
    return materialize_cube(rel, AggSpec("v", AggFunction.SUM), expls)


def two_attr_cube(rng: np.random.Generator, n_times: int = 6, na: int = 2, nb: int = 3):
    """Random two-attribute SUM cube with every value combination observed."""
    t_col, a_col, b_col, v_col = [], [], [], []
    for t in range(n_times):
        for i in range(na):
            for j in range(nb):
                t_col.append(t)
                a_col.append(f"a{i}")
                b_col.append(f"b{j}")
                v_col.append(float(rng.integers(0, 40)))
    rel = relation_from_rows({"t": t_col, "A": a_col, "B": b_col, "v": v_col}, time_attr="t")
    expls = enumerate_explanations(rel, ["A", "B"], 2)
    return materialize_cube(rel, AggSpec("v", AggFunction.SUM), expls)
