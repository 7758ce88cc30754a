"""Record service payloads for the frontend tests.

Uploads the engineered 58-state case-trend fixture into an in-process
service and saves the schema / series / explain responses the UI tests
replay. Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from segexplain.service import create_app  # noqa: E402
from fixtures import covid_daily_relation  # noqa: E402


def main() -> None:
    client = TestClient(create_app())
    rel = covid_daily_relation()
    lines = ["date,state,daily_cases"]
    dates, states, values = rel.columns["date"], rel.columns["state"], rel.columns["daily_cases"]
    for i in range(rel.row_count):
        lines.append(f"{dates[i].isoformat()},{states[i]},{values[i]}")
    resp = client.post("/api/datasets?time_attr=date", content=("\n".join(lines) + "\n").encode())
    handle = resp.json()
    dataset_id = handle["id"]
    handle["id"] = "covid-daily-fixture"  # stable id so snapshots stay put

    out_dir = REPO / "frontend" / "test" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    docs = {"covid_schema.json": handle}
    docs["covid_series.json"] = client.get(
        f"/api/datasets/{dataset_id}/series", params={"measure": "daily_cases", "agg": "sum"}
    ).json()
    base = {"dataset_id": dataset_id, "measure": "daily_cases", "agg": "sum", "explain_by": ["state"]}
    for name, k in (("covid_explain_auto.json", "auto"), ("covid_explain_k5.json", 5)):
        doc = client.post("/api/explain", json={**base, "k": k}).json()
        doc.pop("timings_ms", None)  # wall-clock noise has no place in fixtures
        docs[name] = doc

    for name, doc in docs.items():
        (out_dir / name).write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
    print(f"wrote {len(docs)} fixtures to {out_dir}")


if __name__ == "__main__":
    main()
