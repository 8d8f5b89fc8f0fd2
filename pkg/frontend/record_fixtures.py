"""Record API and CLI outputs as fixtures for the frontend test suite.

Run from the repository root:  python frontend/record_fixtures.py

The recorded files freeze one workbench session: the data_validated graph
for document parity, and a literature-graph session driven through
upload -> evaluate -> proposals -> choice -> report, which the UI tests
replay without a server.
"""

import io
import json
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from fastapi.testclient import TestClient

from dagcheck.cli import main
from dagcheck.fixtures import fixture_text, load_fixture
from dagcheck.service import create_app
from dagcheck.synth import simulate_linear_gaussian

OUT = Path(__file__).parent / "fixtures"


def record() -> None:
    OUT.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as root:
        client = TestClient(create_app(Path(root)))

        # document parity pair: API response vs CLI bytes for the same DAG
        sid = client.post("/sessions", json={"text": fixture_text("data_validated")}).json()["id"]
        implications = client.get(f"/sessions/{sid}/implications")
        (OUT / "implications_data_validated.json").write_bytes(implications.content)
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            assert main(["implications", "fixtures/data_validated.dag"]) == 0
        (OUT / "implications_cli_data_validated.txt").write_text(buffer.getvalue(), "utf-8")
        (OUT / "dag_data_validated.txt").write_text(
            client.get(f"/sessions/{sid}/dag").text, "utf-8")

        # a refinement session on the literature graph with synthetic data
        created = client.post("/sessions", json={"text": fixture_text("literature")}).json()
        sid, fingerprint = created["id"], created["dag_fingerprint"]
        (OUT / "dag_literature.txt").write_text(client.get(f"/sessions/{sid}/dag").text, "utf-8")
        data = simulate_linear_gaussian(load_fixture("data_validated"), 150, rng_seed=4)
        client.post(f"/sessions/{sid}/dataset", json={"csv": data.to_csv()})
        stream = client.post(f"/sessions/{sid}/evaluate", json={"seed": 4})
        (OUT / "evaluate_stream.ndjson").write_text(stream.text, "utf-8")
        proposals = client.get(f"/sessions/{sid}/proposals")
        (OUT / "proposals.json").write_bytes(proposals.content)
        index = len(proposals.json()["candidates"]) - 1
        chosen = client.post(f"/sessions/{sid}/proposals/choice",
                             json={"index": index, "expected_fingerprint": fingerprint})
        (OUT / "choice_response.json").write_bytes(chosen.content)
        (OUT / "dag_after_choice.txt").write_text(
            client.get(f"/sessions/{sid}/dag").text, "utf-8")
        report = client.get(f"/sessions/{sid}/report")
        (OUT / "report.json").write_bytes(report.content)
        meta = {
            "session": sid,
            "initial_fingerprint": fingerprint,
            "chosen_index": index,
            "after_fingerprint": chosen.json()["dag_fingerprint"],
        }
        (OUT / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", "utf-8")
    print(f"recorded {len(list(OUT.glob('*')))} fixture files into {OUT}")


if __name__ == "__main__":
    sys.exit(record())
