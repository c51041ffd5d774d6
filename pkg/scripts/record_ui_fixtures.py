#!/usr/bin/env python3
"""Record API responses as JSON fixtures for the frontend contract tests.

Trains (or reuses) the demo models, runs representative requests through the
in-process app, and writes frontend/tests/fixtures/*.json.
"""

import json
import os
import subprocess
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

ROOT = os.path.join(os.path.dirname(__file__), "..")
FIXTURE_DIR = os.path.join(ROOT, "frontend", "tests", "fixtures")
DEMO_DIR = os.path.join(ROOT, "demo")


def ensure_models():
    models = os.path.join(DEMO_DIR, "models")
    needed = [os.path.join(models, f"{n}.npz")
              for n in ("site", "ranker", "contrastive")]
    if all(os.path.exists(p) for p in needed):
        return models
    subprocess.check_call([
        sys.executable, os.path.join(ROOT, "scripts", "make_demo_models.py"),
        "--out-dir", DEMO_DIR, "--quick",
    ])
    return models


def main():
    from fastapi.testclient import TestClient

    from radmech.service.app import create_app

    models_dir = ensure_models()
    app = create_app(models_dir=models_dir)
    client = TestClient(app)
    os.makedirs(FIXTURE_DIR, exist_ok=True)

    def record(name, response):
        path = os.path.join(FIXTURE_DIR, f"{name}.json")
        with open(path, "w") as fh:
            json.dump({
                "status": response.status_code,
                "body": response.json(),
            }, fh, indent=2, sort_keys=True)
        print(f"{name}: {response.status_code} -> {path}")

    record("health", client.get("/api/v1/health"))
    record("singlestep", client.post("/api/v1/singlestep", json={
        "reactants": "[Cl].C", "top_n": 5, "pipeline": "two_step",
    }))
    record("singlestep_contrastive", client.post("/api/v1/singlestep", json={
        "reactants": "[OH].C=C(C)C=C", "top_n": 5, "pipeline": "contrastive",
    }))
    record("singlestep_parse_error", client.post("/api/v1/singlestep", json={
        "reactants": "C(",
    }))
    created = client.post("/api/v1/pathway", json={
        "reactants": "[CH3].C=C",
        "depth": 2, "breadth": 3, "apply_rules": False,
        "targets": [{"kind": "structure", "smiles": "CC[CH2]"}],
        "pipeline": "contrastive",
    })
    record("pathway_create", created)
    sid = created.json()["session_id"]
    leaf = next(n["id"] for n in created.json()["nodes"]
                if n["depth"] == 1 and not n["children"])
    record("pathway_expand", client.post(
        f"/api/v1/pathway/{sid}/expand", json={"node_id": leaf},
    ))


if __name__ == "__main__":
    main()
