// Live round trip against a real backend: create a pathway session, expand,
// and inspect a hit, all in under ten seconds once the server is up.

import { execSync, spawn, type ChildProcess } from "node:child_process";
import { existsSync } from "node:fs";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildPredictionRows, TreeStore } from "../src/state.js";

const ROOT = join(__dirname, "..", "..");
const MODELS = join(ROOT, "demo", "models");
const PORT = 8931;

let server: ChildProcess | null = null;
const api = new ApiClient(`http://127.0.0.1:${PORT}`);

async function waitForHealth(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const health = await api.health();
      if (health.models_loaded) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`backend never became healthy: ${lastError}`);
}

beforeAll(async () => {
  const needed = ["site.npz", "ranker.npz", "contrastive.npz"];
  if (!needed.every((f) => existsSync(join(MODELS, f)))) {
    execSync(
      `python3 ${join(ROOT, "scripts", "make_demo_models.py")} --out-dir ${join(ROOT, "demo")} --quick`,
      { stdio: "inherit", timeout: 600_000 },
    );
  }
  server = spawn(
    "python3",
    ["-m", "radmech", "serve", "--models-dir", MODELS, "--port", String(PORT)],
    { cwd: ROOT, stdio: "ignore" },
  );
  await waitForHealth(60_000);
}, 700_000);

afterAll(() => {
  server?.kill();
});

describe("live backend", () => {
  it("serves single-step predictions with all display fields", async () => {
    const response = await api.singleStep({
      reactants: "[Cl].C",
      top_n: 5,
      pipeline: "two_step",
    });
    const rows = buildPredictionRows(response);
    expect(rows.length).toBeGreaterThan(0);
    expect(rows[0].arrows).toMatch(/>/);
    expect(rows[0].masses.length).toBeGreaterThan(0);
  });

  it("create -> expand -> hit-inspect completes within ten seconds", async () => {
    const started = Date.now();
    const store = new TreeStore();
    const snapshot = await api.createPathway({
      reactants: "[CH3].C=C",
      targets: [{ kind: "structure", smiles: "CC[CH2]" }],
      context: [],
      depth: 2,
      breadth: 4,
      score_threshold: 0,
      apply_rules: false,
      pipeline: "contrastive",
    });
    store.applySnapshot(snapshot);
    expect(store.isSubgraphOf(snapshot)).toBe(true);

    let current = snapshot;
    for (let level = 0; level < 2 && current.hits.length === 0; level += 1) {
      current = await api.expand(current.session_id, null);
      store.applySnapshot(current);
    }
    expect(store.isSubgraphOf(current)).toBe(true);
    expect(current.hits.length).toBeGreaterThan(0);

    const hit = current.hits[0];
    expect(hit.steps.length).toBeGreaterThan(0);
    expect(hit.steps.every((s) => s.includes(">>"))).toBe(true);
    const elapsed = Date.now() - started;
    expect(elapsed).toBeLessThan(10_000);
  });

  it("expanding the same node twice is idempotent", async () => {
    const snapshot = await api.createPathway({
      reactants: "ClCl.C",
      targets: [],
      context: [],
      depth: 2,
      breadth: 3,
      score_threshold: 0,
      apply_rules: false,
      pipeline: "contrastive",
    });
    const leaf = snapshot.nodes.find((n) => n.depth === 1 && !n.expanded);
    expect(leaf).toBeDefined();
    const once = await api.expand(snapshot.session_id, leaf!.id);
    const twice = await api.expand(snapshot.session_id, leaf!.id);
    expect(twice.node_count).toBe(once.node_count);
  });
});
