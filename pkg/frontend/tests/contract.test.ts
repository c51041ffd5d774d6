// Contract tests against recorded API fixtures: every rendered field comes
// from the payload, and the client tree stays a subgraph of the snapshot.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { layoutMolecule, moleculeSvg } from "../src/depict.js";
import {
  fieldError,
  hitChainHtml,
  predictionTable,
  treeHtml,
} from "../src/render.js";
import { buildPredictionRows, smilesPrecheck, TreeStore } from "../src/state.js";
import type {
  ApiErrorBody,
  PathwaySnapshot,
  SingleStepResponse,
} from "../src/types.js";

function fixture<T>(name: string): { status: number; body: T } {
  const raw = readFileSync(
    join(__dirname, "fixtures", `${name}.json`),
    "utf8",
  );
  return JSON.parse(raw);
}

describe("single-step table", () => {
  const recorded = fixture<SingleStepResponse>("singlestep");

  it("renders every field of the prediction payload", () => {
    const rows = buildPredictionRows(recorded.body);
    expect(rows.length).toBeGreaterThan(0);
    for (const row of rows) {
      expect(row.arrows).toMatch(/>/);        // arrow codes
      expect(row.reaction).toContain(">>");   // mapped SMIRKS
      expect(row.orbitals).toMatch(/@/);      // reactive orbital designators
      expect(Number(row.score)).toBeGreaterThan(0); // plausibility score
      expect(row.masses.length).toBeGreaterThan(0); // product masses
      expect(row.products.length).toBeGreaterThan(0);
    }
    const html = predictionTable(rows);
    for (const row of rows) {
      expect(html).toContain(row.arrows.replace(/>/g, "&gt;"));
      expect(html).toContain(`<td>${row.rank}</td>`);
    }
    expect(html).toContain("<svg");
  });

  it("ranks start at 1 and scores are non-increasing", () => {
    const rows = buildPredictionRows(recorded.body);
    expect(rows[0].rank).toBe(1);
    const scores = rows.map((r) => Number(r.score));
    for (let i = 1; i < scores.length; i += 1) {
      expect(scores[i]).toBeLessThanOrEqual(scores[i - 1]);
    }
  });

  it("renders the contrastive variant identically", () => {
    const alt = fixture<SingleStepResponse>("singlestep_contrastive");
    const rows = buildPredictionRows(alt.body);
    expect(rows.every((r) => r.orbitals.includes("+"))).toBe(true);
  });
});

describe("error surfacing", () => {
  it("shows API parse errors with their position and field", () => {
    const recorded = fixture<ApiErrorBody>("singlestep_parse_error");
    expect(recorded.status).toBe(400);
    const html = fieldError(recorded.body.message, recorded.body.field);
    expect(html).toContain("position");
    expect(html).toContain("reactants");
  });

  it("pre-checks obviously broken SMILES before submitting", () => {
    expect(smilesPrecheck("")).not.toBeNull();
    expect(smilesPrecheck("C(")).not.toBeNull();
    expect(smilesPrecheck("C)C")).not.toBeNull();
    expect(smilesPrecheck("[CH3].C=C")).toBeNull();
  });
});

describe("pathway tree store", () => {
  const created = fixture<PathwaySnapshot>("pathway_create");
  const expanded = fixture<PathwaySnapshot>("pathway_expand");

  it("mirrors the creation snapshot", () => {
    const store = new TreeStore();
    store.applySnapshot(created.body);
    expect(store.sessionId).toBe(created.body.session_id);
    expect(store.size()).toBe(created.body.node_count);
    expect(store.isSubgraphOf(created.body)).toBe(true);
  });

  it("stays a subgraph of the server tree after expansion", () => {
    const store = new TreeStore();
    store.applySnapshot(created.body);
    store.applySnapshot(expanded.body);
    expect(store.isSubgraphOf(expanded.body)).toBe(true);
    expect(store.size()).toBeGreaterThanOrEqual(created.body.node_count);
    // no duplicate children anywhere (idempotent expansion on the server)
    for (const id of store.nodeIds()) {
      const children = store.node(id)!.payload.children;
      expect(new Set(children).size).toBe(children.length);
    }
  });

  it("renders hit badges and replayable chains", () => {
    const store = new TreeStore();
    store.applySnapshot(expanded.body);
    const html = treeHtml(store, store.root);
    expect(html).toContain("data-node");
    for (const hit of expanded.body.hits) {
      const chain = hitChainHtml(hit);
      expect(chain).toContain(`node ${hit.node}`);
      for (const step of hit.steps) {
        expect(chain).toContain(step.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;"));
      }
    }
  });
});

describe("depiction", () => {
  it("lays out every recorded product graph with finite coordinates", () => {
    const recorded = fixture<SingleStepResponse>("singlestep");
    for (const prediction of recorded.body.predictions) {
      for (const graph of prediction.product_graphs) {
        const layout = layoutMolecule(graph);
        expect(layout.atoms.length).toBe(graph.atoms.length);
        for (const atom of layout.atoms) {
          expect(Number.isFinite(atom.x)).toBe(true);
          expect(Number.isFinite(atom.y)).toBe(true);
        }
        const svg = moleculeSvg(graph);
        expect(svg).toContain("<svg");
        expect(svg).toContain("</svg>");
      }
    }
  });

  it("marks radical centers", () => {
    const svg = moleculeSvg({
      atoms: [
        { element: "C", charge: 0, radicals: 1, hydrogens: 3, map: 1 },
      ],
      bonds: [],
    });
    expect(svg).toContain("•");
  });
});
