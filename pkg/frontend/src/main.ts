// DOM wiring: single-step form and pathway explorer.

import { ApiClient, ApiError } from "./api.js";
import {
  buildPredictionRows,
  smilesPrecheck,
  TreeStore,
} from "./state.js";
import {
  fieldError,
  hitChainHtml,
  predictionTable,
  sessionSummary,
  treeHtml,
} from "./render.js";
import type { ContextSpec, PathwayRequest, TargetSpec } from "./types.js";

const api = new ApiClient("");
const store = new TreeStore();

// pathway parameters live client-side; editing them between expansions marks
// the session stale so the next action transparently restarts with the same
// reactants and the new parameters
let lastRequest: PathwayRequest | null = null;
let sessionStale = false;
let inFlight = false; // expansion requests are serialized client-side

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function readTargets(): TargetSpec[] {
  const raw = el<HTMLTextAreaElement>("targets").value.trim();
  const targets: TargetSpec[] = [];
  for (const line of raw.split("\n")) {
    const text = line.trim();
    if (!text) continue;
    const asMass = Number(text);
    if (!Number.isNaN(asMass) && text.match(/^[\d.]+$/)) {
      targets.push({ kind: "mass", mass: asMass, tolerance: 0.01 });
    } else {
      targets.push({ kind: "structure", smiles: text });
    }
  }
  return targets;
}

function readContext(): ContextSpec[] {
  const raw = el<HTMLInputElement>("context").value.trim();
  if (!raw) return [];
  return raw.split(",").map((token) => {
    const [smiles, freq] = token.trim().split(":");
    return { smiles, frequency: freq ? parseInt(freq, 10) : 1 };
  });
}

async function submitSingleStep(): Promise<void> {
  const input = el<HTMLInputElement>("ss-reactants");
  const output = el<HTMLDivElement>("ss-results");
  const problem = smilesPrecheck(input.value);
  if (problem) {
    output.innerHTML = fieldError(problem, "reactants");
    return;
  }
  output.innerHTML = `<p class="empty">predicting ...</p>`;
  try {
    const response = await api.singleStep({
      reactants: input.value.trim(),
      top_n: parseInt(el<HTMLInputElement>("ss-topn").value, 10),
      k_atoms: parseInt(el<HTMLInputElement>("ss-katoms").value, 10),
      apply_rules: el<HTMLInputElement>("ss-rules").checked,
      pipeline: el<HTMLSelectElement>("ss-pipeline").value,
    });
    output.innerHTML = predictionTable(buildPredictionRows(response));
  } catch (error) {
    if (error instanceof ApiError) {
      output.innerHTML = fieldError(error.message, error.field);
    } else {
      output.innerHTML = fieldError(String(error), null);
    }
  }
}

function currentRequest(): PathwayRequest {
  return {
    reactants: el<HTMLInputElement>("pw-reactants").value.trim(),
    targets: readTargets(),
    context: readContext(),
    depth: parseInt(el<HTMLInputElement>("pw-depth").value, 10),
    breadth: parseInt(el<HTMLInputElement>("pw-breadth").value, 10),
    score_threshold: parseFloat(el<HTMLInputElement>("pw-threshold").value),
    apply_rules: el<HTMLInputElement>("pw-rules").checked,
    pipeline: el<HTMLSelectElement>("pw-pipeline").value,
  };
}

function renderTree(): void {
  el<HTMLDivElement>("pw-summary").innerHTML = sessionSummary(store);
  el<HTMLUListElement>("pw-tree").innerHTML = treeHtml(store, store.root);
}

async function createSession(): Promise<void> {
  const output = el<HTMLDivElement>("pw-errors");
  const request = currentRequest();
  const problem = smilesPrecheck(request.reactants);
  if (problem) {
    output.innerHTML = fieldError(problem, "reactants");
    return;
  }
  output.innerHTML = "";
  try {
    const snapshot = await api.createPathway(request);
    lastRequest = request;
    sessionStale = false;
    store.clear();
    store.applySnapshot(snapshot);
    renderTree();
    el<HTMLDivElement>("pw-inspector").innerHTML = "";
  } catch (error) {
    if (error instanceof ApiError) {
      output.innerHTML = fieldError(error.message, error.field);
    } else {
      output.innerHTML = fieldError(String(error), null);
    }
  }
}

async function expandNode(nodeId: number | null): Promise<void> {
  if (!store.sessionId || inFlight) return;
  inFlight = true;
  const output = el<HTMLDivElement>("pw-errors");
  try {
    if (sessionStale && lastRequest) {
      // parameters changed: restart with the same reactants, new settings
      const request = { ...currentRequest(), reactants: lastRequest.reactants };
      const snapshot = await api.createPathway(request);
      lastRequest = request;
      sessionStale = false;
      store.clear();
      store.applySnapshot(snapshot);
    } else {
      const snapshot = await api.expand(store.sessionId, nodeId);
      store.applySnapshot(snapshot);
    }
    output.innerHTML = "";
    renderTree();
  } catch (error) {
    if (error instanceof ApiError && error.status === 410) {
      output.innerHTML = fieldError(
        "session expired; restarting with the same inputs", null,
      );
      if (lastRequest) {
        const snapshot = await api.createPathway(lastRequest);
        store.clear();
        store.applySnapshot(snapshot);
        renderTree();
      }
    } else if (error instanceof ApiError) {
      output.innerHTML = fieldError(error.message, error.field);
    } else {
      output.innerHTML = fieldError(String(error), null);
    }
  } finally {
    inFlight = false;
  }
}

function inspectNode(nodeId: number): void {
  const hits = store.hitsAt(nodeId);
  const inspector = el<HTMLDivElement>("pw-inspector");
  if (!hits.length) {
    const node = store.node(nodeId)?.payload;
    inspector.innerHTML = node?.step
      ? `<div class="hit-chain"><h3>node ${nodeId}</h3><code>${node.step.reaction}</code></div>`
      : "";
    return;
  }
  inspector.innerHTML = hits.map(hitChainHtml).join("");
}

export function wire(): void {
  el<HTMLButtonElement>("ss-submit").addEventListener("click", submitSingleStep);
  el<HTMLInputElement>("ss-reactants").addEventListener("input", () => {
    const ok = smilesPrecheck(el<HTMLInputElement>("ss-reactants").value) === null;
    el<HTMLButtonElement>("ss-submit").disabled = !ok;
  });
  el<HTMLButtonElement>("pw-create").addEventListener("click", createSession);
  el<HTMLButtonElement>("pw-level").addEventListener("click", () => expandNode(null));
  for (const id of ["pw-depth", "pw-breadth", "pw-threshold", "pw-rules", "pw-pipeline"]) {
    el(id).addEventListener("change", () => {
      sessionStale = true;
    });
  }
  el<HTMLUListElement>("pw-tree").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const nodeAttr = target.getAttribute("data-node");
    if (nodeAttr === null) return;
    const nodeId = parseInt(nodeAttr, 10);
    if (target.classList.contains("expand")) {
      void expandNode(nodeId);
    } else if (target.classList.contains("toggle")) {
      store.toggle(nodeId);
      renderTree();
    } else {
      inspectNode(nodeId);
    }
  });
  void api.health().then((h) => {
    el<HTMLSpanElement>("health").textContent = h.models_loaded
      ? "models loaded"
      : "models missing";
  });
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}
