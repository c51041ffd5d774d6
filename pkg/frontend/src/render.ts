// Pure HTML-string rendering so view output is testable without a DOM.

import { moleculeSvg } from "./depict.js";
import type { PredictionRow, TreeStore } from "./state.js";
import type { HitPayload, NodePayload } from "./types.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function predictionTable(rows: PredictionRow[]): string {
  if (!rows.length) {
    return `<p class="empty">no candidate mechanisms</p>`;
  }
  const body = rows
    .map(
      (r) => `
  <tr>
    <td>${r.rank}</td>
    <td>${r.score}</td>
    <td class="mol">${r.graphs.map(moleculeSvg).join("")}
      <div class="smiles">${escapeHtml(r.products)}</div></td>
    <td class="mono">${escapeHtml(r.reaction)}</td>
    <td class="mono">${escapeHtml(r.arrows)}</td>
    <td>${escapeHtml(r.orbitals)}</td>
    <td>${escapeHtml(r.masses)}</td>
    <td>${escapeHtml(r.family)}</td>
  </tr>`,
    )
    .join("");
  return `<table class="predictions">
  <thead><tr>
    <th>#</th><th>score</th><th>products</th><th>reaction</th>
    <th>arrows</th><th>orbitals</th><th>masses (Da)</th><th>family</th>
  </tr></thead>
  <tbody>${body}</tbody></table>`;
}

export function fieldError(message: string, field: string | null): string {
  const where = field ? ` <span class="field">(${escapeHtml(field)})</span>` : "";
  return `<p class="error">${escapeHtml(message)}${where}</p>`;
}

function nodeLabel(node: NodePayload, hits: HitPayload[]): string {
  const score =
    node.score === null ? "" : ` <span class="score">${node.score.toFixed(3)}</span>`;
  const badge = hits.length
    ? ` <span class="hit-badge" data-node="${node.id}">target ×${hits.length}</span>`
    : "";
  const family = node.step ? `<span class="family">${node.step.family}</span> ` : "";
  return `${family}${escapeHtml(node.molecules.join(" + "))}${score}${badge}`;
}

export function treeHtml(store: TreeStore, nodeId: number | null): string {
  if (nodeId === null) return "";
  const view = store.node(nodeId);
  if (!view) return "";
  const node = view.payload;
  const hits = store.hitsAt(nodeId);
  const expandable = !node.expanded;
  const toggle = view.collapsed ? "▸" : "▾";
  const children = view.collapsed
    ? ""
    : node.children.map((c) => treeHtml(store, c)).join("");
  return `<li>
    <span class="toggle" data-node="${node.id}">${node.children.length ? toggle : "·"}</span>
    <span class="node${hits.length ? " with-hit" : ""}" data-node="${node.id}"
      data-expandable="${expandable}">${nodeLabel(node, hits)}</span>
    ${expandable ? `<button class="expand" data-node="${node.id}">expand</button>` : ""}
    <ul>${children}</ul>
  </li>`;
}

export function hitChainHtml(hit: HitPayload): string {
  const steps = hit.steps
    .map((s, i) => `<li><span class="depth">step ${i + 1}</span> <code>${escapeHtml(s)}</code></li>`)
    .join("");
  return `<div class="hit-chain">
  <h3>${escapeHtml(hit.target)} found at node ${hit.node}</h3>
  <p>molecule: <code>${escapeHtml(hit.molecule)}</code></p>
  <ol>${steps.length ? steps : "<li>present in the root reactants</li>"}</ol>
</div>`;
}

export function sessionSummary(store: TreeStore): string {
  if (!store.sessionId) return "";
  return `<p class="summary">session <code>${store.sessionId.slice(0, 8)}</code>
  · ${store.size()} nodes · ${store.hits.length} hit(s)${
    store.truncated ? " · <strong>truncated by node budget</strong>" : ""
  }</p>`;
}
