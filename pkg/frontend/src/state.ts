// View-model construction and client tree state. All values mirror the API
// payload; nothing chemical is computed here.

import type {
  HitPayload,
  NodePayload,
  PathwaySnapshot,
  PredictionPayload,
  SingleStepResponse,
} from "./types.js";

export interface PredictionRow {
  rank: number;
  score: string;
  products: string;
  reaction: string; // mapped SMIRKS
  arrows: string;
  family: string;
  orbitals: string;
  masses: string;
  graphs: PredictionPayload["product_graphs"];
}

export function buildPredictionRows(response: SingleStepResponse): PredictionRow[] {
  return response.predictions.map((p) => ({
    rank: p.rank,
    score: p.score.toPrecision(3),
    products: p.products,
    reaction: p.reaction,
    arrows: p.arrows,
    family: p.family,
    orbitals: p.orbitals.join(" + "),
    masses: p.product_masses.map((m) => m.toFixed(4)).join(", "),
    graphs: p.product_graphs,
  }));
}

// Light syntax pre-check before submitting; the server stays authoritative.
export function smilesPrecheck(text: string): string | null {
  if (!text.trim()) {
    return "enter reactant SMILES";
  }
  let parens = 0;
  let bracket = false;
  for (const ch of text) {
    if (ch === "(") parens += 1;
    if (ch === ")") parens -= 1;
    if (parens < 0) return "unmatched ')'";
    if (ch === "[") {
      if (bracket) return "nested '['";
      bracket = true;
    }
    if (ch === "]") {
      if (!bracket) return "unmatched ']'";
      bracket = false;
    }
    if (!/[A-Za-z0-9%()\[\].=#+\-:@/\\]/.test(ch)) {
      return `unexpected character '${ch}'`;
    }
  }
  if (parens !== 0) return "unclosed '('";
  if (bracket) return "unclosed '['";
  return null;
}

export interface TreeNodeView {
  payload: NodePayload;
  collapsed: boolean;
}

// The client tree is always a subgraph of the latest server snapshot: every
// applySnapshot replaces node payloads wholesale and only UI flags survive.
export class TreeStore {
  sessionId: string | null = null;
  root: number | null = null;
  truncated = false;
  hits: HitPayload[] = [];
  private nodes = new Map<number, TreeNodeView>();

  applySnapshot(snapshot: PathwaySnapshot): void {
    const collapsedFlags = new Map<number, boolean>();
    for (const [id, view] of this.nodes) {
      collapsedFlags.set(id, view.collapsed);
    }
    this.nodes = new Map(
      snapshot.nodes.map((n) => [
        n.id,
        { payload: n, collapsed: collapsedFlags.get(n.id) ?? false },
      ]),
    );
    this.sessionId = snapshot.session_id;
    this.root = snapshot.root;
    this.truncated = snapshot.truncated;
    this.hits = snapshot.hits;
  }

  clear(): void {
    this.nodes = new Map();
    this.sessionId = null;
    this.root = null;
    this.hits = [];
    this.truncated = false;
  }

  node(id: number): TreeNodeView | undefined {
    return this.nodes.get(id);
  }

  nodeIds(): number[] {
    return [...this.nodes.keys()].sort((a, b) => a - b);
  }

  size(): number {
    return this.nodes.size;
  }

  children(id: number): NodePayload[] {
    const view = this.nodes.get(id);
    if (!view) return [];
    return view.payload.children
      .map((c) => this.nodes.get(c)?.payload)
      .filter((p): p is NodePayload => p !== undefined);
  }

  hitsAt(id: number): HitPayload[] {
    return this.hits.filter((h) => h.node === id);
  }

  toggle(id: number): void {
    const view = this.nodes.get(id);
    if (view) view.collapsed = !view.collapsed;
  }

  // invariant check used by the tests: client ids form a subset of the
  // snapshot's ids and parent/child links agree with the server
  isSubgraphOf(snapshot: PathwaySnapshot): boolean {
    const serverIds = new Set(snapshot.nodes.map((n) => n.id));
    const serverNodes = new Map(snapshot.nodes.map((n) => [n.id, n]));
    for (const id of this.nodes.keys()) {
      if (!serverIds.has(id)) return false;
      const mine = this.nodes.get(id)!.payload;
      const theirs = serverNodes.get(id)!;
      if (mine.parent !== theirs.parent) return false;
      if (!mine.children.every((c) => theirs.children.includes(c))) return false;
    }
    return true;
  }
}
