// Readable 2-D depiction of an API-provided molecule graph: breadth-first
// angular placement with a fixed bond length. Correctness bar is legibility,
// not publication quality.

import type { MoleculeGraph } from "./types.js";

export interface PlacedAtom {
  x: number;
  y: number;
  label: string;
  emphasized: boolean;
}

export interface PlacedBond {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  order: number;
}

export interface Layout {
  atoms: PlacedAtom[];
  bonds: PlacedBond[];
  width: number;
  height: number;
}

const BOND = 34;

function atomLabel(graph: MoleculeGraph, index: number): string {
  const a = graph.atoms[index];
  let label = a.element;
  if (a.hydrogens > 0 && (a.element !== "C" || graph.atoms.length === 1)) {
    label += a.hydrogens === 1 ? "H" : `H${a.hydrogens}`;
  }
  if (a.charge > 0) label += a.charge === 1 ? "+" : `+${a.charge}`;
  if (a.charge < 0) label += a.charge === -1 ? "-" : `${a.charge}`;
  if (a.radicals > 0) label += "•".repeat(a.radicals);
  return label;
}

export function layoutMolecule(graph: MoleculeGraph): Layout {
  const n = graph.atoms.length;
  const pos: ({ x: number; y: number } | null)[] = new Array(n).fill(null);
  const adjacency: number[][] = Array.from({ length: n }, () => []);
  for (const [i, j] of graph.bonds) {
    adjacency[i].push(j);
    adjacency[j].push(i);
  }
  if (n > 0) {
    // start from the best-connected atom and fan unplaced neighbors out
    const start = adjacency
      .map((nbrs, i) => [nbrs.length, i])
      .sort((a, b) => b[0] - a[0])[0][1];
    pos[start] = { x: 0, y: 0 };
    const queue = [start];
    while (queue.length) {
      const current = queue.shift()!;
      const here = pos[current]!;
      const placedAngles = adjacency[current]
        .filter((j) => pos[j] !== null)
        .map((j) => Math.atan2(pos[j]!.y - here.y, pos[j]!.x - here.x));
      const pending = adjacency[current].filter((j) => pos[j] === null);
      pending.forEach((j, k) => {
        let angle =
          placedAngles.length === 0
            ? (k * 2 * Math.PI) / Math.max(pending.length, 3) - Math.PI / 6
            : placedAngles[0] +
              Math.PI +
              ((k - (pending.length - 1) / 2) * Math.PI) / 3;
        let x = here.x + BOND * Math.cos(angle);
        let y = here.y + BOND * Math.sin(angle);
        // nudge away from collisions
        let tries = 0;
        while (
          tries < 12 &&
          pos.some((p) => p && Math.hypot(p.x - x, p.y - y) < BOND * 0.6)
        ) {
          angle += Math.PI / 6;
          x = here.x + BOND * Math.cos(angle);
          y = here.y + BOND * Math.sin(angle);
          tries += 1;
        }
        pos[j] = { x, y };
        queue.push(j);
      });
    }
  }
  const xs = pos.map((p) => p?.x ?? 0);
  const ys = pos.map((p) => p?.y ?? 0);
  const minX = Math.min(0, ...xs) - BOND;
  const minY = Math.min(0, ...ys) - BOND;
  const atoms: PlacedAtom[] = graph.atoms.map((a, i) => ({
    x: (pos[i]?.x ?? 0) - minX,
    y: (pos[i]?.y ?? 0) - minY,
    label: atomLabel(graph, i),
    emphasized: a.radicals > 0 || a.charge !== 0,
  }));
  const bonds: PlacedBond[] = graph.bonds.map(([i, j, order]) => ({
    x1: atoms[i].x,
    y1: atoms[i].y,
    x2: atoms[j].x,
    y2: atoms[j].y,
    order,
  }));
  return {
    atoms,
    bonds,
    width: Math.max(...atoms.map((a) => a.x), BOND) + BOND,
    height: Math.max(...atoms.map((a) => a.y), BOND) + BOND,
  };
}

function bondLines(b: PlacedBond): string {
  const dx = b.x2 - b.x1;
  const dy = b.y2 - b.y1;
  const len = Math.hypot(dx, dy) || 1;
  const ox = (-dy / len) * 3;
  const oy = (dx / len) * 3;
  const offsets =
    b.order === 1 ? [0] : b.order === 2 ? [-1, 1] : [-1.6, 0, 1.6];
  return offsets
    .map(
      (o) =>
        `<line x1="${(b.x1 + ox * o).toFixed(1)}" y1="${(b.y1 + oy * o).toFixed(1)}" ` +
        `x2="${(b.x2 + ox * o).toFixed(1)}" y2="${(b.y2 + oy * o).toFixed(1)}" ` +
        `stroke="#445" stroke-width="1.4"/>`,
    )
    .join("");
}

export function moleculeSvg(graph: MoleculeGraph): string {
  const layout = layoutMolecule(graph);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width.toFixed(0)} ${layout.height.toFixed(0)}" ` +
      `width="${Math.min(180, layout.width).toFixed(0)}" class="depiction">`,
  ];
  for (const bond of layout.bonds) {
    parts.push(bondLines(bond));
  }
  for (const atom of layout.atoms) {
    parts.push(
      `<circle cx="${atom.x.toFixed(1)}" cy="${atom.y.toFixed(1)}" r="9" fill="white"/>` +
        `<text x="${atom.x.toFixed(1)}" y="${(atom.y + 4).toFixed(1)}" text-anchor="middle" ` +
        `font-size="11" fill="${atom.emphasized ? "#b3261e" : "#1a1c33"}">${atom.label}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
