// Payload types mirroring the /api/v1 JSON schemas. The UI never recomputes
// chemistry: everything rendered comes verbatim from these payloads.

export interface AtomPayload {
  element: string;
  charge: number;
  radicals: number;
  hydrogens: number;
  map: number | null;
}

export interface MoleculeGraph {
  atoms: AtomPayload[];
  bonds: [number, number, number][]; // i, j, order
}

export interface PredictionPayload {
  rank: number;
  score: number;
  products: string;
  reaction: string;
  arrows: string;
  family: string;
  orbitals: [string, string];
  product_masses: number[];
  product_graphs: MoleculeGraph[];
}

export interface SingleStepResponse {
  reactants: string;
  pipeline: string;
  predictions: PredictionPayload[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field: string | null;
}

export interface StepPayload {
  reaction: string;
  arrows: string;
  family: string;
}

export interface NodePayload {
  id: number;
  depth: number;
  parent: number | null;
  children: number[];
  expanded: boolean;
  molecules: string[];
  molecule_graphs: MoleculeGraph[];
  cumulative_score: number;
  score: number | null;
  hits: string[];
  step?: StepPayload;
}

export interface HitPayload {
  target: string;
  kind: "structure" | "mass";
  node: number;
  molecule: string;
  path_nodes: number[];
  steps: string[];
}

export interface PathwayConfigPayload {
  depth: number;
  breadth: number;
  score_threshold: number;
  apply_rules: boolean;
}

export interface PathwaySnapshot {
  session_id: string;
  root: number;
  truncated: boolean;
  node_count: number;
  nodes: NodePayload[];
  hits: HitPayload[];
  config: PathwayConfigPayload;
}

export interface TargetSpec {
  kind: "structure" | "mass";
  smiles?: string;
  mass?: number;
  tolerance?: number;
}

export interface ContextSpec {
  smiles: string;
  frequency: number;
}

export interface PathwayRequest {
  reactants: string;
  targets: TargetSpec[];
  context: ContextSpec[];
  depth: number;
  breadth: number;
  score_threshold: number;
  apply_rules: boolean;
  pipeline: string;
}
