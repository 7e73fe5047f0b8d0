/** Canvas state: node visual lifecycle and the renderable session snapshot.
 *
 * Node colors follow the interaction contract: dark nodes are part of the
 * query graph, white nodes are freshly suggested, light nodes are suggested
 * nodes the user has picked but not yet committed. Only five transitions are
 * legal on existing nodes; everything the controller does funnels through
 * `transition`, and the full history is recorded so tests can audit it.
 */
import type { GraphEdgeDto, SessionState, SuggestionBatch, SuggestionDto } from "./api.js";

export type VisualState = "dark" | "white" | "light";

export interface Transition {
  node: string;
  from: VisualState;
  to: VisualState | "removed";
}

const ALLOWED: ReadonlySet<string> = new Set([
  "dark>dark",
  "white>light",
  "light>white",
  "white>removed",
  "light>dark",
]);

export class IllegalTransition extends Error {}

export interface CanvasNode {
  key: string; // `n<id>` for committed nodes, `s<version>.<index>` for suggested
  label: string;
  state: VisualState;
  serverId: number | null;
  suggestion: SuggestionDto | null;
  x: number;
  y: number;
}

export interface CanvasEdge {
  src: string;
  dst: string;
  etype: string;
  suggested: boolean;
}

export class CanvasModel {
  nodes = new Map<string, CanvasNode>();
  edges: CanvasEdge[] = [];
  transitions: Transition[] = [];
  batch: SuggestionBatch | null = null;
  selected = new Set<number>();
  pendingConnection = false;
  closed = false;
  sessionTokens: string[] = [];

  private transition(node: CanvasNode, to: VisualState | "removed"): void {
    const key = `${node.state}>${to}`;
    if (!ALLOWED.has(key)) {
      throw new IllegalTransition(`${node.key}: ${node.state} -> ${to}`);
    }
    this.transitions.push({ node: node.key, from: node.state, to });
    if (to === "removed") {
      this.nodes.delete(node.key);
    } else {
      node.state = to;
    }
  }

  /** Reconcile with the server state: committed nodes are (or become) dark. */
  applyServerState(state: SessionState): void {
    this.pendingConnection = state.pending_connection;
    this.closed = state.closed;
    this.sessionTokens = state.session;
    const seen = new Set<string>();
    for (const node of state.graph.nodes) {
      const key = `n${node.id}`;
      seen.add(key);
      const existing = this.nodes.get(key);
      if (existing) {
        this.transition(existing, "dark"); // dark-stay
      } else {
        this.nodes.set(key, {
          key,
          label: node.label,
          state: "dark",
          serverId: node.id,
          suggestion: null,
          x: 80 + (node.id % 5) * 120,
          y: 80 + Math.floor(node.id / 5) * 120,
        });
      }
    }
    for (const key of [...this.nodes.keys()]) {
      if (!seen.has(key) && this.nodes.get(key)!.state === "dark") {
        this.nodes.delete(key);
      }
    }
    this.edges = state.graph.edges.map((e: GraphEdgeDto) => ({
      src: `n${e.src}`,
      dst: `n${e.dst}`,
      etype: e.etype,
      suggested: false,
    }));
  }

  /** Show a fresh suggestion batch as white nodes with dashed edges. */
  showSuggestions(batch: SuggestionBatch): void {
    this.discardSuggestions();
    this.batch = batch;
    this.selected.clear();
    batch.suggestions.forEach((s, index) => {
      const key = `s${batch.version}.${index}`;
      const anchor = this.nodes.get(`n${s.anchor}`);
      const label = s.other !== null ? this.nodes.get(`n${s.other}`)?.label ?? "?" : s.other_type ?? "?";
      this.nodes.set(key, {
        key,
        label,
        state: "white",
        serverId: s.other,
        suggestion: s,
        x: (anchor?.x ?? 200) + 140,
        y: (anchor?.y ?? 200) + 40 + index * 90,
      });
      const src = s.direction === "out" ? `n${s.anchor}` : key;
      const dst = s.direction === "out" ? key : `n${s.anchor}`;
      this.edges.push({ src, dst, etype: s.etype, suggested: true });
    });
  }

  /** Click on a suggested node: white picks it, light unpicks it. */
  toggleSuggestion(index: number): void {
    if (!this.batch) {
      return;
    }
    const node = this.nodes.get(`s${this.batch.version}.${index}`);
    if (!node) {
      return;
    }
    if (this.selected.has(index)) {
      this.transition(node, "white");
      this.selected.delete(index);
    } else {
      this.transition(node, "light");
      this.selected.add(index);
    }
  }

  /** Commit the current picks: light nodes join the graph, white ones go away. */
  resolveSuggestions(): number[] {
    if (!this.batch) {
      return [];
    }
    const accepted = [...this.selected].sort((a, b) => a - b);
    this.batch.suggestions.forEach((_, index) => {
      const node = this.nodes.get(`s${this.batch!.version}.${index}`);
      if (!node) {
        return;
      }
      this.transition(node, this.selected.has(index) ? "dark" : "removed");
      if (this.selected.has(index)) {
        this.nodes.delete(node.key); // replaced by the server-id node on reconcile
      }
    });
    this.edges = this.edges.filter((e) => !e.suggested);
    this.batch = null;
    this.selected.clear();
    return accepted;
  }

  /** Drop an uncommitted batch (refresh, stale version, submit). */
  discardSuggestions(): void {
    if (!this.batch) {
      return;
    }
    this.batch.suggestions.forEach((_, index) => {
      const node = this.nodes.get(`s${this.batch!.version}.${index}`);
      if (node) {
        if (node.state === "light") {
          this.transition(node, "white");
        }
        this.transition(node, "removed");
      }
    });
    this.edges = this.edges.filter((e) => !e.suggested);
    this.batch = null;
    this.selected.clear();
  }

  darkNodes(): CanvasNode[] {
    return [...this.nodes.values()].filter((n) => n.state === "dark");
  }
}

/** Allowable next actions, shown as dynamic tips. */
export function tips(model: CanvasModel): string[] {
  if (model.closed) {
    return ["Session submitted. Reload the page to start a new query."];
  }
  if (model.pendingConnection) {
    return ["Connect the new node: drag from it to an existing node to add an edge."];
  }
  if (model.nodes.size === 0) {
    return ["Click an empty spot on the canvas to add the first node."];
  }
  const out = [
    "Click suggested (white) nodes to pick them, then click the canvas to commit.",
    "Drag between two nodes to add an edge, or click empty space for a new node.",
    "Refresh Suggestions fetches a new batch; Submit finishes the query.",
  ];
  return out;
}
