import type { ForestPayload, StanceName } from "./types.js";

export interface PlacedNode {
  user: string;
  stance: StanceName;
  colour: string;
  x: number; // leaf-slot units
  y: number; // depth units
}

export interface PlacedEdge {
  parent: string;
  child: string;
  stance: StanceName;
  via_follow: boolean;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface ForestLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  slots: number; // total width in slot units
  depth: number; // max depth, for height scaling
}

/**
 * Deterministic leaf-slot tree layout.
 *
 * Children sort by (edge timestamp, user id), leaves claim consecutive x
 * slots left to right, parents centre over their children, and depth sets
 * y. Stance groups follow the payload order with one empty slot between
 * them. No randomness anywhere, so the same payload always renders to the
 * same pixels.
 */
export function layoutForest(payload: ForestPayload): ForestLayout {
  const nodes: PlacedNode[] = [];
  const edges: PlacedEdge[] = [];
  let slot = 0;
  let maxDepth = 0;

  for (const group of payload.stances) {
    if (group.nodes.length === 0) {
      continue;
    }
    if (slot > 0) {
      slot += 1; // gap between stance groups
    }
    const children = new Map<string, { child: string; ts: string | number }[]>();
    for (const e of group.edges) {
      const list = children.get(e.parent) ?? [];
      list.push({ child: e.child, ts: e.ts });
      children.set(e.parent, list);
    }
    for (const list of children.values()) {
      list.sort((a, b) =>
        a.ts === b.ts ? (a.child < b.child ? -1 : 1) : a.ts < b.ts ? -1 : 1,
      );
    }

    const known = new Set(group.nodes.map((n) => n.user));
    const placed = new Map<string, { x: number; y: number }>();
    const place = (user: string, depth: number): number => {
      if (!known.has(user)) {
        throw new Error(`forest payload names unknown node ${user}`);
      }
      if (placed.has(user)) {
        throw new Error(`forest payload places ${user} twice`);
      }
      maxDepth = Math.max(maxDepth, depth);
      const kids = children.get(user) ?? [];
      let x: number;
      if (kids.length === 0) {
        x = slot;
        slot += 1;
      } else {
        const xs = kids.map((k) => place(k.child, depth + 1));
        x = (Math.min(...xs) + Math.max(...xs)) / 2;
      }
      placed.set(user, { x, y: depth });
      return x;
    };
    for (const root of group.roots) {
      place(root, 0);
    }

    for (const n of group.nodes) {
      const p = placed.get(n.user);
      if (p === undefined) {
        throw new Error(`forest payload names unknown node ${n.user}`);
      }
      nodes.push({ user: n.user, stance: group.stance, colour: group.colour, ...p });
    }
    for (const e of group.edges) {
      const from = placed.get(e.parent);
      const to = placed.get(e.child);
      if (from === undefined || to === undefined) {
        throw new Error(`forest edge references unknown node ${e.parent}->${e.child}`);
      }
      edges.push({
        parent: e.parent,
        child: e.child,
        stance: group.stance,
        via_follow: e.via_follow,
        x1: from.x,
        y1: from.y,
        x2: to.x,
        y2: to.y,
      });
    }
  }

  return { nodes, edges, slots: Math.max(slot, 1), depth: maxDepth };
}
