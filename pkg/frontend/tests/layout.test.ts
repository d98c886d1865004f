import { describe, expect, it } from "vitest";
import { layoutForest } from "../src/layout.js";
import { fixture } from "./helpers.js";
import type { ForestPayload } from "../src/types.js";

const forest20 = fixture["/rumours/r000/forest/20"] as ForestPayload;

describe("layoutForest", () => {
  it("is deterministic for the same payload", () => {
    const a = layoutForest(forest20);
    const b = layoutForest(forest20);
    expect(a).toEqual(b);
  });

  it("keeps every node and edge from the payload", () => {
    const laid = layoutForest(forest20);
    const nodeCount = forest20.stances.reduce((n, s) => n + s.nodes.length, 0);
    const edgeCount = forest20.stances.reduce((n, s) => n + s.edges.length, 0);
    expect(laid.nodes).toHaveLength(nodeCount);
    expect(laid.edges).toHaveLength(edgeCount);
  });

  it("places parents strictly above their children", () => {
    const laid = layoutForest(forest20);
    for (const edge of laid.edges) {
      expect(edge.y1).toBeLessThan(edge.y2);
      expect(edge.y2 - edge.y1).toBe(1);
    }
  });

  it("produces finite coordinates inside the slot range", () => {
    const laid = layoutForest(forest20);
    for (const node of laid.nodes) {
      expect(Number.isFinite(node.x)).toBe(true);
      expect(Number.isFinite(node.y)).toBe(true);
      expect(node.x).toBeGreaterThanOrEqual(0);
      expect(node.x).toBeLessThan(laid.slots);
      expect(node.y).toBeGreaterThanOrEqual(0);
      expect(node.y).toBeLessThanOrEqual(laid.depth);
    }
  });

  it("carries the payload colour through to each node", () => {
    const laid = layoutForest(forest20);
    const colourOf = new Map<string, string>();
    for (const group of forest20.stances) {
      for (const node of group.nodes) {
        colourOf.set(`${group.stance}:${node.user}`, group.colour);
      }
    }
    for (const node of laid.nodes) {
      expect(node.colour).toBe(colourOf.get(`${node.stance}:${node.user}`));
    }
  });

  it("separates stance groups horizontally in payload order", () => {
    const laid = layoutForest(forest20);
    const spans = new Map<string, { lo: number; hi: number }>();
    for (const node of laid.nodes) {
      const span = spans.get(node.stance) ?? { lo: Infinity, hi: -Infinity };
      span.lo = Math.min(span.lo, node.x);
      span.hi = Math.max(span.hi, node.x);
      spans.set(node.stance, span);
    }
    const order = forest20.stances
      .filter((s) => s.nodes.length > 0)
      .map((s) => s.stance);
    for (let i = 1; i < order.length; i += 1) {
      expect(spans.get(order[i - 1])!.hi).toBeLessThan(spans.get(order[i])!.lo);
    }
  });

  it("rejects edges that point at unknown nodes", () => {
    const broken: ForestPayload = {
      v: 1,
      rumour_id: "rX",
      interval: 1,
      cutoff: 0,
      stances: [
        {
          stance: "support",
          colour: "green",
          nodes: [{ user: "a", joined_at: 0 }],
          edges: [{ parent: "a", child: "ghost", ts: 1, via_follow: true }],
          roots: ["a"],
        },
      ],
    };
    expect(() => layoutForest(broken)).toThrow(/ghost/);
  });
});
