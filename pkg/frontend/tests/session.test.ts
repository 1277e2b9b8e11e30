import { describe, expect, it } from "vitest";

import { ManifestError, parseManifest } from "../src/manifest.js";
import {
  clusterGroups,
  cropUrl,
  exportAnnotations,
  hasOrdering,
  labelCounts,
  labelRange,
  loadSession,
  undo,
} from "../src/session.js";

function makeManifest(n: number, withOrdering = true, withClustering = false): string {
  const items = Array.from({ length: n }, (_, i) => ({
    id: `item_${String(i).padStart(4, "0")}`,
    label: null,
    crop_ref: i % 2 === 0 ? `crops/${i}.jpg` : null,
  }));
  // a fixed non-trivial permutation: reverse order
  const permutation = Array.from({ length: n }, (_, i) => n - 1 - i);
  return JSON.stringify({
    schema: 1,
    tool: { name: "wildsort", version: "0.1.0" },
    dataset: { n, dim: 8, source: "test", format: "csv" },
    items,
    clustering: withClustering
      ? {
          method: "gmm",
          assignment: { k: 2, cluster_of: items.map((_, i) => (i < n / 2 ? 0 : 1)) },
        }
      : null,
    ordering: withOrdering
      ? { runs: [{ permutation, coordinates: permutation.map((p) => p * 1.0), seed: 0 }] }
      : null,
  });
}

describe("parseManifest", () => {
  it("accepts a valid manifest", () => {
    const m = parseManifest(makeManifest(10));
    expect(m.items).toHaveLength(10);
    expect(m.ordering?.runs[0].permutation).toHaveLength(10);
  });

  it("rejects wrong schema version with both versions named", () => {
    const bad = JSON.parse(makeManifest(3));
    bad.schema = 99;
    expect(() => parseManifest(JSON.stringify(bad))).toThrowError(/99.*1/);
  });

  it("rejects corrupt JSON without crashing", () => {
    expect(() => parseManifest("{not json")).toThrowError(ManifestError);
  });

  it("rejects a broken permutation", () => {
    const bad = JSON.parse(makeManifest(4));
    bad.ordering.runs[0].permutation = [0, 0, 1, 2];
    expect(() => parseManifest(JSON.stringify(bad))).toThrowError(/permutation/);
  });

  it("rejects duplicate item ids", () => {
    const bad = JSON.parse(makeManifest(2, false));
    bad.items[1].id = bad.items[0].id;
    expect(() => parseManifest(JSON.stringify(bad))).toThrowError(/duplicate/);
  });
});

describe("session labeling", () => {
  it("orders the strip by the manifest permutation", () => {
    const session = loadSession(makeManifest(5));
    expect(session.order).toEqual([4, 3, 2, 1, 0]);
    expect(hasOrdering(session)).toBe(true);
  });

  it("falls back to item order without an ordering section", () => {
    const session = loadSession(makeManifest(4, false));
    expect(session.order).toEqual([0, 1, 2, 3]);
    expect(hasOrdering(session)).toBe(false);
  });

  it("labels a range over ordering positions", () => {
    const session = loadSession(makeManifest(10));
    labelRange(session, 0, 2, "lion");
    // positions 0..2 of the reversed order are items 9, 8, 7
    expect(session.labels.get(9)).toBe("lion");
    expect(session.labels.get(7)).toBe("lion");
    expect(session.labels.has(6)).toBe(false);
    expect(labelCounts(session).get("lion")).toBe(3);
  });

  it("later labels win on overlap", () => {
    const session = loadSession(makeManifest(10));
    labelRange(session, 0, 5, "lion");
    labelRange(session, 3, 8, "zebra");
    expect(labelCounts(session).get("lion")).toBe(3);
    expect(labelCounts(session).get("zebra")).toBe(6);
  });

  it("undo restores the prior state exactly", () => {
    const session = loadSession(makeManifest(10));
    labelRange(session, 0, 4, "lion");
    const before = new Map(session.labels);
    labelRange(session, 2, 9, "zebra");
    expect(undo(session)).toBe(true);
    expect(session.labels).toEqual(before);
    expect(undo(session)).toBe(true);
    expect(session.labels.size).toBe(0);
    expect(undo(session)).toBe(false);
  });

  it("rejects empty or out-of-bounds ranges", () => {
    const session = loadSession(makeManifest(5));
    expect(() => labelRange(session, 3, 2, "x")).toThrowError(RangeError);
    expect(() => labelRange(session, 0, 5, "x")).toThrowError(RangeError);
    expect(() => labelRange(session, -1, 2, "x")).toThrowError(RangeError);
    expect(() => labelRange(session, 0, 2, "")).toThrowError(RangeError);
  });
});

describe("export", () => {
  it("emits one JSON line per labeled item, unlabeled omitted", () => {
    const session = loadSession(makeManifest(6));
    labelRange(session, 0, 2, "lion");
    const lines = exportAnnotations(session).trimEnd().split("\n");
    expect(lines).toHaveLength(3);
    const parsed = lines.map((line) => JSON.parse(line));
    expect(parsed.map((p) => p.id)).toEqual(["item_0003", "item_0004", "item_0005"]);
    expect(new Set(parsed.map((p) => p.label))).toEqual(new Set(["lion"]));
  });

  it("round-trips every pair through parse", () => {
    const session = loadSession(makeManifest(20));
    labelRange(session, 0, 9, "a");
    labelRange(session, 10, 19, "b");
    const back = new Map(
      exportAnnotations(session)
        .trimEnd()
        .split("\n")
        .map((line) => {
          const obj = JSON.parse(line);
          return [obj.id, obj.label] as const;
        }),
    );
    session.manifest.items.forEach((item, index) => {
      expect(back.get(item.id)).toBe(session.labels.get(index));
    });
  });

  it("refuses to export with nothing labeled", () => {
    const session = loadSession(makeManifest(3));
    expect(() => exportAnnotations(session)).toThrowError(/nothing labeled/);
  });

  it("never mutates the manifest", () => {
    const text = makeManifest(5);
    const session = loadSession(text);
    labelRange(session, 0, 4, "x");
    exportAnnotations(session);
    expect(session.manifest.items.every((item) => item.label === null)).toBe(true);
  });
});

describe("cluster view and crops", () => {
  it("groups items by cluster id", () => {
    const session = loadSession(makeManifest(10, true, true));
    const groups = clusterGroups(session)!;
    expect(groups.get(0)).toEqual([0, 1, 2, 3, 4]);
    expect(groups.get(1)).toEqual([5, 6, 7, 8, 9]);
  });

  it("returns null without clustering", () => {
    expect(clusterGroups(loadSession(makeManifest(4)))).toBeNull();
  });

  it("resolves crop urls and placeholders", () => {
    const session = loadSession(makeManifest(4), "root/");
    expect(cropUrl(session, 0)).toBe("root/crops/0.jpg");
    expect(cropUrl(session, 1)).toBeNull();
  });
});
