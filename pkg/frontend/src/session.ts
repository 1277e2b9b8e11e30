/** Annotation session: labels over a read-only manifest, with undo and export.
 *
 * The session never mutates the manifest. Labels attach by item index;
 * ranges are expressed over the display ordering (the manifest's first
 * ordering run when present, else item order).
 */

import { Manifest, parseManifest } from "./manifest.js";

export interface AnnotationSession {
  manifest: Manifest;
  cropRoot: string;
  /** item index (manifest order) -> assigned label */
  labels: Map<number, string>;
  /** display order: positions map to item indices */
  order: number[];
  selection: { start: number; end: number } | null;
  undoStack: Map<number, string>[];
}

export function loadSession(manifestText: string, cropRoot = ""): AnnotationSession {
  const manifest = parseManifest(manifestText);
  const order = manifest.ordering
    ? [...manifest.ordering.runs[0].permutation]
    : manifest.items.map((_, i) => i);
  return {
    manifest,
    cropRoot,
    labels: new Map(),
    order,
    selection: null,
    undoStack: [],
  };
}

export function hasOrdering(session: AnnotationSession): boolean {
  return session.manifest.ordering !== null;
}

/**
 * Label every item in [start, end] (inclusive positions in the display
 * ordering). Later labels win over earlier ones. One undo step.
 */
export function labelRange(
  session: AnnotationSession,
  start: number,
  end: number,
  label: string,
): void {
  const n = session.order.length;
  if (!(Number.isInteger(start) && Number.isInteger(end)) || start > end) {
    throw new RangeError(`empty or malformed range ${start}..${end}`);
  }
  if (start < 0 || end >= n) {
    throw new RangeError(`range ${start}..${end} outside 0..${n - 1}`);
  }
  if (!label) {
    throw new RangeError("label must be non-empty");
  }
  session.undoStack.push(new Map(session.labels));
  for (let pos = start; pos <= end; pos++) {
    session.labels.set(session.order[pos], label);
  }
}

/** Restore the labeling state before the most recent labelRange. */
export function undo(session: AnnotationSession): boolean {
  const prev = session.undoStack.pop();
  if (prev === undefined) return false;
  session.labels = prev;
  return true;
}

/** Running per-label counts for the side panel. */
export function labelCounts(session: AnnotationSession): Map<string, number> {
  const counts = new Map<string, number>();
  for (const label of session.labels.values()) {
    counts.set(label, (counts.get(label) ?? 0) + 1);
  }
  return counts;
}

/**
 * JSON-lines of {id, label} for every labeled item, in manifest item
 * order; unlabeled items are omitted. Throws when nothing is labeled.
 */
export function exportAnnotations(session: AnnotationSession): string {
  if (session.labels.size === 0) {
    throw new Error("nothing labeled; nothing to export");
  }
  const lines: string[] = [];
  session.manifest.items.forEach((item, index) => {
    const label = session.labels.get(index);
    if (label !== undefined) {
      lines.push(JSON.stringify({ id: item.id, label }));
    }
  });
  return lines.join("\n") + "\n";
}

/** Items grouped by cluster id (noise under -1); null without clustering. */
export function clusterGroups(session: AnnotationSession): Map<number, number[]> | null {
  const clustering = session.manifest.clustering;
  if (!clustering) return null;
  const groups = new Map<number, number[]>();
  clustering.assignment.cluster_of.forEach((cluster, index) => {
    const members = groups.get(cluster) ?? [];
    members.push(index);
    groups.set(cluster, members);
  });
  return groups;
}

/** Resolve an item's crop image URL, or null for a placeholder. */
export function cropUrl(session: AnnotationSession, itemIndex: number): string | null {
  const ref = session.manifest.items[itemIndex].crop_ref;
  if (!ref) return null;
  return session.cropRoot ? `${session.cropRoot.replace(/\/$/, "")}/${ref}` : ref;
}
