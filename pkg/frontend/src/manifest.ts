/** Manifest parsing: the viewer's entire input contract. */

export const SUPPORTED_SCHEMA = 1;

export interface ManifestItem {
  id: string;
  label: string | null;
  crop_ref: string | null;
}

export interface OrderingRun {
  permutation: number[];
  coordinates: number[];
  seed: number | null;
}

export interface Manifest {
  schema: number;
  tool: { name: string; version: string };
  dataset: { n: number; dim: number; source: string; format: string };
  items: ManifestItem[];
  clustering: { method: string; assignment: { k: number; cluster_of: number[] } } | null;
  ordering: { runs: OrderingRun[] } | null;
}

export class ManifestError extends Error {}

/** Parse and structurally validate manifest JSON text. */
export function parseManifest(text: string): Manifest {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ManifestError(`not valid JSON: ${(err as Error).message}`);
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj !== "object" || obj === null) {
    throw new ManifestError("manifest must be a JSON object");
  }
  if (obj.schema !== SUPPORTED_SCHEMA) {
    throw new ManifestError(
      `manifest schema ${String(obj.schema)} is not supported (viewer supports ${SUPPORTED_SCHEMA})`,
    );
  }
  if (!Array.isArray(obj.items) || obj.items.length === 0) {
    throw new ManifestError("manifest has no items");
  }
  const items: ManifestItem[] = (obj.items as Record<string, unknown>[]).map((it, i) => {
    if (typeof it.id !== "string") {
      throw new ManifestError(`item ${i} is missing a string id`);
    }
    return {
      id: it.id,
      label: typeof it.label === "string" ? it.label : null,
      crop_ref: typeof it.crop_ref === "string" ? it.crop_ref : null,
    };
  });
  const ids = new Set(items.map((it) => it.id));
  if (ids.size !== items.length) {
    throw new ManifestError("manifest items contain duplicate ids");
  }

  const ordering = (obj.ordering ?? null) as Manifest["ordering"];
  if (ordering !== null) {
    if (!Array.isArray(ordering.runs) || ordering.runs.length === 0) {
      throw new ManifestError("ordering section has no runs");
    }
    for (const run of ordering.runs) {
      if (
        !Array.isArray(run.permutation) ||
        run.permutation.length !== items.length ||
        new Set(run.permutation).size !== items.length
      ) {
        throw new ManifestError("ordering permutation is not a permutation of the items");
      }
    }
  }

  return {
    schema: SUPPORTED_SCHEMA,
    tool: obj.tool as Manifest["tool"],
    dataset: obj.dataset as Manifest["dataset"],
    items,
    clustering: (obj.clustering ?? null) as Manifest["clustering"],
    ordering,
  };
}
