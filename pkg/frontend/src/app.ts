/** Browser wiring: file pickers, tabs, virtualized strip, labeling panel.
 *
 * Everything stateful lives in the session module; this file only renders
 * and routes DOM events. Loaded as a plain ES module from index.html.
 */

import { ManifestError } from "./manifest.js";
import {
  AnnotationSession,
  clusterGroups,
  cropUrl,
  exportAnnotations,
  hasOrdering,
  labelCounts,
  labelRange,
  loadSession,
  undo,
} from "./session.js";
import { stripWindow } from "./virtual.js";

const ITEM_WIDTH = 96;

let session: AnnotationSession | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function showError(message: string): void {
  const panel = el<HTMLDivElement>("error-panel");
  panel.textContent = message;
  panel.hidden = message === "";
}

function renderCounts(): void {
  if (!session) return;
  const counts = [...labelCounts(session).entries()].sort(([a], [b]) => a.localeCompare(b));
  el<HTMLDivElement>("counts").textContent =
    counts.length === 0
      ? "no labels yet"
      : counts.map(([label, count]) => `${label}: ${count}`).join("  ");
}

function thumbnail(itemIndex: number, position: number): HTMLElement {
  const s = session!;
  const cell = document.createElement("div");
  cell.className = "thumb";
  cell.style.width = `${ITEM_WIDTH}px`;
  cell.dataset.position = String(position);

  const url = cropUrl(s, itemIndex);
  if (url) {
    const img = document.createElement("img");
    img.src = url;
    img.loading = "lazy";
    img.onerror = () => {
      img.replaceWith(placeholder());
    };
    cell.appendChild(img);
  } else {
    cell.appendChild(placeholder());
  }

  const caption = document.createElement("div");
  caption.className = "caption";
  const label = s.labels.get(itemIndex);
  caption.textContent = label ?? s.manifest.items[itemIndex].id;
  if (label) caption.classList.add("labeled");
  cell.appendChild(caption);

  const sel = s.selection;
  if (sel && position >= sel.start && position <= sel.end) {
    cell.classList.add("selected");
  }
  return cell;
}

function placeholder(): HTMLElement {
  const box = document.createElement("div");
  box.className = "placeholder";
  box.textContent = "no crop";
  return box;
}

function renderStrip(): void {
  if (!session) return;
  const viewport = el<HTMLDivElement>("strip-viewport");
  const content = el<HTMLDivElement>("strip-content");
  const win = stripWindow(
    viewport.scrollLeft,
    viewport.clientWidth,
    ITEM_WIDTH,
    session.order.length,
  );
  content.style.width = `${win.totalPx}px`;
  content.replaceChildren();
  const mounted = document.createElement("div");
  mounted.className = "strip-row";
  mounted.style.transform = `translateX(${win.offsetPx}px)`;
  for (let pos = win.first; pos <= win.last; pos++) {
    mounted.appendChild(thumbnail(session.order[pos], pos));
  }
  content.appendChild(mounted);
}

function renderClusters(): void {
  if (!session) return;
  const host = el<HTMLDivElement>("clusters");
  host.replaceChildren();
  const groups = clusterGroups(session);
  if (!groups) {
    host.textContent = "manifest has no clustering section";
    return;
  }
  const ids = [...groups.keys()].sort((a, b) => a - b);
  for (const cluster of ids) {
    const section = document.createElement("details");
    const summary = document.createElement("summary");
    const members = groups.get(cluster)!;
    summary.textContent =
      cluster === -1 ? `noise (${members.length})` : `cluster ${cluster} (${members.length})`;
    section.appendChild(summary);
    const row = document.createElement("div");
    row.className = "strip-row";
    for (const itemIndex of members.slice(0, 50)) {
      row.appendChild(thumbnail(itemIndex, -1));
    }
    section.appendChild(row);
    host.appendChild(section);
  }
}

function renderAll(): void {
  renderStrip();
  renderClusters();
  renderCounts();
}

function onManifestChosen(file: File): void {
  file.text().then((text) => {
    try {
      session = loadSession(text, el<HTMLInputElement>("crop-root").value);
      showError("");
      el<HTMLDivElement>("workspace").hidden = false;
      const stripTab = el<HTMLButtonElement>("tab-strip");
      stripTab.disabled = !hasOrdering(session);
      if (stripTab.disabled) switchTab("clusters");
      else switchTab("strip");
      renderAll();
    } catch (err) {
      session = null;
      el<HTMLDivElement>("workspace").hidden = true;
      showError(
        err instanceof ManifestError ? `manifest rejected: ${err.message}` : String(err),
      );
    }
  });
}

function switchTab(name: "strip" | "clusters"): void {
  el<HTMLDivElement>("strip-pane").hidden = name !== "strip";
  el<HTMLDivElement>("clusters-pane").hidden = name !== "clusters";
}

function applyLabel(): void {
  if (!session) return;
  const start = Number(el<HTMLInputElement>("range-start").value);
  const end = Number(el<HTMLInputElement>("range-end").value);
  const label = el<HTMLInputElement>("range-label").value.trim();
  try {
    labelRange(session, start, end, label);
    session.selection = { start, end };
    showError("");
    renderAll();
  } catch (err) {
    showError(String(err));
  }
}

function downloadAnnotations(): void {
  if (!session) return;
  try {
    const blob = new Blob([exportAnnotations(session)], { type: "application/jsonl" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "annotations.jsonl";
    link.click();
    URL.revokeObjectURL(link.href);
  } catch (err) {
    showError(String(err));
  }
}

export function initApp(): void {
  el<HTMLInputElement>("manifest-file").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.files && input.files[0]) onManifestChosen(input.files[0]);
  });
  el<HTMLDivElement>("strip-viewport").addEventListener("scroll", renderStrip);
  window.addEventListener("resize", renderStrip);
  el<HTMLButtonElement>("tab-strip").addEventListener("click", () => switchTab("strip"));
  el<HTMLButtonElement>("tab-clusters").addEventListener("click", () => switchTab("clusters"));
  el<HTMLButtonElement>("apply-label").addEventListener("click", applyLabel);
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    if (session && undo(session)) renderAll();
  });
  el<HTMLButtonElement>("export").addEventListener("click", downloadAnnotations);
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  initApp();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", initApp);
}
