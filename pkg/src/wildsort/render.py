"""Fixed-width text tables for manifests: confusion/F1 and coherence."""

from __future__ import annotations


def render_tables(manifest: dict) -> str:
    """Human-readable report: evaluation table (3-decimal F1) and coherence
    table (1-decimal percentages), for whichever sections the manifest has."""
    parts = []
    if manifest.get("evaluation"):
        parts.append(render_confusion_table(manifest["evaluation"]))
    if manifest.get("ordering") and manifest["ordering"].get("aggregate_coherence"):
        parts.append(render_coherence_table(manifest["ordering"]["aggregate_coherence"]))
    else:
        parts.append("no ordering run")
    return "\n\n".join(parts) + "\n"


def render_confusion_table(evaluation: dict) -> str:
    conf = evaluation["confusion"]
    species = conf["species"]
    counts = conf["counts"]
    per = evaluation["per_species"]

    name_w = max(len("Actual Species"), len("Macro Average"), *(len(s) for s in species))
    col_w = max(6, *(len(s) for s in species))

    lines = ["Clustering results: confusion matrix and F1 scores", ""]
    header = "Actual Species".ljust(name_w) + "  " + "  ".join(
        s.rjust(col_w) for s in species
    ) + "  " + "F1".rjust(6)
    lines.append(header)
    lines.append("-" * len(header))
    for i, s in enumerate(species):
        row = s.ljust(name_w) + "  " + "  ".join(
            str(c).rjust(col_w) for c in counts[i]
        )
        row += "  " + f"{per[s]['f1']:.3f}".rjust(6)
        lines.append(row)
    lines.append("-" * len(header))
    macro = "Macro Average".ljust(name_w) + "  " + "  ".join(
        "".rjust(col_w) for _ in species
    ) + "  " + f"{evaluation['macro_f1']:.3f}".rjust(6)
    lines.append(macro)
    lines.append(f"Accuracy: {evaluation['accuracy']:.3f}")
    return "\n".join(lines)


def render_coherence_table(aggregate: dict) -> str:
    means = aggregate["per_species_mean"]
    stds = aggregate["per_species_std"]
    species = sorted(means)

    name_w = max(len("Species"), len("Overall"), *(len(s) for s in species))
    lines = [f"1D sorting coherence by species (over {aggregate['runs']} runs)", ""]
    header = "Species".ljust(name_w) + "  " + "Coherence".rjust(16)
    lines.append(header)
    lines.append("-" * len(header))
    for s in species:
        lines.append(s.ljust(name_w) + "  " + _fmt_pct(means[s], stds[s]).rjust(16))
    lines.append("-" * len(header))
    lines.append(
        "Overall".ljust(name_w)
        + "  "
        + _fmt_pct(aggregate["overall_mean"], aggregate["overall_std"]).rjust(16)
    )
    return "\n".join(lines)


def _fmt_pct(mean: float, std) -> str:
    if std is None:
        return f"{mean:.1f}%"
    return f"{mean:.1f} ± {std:.1f}%"
