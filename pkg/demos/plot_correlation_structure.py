"""
Redundancy among features
=========================

Extract a small phantom cohort, prune constant columns and summarise the
pairwise Pearson correlations.
"""
import numpy as np

from radiomarker.features.extract import extract_case
from radiomarker.synth import gen_phantom, phantom_cohort
from radiomarker.table import FeatureTable, correlation_report, prune_degenerate

# %%
# Twelve small phantoms. Every phantom shares one ellipsoid, so all shape
# features are constant and will be pruned.
cohort = phantom_cohort(12, seed=4, dims=(32, 32, 32), semi_axes=(10.0, 8.0, 6.0))
rows, labels = [], []
for cid, spec in cohort:
    rows.append(extract_case(*gen_phantom(spec), case_id=cid))
    labels.append(spec.class_label)
table = FeatureTable([r.case_id for r in rows], labels, rows[0].columns,
                     np.vstack([r.values for r in rows]))
pruned, removed = prune_degenerate(table)
print(f"{table.n_features} columns, {len(removed)} pruned, {pruned.n_features} kept")

# %%
# The correlation report holds the matrix, a dendrogram leaf order and
# subgroup summaries of |r|.
rep = correlation_report(pruned)
print(f"share of pairs with |r| <= 0.5: {rep.fraction_le_half:.3f}")
for tag, s in sorted(rep.subgroup_stats["feature_type"].items()):
    print(f"{tag:10s} median |r| {s['median']:.3f} over {s['n_pairs']} pairs")
print("first ten columns in dendrogram order:")
for j in rep.cluster_order[:10]:
    print("  ", pruned.columns[j].name)
