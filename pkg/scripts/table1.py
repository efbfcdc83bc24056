"""Print the comparison table with computed omega_m/kappa and C0."""

from omckit import analysis, presets

if __name__ == "__main__":
    rep = analysis.table1_report(presets.TABLE1, kappa_variants={"X-point clamped OMC": 1.41e9})
    print(rep.format())
