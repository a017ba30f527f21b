"""Annotation campaign walkthrough: assignment, labeling, aggregation.

Runs a fully scripted campaign (no HTTP, no UI) over synthetic groups:
every group is judged by three annotators, labels land in an
append-only record log, and the aggregator turns the log into
distribution tables, final labels and the positives-per-group
histogram.

Run: python3 demos/03_annotation_campaign.py
"""

from pathlib import Path

from srcurate.aggregate import build_reports, finalize
from srcurate.campaign import create_assignments, verify_coverage
from srcurate.simulate import random_policy, simulate_campaign

OUT = Path(__file__).parent / "output" / "campaign"


def main():
    n_groups, n_annotators = 120, 9
    print(f"campaign: {n_groups} groups x 4 variants, "
          f"{n_annotators} annotators, 3 labels per patch")

    assignments = create_assignments([f"g{i:05d}" for i in range(n_groups)],
                                     [f"a{i:02d}" for i in range(n_annotators)],
                                     per_group=3, seed=17)
    loads = sorted(len(a.group_ids) for a in assignments)
    print(f"per-annotator load: min {loads[0]}, max {loads[-1]} (spread <= 1)")
    print()

    OUT.mkdir(parents=True, exist_ok=True)
    log_path = OUT / "records.jsonl"
    if log_path.exists():
        log_path.unlink()
    policy = random_policy({"Positive": 0.72, "Similar": 0.21, "Negative": 0.07})
    records, campaign = simulate_campaign(n_groups, n_annotators, policy, seed=17,
                                          log_path=log_path)
    print(f"scripted annotators produced {len(records)} records "
          f"({n_groups} x 4 x 3 = {n_groups * 4 * 3})")
    verify_coverage(records, [f"g{i:05d}" for i in range(n_groups)], [1, 2, 3, 4])
    print("coverage verified: every patch has 3 labels from 3 distinct annotators")
    print()

    finals = finalize(records)
    sample = [f"g{i:05d}" for i in range(3)]
    for gid in sample:
        votes = {m: finals[(gid, m)] for m in (1, 2, 3, 4)}
        rendered = ", ".join(f"m{m}={fl.label}({fl.n_pos}/{fl.n_sim}/{fl.n_neg})"
                             for m, fl in votes.items())
        print(f"  {gid}: {rendered}")
    print()

    report = build_reports(records)
    print(report.render_text())
    print()
    print(f"record log: {log_path}")


if __name__ == "__main__":
    main()
