"""Run every stored row end to end and summarize the report."""

from bihamlie.cli import RunConfig, run

doc = run(RunConfig("report-all", seed=0))
rows = doc.to_obj()["sections"]["rows"]
for name, entry in rows.items():
    b = entry["biham"]
    pi = b.get("printed_integrals", {})
    print(f"{name:18s} compatible={entry['compatibility']['ok']!s:5s} "
          f"solver={entry['solver']['table_match']!s:5s} "
          f"torsion={b['torsion']['ok']!s:5s} rank={b['independence']['rank']} "
          f"printed_rank={pi.get('independence', {}).get('rank', '-')}/{pi.get('expected_count', '-')}")
print("exit code", doc.exit_code)
