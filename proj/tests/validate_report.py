"""Runs a quick experiment through the CLI and validates its report."""
import csv
import json
import pathlib
import subprocess
import sys

import jsonschema


def main():
    cli, schema_path, out = sys.argv[1], sys.argv[2], pathlib.Path(sys.argv[3])
    config = out / "config.json"
    out.mkdir(parents=True, exist_ok=True)
    config.write_text(json.dumps({"params": {"horizon": 2000.0, "ladder": [100.0, 500.0, 2000.0],
                                             "ratio_band": [0.8, 1.2]}}))
    for run in ("a", "b"):
        subprocess.run([cli, "key-renewal", "--config", str(config), "--out", str(out / run), "--seed", "3"],
                       check=True)
    schema = json.loads(pathlib.Path(schema_path).read_text())
    reports = []
    for run in ("a", "b"):
        report = json.loads((out / run / "report.json").read_text())
        jsonschema.validate(report, schema)
        for name in report["artifacts"]:
            with open(out / run / name, newline="") as f:
                rows = list(csv.reader(f))
            assert rows and rows[0] == ["t", "residual", "predicted", "ratio"], name
        report["provenance"].pop("wall_time_s")
        report["spec"].pop("out_dir")
        reports.append(report)
    assert reports[0] == reports[1], "reruns with one seed differ"
    assert reports[0]["passed"]

    bad = subprocess.run([cli, "key-renewal", "--config", str(out / "missing.json")], capture_output=True)
    assert bad.returncode != 0
    config.write_text('{"params": {"horizon": 2000.0,}}')
    bad = subprocess.run([cli, "key-renewal", "--config", str(config)], capture_output=True, text=True)
    assert bad.returncode == 2 and "line 1" in bad.stderr, bad.stderr
    print("report schema and reproducibility checks passed")


if __name__ == "__main__":
    main()
