"""End-to-end CLI check: synth, run, report, then schema and SVG validation."""

import json
import pathlib
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET

import jsonschema


def run(cmd, expect=0):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{cmd} exited {proc.returncode}, expected {expect}\n{proc.stdout}\n{proc.stderr}")
    return proc


def main():
    cli, schema_path = sys.argv[1], pathlib.Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        (tmp / "spec.json").write_text(json.dumps({"planted_structure": "separable", "n_neurons": 16, "seed": 5}))
        run([cli, "synth", "--spec", str(tmp / "spec.json"), "--out", str(tmp / "store")])
        run([cli, "ingest", str(tmp / "store" / "manifest.json")])
        conn = run([cli, "connections", "--manifest", str(tmp / "store" / "manifest.json"), "--k", "3"])
        lines = conn.stdout.strip().splitlines()
        assert lines[0].startswith("target_layer,"), lines[0]
        assert len(lines) == 1 + 16 * 3, len(lines)

        config = {"manifest": "store/manifest.json", "k_precursors": 5, "lilliefors_reps": 500,
                  "tsne": {"perplexity": 20, "iters": 250}, "master_seed": 11, "output_dir": "out"}
        (tmp / "run.json").write_text(json.dumps(config))
        run([cli, "run", "--config", str(tmp / "run.json"), "--log-level", "warn"])
        report = json.loads((tmp / "out" / "report.json").read_text())
        jsonschema.validate(report, schema)
        assert [a["id"] for a in report["analyses"]] == list("ABCDE")
        counts = report["counts"]
        assert counts["n_min_cluster_both"] <= counts["n_sweep"]
        assert counts["n_band"] <= counts["n_sweep"]
        assert counts["n_sweep"] == counts["precursors_per_target"] * counts["n_targets_with_records"]

        for figure in (tmp / "out" / "figures").glob("*.svg"):
            ET.parse(figure)
        for a in report["analyses"]:
            for f in a.get("figures", []):
                assert (tmp / "out" / f).is_file(), f

        run([cli, "report", "--in", str(tmp / "out")])
        (tmp / "out" / "report.json").write_text("{}")
        run([cli, "report", "--in", str(tmp / "out")], expect=3)

        # Exit codes for configuration and data errors.
        (tmp / "bad.json").write_text(json.dumps({"manifest": "store/manifest.json", "alpha": 2}))
        run([cli, "run", "--config", str(tmp / "bad.json"), "--out", str(tmp / "x")], expect=2)
        (tmp / "missing.json").write_text(json.dumps({"manifest": "nowhere/manifest.json"}))
        run([cli, "run", "--config", str(tmp / "missing.json"), "--out", str(tmp / "x")], expect=3)
        assert not (tmp / "x").exists()
        run([cli, "run", "--config", str(tmp / "run.json"), "--analyses", "Z"], expect=2)
    print("cli report check passed")


if __name__ == "__main__":
    main()
