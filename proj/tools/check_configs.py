#!/usr/bin/env python3
"""Validate run configs against docs/run_config.schema.json.

Usage: check_configs.py SCHEMA EMBSIZER CONFIG...

Each config is checked as written. The resolved config that `embsizer synth`
writes for each synthetic config is checked too, so the schema and the
parser cannot drift apart.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    schema_path, binary, *configs = sys.argv[1:]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0

    def check(label, doc):
        nonlocal failures
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"{label}: {'/'.join(map(str, e.path)) or '<root>'}: {e.message}")
        failures += bool(errors)
        print(f"{'FAIL' if errors else 'ok'}   {label}")

    for path in configs:
        doc = json.loads(Path(path).read_text())
        check(path, doc)
        if "synthetic" not in doc.get("dataset", {}):
            continue
        with tempfile.TemporaryDirectory() as tmp:
            run = subprocess.run([binary, "--config", path, "--out", tmp, "synth"], capture_output=True, text=True)
            if run.returncode != 0:
                print(f"FAIL   {path}: synth exited {run.returncode}: {run.stderr.strip()}")
                failures += 1
                continue
            check(f"{path} (resolved)", json.loads((Path(tmp) / "config.json").read_text()))

    # The schema must also reject what the parser rejects.
    bad = {"candidates": [2, 8], "scheme": "shared", "surprise": 1}
    if validator.is_valid(bad):
        print("FAIL   schema accepts an unknown top-level key")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
