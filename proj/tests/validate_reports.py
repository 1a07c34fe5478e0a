#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Runs small CLI experiments and validates every JSON report against the schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    runs = {
        "sweep": ["sweep", "--f-start", "400e6", "--f-stop", "420e6", "--f-step", "10e6"],
        "mixture": ["mixture"],
        "montecarlo": ["montecarlo", "--axis", "m", "--grid", "4,0", "--trials", "2"],
        "time": ["time", "--reps", "2"],
    }
    failures = 0
    with tempfile.TemporaryDirectory() as out:
        for stem, args in runs.items():
            proc = subprocess.run([cli, "--out", out, *args], capture_output=True, text=True)
            if proc.returncode == 2:
                print(f"FAIL {stem}: CLI error\n{proc.stderr}")
                failures += 1
                continue
            report = json.loads((pathlib.Path(out) / f"{stem}.json").read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"FAIL {stem}: /{'/'.join(map(str, e.path))}: {e.message}")
            failures += bool(errors)
            if not errors:
                print(f"PASS {stem}: report matches schema")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
