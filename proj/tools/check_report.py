#!/usr/bin/env python3
"""Runs the CLI in both modes and validates each report.json against docs/report-schema.json."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    if len(sys.argv) != 4:
        print("usage: check_report.py <epidroid-binary> <schema> <app-model>", file=sys.stderr)
        return 2
    binary, schema_path, app = sys.argv[1:]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for mode in ("epidroid", "baseline_ext"):
            out = Path(tmp) / mode
            cmd = [binary, "run", "--app", app, "--mode", mode, "--seed", "3",
                   "--warmup-events", "300", "--enhance-events", "300", "--out", str(out)]
            subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
            report = json.loads((out / "report.json").read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for error in errors:
                print(f"{mode}: {'/'.join(map(str, error.path))}: {error.message}")
            failures += len(errors)
            print(f"{mode}: {'ok' if not errors else f'{len(errors)} schema errors'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
