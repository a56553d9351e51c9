#!/usr/bin/env python3
"""Run the nlsn tool on one config per command and validate each JSON artifact
against the schema shipped in schemas/. Also checks exit codes and that two
identical runs produce identical bytes."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CASES = [
    ("oracle", 0, "command = oracle\nN = 1\np = 4\n"),
    ("solve", 0, "command = solve\nN = 3\np = 4\nq = 4\nbeta = 1\n"),
    ("solve", 2, "command = solve\nN = 3\np = 4\nq = 4\nbeta = 1\nmax_iter = 3\n"),
    ("threshold", 0, "command = threshold\nN = 3\np = 4\nq = 2*\nbeta = 0.1\nb = 0.01\n"),
    ("check", 3, "command = check\nN = 3\np = 2*\nq = 2*\nbeta = 1\n"),
    ("sweep", 0, "command = sweep\nN = 3\np = 4\nq = 4\naxis = beta\nvalues = 0.5, 1\nformat = json\n"),
    ("sweep", 0, "command = sweep\nN = 3\np = 4\nq = 2*\nb = 0.01\naxis = beta\nvalues = -1, 0.1\n"
                 "format = json\nmax_iter = 20\n"),
]


def run(tool, config_text, workdir, jobs):
    cfg = workdir / "run.cfg"
    out = workdir / "out.json"
    cfg.write_text(config_text)
    proc = subprocess.run([tool, "--config", str(cfg), "--output", str(out), "--jobs", str(jobs)],
                          capture_output=True, text=True, check=False)
    return proc.returncode, out.read_bytes() if out.exists() else b"", proc.stderr


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--tool", required=True)
    parser.add_argument("--schemas", required=True, type=pathlib.Path)
    args = parser.parse_args()

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        workdir = pathlib.Path(tmp)
        for command, expected_exit, text in CASES:
            schema = json.loads((args.schemas / f"{command}.schema.json").read_text())
            jsonschema.Draft202012Validator.check_schema(schema)
            code, first, err = run(args.tool, text, workdir, 1)
            _, second, _ = run(args.tool, text, workdir, 2)
            label = f"{command} (exit {expected_exit})"
            problems = []
            if code != expected_exit:
                problems.append(f"exit code {code}, stderr: {err.strip()}")
            if first != second:
                problems.append("output bytes differ between runs")
            try:
                jsonschema.validate(json.loads(first), schema,
                                    cls=jsonschema.Draft202012Validator)
            except (ValueError, jsonschema.ValidationError) as exc:
                problems.append(f"schema: {exc}")
            print(f"{'ok  ' if not problems else 'FAIL'} {label}")
            for p in problems:
                print(f"     {p}")
            failures += bool(problems)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
