"""Runs every CLI subcommand and validates each JSON report against the schema."""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema

INVOCATIONS = [
    ["critical", "x1"],
    ["critical", "x1 & (x2 | x3 | x4)"],
    ["critical", "!x5 | (x2 & x9)", "--counts"],
    ["bound", "(x1|x2)&(x3|x4)", "--epsilon", "0.1"],
    ["bound", "(x1&x2&x3)|(x4&x5&x6)|(x7&x8&x9)", "--epsilon", "0.3"],
    ["verify-foc", "x1"],
    ["verify-foc", "((x1&x2)|(x3&x4))&((x5&x6)|(x7&x8))"],
    ["verify-foc", "x1 & (x2 | x3 | x4)", "--eigenvector-tol", "0", "--foc-tol", "0"],
    ["oracle-check", "x1|x2"],
    ["simulate", "xor2", "--gram"],
    ["simulate", "xor2", "--formula", "x1|x2"],
    ["simulate", "grover-or", "--n", "4"],
    ["simulate", "grover-or", "--n", "2", "--iters", "0", "--epsilon", "0.1"],
    ["simulate", "identity", "--n", "3", "--iters", "2", "--all-inputs"],
]


def main() -> int:
    exe, schema_path, workdir = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    validator = jsonschema.Draft202012Validator(schema)
    workdir.mkdir(parents=True, exist_ok=True)
    gamma = workdir / "gamma.txt"
    alpha = workdir / "alpha.txt"
    gamma.write_text("01,11 1\n10,11 1\n")
    alpha.write_text("01 0.5\n10 0.5\n11 0.7071067811865476\n")
    runs = INVOCATIONS + [
        ["bound", "x1&x2", "--epsilon", "0.2", "--gamma", str(gamma), "--alpha", str(alpha)]
    ]

    failed = 0
    for args in runs:
        proc = subprocess.run([exe, *args], capture_output=True, text=True)
        label = " ".join(args)
        if proc.returncode not in (0, 2):
            print(f"FAIL {label}: exit {proc.returncode}: {proc.stderr.strip()}")
            failed += 1
            continue
        report = json.loads(proc.stdout)
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        if errors:
            failed += 1
            print(f"FAIL {label}")
            for e in errors[:5]:
                print(f"  {list(e.path)}: {e.message}")
        else:
            print(f"ok   {label} (exit {proc.returncode})")

    # The schema must also reject a malformed report.
    if validator.is_valid({"version": "0.1.0", "command": "bound", "arguments": []}):
        print("FAIL schema accepts a bound report without fields")
        failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
