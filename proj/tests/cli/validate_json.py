"""Runs the CLI with --format json on the corpus and validates every output
against docs/report.schema.json."""

import json
import pathlib
import subprocess
import sys

import jsonschema

fspvm, root = sys.argv[1], pathlib.Path(sys.argv[2])
schema = json.loads((root / "docs" / "report.schema.json").read_text())
corpus = root / "corpus"

runs = [
    (["parse", corpus / "erc20.sol"], 0),
    (["typecheck", corpus / "sponsor.sol"], 0),
    (["run", corpus / "erc20.sol", "--entry", "transfer", "--args", "2,0", "--trace"], 0),
    (["run", corpus / "erc20.sol", "--entry", "transfer", "--args", "2,5"], 3),
    (["run", corpus / "pathological.sol", "--entry", "spin", "--gas", "50"], 4),
    (["verify", corpus / "erc20.sol", "--spec", corpus / "erc20.spec", "--uint-width", "8"], 0),
    (["verify", corpus / "erc20_broken.sol", "--spec", corpus / "erc20.spec", "--uint-width", "8"], 5),
    (["verify", corpus / "erc20.sol", "--spec", corpus / "erc20.spec", "--gas", "1"], 6),
    (["diff", corpus / "sponsor.sol", "--cases", "50", "--seed", "3"], 0),
    (["diff", corpus / "erc20.sol", "--cases", "0"], 0),
]

failures = 0
for args, code in runs:
    cmd = [fspvm, "--format", "json"] + [str(a) for a in args]
    p = subprocess.run(cmd, capture_output=True, text=True)
    try:
        if p.returncode != code:
            raise AssertionError(f"exit {p.returncode}, expected {code}: {p.stderr.strip()}")
        jsonschema.validate(json.loads(p.stdout), schema)
        print("ok  ", " ".join(map(str, args[:2])))
    except Exception as e:  # noqa: BLE001
        failures += 1
        print("FAIL", " ".join(map(str, args)), "-", str(e).splitlines()[0])
sys.exit(1 if failures else 0)
