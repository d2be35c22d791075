#!/usr/bin/env python3
# Copyright 2026 The Newton Losses Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validate nlbench JSON reports against the shipped schema.

Beyond the schema, checks that eval steps increase strictly and that each
run's final entry equals its last eval. Exit status 0 when every file is
valid, 1 otherwise.
"""

import json
import pathlib
import sys

import jsonschema

SCHEMA = pathlib.Path(__file__).resolve().parent.parent / "schemas" / "report.v1.schema.json"


def semantic_errors(doc):
    for i, run in enumerate(doc["runs"]):
        steps = [e["step"] for e in run["evals"]]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            yield f"runs[{i}]: eval steps are not strictly increasing"
        if run["final"] != run["evals"][-1]:
            yield f"runs[{i}]: final differs from the last eval"


def main(paths):
    schema = json.loads(SCHEMA.read_text())
    validator = jsonschema.Draft202012Validator(schema)
    ok = True
    for path in paths:
        doc = json.loads(pathlib.Path(path).read_text())
        errors = [e.message for e in validator.iter_errors(doc)]
        if not errors:
            errors = list(semantic_errors(doc))
        for message in errors:
            print(f"{path}: {message}")
        ok = ok and not errors
    return 0 if ok else 1


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("usage: validate_report.py REPORT.json [...]", file=sys.stderr)
        sys.exit(2)
    sys.exit(main(sys.argv[1:]))
