"""Validate JSON files against the shipped schemas.

usage: validate_schemas.py SCHEMA_DIR SCHEMA_NAME FILE [SCHEMA_NAME FILE ...]

An envelope file is checked as `envelope`, and its `result` against the
schema named after it with `envelope:NAME`.
"""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    root = pathlib.Path(sys.argv[1])
    registry = Registry()
    for p in root.glob("*.schema.json"):
        registry = registry.with_resource(p.name, Resource.from_contents(json.loads(p.read_text())))

    def check(name: str, doc) -> None:
        schema = json.loads((root / f"{name}.schema.json").read_text())
        jsonschema.Draft202012Validator(schema, registry=registry).validate(doc)

    args = sys.argv[2:]
    for name, path in zip(args[::2], args[1::2]):
        doc = json.loads(pathlib.Path(path).read_text())
        if name.startswith("envelope:"):
            check("envelope", doc)
            check(name.split(":", 1)[1], doc["result"])
        else:
            check(name, doc)
        print(f"ok {name} {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
