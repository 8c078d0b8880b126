"""Regenerate the published API reference under docs/api/.

openapi.json is taken from the service application and errors.md from
the error registry, so the committed reference cannot drift from the
code. Regenerate after changing endpoints or error classes:

    python3 scripts/export_api.py
"""

import json
from pathlib import Path

from coarch import errors
from coarch.config import Config
from coarch.service import create_app

API_DIR = Path(__file__).resolve().parent.parent / "docs" / "api"

ERRORS_HEADER = """\
# Error registry

Every failure carries a stable `code`. The CLI prints the payload as
JSON on stderr and exits with the listed code; the HTTP service returns
the payload as the response body with the listed status. Payload shape:

```json
{"code": "<code>", "message": "<human readable>", "detail": {...}}
```

`detail` is optional and code-specific (for example parse errors carry
the offending `line`).

| code | HTTP status | CLI exit code | meaning |
|------|-------------|---------------|---------|
"""


def error_classes() -> list[type]:
    found = set()
    stack = [errors.CoarchError]
    while stack:
        cls = stack.pop()
        found.add(cls)
        stack.extend(cls.__subclasses__())
    return sorted(found, key=lambda cls: cls.code)


def render_errors() -> str:
    rows = []
    for cls in error_classes():
        meaning = (cls.__doc__ or "").strip().splitlines()[0]
        rows.append(
            f"| `{cls.code}` | {cls.http_status} | {cls.exit_code} | {meaning} |"
        )
    return ERRORS_HEADER + "\n".join(rows) + "\n"


def main() -> None:
    API_DIR.mkdir(parents=True, exist_ok=True)
    app = create_app(Path("."), Config())
    schema = app.openapi()
    (API_DIR / "openapi.json").write_text(
        json.dumps(schema, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (API_DIR / "errors.md").write_text(render_errors(), encoding="utf-8")
    print(f"wrote {API_DIR / 'openapi.json'}")
    print(f"wrote {API_DIR / 'errors.md'}")


if __name__ == "__main__":
    main()
