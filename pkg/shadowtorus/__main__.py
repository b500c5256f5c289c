from __future__ import annotations

from shadowtorus.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
