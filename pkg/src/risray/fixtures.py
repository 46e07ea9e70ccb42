"""Golden-fixture harness.

Each fixture directory under fixtures/ holds a scenario config, a
fixture.json describing the CLI invocation plus expected output digests,
and the golden CSVs themselves. verify_fixtures() re-runs every fixture
into a scratch directory and compares sha256 digests; rebuild() rewrites
the goldens after an intentional model change.

Run `python3 -m risray.fixtures` to verify, `--rebuild` to re-seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import cli

GOLDEN_DIR = "golden"
MANIFEST_NAME = "fixture.json"


class FixtureError(RuntimeError):
    """Fixture tree is missing, empty, or structurally broken."""


@dataclass(frozen=True)
class GoldenFixture:
    """One reproducible CLI run with pinned output digests."""

    name: str
    root: Path
    command: str
    extra_args: tuple
    digests: dict

    @property
    def config_path(self) -> Path:
        return self.root / "config.json"

    def cli_args(self, out_dir: str) -> list:
        return [self.command, "--config", str(self.config_path),
                "--out", out_dir, *self.extra_args]


def fixtures_root() -> Path:
    """Repository fixtures/ directory (source checkouts only)."""
    return Path(__file__).resolve().parents[2] / "fixtures"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_fixture(root: Path) -> GoldenFixture:
    meta_path = root / MANIFEST_NAME
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FixtureError(f"fixture {root.name!r}: cannot read "
                           f"{MANIFEST_NAME}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture {root.name!r}: bad {MANIFEST_NAME}: "
                           f"{exc}") from exc
    for key in ("command", "digests"):
        if key not in meta:
            raise FixtureError(f"fixture {root.name!r}: {MANIFEST_NAME} "
                               f"missing {key!r}")
    if not (root / "config.json").is_file():
        raise FixtureError(f"fixture {root.name!r}: config.json missing")
    return GoldenFixture(name=root.name, root=root,
                         command=str(meta["command"]),
                         extra_args=tuple(meta.get("extra_args", [])),
                         digests=dict(meta["digests"]))


def discover(root: Path | None = None) -> list:
    root = fixtures_root() if root is None else Path(root)
    if not root.is_dir():
        raise FixtureError(f"fixture directory {root} does not exist")
    out = [load_fixture(p) for p in sorted(root.iterdir())
           if p.is_dir() and (p / MANIFEST_NAME).is_file()]
    if not out:
        raise FixtureError(f"no fixtures found under {root}")
    return out


def regenerate(fixture: GoldenFixture, out_dir: str) -> dict:
    """Run the fixture's CLI invocation into out_dir; return the digests
    of every emitted CSV (the manifest is excluded: it carries timing)."""
    code = cli.main(fixture.cli_args(out_dir))
    if code != 0:
        raise FixtureError(f"fixture {fixture.name!r}: CLI exited {code}")
    return {p.name: _sha256(p)
            for p in sorted(Path(out_dir).glob("*.csv"))}


@dataclass(frozen=True)
class FixtureReport:
    passed: tuple
    mismatched: tuple  # (fixture name, file, expected digest, actual)

    @property
    def ok(self) -> bool:
        return not self.mismatched


def verify_fixtures(root: Path | None = None) -> FixtureReport:
    passed = []
    bad = []
    for fx in discover(root):
        with tempfile.TemporaryDirectory(prefix=f"risray-{fx.name}-") as tmp:
            actual = regenerate(fx, tmp)
        names = sorted(set(fx.digests) | set(actual))
        mismatches = [(fx.name, n, fx.digests.get(n, "<absent>"),
                       actual.get(n, "<absent>"))
                      for n in names if fx.digests.get(n) != actual.get(n)]
        if mismatches:
            bad.extend(mismatches)
        else:
            passed.append(fx.name)
    return FixtureReport(passed=tuple(passed), mismatched=tuple(bad))


def rebuild(root: Path | None = None) -> list:
    """Regenerate every fixture, refresh golden CSVs and pinned digests."""
    rebuilt = []
    for fx in discover(root):
        with tempfile.TemporaryDirectory(prefix=f"risray-{fx.name}-") as tmp:
            digests = regenerate(fx, tmp)
            golden = fx.root / GOLDEN_DIR
            golden.mkdir(exist_ok=True)
            for name in digests:
                shutil.copyfile(os.path.join(tmp, name), golden / name)
        meta = {"command": fx.command, "digests": digests}
        if fx.extra_args:
            meta["extra_args"] = list(fx.extra_args)
        body = json.dumps(meta, indent=2, sort_keys=True) + "\n"
        (fx.root / MANIFEST_NAME).write_text(body, encoding="utf-8")
        rebuilt.append(fx.name)
    return rebuilt


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="risray.fixtures",
        description="verify or rebuild the golden fixtures")
    parser.add_argument("--root", default=None,
                        help="fixture directory (default: repo fixtures/)")
    parser.add_argument("--rebuild", action="store_true",
                        help="rewrite golden CSVs and digests")
    args = parser.parse_args(argv)
    root = None if args.root is None else Path(args.root)
    if args.rebuild:
        for name in rebuild(root):
            print(f"rebuilt {name}")
        return 0
    report = verify_fixtures(root)
    for name in report.passed:
        print(f"ok      {name}")
    for name, fname, want, got in report.mismatched:
        print(f"MISMATCH {name}/{fname}: expected {want[:12]}..., "
              f"got {got[:12]}...")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
