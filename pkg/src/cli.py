"""`aukernel` command line: exit 0 when everything checks, 1 on a failed check, 2 on usage or parse errors."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from src.check_service import (
    build_limit, check_document, compose_maps, dot_for, evaluate_model, load_workspace, strictify_model,
    verify_map_files, whisker_cell,
)
from src.config import HOST, LOG_LEVEL, PORT, SOURCE_EXTENSION
from src.kernel.errors import KernelError, ParseError
from src.utilities import FAILED, failed, record, render_report

logger = logging.getLogger("aukernel")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _sources(paths: Sequence[Path]) -> list[Path]:
    files = []
    for path in paths:
        if path.is_dir():
            files.extend(sorted(path.glob(f"*{SOURCE_EXTENSION}")))
        else:
            files.append(path)
    return files


def _read(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"✓ wrote {path}")


def _report(records: list[dict]) -> int:
    sys.stdout.write(render_report(records))
    return EXIT_FAILED if failed(records) else EXIT_OK


# ---------------------------------------------------------------------------
# commands


def cmd_check(args: argparse.Namespace) -> int:
    records = []
    files = _sources(args.paths)
    if not files:
        raise ParseError(f"no {SOURCE_EXTENSION} files under {', '.join(map(str, args.paths))}")
    for path in files:
        records.extend(check_document(_read(path), document=str(path)))
    return _report(records)


def cmd_compose(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    m, rec = compose_maps(ws, args.first, args.second)
    if args.output is not None:
        _write(args.output, m.model_dump_json())
    return _report([rec])


def cmd_whisker(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    cell, records = whisker_cell(ws, args.cell, args.map, args.side)
    if args.output is not None:
        _write(args.output, cell.model_dump_json())
    return _report(records)


def cmd_limit(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    result, rec = build_limit(ws, args.kind, args.names)
    if args.output is not None:
        _write(args.output, result.model_dump_json())
    return _report([rec])


def cmd_eqcheck(args: argparse.Namespace) -> int:
    if args.maps is None:
        if args.file is None:
            raise ParseError("eqcheck needs a document or --maps LEFT RIGHT")
        return _report([r for r in check_document(_read(args.file), str(args.file)) if r["kind"] in ("claim", "document")])
    records, cert = verify_map_files(args.maps[0], args.maps[1], args.certificate)
    if args.output is not None and cert is not None:
        _write(args.output, cert.model_dump_json())
    return _report(records)


def cmd_eval(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    return _report(evaluate_model(ws, args.model, args.list_bound))


def cmd_strictify(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    return _report(strictify_model(ws, args.model, args.list_bound))


def cmd_dot(args: argparse.Namespace) -> int:
    ws = load_workspace(_read(args.file))
    _write(args.output, dot_for(ws, args.name))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from main import app, startup_message

    startup_message()
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aukernel", description="Check and compute with AU sketches written as .auk documents.")
    parser.add_argument("--log-level", default=LOG_LEVEL, help=f"logging level (default: {LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate every declaration, model and claim")
    p.add_argument("paths", nargs="+", type=Path, help=f"{SOURCE_EXTENSION} files or directories")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compose", help="compose two declared maps")
    p.add_argument("file", type=Path)
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--output", type=Path, help="write the composite as JSON")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("whisker", help="whisker a 2-cell by a map and certify the boundary")
    p.add_argument("file", type=Path)
    p.add_argument("cell")
    p.add_argument("map")
    p.add_argument("--side", choices=("left", "right"), default="right")
    p.add_argument("-o", "--output", type=Path, help="write the whiskered 2-cell as JSON")
    p.set_defaults(func=cmd_whisker)

    p = sub.add_parser("limit", help="product C D | inserter C F0 F1 | equifier A B | pullback C D MAP")
    p.add_argument("file", type=Path)
    p.add_argument("kind", choices=("product", "inserter", "equifier", "pullback"))
    p.add_argument("names", nargs="+")
    p.add_argument("-o", "--output", type=Path, help="write the limit as JSON")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("eqcheck", help="certify claims of a document, or two JSON maps")
    p.add_argument("file", type=Path, nargs="?")
    p.add_argument("--maps", type=Path, nargs=2, metavar=("LEFT", "RIGHT"))
    p.add_argument("--certificate", type=Path, help="verify this certificate instead of searching")
    p.add_argument("-o", "--output", type=Path, help="write the certificate found as JSON")
    p.set_defaults(func=cmd_eqcheck)

    p = sub.add_parser("eval", help="carriers, verification and queries of a model")
    p.add_argument("file", type=Path)
    p.add_argument("model")
    p.add_argument("--list-bound", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("strictify", help="strictify a model and check the isomorphism")
    p.add_argument("file", type=Path)
    p.add_argument("model")
    p.add_argument("--list-bound", type=int, default=None)
    p.set_defaults(func=cmd_strictify)

    p = sub.add_parser("dot", help="Graphviz rendering of a context or eq-extension")
    p.add_argument("file", type=Path)
    p.add_argument("name")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default=HOST)
    p.add_argument("--port", type=int, default=PORT)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ParseError as exc:
        where = f" at line {exc.line}, column {exc.column}" if exc.line else ""
        logger.error(f"✗ {exc}{where}")
        return EXIT_USAGE
    except (OSError, ValidationError) as exc:
        logger.error(f"✗ {exc}")
        return EXIT_USAGE
    except KernelError as exc:
        return _report([record(args.command, "", FAILED, **exc.to_record())])


if __name__ == "__main__":
    sys.exit(main())
