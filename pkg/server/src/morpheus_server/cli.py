"""Command line entry point: pick a model, serve POST /score."""
import argparse
import sys
from typing import Optional, Sequence

import uvicorn

from .adapters import (AdapterConfig, BUILTIN_MODELS, ModelLoadError,
                       Objective, TaskType, build_adapter)
from .app import build_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morpheus-server",
        description="Serve a scoring model behind POST /score.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--model", default="echo",
                        help="model identifier; built-ins: "
                             + ", ".join(BUILTIN_MODELS))
    parser.add_argument("--task", choices=[t.value for t in TaskType],
                        help="restrict the adapter to one task")
    parser.add_argument("--objective",
                        choices=[o.value for o in Objective],
                        help="scoring objective (defaults per model)")
    parser.add_argument("--device", default="cpu",
                        help="placement hint for model backends")
    parser.add_argument("--max-batch", type=int, default=256)
    parser.add_argument("--log-level", default="warning")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            model=args.model,
            task=TaskType(args.task) if args.task else None,
            objective=Objective(args.objective) if args.objective else None,
            device=args.device,
            max_batch=args.max_batch)
        adapter = build_adapter(config)
    except (ModelLoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    app = build_app(adapter, max_batch=config.max_batch)
    uvicorn.run(app, host=args.host, port=args.port,
                log_level=args.log_level)
    return 0


if __name__ == "__main__":
    sys.exit(main())
