"""Command line: ``run``, ``judge``, ``report``, ``gen-creative``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from retreval.harness.creative import generate_creative_prompts
from retreval.harness.dataset import load_dataset, write_dataset
from retreval.harness.judge import judge_evaluate, load_verdicts, write_verdicts
from retreval.harness.report import report
from retreval.harness.runner import METHODS, RunSettings, load_results, run_benchmark
from retreval.llm.gateway import Gateway
from retreval.llm.prompts import PromptLibrary
from retreval.llm.providers import ChatProvider, OpenAIChatProvider, ProviderConfig, ScriptedProvider
from retreval.trace import RunTrace


def _provider(args: argparse.Namespace, endpoint: str | None, model: str | None) -> ChatProvider:
    if args.script:
        return ScriptedProvider.from_file(args.script)
    if not endpoint or not model:
        raise SystemExit("either --script or both --endpoint and --model are required")
    config = ProviderConfig.from_env(
        endpoint,
        model,
        api_key_env=args.api_key_env,
        request_timeout=args.timeout,
        max_retries=args.max_retries,
        seed=getattr(args, "seed", None),
    )
    return OpenAIChatProvider(config)


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", help="OpenAI-compatible base URL, e.g. http://localhost:11434/v1")
    parser.add_argument("--model", help="model name sent to the endpoint")
    parser.add_argument("--api-key-env", default="OPENAI_API_KEY", help="environment variable holding the API key")
    parser.add_argument("--script", type=Path, help="YAML rule script; use the scripted mock instead of HTTP")
    parser.add_argument("--timeout", type=float, default=120.0)
    parser.add_argument("--max-retries", type=int, default=2)


def cmd_run(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    provider = _provider(args, args.endpoint, args.model)
    critic = None
    if args.critic_endpoint:
        critic = OpenAIChatProvider(
            ProviderConfig.from_env(
                args.critic_endpoint, args.critic_model or args.model, api_key_env=args.api_key_env,
                request_timeout=args.timeout, max_retries=args.max_retries,
            )
        )
    overrides = {}
    for key in ("max_refinements", "quality_threshold", "prune_k", "max_iterations"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    settings = RunSettings(
        provider=provider,
        critic=critic,
        prompts=PromptLibrary(args.template_dir),
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        workers=1 if args.sequential else args.workers,
        parallel_baselines=not args.sequential,
        config_overrides=overrides,
    )
    manifest = run_benchmark(dataset, methods, settings, args.out, args.memory)
    failed = manifest["failed"]
    print(f"executed {manifest['executed_last_run']} pair(s); {len(failed)} failed; manifest: {Path(args.out) / 'manifest.json'}")
    return 1 if failed else 0


def cmd_judge(args: argparse.Namespace) -> int:
    results = [r for r in load_results(args.results) if r.domain in (args.task_type, "other")]
    trace = RunTrace("judge")
    judge = None
    if args.script or args.endpoint:
        judge = Gateway(_provider(args, args.endpoint, args.model), trace, temperature=0.0)
    elif args.task_type == "creative":
        raise SystemExit("creative judging needs --endpoint/--model or --script")
    verdicts = judge_evaluate(results, judge, args.task_type)
    out = Path(args.out) if args.out else Path(args.results) / f"verdicts_{args.task_type}.jsonl"
    write_verdicts(verdicts, out)
    trace.write(out.with_name(out.stem + "_trace.json"))
    unscored = sum(not v.scored for v in verdicts)
    print(f"wrote {len(verdicts)} verdict(s) to {out} ({unscored} unscored)")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    verdicts = [v for path in args.verdicts for v in load_verdicts(path)]
    summaries = report(verdicts, args.out, figures=not args.no_figures)
    print((Path(args.out) / "summary.txt").read_text(encoding="utf-8"))
    return 0 if summaries else 1


def cmd_gen_creative(args: argparse.Namespace) -> int:
    records = generate_creative_prompts(args.count, args.seed)
    if args.out:
        write_dataset(records, args.out)
    else:
        for record in records:
            print(record.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retreval", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a dataset with one or more methods")
    run.add_argument("--dataset", required=True, type=Path)
    run.add_argument("--methods", default=",".join(METHODS), help=f"comma-separated subset of {','.join(METHODS)}")
    _add_provider_flags(run)
    run.add_argument("--critic-endpoint", help="separate endpoint for cross scoring")
    run.add_argument("--critic-model")
    run.add_argument("--memory", type=Path, help="reflexion memory file (default: <out>/memory.json)")
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--seed", type=int, help="sampling seed forwarded to the endpoint")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--sequential", action="store_true", default=False, help="one request at a time (reproducible)")
    mode.add_argument("--parallel", dest="sequential", action="store_false")
    run.add_argument("--workers", type=int, default=4)
    run.add_argument("--template-dir", type=Path)
    run.add_argument("--temperature", type=float, default=0.7)
    run.add_argument("--max-tokens", type=int, default=2048)
    run.add_argument("--max-refinements", type=int)
    run.add_argument("--quality-threshold", type=float)
    run.add_argument("--prune-k", type=int)
    run.add_argument("--max-iterations", type=int)
    run.set_defaults(func=cmd_run)

    judge = sub.add_parser("judge", help="score the outputs of a run directory")
    judge.add_argument("--results", required=True, type=Path)
    judge.add_argument("--task-type", required=True, choices=["math", "creative"])
    _add_provider_flags(judge)
    judge.add_argument("--out", type=Path)
    judge.set_defaults(func=cmd_judge)

    rep = sub.add_parser("report", help="summary tables and figures from verdict files")
    rep.add_argument("--verdicts", required=True, type=Path, nargs="+")
    rep.add_argument("--out", required=True, type=Path)
    rep.add_argument("--no-figures", action="store_true")
    rep.set_defaults(func=cmd_report)

    gen = sub.add_parser("gen-creative", help="write seeded creative-writing prompts")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path)
    gen.set_defaults(func=cmd_gen_creative)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
