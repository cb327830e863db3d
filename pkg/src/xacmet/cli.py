"""Command-line entry point: ``xacmet <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .constraints import path_constraints
from .errors import XacmetError
from .generator import generate_corpus
from .graph import build_graph, color_edges, export_graph_dot
from .harness import differential_check, enumerate_requests
from .model import Policy
from .oracle import coverage, evaluate
from .paths import DEFAULT_MAX_PATHS, PathSet, build_paths
from .tree import build_tree, export_tree_dot
from .xacml_io import parse_policy, parse_request, write_policy, write_request, write_response

FORMAT_VERSION = 1

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT = 0, 1, 2

# formats each subcommand can emit; the first is the default
FORMATS = {
    "tree": ("dot", "json", "text"),
    "graph": ("dot", "json", "text"),
    "paths": ("text", "json"),
    "eval": ("text", "json", "xacml"),
    "oracle": ("text", "json"),
    "coverage": ("text", "json"),
    "diff": ("text", "json"),
    "gen-requests": ("xacml",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xacmet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, requests=None):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("policy", help="XACML 2.0 Policy file")
        if requests == "one":
            p.add_argument("request", help="XACML request file")
        elif requests == "many":
            p.add_argument("requests", nargs="+", help="request files or directories")
        elif requests == "optional":
            p.add_argument("requests", nargs="*",
                           help="request files or directories (default: enumerate)")
        p.add_argument("--format", default=FORMATS[name][0],
                       help=f"output format: {', '.join(FORMATS[name])}")
        return p

    def path_opts(p):
        p.add_argument("--granularity", choices=("rule", "element"), default="rule")
        p.add_argument("--max-paths", type=_positive, default=DEFAULT_MAX_PATHS)

    def enum_opts(p):
        p.add_argument("--limit", type=_positive, help="truncate the request enumeration")

    add("tree", "print the XAC-Tree")
    add("graph", "print the colored XAC-Graph")
    path_opts(add("paths", "list the ordered evaluation paths"))
    p = add("eval", "evaluate one request", "one")
    path_opts(p)
    p.add_argument("--explain", action="store_true", help="dump the covered path's constraints")
    path_opts(add("oracle", "write a response file per request", "many"))
    p = add("coverage", "report path coverage of a request set", "optional")
    path_opts(p)
    enum_opts(p)

    p = sub.add_parser("diff", help="compare the oracle with direct evaluation")
    p.add_argument("policy", nargs="?", help="XACML 2.0 Policy file")
    p.add_argument("requests", nargs="*", help="request files or directories (default: enumerate)")
    p.add_argument("--format", default="text", help="output format: text, json")
    p.add_argument("--generate", type=_positive, metavar="N",
                   help="check N generated policies instead of a policy file")
    p.add_argument("--seed", type=int, default=2018, help="seed for --generate")
    path_opts(p)
    enum_opts(p)

    p = sub.add_parser("gen-requests", help="write the request enumeration to files")
    p.add_argument("policy", help="XACML 2.0 Policy file")
    p.add_argument("outdir", help="output directory")
    p.add_argument("--format", default="xacml", help="output format: xacml")
    enum_opts(p)
    p.add_argument("--sample", type=_positive, metavar="N",
                   help="write a seeded random sample of N requests")
    p.add_argument("--seed", type=int, default=0, help="seed for --sample")
    return parser


def _dump_json(data: dict) -> str:
    return json.dumps({"format_version": FORMAT_VERSION, **data}, indent=2, sort_keys=False) + "\n"


def _load_policy(path: str) -> Policy:
    return parse_policy(Path(path).read_bytes())


def _request_files(items) -> list[Path]:
    out = []
    for item in items:
        path = Path(item)
        if path.is_dir():
            out.extend(sorted(p for p in path.glob("*.xml") if not p.name.endswith(".response.xml")))
        elif path.exists():
            out.append(path)
        else:
            raise FileNotFoundError(f"no such request file or directory: {item}")
    return out


def _load_requests(items):
    files = _request_files(items)
    return files, [parse_request(f.read_bytes()) for f in files]


def _path_rows(paths: PathSet) -> list[dict]:
    ids = [r.id for r in paths.policy.rules]
    return [{"rank": p.rank, "verdict": p.verdict.value, "length": p.length,
             "unfeasible": p.unfeasible, "walk": list(p.walk),
             "profile": p.profile.as_dict(ids)} for p in paths]


def _profile_text(profile, ids) -> str:
    d = profile.as_dict(ids)
    text = f"policy={d['policy_target']}"
    if "policy_failure" in d:
        text += f"@{d['policy_failure']}"
    return " ".join([text] + [f"{k}={v}" for k, v in d["rules"].items()])


def cmd_tree(args, out) -> int:
    tree = build_tree(_load_policy(args.policy))
    if args.format == "dot":
        out.write(export_tree_dot(tree))
    elif args.format == "json":
        out.write(_dump_json({"nodes": [n.display() for n in tree.nodes],
                              "edges": [list(e) for e in tree.edges]}))
    else:
        def show(label, depth):
            out.write("  " * depth + tree.node(label).display() + "\n")
            for child in tree.children(label):
                show(child.label, depth + 1)
        show(tree.root.label, 0)
    return EXIT_OK


def cmd_graph(args, out) -> int:
    graph = color_edges(build_graph(build_tree(_load_policy(args.policy))))
    if args.format == "dot":
        out.write(export_graph_dot(graph))
    elif args.format == "json":
        out.write(_dump_json({
            "nodes": [n.display() for n in graph.nodes],
            "edges": [{"source": e.source, "target": e.target, "condition": str(e.condition),
                       "color": e.color.value} for e in graph.edges]}))
    else:
        for e in graph.edges:
            color = "" if e.color.value == "plain" else f" {e.color.value}"
            out.write(f"{e.source} -> {e.target} [{e.condition}]{color}\n")
    return EXIT_OK


def cmd_paths(args, out) -> int:
    policy = _load_policy(args.policy)
    paths = build_paths(policy, args.granularity, args.max_paths)
    if args.format == "json":
        out.write(_dump_json({"policy": policy.id, "algorithm": policy.rule_combining.value,
                              "granularity": args.granularity, "paths": _path_rows(paths)}))
        return EXIT_OK
    ids = [r.id for r in policy.rules]
    out.write(f"policy {policy.id} ({policy.rule_combining.value}), {len(paths)} paths\n")
    for p in paths:
        flag = " unfeasible" if p.unfeasible else ""
        out.write(f"{p.rank:>4} {p.verdict.value:<13} len={p.length}{flag}\n")
        out.write(f"     {_profile_text(p.profile, ids)}\n")
        out.write(f"     {' -> '.join(p.walk)}\n")
    return EXIT_OK


def cmd_eval(args, out) -> int:
    policy = _load_policy(args.policy)
    request = parse_request(Path(args.request).read_bytes())
    paths = build_paths(policy, args.granularity, args.max_paths)
    result = evaluate(paths, request)
    path = paths.by_rank(result.covered_path_rank)
    if args.format == "xacml":
        out.write(write_response(result.verdict))
    elif args.format == "json":
        data = {"verdict": result.verdict.value, "rank": result.covered_path_rank,
                "walk": list(path.walk)}
        if args.explain:
            data["constraints"] = path_constraints(path, policy).lines()
        out.write(_dump_json(data))
    else:
        out.write(result.verdict.value + "\n")
        out.write(f"covered path {result.covered_path_rank}: {' -> '.join(path.walk)}\n")
        if args.explain:
            for line in path_constraints(path, policy).lines():
                out.write(f"  {line}\n")
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    policy = _load_policy(args.policy)
    files, requests = _load_requests(args.requests)
    paths = build_paths(policy, args.granularity, args.max_paths)
    rows = []
    for f, request in zip(files, requests):
        result = evaluate(paths, request)
        target = f.with_name(f.stem + ".response.xml")
        target.write_text(write_response(result.verdict), encoding="utf-8")
        rows.append({"request": f.name, "verdict": result.verdict.value,
                     "rank": result.covered_path_rank})
    if args.format == "json":
        out.write(_dump_json({"policy": policy.id, "results": rows}))
    else:
        for row in rows:
            out.write(f"{row['request']}: {row['verdict']} (path {row['rank']})\n")
    return EXIT_OK


def _requests_or_enumeration(policy, items, limit):
    if items:
        return _load_requests(items)[1]
    return enumerate_requests(policy, limit)


def cmd_coverage(args, out) -> int:
    policy = _load_policy(args.policy)
    paths = build_paths(policy, args.granularity, args.max_paths)
    report = coverage(paths, _requests_or_enumeration(policy, args.requests, args.limit))
    if args.format == "json":
        out.write(_dump_json({"policy": policy.id, **report.as_dict()}))
    else:
        out.write(report.to_text())
    return EXIT_OK


def cmd_diff(args, out) -> int:
    if args.generate:
        if args.policy or args.requests:
            raise UsageError("--generate takes no policy or request arguments")
        jobs = [(p, enumerate_requests(p, args.limit)) for p in generate_corpus(args.seed, args.generate)]
    elif args.policy:
        policy = _load_policy(args.policy)
        jobs = [(policy, _requests_or_enumeration(policy, args.requests, args.limit))]
    else:
        raise UsageError("diff needs a policy file or --generate N")
    reports = [differential_check(p, reqs, granularity=args.granularity, max_paths=args.max_paths)
               for p, reqs in jobs]
    if args.format == "json":
        out.write(_dump_json({"reports": [r.as_dict() for r in reports]}))
    else:
        for r in reports:
            out.write(r.to_text())
    return EXIT_OK if all(r.ok for r in reports) else EXIT_DISAGREE


def cmd_gen_requests(args, out) -> int:
    policy = _load_policy(args.policy)
    requests = enumerate_requests(policy, args.limit)
    if args.sample and args.sample < len(requests):
        keep = sorted(random.Random(args.seed).sample(range(len(requests)), args.sample))
        requests = [requests[i] for i in keep]
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    width = len(str(len(requests)))
    for i, request in enumerate(requests, start=1):
        (outdir / f"request_{i:0{width}d}.xml").write_text(write_request(request), encoding="utf-8")
    out.write(f"wrote {len(requests)} request(s) to {outdir}\n")
    return EXIT_OK


COMMANDS = {
    "tree": cmd_tree,
    "graph": cmd_graph,
    "paths": cmd_paths,
    "eval": cmd_eval,
    "oracle": cmd_oracle,
    "coverage": cmd_coverage,
    "diff": cmd_diff,
    "gen-requests": cmd_gen_requests,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.format not in FORMATS[args.command]:
            raise UsageError(f"{args.command} does not support --format {args.format} "
                             f"(choose from {', '.join(FORMATS[args.command])})")
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"xacmet: usage error: {exc}\n")
    except (XacmetError, OSError, ValueError) as exc:
        err.write(f"xacmet: error: {exc}\n")
    return EXIT_INPUT


def main(argv=None) -> None:
    sys.exit(run(argv))
