"""Command line entry point: ``bta stamp|verify|export|simulate|costs``.

Every command works against simulated chains whose state lives in a JSON
file, so stamping and verifying can happen in separate invocations.

Exit codes: 0 success, 1 verification failure or mismatch, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

from .cluster.scenario import parse_scenario
from .cluster.simulation import simulate
from .config import Config
from .engine import Engine
from .errors import BtaError, ProofMismatch, ScenarioError, UnknownChain, UnknownTransaction
from .hashing import Digest, sha256
from .payload import cost_per_stamp, dbta_daily_cost, total_cost
from .proof import from_json, to_chainpoint, to_json
from .simchain import dump_chains, load_chains
from .verifier import verify_anchor

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_STATE = "bta-chains.json"
DEFAULT_MANIFEST = "bta-manifest.json"

log = logging.getLogger("bta")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_config(args) -> Config:
    return Config.load(args.config) if args.config else Config()


def table(headers: list[str], rows: list[list]) -> str:
    cells = [headers] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:,.4f}".rstrip("0").rstrip(".") if not v.is_integer() else f"{int(v):,}"
    return f"{v:,}" if isinstance(v, int) else str(v)


# -- stamp

def cmd_stamp(args) -> int:
    config = _load_config(args)
    out_dir = Path(args.out_dir) if args.out_dir else None
    state = Path(args.chain_state)
    chains = load_chains(state) if state.exists() else None
    start = 0.0
    if chains:
        latest = max(c.now for c in chains.values())
        start = math.ceil(latest / config.slow.lifetime) * config.slow.lifetime
    engine = Engine(config, chains, start=start)

    files, errors = [], []
    for name in args.paths:
        path = Path(name)
        try:
            leaf = sha256(path.read_bytes())
        except OSError as exc:
            errors.append({"file": name, "error": exc.strerror or str(exc)})
            print(f"bta: cannot read {name}: {exc.strerror or exc}", file=sys.stderr)
            continue
        files.append((path, leaf, engine.submit(leaf)))

    if files:
        end = start + config.slow.lifetime
        engine.advance(end)
        # wait for the slow-chain block that confirms the frame
        interval = engine.slow_chain.block_interval
        engine.advance(math.ceil((end + interval) / config.fast.lifetime) * config.fast.lifetime)

    entries = []
    for path, leaf, receipt in files:
        pending = engine.pending[receipt]
        target = (out_dir or path.parent) / f"{path.name}.bta.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(to_json(pending.merged_proof, indent=2) + b"\n")
        entries.append({
            "file": str(path),
            "hash": leaf.hex(),
            "proof": str(target),
            "fast_proof": json.loads(to_json(pending.fast_proof)),
        })
    dump_chains(engine.chains.values(), state)

    fee = config.slow.fee
    n = len({leaf for _, leaf, _ in files})
    fast_txs = [t for t in engine.fast_chain.transactions.values() if t.submitted_at >= start]
    slow_txs = [t for t in engine.slow_chain.transactions.values() if t.submitted_at >= start]
    manifest = {
        "files": entries,
        "errors": errors,
        "chain_state": str(state),
        "transactions": {
            str(engine.fast_chain.chain_id): [t.tx_id for t in fast_txs],
            str(engine.slow_chain.chain_id): [t.tx_id for t in slow_txs],
        },
        "cost_per_stamp": {
            "fee": fee,
            "stamps": n,
            "naive": cost_per_stamp(n, fee, False) if n else None,
            "aggregated": cost_per_stamp(n, fee, True) if n else None,
        },
    }
    manifest_path = Path(args.manifest) if args.manifest else (out_dir or Path(".")) / DEFAULT_MANIFEST
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    print(f"stamped {len(entries)} file(s): {len(fast_txs)} fast and {len(slow_txs)} slow transaction(s)")
    if n:
        print(table(["stamps", "fee", "naive cost/stamp", "aggregated cost/stamp"],
                    [[n, fee, cost_per_stamp(n, fee, False), cost_per_stamp(n, fee, True)]]))
    print(f"manifest: {manifest_path}")
    return EXIT_FAIL if errors else EXIT_OK


# -- verify

def _target_leaf(args) -> Digest:
    if args.hash:
        return Digest.from_hex(args.hash)
    if args.data:
        return sha256(Path(args.data).read_bytes())
    raise ValueError("give the stamped data file or --hash")


def _read_proof(path):
    return from_json(Path(path).read_bytes())


def cmd_verify(args) -> int:
    try:
        proof = _read_proof(args.proof)
        leaf = _target_leaf(args)
        chains = load_chains(args.chain_state)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"bta: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = {"hash": leaf.hex(), "proof_root": proof.root.hex(), "chain_id": proof.anchor.chain_id,
              "tx_id": proof.anchor.tx_id}
    chain = chains.get(proof.anchor.chain_id)
    try:
        if chain is None:
            raise UnknownChain(proof.anchor.chain_id)
        report = verify_anchor(proof, chain, leaf)
    except (UnknownChain, UnknownTransaction) as exc:
        result.update(root_matches=False, anchor_matches=False, block_timestamp=None,
                      error=f"{type(exc).__name__}: {exc}")
        _emit(result)
        return EXIT_FAIL
    result.update(
        root_matches=report.root_matches,
        anchor_matches=report.anchor_matches,
        candidate_root=report.candidate_root.hex(),
        block_timestamp=report.block_timestamp,
    )
    if not report.root_matches:
        result["error"] = "root mismatch: the data does not fold to the proof root"
    elif not report.anchor_matches:
        result["error"] = "anchor mismatch: the transaction does not carry the root"
    _emit(result)
    return EXIT_OK if report.ok else EXIT_FAIL


# -- export

def cmd_export(args) -> int:
    if args.format != "chainpoint":
        print(f"bta: unsupported format {args.format}", file=sys.stderr)
        return EXIT_INPUT
    try:
        proof = _read_proof(args.proof)
        target = _target_leaf(args)
        document = to_chainpoint(proof, target)
    except ProofMismatch as exc:
        print(f"bta: ProofMismatch: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError, BtaError) as exc:
        print(f"bta: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.output:
        Path(args.output).write_bytes(document + b"\n")
    else:
        sys.stdout.write(document.decode("utf-8") + "\n")
    return EXIT_OK


# -- simulate

def bundled_scenarios() -> list[str]:
    root = resources.files("bta") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _scenario_text(name: str) -> str:
    path = Path(name)
    if path.exists():
        return path.read_text(encoding="utf-8")
    bundled = resources.files("bta") / "scenarios" / f"{name.removesuffix('.json')}.json"
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise FileNotFoundError(f"no scenario file {name} (bundled: {', '.join(bundled_scenarios())})")


def cmd_simulate(args) -> int:
    try:
        text = _scenario_text(args.scenario)
        if args.seed is not None:
            doc = json.loads(text)
            doc["seed"] = args.seed
            text = json.dumps(doc, indent=2)
        scenario = parse_scenario(text)
    except (OSError, ScenarioError) as exc:
        print(f"bta: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = simulate(scenario)
    summary = dict(result.summary)
    if not args.leaves:
        summary.pop("leaves")
    if args.transcript == "-":
        for line in result.transcript_lines():
            sys.stdout.write(line + "\n")
    elif args.transcript:
        result.write_transcript(args.transcript)
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.transcript != "-":
        _emit(summary)
    ok = summary["merged_proofs_verified"] == summary["submitted"] and not summary["errors"]
    return EXIT_OK if ok else EXIT_FAIL


# -- costs

def cmd_costs(args) -> int:
    config = _load_config(args)
    fee = args.fee if args.fee is not None else config.slow.fee
    rows = [[n, fee, cost_per_stamp(n, fee, False), cost_per_stamp(n, fee, True),
             total_cost(n, fee, False), total_cost(n, fee, True)] for n in args.stamps]
    print(f"cost per stamp, fee {_cell(fee)} per transaction")
    print(table(["stamps", "fee", "naive/stamp", "aggregated/stamp", "naive total", "aggregated total"], rows))
    lifetime = config.slow.lifetime
    rows = [[nu, dbta_daily_cost(nu, args.fee_usd, True, lifetime), dbta_daily_cost(nu, args.fee_usd, False, lifetime)]
            for nu in args.nodes]
    print()
    print(f"cluster cost per day, {_cell(args.fee_usd)} USD per slow transaction, {_cell(lifetime)} s frames")
    print(table(["nodes", "leader mode", "every node anchors"], rows))
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("counts must be positive")
    return values


def _common_options(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", default=default, help="engine configuration JSON")
    parser.add_argument("--seed", type=int, default=default, help="override the scenario seed")
    parser.add_argument("-v", "--verbose", action="store_true", default=default or False)


def build_parser() -> argparse.ArgumentParser:
    # the shared flags work before or after the command name; the copy on
    # each command suppresses its defaults so it cannot clobber the first
    common = argparse.ArgumentParser(add_help=False)
    _common_options(common, argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="bta", description="Blockchain timestamping over simulated chains.")
    _common_options(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stamp", parents=[common], help="hash files and anchor them")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out-dir", help="where proofs and the manifest go (default: next to each file)")
    p.add_argument("--chain-state", default=DEFAULT_STATE)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_stamp)

    p = sub.add_parser("verify", parents=[common], help="check a proof against the chain state")
    p.add_argument("proof")
    p.add_argument("data", nargs="?")
    p.add_argument("--hash", help="hex SHA-256 of the data, instead of the data itself")
    p.add_argument("--chain-state", default=DEFAULT_STATE)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", parents=[common], help="convert a proof to another format")
    p.add_argument("proof")
    p.add_argument("data", nargs="?")
    p.add_argument("--format", default="chainpoint")
    p.add_argument("--target-hash", dest="hash")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("simulate", parents=[common], help="run a cluster scenario")
    p.add_argument("scenario", help="scenario file or the name of a bundled one")
    p.add_argument("--transcript", help="write JSON lines here ('-' for stdout)")
    p.add_argument("--summary", help="also write the summary JSON here")
    p.add_argument("--leaves", action="store_true", help="include per-leaf results in the summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("costs", parents=[common], help="print cost tables")
    p.add_argument("--fee", type=float, help="fee per transaction (default: the slow chain fee)")
    p.add_argument("--stamps", type=_int_list, default=[1, 10, 100, 1000])
    p.add_argument("--nodes", type=_int_list, default=[1, 2, 3, 5, 8])
    p.add_argument("--fee-usd", type=float, default=1.5625)
    p.set_defaults(func=cmd_costs)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"bta: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
