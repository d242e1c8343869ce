"""
Command-line driver: single runs and parameter sweeps as CSV or JSON-lines.

Subcommands
-----------
evolve        position statistics after each recorded step
quantumness   Q, C and total Q, optionally swept over parameters
transport     loop transport efficiencies against quantumness
oracle-check  closed-form amplitudes against the step-by-step engine

Every table starts with ``# key=value`` metadata lines followed by a header
row. Numbers carry 12 significant digits; divergent values print as ``inf``.
Exit codes: 0 ok, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from qwq import __version__
from qwq.closed_form import closed_form_state
from qwq.coin import CoinOperator, CoinState, hadamard, identity, parameterized_coin, pauli_z
from qwq.distribution import variance
from qwq.engine import (
    Line,
    Loop,
    NoiseChannel,
    SinkChannel,
    builtin_channel,
    evolve_noisy,
    evolve_pure,
    iter_noisy,
    iter_pure,
    position_marginal,
)
from qwq.errors import ConsistencyError, DivergentQWarning, QWError, SingularCoin
from qwq.quantumness import shannon_entropy, total_quantumness
from qwq.transport import transport_report

__all__ = ["SweepSpec", "main", "parse_coin", "parse_init", "parse_sweep"]

NAMED_COINS: dict[str, Callable[[], CoinOperator]] = {
    "hadamard": hadamard,
    "identity": identity,
    "pauli-z": pauli_z,
}
CHANNELS = ("identity", "contraction", "unital-decay", "amplitude-damping", "depolarizing")
COIN_AXES = ("alpha", "beta", "theta")
INIT_AXES = ("eta", "gamma")
INT_AXES = ("tau", "loop", "sink_site", "start")
FLOAT_AXES = ("q", "sink_r") + COIN_AXES + INIT_AXES
AXES = FLOAT_AXES + INT_AXES
ORACLE_TOL = 1e-10


class UsageError(Exception):
    """Bad flag; the message names it."""


# ---------------------------------------------------------------------------
# grammar


def parse_coin(text: str) -> tuple[str, Optional[tuple[float, float, float]]]:
    """``hadamard | identity | pauli-z | param:a,b,theta`` -> (kind, params)."""
    t = text.strip().lower()
    if t in NAMED_COINS:
        return t, None
    if t.startswith("param:"):
        parts = t[len("param:") :].split(",")
        if len(parts) != 3:
            raise UsageError(f"--coin: expected param:<alpha>,<beta>,<theta>, got {text!r}")
        try:
            a, b, th = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"--coin: non-numeric angle in {text!r}") from None
        return "param", (a, b, th)
    raise UsageError(f"--coin: unknown coin {text!r}")


def _angle(text: str, flag: str) -> float:
    s = text.strip()
    if s == "+":
        return 0.0
    if s == "-":
        return math.pi / 2
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"{flag}: cannot read {text!r} as an angle") from None


def parse_init(text: str) -> tuple[float, float]:
    """``"<eta>;<gamma>"``, with ``+`` / ``-`` for eta = 0 / pi/2; gamma defaults to 0."""
    parts = text.split(";")
    if len(parts) > 2 or not parts[0].strip():
        raise UsageError(f"--init: expected \"<eta>;<gamma>\", got {text!r}")
    eta = _angle(parts[0], "--init")
    gamma = float(parts[1]) if len(parts) == 2 and parts[1].strip() else 0.0
    return eta, gamma


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> list[float]:
        vals = np.linspace(self.start, self.stop, self.count)
        if self.name in INT_AXES:
            return [int(round(v)) for v in vals]
        return [float(v) for v in vals]


def parse_sweep(text: str) -> Axis:
    """``name:start:stop:count``, inclusive endpoints, linear spacing."""
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--sweep: expected name:start:stop:count, got {text!r}")
    name = parts[0].strip().replace("-", "_")
    if name not in AXES:
        raise UsageError(f"--sweep: unknown axis {parts[0]!r} (choose from {', '.join(AXES)})")
    try:
        start, stop = float(parts[1]), float(parts[2])
        count = int(parts[3])
    except ValueError:
        raise UsageError(f"--sweep: non-numeric field in {text!r}") from None
    if count < 2:
        raise UsageError(f"--sweep: count must be >= 2, got {count}")
    return Axis(name, start, stop, count)


# ---------------------------------------------------------------------------
# resolved parameters


@dataclass
class SweepSpec:
    """Everything a run needs, with sweep axes applied per row."""

    command: str
    axes: list[Axis]
    fixed: dict[str, Any]
    classical_mode: str = "optimal"
    fmt: str = "csv"
    output: Optional[str] = None
    threads: int = 1
    extras: dict[str, Any] = field(default_factory=dict)

    def points(self) -> list[dict[str, Any]]:
        grids = [a.values() for a in self.axes]
        out = []
        for combo in itertools.product(*grids):
            p = dict(self.fixed)
            p.update(zip((a.name for a in self.axes), combo))
            out.append(p)
        return out


def _coin(p: dict[str, Any]) -> CoinOperator:
    if p["coin"] == "param":
        return parameterized_coin(p["alpha"], p["beta"], p["theta"])
    return NAMED_COINS[p["coin"]]()


def _channel(p: dict[str, Any]) -> NoiseChannel:
    return builtin_channel(p["channel"], p["q"])


def _topology(p: dict[str, Any]):
    if p.get("loop") is None:
        return Line()
    return Loop(int(p["loop"]), int(p["sink_site"]), float(p["sink_r"]))


def _validate_point(p: dict[str, Any], flag_of: dict[str, str]) -> None:
    """Build every object once so domain errors surface as usage errors."""
    checks = [
        ("coin", lambda: _coin(p)),
        ("init", lambda: CoinState.pure(p["eta"], p["gamma"])),
        ("q", lambda: _channel(p)),
        ("loop", lambda: _topology(p)),
    ]
    for key, build in checks:
        try:
            build()
        except (QWError, ValueError) as exc:
            raise UsageError(f"{flag_of.get(key, key)}: {exc}") from None
    if p.get("tau") is not None and int(p["tau"]) < 1:
        raise UsageError(f"{flag_of.get('tau', '--tau')}: must be >= 1")
    if p.get("loop") is not None and not 1 <= int(p["start"]) <= int(p["loop"]):
        raise UsageError(f"--start: site {p['start']} outside 1..{p['loop']}")


# ---------------------------------------------------------------------------
# row computations


def _line_state(p: dict[str, Any], tau: int):
    """Final line state; the unitary path is used when there is no noise."""
    c = _coin(p)
    s0 = CoinState.pure(p["eta"], p["gamma"])
    if p["channel"] == "identity":
        return evolve_pure(c, s0, tau)
    return evolve_noisy(c, s0, _channel(p), Line(), tau, validate=False)


def _walk_state(p: dict[str, Any], tau: int):
    t = _topology(p)
    if isinstance(t, Line):
        return _line_state(p, tau), t
    c = _coin(p)
    s0 = CoinState.pure(p["eta"], p["gamma"])
    state = evolve_noisy(c, s0, _channel(p), t, tau, SinkChannel(t), p["start"], validate=False)
    return state, t


def quantumness_row(p: dict[str, Any]) -> dict[str, Any]:
    tau = int(p["tau"])
    state, t = _walk_state(p, tau)
    d, rho = position_marginal(state)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentQWarning)
        rep = total_quantumness(rho, t, tau, p.get("start") or 1, support=d.support)
    mean, var = variance(d)
    diag = ""
    if math.isinf(rep.q_value):
        diag = "reference has no mass at x=" + "|".join(str(x) for x in rep.divergent_support)
    return {
        "Q": rep.q_value,
        "C": rep.coherence,
        "total_Q": rep.total,
        "p_plus_star": rep.p_plus_star,
        "upper_bound_eq8": rep.upper_bound if rep.upper_bound is not None else "",
        "variance": var,
        "mean": mean,
        "diagnostics": diag,
    }


def transport_row(p: dict[str, Any]) -> dict[str, Any]:
    t = _topology(p)
    mode = p["classical_mode"]
    cm: Any = "optimal" if mode == "optimal" else float(mode.split(":", 1)[1])
    res = transport_report(
        _coin(p),
        CoinState.pure(p["eta"], p["gamma"]),
        t,
        _channel(p),
        int(p["tau"]),
        classical_mode=cm,
        start=p["start"],
        record="final",
    )
    f = res.final()
    diag = "" if bool(res.chain_holds[-1]) else "chain total_Q >= Q >= u fails"
    if math.isinf(f["Q"]):
        diag = (diag + "; " if diag else "") + "Q diverges"
    return {
        "eta_qw": f["eta_qw"],
        "eta_rw": f["eta_rw"],
        "deviation": f["deviation"],
        "u": f["u"],
        "Q": f["Q"],
        "total_Q": f["total_Q"],
        "classical_mode": res.classical_mode,
        "classical_p_plus": f["classical_p_plus"],
        "diagnostics": diag,
    }


QUANTUMNESS_COLUMNS = ["Q", "C", "total_Q", "p_plus_star", "upper_bound_eq8", "variance", "mean", "diagnostics"]
TRANSPORT_COLUMNS = [
    "eta_qw", "eta_rw", "deviation", "u", "Q", "total_Q",
    "classical_mode", "classical_p_plus", "diagnostics",
]  # fmt: skip


# ---------------------------------------------------------------------------
# output


def fmt_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v == 0.0:
            return "0"
        return f"{v:.12g}"
    return str(v)


def _json_value(v: Any) -> Any:
    s = fmt_value(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(s) if math.isfinite(float(v)) else s
    return s


class TableWriter:
    def __init__(self, stream, fmt: str, meta: dict[str, Any], columns: Sequence[str]):
        self.stream = stream
        self.fmt = fmt
        self.columns = list(columns)
        for k, v in meta.items():
            stream.write(f"# {k}={fmt_value(v)}\n")
        if fmt == "csv":
            self._csv = csv.writer(stream, lineterminator="\n")
            self._csv.writerow(self.columns)
        else:
            stream.write("# columns=" + ",".join(self.columns) + "\n")

    def row(self, values: dict[str, Any]) -> None:
        if self.fmt == "csv":
            self._csv.writerow([fmt_value(values[c]) for c in self.columns])
        else:
            obj = {c: _json_value(values[c]) for c in self.columns}
            self.stream.write(json.dumps(obj) + "\n")


def _open_output(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ---------------------------------------------------------------------------
# argument parsing


def _add_walk_flags(sp: argparse.ArgumentParser, tau_flag: bool = True) -> None:
    sp.add_argument("--coin", default="hadamard", help="hadamard | identity | pauli-z | param:a,b,theta")
    sp.add_argument("--init", default=None, help='initial coin "<eta>;<gamma>" (radians; + and - allowed)')
    sp.add_argument("--init-eta", default=None, help="initial eta (overrides --init)")
    sp.add_argument("--init-gamma", type=float, default=None, help="initial gamma (overrides --init)")
    sp.add_argument("--channel", default="identity", choices=CHANNELS)
    sp.add_argument("--q", "--channel-param", dest="q", type=float, default=None,
                    help="channel parameter (q for unital-decay, p+ for contraction, ...)")  # fmt: skip
    sp.add_argument("--loop", type=int, default=None, help="loop with N sites (default: line)")
    sp.add_argument("--sink-site", type=int, default=None)
    sp.add_argument("--sink-r", type=float, default=None)
    sp.add_argument("--start", type=int, default=1, help="initial loop site")
    if tau_flag:
        sp.add_argument("--tau", type=int, default=None)
    sp.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default="csv")
    sp.add_argument("--output", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qwq", description="Quantumness of coined quantum walks.")
    ap.add_argument("--version", action="version", version=f"qwq {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="position statistics per step")
    _add_walk_flags(ev, tau_flag=False)
    ev.add_argument("--steps", type=int, default=None)
    ev.add_argument("--record-every", type=int, default=1)
    ev.add_argument("--full-distribution", action="store_true")

    for name in ("quantumness", "transport"):
        sp = sub.add_parser(name, help=f"{name} table, optionally swept")
        _add_walk_flags(sp)
        sp.add_argument("--sweep", action="append", default=[], help="name:start:stop:count (repeatable)")
        sp.add_argument("--threads", type=int, default=1)
        if name == "transport":
            sp.add_argument("--classical-mode", default="optimal", help="optimal | fixed:<p_plus>")

    oc = sub.add_parser("oracle-check", help="closed form vs step-by-step engine")
    oc.add_argument("--coin", action="append", default=[])
    oc.add_argument("--init", default="0;0")
    oc.add_argument("--max-tau", type=int, default=30)
    oc.add_argument("--random-coins", type=int, default=0)
    oc.add_argument("--seed", type=int, default=0)
    return ap


def _resolve_common(args: argparse.Namespace) -> tuple[dict[str, Any], dict[str, str]]:
    kind, angles = parse_coin(args.coin)
    eta, gamma = parse_init(args.init) if args.init is not None else (0.0, 0.0)
    if args.init_eta is not None:
        eta = _angle(args.init_eta, "--init-eta")
    if args.init_gamma is not None:
        gamma = args.init_gamma
    a, b, th = angles if angles is not None else (None, None, None)
    q = args.q
    if args.channel != "identity" and q is None:
        q = 0.0
    fixed = {
        "coin": kind, "alpha": a, "beta": b, "theta": th, "eta": eta, "gamma": gamma,
        "channel": args.channel, "q": q, "loop": args.loop, "sink_site": args.sink_site,
        "sink_r": args.sink_r, "start": args.start,
    }  # fmt: skip
    if args.loop is not None:
        if args.sink_site is None:
            raise UsageError("--sink-site: required with --loop")
        if args.sink_r is None:
            fixed["sink_r"] = 1.0
    flags = {"coin": "--coin", "init": "--init", "q": "--q", "loop": "--loop/--sink-site/--sink-r", "tau": "--tau"}
    return fixed, flags


def _spec_from_args(args: argparse.Namespace) -> SweepSpec:
    fixed, flags = _resolve_common(args)
    axes = [parse_sweep(s) for s in args.sweep]
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise UsageError("--sweep: axis given twice")
    if any(n in COIN_AXES for n in names) and fixed["coin"] != "param":
        raise UsageError("--sweep: coin angles can only be swept with --coin param:...")
    if "q" in names and fixed["channel"] == "identity":
        raise UsageError("--sweep: sweeping q needs a --channel other than identity")
    if any(n in ("sink_site", "sink_r", "start") for n in names) and fixed["loop"] is None:
        raise UsageError("--sweep: loop axes need --loop")
    fixed["tau"] = args.tau
    if args.tau is None and "tau" not in names:
        raise UsageError("--tau: required")
    if args.threads < 1:
        raise UsageError("--threads: must be >= 1")
    spec = SweepSpec(args.command, axes, fixed, fmt=args.fmt, output=args.output, threads=args.threads)
    if args.command == "transport":
        if fixed["loop"] is None:
            raise UsageError("--loop: transport needs a loop topology")
        mode = args.classical_mode.strip().lower()
        if mode != "optimal":
            if not mode.startswith("fixed:"):
                raise UsageError("--classical-mode: expected optimal or fixed:<p_plus>")
            try:
                pv = float(mode.split(":", 1)[1])
            except ValueError:
                raise UsageError("--classical-mode: non-numeric p_plus") from None
            if not 0.0 <= pv <= 1.0:
                raise UsageError("--classical-mode: p_plus outside [0, 1]")
        spec.classical_mode = mode
        spec.fixed["classical_mode"] = mode
    for p in spec.points():
        _validate_point(p, flags)
    return spec


def _metadata(spec: SweepSpec) -> dict[str, Any]:
    meta: dict[str, Any] = {"tool": "qwq", "version": __version__, "command": spec.command}
    for k, v in spec.fixed.items():
        if v is None or k == "classical_mode":
            continue
        if k == "start" and spec.fixed.get("loop") is None:
            continue
        meta[k] = v
    for a in spec.axes:
        meta[f"sweep.{a.name}"] = f"{fmt_value(a.start)}:{fmt_value(a.stop)}:{a.count}"
    meta["classical_mode"] = spec.classical_mode
    meta["format"] = spec.fmt
    meta.update(spec.extras)
    return meta


# ---------------------------------------------------------------------------
# commands


def cmd_evolve(args: argparse.Namespace, out) -> int:
    if args.steps is None:
        raise UsageError("--steps: required")
    if args.steps < 1:
        raise UsageError("--steps: must be >= 1")
    if args.record_every < 1:
        raise UsageError("--record-every: must be >= 1")
    fixed, flags = _resolve_common(args)
    fixed["tau"] = args.steps
    _validate_point(fixed, flags)
    spec = SweepSpec("evolve", [], fixed, fmt=args.fmt)
    spec.extras = {"steps": args.steps, "record_every": args.record_every}
    cols = ["tau", "mean", "variance", "shannon_entropy"]
    if args.full_distribution:
        cols.append("distribution")
    writer = TableWriter(out, args.fmt, _metadata(spec), cols)

    t = _topology(fixed)
    c = _coin(fixed)
    s0 = CoinState.pure(fixed["eta"], fixed["gamma"])
    if isinstance(t, Line) and fixed["channel"] == "identity":
        states = iter_pure(c, s0, args.steps)
    else:
        sink = SinkChannel(t) if isinstance(t, Loop) else None
        start = fixed["start"] if isinstance(t, Loop) else None
        states = iter_noisy(c, s0, _channel(fixed), t, args.steps, sink, start)
    for state in states:
        tau = state.tau
        if tau % args.record_every and tau != args.steps:
            continue
        d, _ = position_marginal(state)
        mean, var = variance(d)
        row = {"tau": tau, "mean": mean, "variance": var, "shannon_entropy": shannon_entropy(d)}
        if args.full_distribution:
            row["distribution"] = ";".join(f"{x}:{fmt_value(float(pr))}" for x, pr in zip(d.support, d.probs))
        writer.row(row)
    return 0


def _run_sweep(spec: SweepSpec, out, compute: Callable[[dict], dict], columns: list[str]) -> int:
    axis_cols = [a.name for a in spec.axes]
    writer = TableWriter(out, spec.fmt, _metadata(spec), axis_cols + columns)
    points = spec.points()
    # Executor.map yields in submission order, so output order is fixed
    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        for p, res in zip(points, pool.map(compute, points)):
            row = {a: p[a] for a in axis_cols}
            row.update(res)
            writer.row(row)
    return 0


def cmd_quantumness(args: argparse.Namespace, out) -> int:
    spec = _spec_from_args(args)
    return _run_sweep(spec, out, quantumness_row, QUANTUMNESS_COLUMNS)


def cmd_transport(args: argparse.Namespace, out) -> int:
    spec = _spec_from_args(args)
    try:
        return _run_sweep(spec, out, transport_row, TRANSPORT_COLUMNS)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _random_coin(rng: np.random.Generator) -> tuple[CoinOperator, CoinState]:
    """Random coin with every |U_ij| > 0.1 and a random initial state."""
    while True:
        a, b = rng.uniform(0.0, math.pi / 2, size=2)
        th = rng.uniform(0.0, math.pi / 2)
        c = parameterized_coin(a, b, th)
        if np.min(np.abs(np.asarray(c.matrix))) > 0.1:
            break
    eta, gamma = rng.uniform(0.0, math.pi / 2), rng.uniform(0.0, 2 * math.pi)
    return c, CoinState.pure(eta, gamma)


def cmd_oracle_check(args: argparse.Namespace, out) -> int:
    if args.max_tau < 0:
        raise UsageError("--max-tau: must be >= 0")
    if args.random_coins < 0:
        raise UsageError("--random-coins: must be >= 0")
    eta, gamma = parse_init(args.init)
    try:
        s_named = CoinState.pure(eta, gamma)
    except (QWError, ValueError) as exc:
        raise UsageError(f"--init: {exc}") from None
    cases: list[tuple[str, CoinOperator, CoinState]] = []
    coin_flags = args.coin or ([] if args.random_coins else ["hadamard"])
    for text in coin_flags:
        kind, angles = parse_coin(text)
        try:
            c = parameterized_coin(*angles) if kind == "param" else NAMED_COINS[kind]()
        except (QWError, ValueError) as exc:
            raise UsageError(f"--coin: {exc}") from None
        cases.append((text, c, s_named))
    rng = np.random.default_rng(args.seed)
    for i in range(args.random_coins):
        c, s0 = _random_coin(rng)
        cases.append((f"random[{i}]", c, s0))

    out.write(f"# tool=qwq\n# version={__version__}\n# command=oracle-check\n")
    out.write(f"# max_tau={args.max_tau}\n# seed={args.seed}\n# tolerance={fmt_value(ORACLE_TOL)}\n")
    worst = (0.0, "", 0, 0)
    for label, c, s0 in cases:
        dev, where = 0.0, (0, 0)
        try:
            for tau in range(args.max_tau + 1):
                a = closed_form_state(c, s0, tau)
                b = evolve_pure(c, s0, tau)
                diff = np.maximum(np.abs(a.psi_plus - b.psi_plus), np.abs(a.psi_minus - b.psi_minus))
                j = int(np.argmax(diff))
                if diff[j] > dev:
                    dev, where = float(diff[j]), (tau, int(a.positions[j]))
        except SingularCoin as exc:
            out.write(f"coin={label} status=skipped reason=SingularCoin ({exc})\n")
            continue
        status = "ok" if dev < ORACLE_TOL else "FAIL"
        out.write(f"coin={label} max_deviation={fmt_value(dev)} status={status}\n")
        if dev > worst[0]:
            worst = (dev, label, *where)
    out.write(f"max_deviation={fmt_value(worst[0])}\n")
    if worst[0] >= ORACLE_TOL:
        out.write(f"worst coin={worst[1]} tau={worst[2]} x={worst[3]}\n")
        return 1
    return 0


COMMANDS = {
    "evolve": cmd_evolve,
    "quantumness": cmd_quantumness,
    "transport": cmd_transport,
    "oracle-check": cmd_oracle_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        print(f"qwq {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except QWError as exc:
        print(f"qwq {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    # nothing is written until the run finishes, so failures leave no partial file
    stream, close = _open_output(getattr(args, "output", None))
    try:
        stream.write(buf.getvalue())
    finally:
        if close:
            stream.close()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
