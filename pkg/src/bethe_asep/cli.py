"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 incomplete certificate or failed
identity. Results go to stdout (or ``--output``), diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

from . import forests
from .bethe import BetheThresholds, dedup_up_to_permutation, solve_general
from .errors import BetheAsepError, BudgetExhausted, IdentityViolation, InvolutionBroken
from .ramify import DEFAULT_REGION, find_ramification, jordan_chain, sector_gap
from .serialize import (
    certificate_to_dict,
    dumps,
    encode_polynomial,
    event_to_dict,
    solution_set_to_dict,
    to_csv,
)
from .spectrum import certify

EXIT_OK, EXIT_USAGE, EXIT_INCOMPLETE = 0, 1, 2
COMMANDS = ("certify", "solve", "count", "ramify", "identity-suite")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    sites: int | None
    particles: int | None
    hopping_re: float
    hopping_im: float
    seed: int
    budget: int
    output_path: str | None
    format: str | None
    grid: int = 41
    region: tuple[float, float, float, float] = DEFAULT_REGION
    max_particles: int = 5
    dedup: bool = False

    @property
    def hopping(self) -> complex:
        return complex(self.hopping_re, self.hopping_im)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bethe-asep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--sites", "-L", type=int)
        p.add_argument("--particles", "-N", type=int)
        p.add_argument("--hopping", type=float, default=0.7, help="real part of p")
        p.add_argument("--hopping-im", type=float, default=0.0, help="imaginary part of p")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=4000)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=("json", "csv", "text"))
        if name == "ramify":
            p.add_argument("--grid", type=int, default=41)
            p.add_argument("--region", type=float, nargs=4, default=list(DEFAULT_REGION),
                           metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
        if name == "identity-suite":
            p.add_argument("--max-particles", type=int, default=5)
        if name == "solve":
            p.add_argument("--dedup", action="store_true", help="merge permutations of a root")
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=ns.command, sites=ns.sites, particles=ns.particles,
        hopping_re=ns.hopping, hopping_im=ns.hopping_im, seed=ns.seed, budget=ns.budget,
        output_path=ns.output, format=ns.format,
        grid=getattr(ns, "grid", 41), region=tuple(getattr(ns, "region", DEFAULT_REGION)),
        max_particles=getattr(ns, "max_particles", 5), dedup=getattr(ns, "dedup", False))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    needs_sites = cfg.command in ("certify", "solve", "ramify")
    if needs_sites and cfg.sites is None:
        raise UsageError(f"{cfg.command} requires --sites")
    if cfg.command in ("certify", "solve", "count") and cfg.particles is None:
        raise UsageError(f"{cfg.command} requires --particles")
    if cfg.sites is not None and cfg.sites < 1:
        raise UsageError("--sites must be at least 1")
    if cfg.particles is not None and cfg.particles < 1:
        raise UsageError("--particles must be at least 1")
    if needs_sites and cfg.particles is not None and cfg.particles > cfg.sites:
        raise UsageError(f"invalid dimensions: {cfg.particles} particles do not fit on {cfg.sites} sites")
    if cfg.command in ("certify", "solve"):
        if math.comb(cfg.sites, cfg.particles) > 5000:
            raise UsageError("state space too large (more than 5000 configurations)")
        for bad in (0.0, 0.5, 1.0):
            if abs(cfg.hopping - bad) < 1e-6:
                raise UsageError(f"hopping rate too close to excluded value {bad}")
    if cfg.command == "count" and cfg.particles > 6:
        raise UsageError("count supports --particles up to 6")
    if cfg.command == "ramify" and cfg.particles not in (None, 1, 2):
        raise UsageError("ramify supports --particles 1 or 2")
    if cfg.command == "identity-suite" and not 1 <= cfg.max_particles <= 7:
        raise UsageError("--max-particles must lie in 1..7")
    if cfg.budget < 1:
        raise UsageError("--budget must be positive")


# -- commands -----------------------------------------------------------------------

def _cmd_certify(cfg: RunConfig):
    cert = certify(cfg.sites, cfg.particles, cfg.hopping, seed=cfg.seed, budget=cfg.budget)
    data = certificate_to_dict(cert)
    code = EXIT_OK if cert.complete else EXIT_INCOMPLETE
    if not cert.complete:
        print(f"incomplete: {cert.reason}", file=sys.stderr)
    rows = [[k, data[k]] for k in ("L", "N", "eigenstate_count", "min_singular_proxy",
                                     "max_residual", "verdict", "reason", "starts_used")]
    rows += [["hopping", cert.hopping.p],
             ["trace_difference", cert.trace_check[2]],
             ["trace_sq_difference", cert.trace_sq_check[2]]]
    rows += [[f"eigenvalue_{i}", e] for i, e in enumerate(cert.eigenvalues)]
    text = (f"L={cert.L} N={cert.N} p={cert.hopping.p}\n"
            f"verdict: {cert.verdict}{' (' + cert.reason + ')' if cert.reason else ''}\n"
            f"eigenstates: {cert.eigenstate_count} of {math.comb(cert.L, cert.N)}\n"
            f"max residual: {cert.max_residual:.3e}\n"
            f"trace check: {cert.trace_check[2]:.3e}, trace-square check: {cert.trace_sq_check[2]:.3e}\n")
    return data, (["quantity", "value"], rows), text, code


def _cmd_solve(cfg: RunConfig):
    code = EXIT_OK
    try:
        sol = solve_general(cfg.sites, cfg.particles, cfg.hopping, seed=cfg.seed, budget=cfg.budget)
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        sol, code = exc.solutions, EXIT_INCOMPLETE
    if cfg.dedup:
        sol = dedup_up_to_permutation(sol)
    data = solution_set_to_dict(sol)
    header = ["index", "multiplicity", "admissibility", "residual_norm"]
    for i in range(sol.N):
        header += [f"xi{i + 1}_re", f"xi{i + 1}_im"]
    rows = []
    for k, (r, a) in enumerate(sol.roots):
        row = [k, r.multiplicity, str(a), r.residual_norm]
        for z in r.xi:
            row += [z.real, z.imag]
        rows.append(row)
    lines = [f"L={sol.L} N={sol.N} p={sol.hopping.p} starts={sol.starts_used}",
             f"admissible {sol.admissible_count} of {sol.target}, inadmissible {sol.inadmissible_count}"]
    for r, a in sol.roots:
        comps = ", ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in r.xi)
        lines.append(f"  [{comps}] x{r.multiplicity} {a}")
    return data, (header, rows), "\n".join(lines) + "\n", code


def _cmd_count(cfg: RunConfig):
    poly = forests.admissible_count(cfg.particles)
    data = {"N": cfg.particles, "admissible_count": encode_polynomial(poly),
            "lefschetz_total": encode_polynomial(forests.lefschetz_total(cfg.particles))}
    if cfg.sites is not None:
        data["L"] = cfg.sites
        data["value"] = str(poly(cfg.sites))
    rows = [[k, c] for k, c in enumerate(poly.coefficients)]
    return data, (["power", "coefficient"], rows), str(poly) + "\n", EXIT_OK


def _cmd_ramify(cfg: RunConfig):
    N = cfg.particles or 2
    events = find_ramification(cfg.sites, N, cfg.region, cfg.grid)
    items, rows, lines = [], [], []
    for ev in events:
        try:
            chain = jordan_chain(ev)
        except BetheAsepError as exc:
            print(f"no chain at p={ev.p_r}: {exc}", file=sys.stderr)
            chain = None
        items.append(event_to_dict(ev, chain))
        rows.append([ev.p_r.real, ev.p_r.imag, ev.sector, ev.gap_at_detection, ev.discriminant,
                     chain.first_order_residual if chain else "", chain.second_order_residual if chain else ""])
        lines.append(f"p_r = {ev.p_r:.12f} sector {ev.sector} discriminant {ev.discriminant:.2e}"
                     + (f" chain residuals {chain.first_order_residual:.2e}, {chain.second_order_residual:.2e}"
                        if chain else ""))
    data = {"L": cfg.sites, "N": N, "region": list(cfg.region), "grid": cfg.grid, "events": items}
    if not events:
        floor = _gap_floor(cfg) if N == 2 else None
        data["none_found"] = True
        data["min_gap_on_grid"] = floor
        lines.append(f"none found; smallest gap on grid {floor}")
    header = ["p_re", "p_im", "sector", "gap", "discriminant", "first_order_residual", "second_order_residual"]
    return data, (header, rows), "\n".join(lines) + "\n", EXIT_OK


def _gap_floor(cfg: RunConfig) -> float:
    import numpy as np
    re0, re1, im0, im1 = cfg.region
    best = math.inf
    for x in np.linspace(re0, re1, cfg.grid):
        for y in np.linspace(im0, im1, cfg.grid):
            try:
                best = min(best, sector_gap(cfg.sites, complex(x, y))[0])
            except BetheAsepError:
                continue
    return best


def identity_suite(max_particles: int) -> list[dict]:
    """Run every combinatorial identity up to ``max_particles``."""
    results = []

    def record(name, n, ok, detail=""):
        results.append({"identity": name, "N": n, "passed": bool(ok), "detail": detail})

    for n in range(1, min(max_particles, 7) + 1):
        total = forests.lefschetz_total(n)
        record("lefschetz_total_at_1", n, total(1) == (n + 1) ** (n - 1), str(total))
    record("lefschetz_total_two", 2, forests.lefschetz_total(2) == forests.CountPolynomial([0, 2, 1]),
           str(forests.lefschetz_total(2)))
    for n in range(1, min(max_particles, 6) + 1):
        try:
            poly = forests.admissible_count(n)
            record("admissible_count", n, True, str(poly))
        except IdentityViolation as exc:
            record("admissible_count", n, False, str(exc))
        stirling = forests.CountPolynomial([forests.stirling_first(n, k) for k in range(n + 1)])
        record("stirling_sum", n, stirling == forests.falling_factorial_polynomial(n), str(stirling))
        bad = [p.describe() for p in forests.enumerate_enhanced_partitions(n)
               if forests.weight_sum_check(p) != (1 if p.is_trivial else 0)]
        record("weight_sum", n, not bad, "; ".join(bad[:3]))
    for n in range(1, min(max_particles, 5) + 1):
        try:
            rep = forests.involution_check(n)
            record("involution", n, rep.passed, str(rep.survivor_total))
        except InvolutionBroken as exc:
            record("involution", n, False, str(exc))
    return results


def _cmd_identity_suite(cfg: RunConfig):
    results = identity_suite(cfg.max_particles)
    ok = all(r["passed"] for r in results)
    rows = [[r["identity"], r["N"], r["passed"], r["detail"]] for r in results]
    text = "".join(f"{'PASS' if r['passed'] else 'FAIL'} {r['identity']} N={r['N']} {r['detail']}\n"
                   for r in results)
    data = {"max_particles": cfg.max_particles, "passed": ok, "results": results}
    return data, (["identity", "N", "passed", "detail"], rows), text, EXIT_OK if ok else EXIT_INCOMPLETE


_DISPATCH = {"certify": _cmd_certify, "solve": _cmd_solve, "count": _cmd_count,
             "ramify": _cmd_ramify, "identity-suite": _cmd_identity_suite}
_DEFAULT_FORMAT = {"count": "text"}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        data, (header, rows), text, code = _DISPATCH[cfg.command](cfg)
    except (BetheAsepError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = cfg.format or _DEFAULT_FORMAT.get(cfg.command, "json")
    if fmt == "json":
        out = dumps(data)
    elif fmt == "csv":
        out = to_csv(header, rows)
    else:
        out = text
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
