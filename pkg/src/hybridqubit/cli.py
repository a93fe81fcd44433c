"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__, spins
from .errors import ConfigError, HybridQubitError, PerturbativeValidityWarning
from .hubbard import build_hubbard, exact_spectrum
from .sweep import (SweepSpec, _read_json, format_report, load_config, run_dynamics, run_sweep, validate)
from .sweff import effective_couplings


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt_spin(x: float) -> str:
    n = round(2 * x)
    return str(n // 2) if n % 2 == 0 else f"{n}/2"


def cmd_couplings(args) -> int:
    params, _ = load_config(args.config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PerturbativeValidityWarning)
        c = effective_couplings(params, args.prefactor)
    if args.json:
        print(json.dumps(c.as_dict(), indent=1, sort_keys=True))
    else:
        print(f"J1     = {c.J1:.10g} meV")
        print(f"J2     = {c.J2:.10g} meV")
        print(f"Jprime = {c.Jprime:.10g} meV")
        for occ, d in c.denominators.items():
            print(f"E{occ} - E(1, 1, 1) = {d:+.10g} meV")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return 0


def cmd_spectrum(args) -> int:
    params, override = load_config(args.config)
    res = exact_spectrum(build_hubbard(params))
    out = {"exact": [{"E": float(e), "S": float(s), "Sz": float(z)}
                     for e, s, z in zip(res.eigenvalues, res.spins, res.sz)]}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        try:
            c = override or effective_couplings(params)
        except HybridQubitError as exc:
            c = None
            out["effective_error"] = str(exc)
    if c is not None:
        eff = exact_spectrum(spins.heisenberg_hamiltonian(c), spins.total_spin_operators())
        out["effective"] = [{"E": float(e), "S": float(s), "Sz": float(z)}
                            for e, s, z in zip(eff.eigenvalues, eff.spins, eff.sz)]
    if args.json:
        print(json.dumps(out, indent=1))
        return 0
    print("exact three-electron spectrum [meV]:")
    for r in out["exact"]:
        print(f"  {r['E']:14.8f}  S={_fmt_spin(r['S']):>4s}  Sz={_fmt_spin(r['Sz']):>5s}")
    if "effective" in out:
        print("exchange model spectrum [meV]:")
        for r in out["effective"]:
            print(f"  {r['E']:14.8f}  S={_fmt_spin(r['S']):>4s}  Sz={_fmt_spin(r['Sz']):>5s}")
    else:
        print(f"exchange model unavailable: {out['effective_error']}")
    return 0


def cmd_sweep(args) -> int:
    params, _ = load_config(args.config)
    spec = SweepSpec.from_dict(_read_json(args.sweepspec), params)
    result = run_sweep(spec, workers=args.workers, timestamp=not args.reproducible)
    for path in result.write(args.out):
        print(path)
    failed = result.provenance.get("failed_cells", [])
    if failed:
        print(f"warning: {len(failed)} cell(s) have singular couplings (missing values)", file=sys.stderr)
    return 0


def cmd_dynamics(args) -> int:
    source = load_config(args.config)
    traj = run_dynamics(source, args.tmax, args.samples, seed=args.seed, timestamp=not args.reproducible)
    path = traj.write_csv(args.out)
    print(path)
    sw = traj.provenance["switching"]
    print(f"max |b|^2 over samples {np.max(traj.column('prob1')):.6g}; "
          f"analytic maximum {sw['max_transfer']:.6g} at t* = {sw['t_star_ps']} ps")
    return 0


def cmd_validate(args) -> int:
    params, override = load_config(args.config)
    rep = validate(params, override)
    print(json.dumps(rep, indent=1, sort_keys=True) if args.json else format_report(rep))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hybridqubit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("couplings", help="closed-form exchange couplings and denominators")
    s.add_argument("config")
    s.add_argument("--prefactor", type=float, default=4.0, help="superexchange prefactor (default 4)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_couplings)

    s = sub.add_parser("spectrum", help="exact and exchange-model spectra tagged by S, Sz")
    s.add_argument("config")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("sweep", help="two-axis stationary sweep to CSV + JSON")
    s.add_argument("config")
    s.add_argument("sweepspec")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--reproducible", action="store_true", help="omit the timestamp from provenance")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("dynamics", help="qubit trajectory from |0> with Bloch coordinates")
    s.add_argument("config")
    s.add_argument("--tmax", type=float, required=True, help="final time in ps")
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reproducible", action="store_true", help="omit the timestamp from provenance")
    s.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("validate", help="hierarchy, denominators and cross-check report")
    s.add_argument("config")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except HybridQubitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
