"""``fastdiff-shock {profile,simulate,verify,sweep}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from fastdiff_shock.acceptance import run_acceptance
from fastdiff_shock.config import baseline_config, load_config
from fastdiff_shock.errors import ConfigError, NewtonError, ProfileError, ShiftInvariantError
from fastdiff_shock.harness import simulate, sweep, write_profile


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fastdiff-shock",
                                description="Viscous shock profiles of fast-diffusion Burgers-type equations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("profile", "build the travelling-wave profile table"),
                       ("simulate", "run the half-line simulation"),
                       ("verify", "run the acceptance suite"),
                       ("sweep", "run the m x center sweep")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="key = value config file (default: built-in baseline)")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--record-every", type=int, help="steps between ledger records")
        sp.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply acceptance tolerances (values < 1 tighten)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else baseline_config()
        if args.record_every is not None:
            if args.record_every < 1:
                raise ConfigError("--record-every must be >= 1")
            cfg = replace(cfg, settings=replace(cfg.settings, record_every=args.record_every))
        out = Path(args.out or cfg.out_dir)
        if args.command == "profile":
            summary = write_profile(cfg, out)
            print(f"profile written to {out}; lambda_minus={summary['lambda_minus']:.17g}")
        elif args.command == "simulate":
            res = simulate(cfg, out)
            ts = res.timeseries[-1]
            print(f"simulation written to {out}; t={ts['t']:.6g} d={ts['d']:.17g} sup_err={ts['sup_err']:.3e}")
        elif args.command == "verify":
            results = run_acceptance(cfg, args.tolerance_scale, log=lambda s: print(s, flush=True))
            failed = [r for r in results if not r.passed]
            print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
            return 1 if failed else 0
        else:
            rows = sweep(cfg, out)
            bad = sum(r["status"] != "ok" for r in rows)
            print(f"sweep written to {out / 'sweep.csv'}; {len(rows) - bad} ok, {bad} failed")
    except (ConfigError, ProfileError, ShiftInvariantError, NewtonError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
