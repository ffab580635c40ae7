"""Command-line front end: ``cknlab <command> [--config FILE] [--out DIR]``.

Configuration is an INI file (``configparser``) or a JSON object with the
same sections; every key has a default, so a command runs without a file.
Each command writes JSON/CSV artifacts tagged with the config hash and the
package version and prints a single verdict line. Exit status is 0 on
pass, 2 on a failed verdict and 1 on an error.

Sections and keys (defaults in :data:`DEFAULTS`)::

    [params]        d, a, b
    [nonlinearity]  kind, p, mu, terms (JSON list of [coeff, exponent])
    [domain]        kind (origin_ball | offset_ball | annulus | flattened |
                    dimpled | perturbed), R, offset, r_in, eps, sampling
    [grid]          h, r_min, r_max, order, n_r, n_theta
    [radial]        mode (shoot | scan), R, u0, u0_min, u0_max, grid
    [identity]      count, bump_center, bump_radius, eps, tolerance
    [flow]          t_max, exit_tol, init_mean, init_amplitude, n_r, n_theta
    [sweep]         spec (JSON object for :func:`cknlab.flow.sweep`; empty
                    means the default sweep), db
"""
from __future__ import annotations

import argparse
import configparser
import copy
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import CknLabError, ConfigError

__all__ = ["DEFAULTS", "load_config", "main", "run"]

COMMANDS = ("params", "check-domain", "solve-radial", "verify-identity", "flow", "sweep")
IDENTITIES = ("lemma22", "lemma23", "boundary-split", "prop21", "decomposition", "k-bound",
              "J-decay", "energy")

DEFAULTS = {
    "params": {"d": 3, "a": 0.2, "b": 0.2},
    "nonlinearity": {"kind": "one_minus_power", "p": 5.0, "mu": 2.0, "terms": "[]"},
    "domain": {"kind": "origin_ball", "R": 1.0, "offset": 0.0, "r_in": 0.5, "eps": 0.05,
               "sampling": 32},
    "grid": {"h": 0.05, "r_min": 0.5, "r_max": 1.0, "order": 2, "n_r": 81, "n_theta": 41},
    "radial": {"mode": "scan", "R": 1.0, "u0": 0.5, "u0_min": 0.05, "u0_max": 20.0,
               "grid": 400},
    "identity": {"count": 1, "bump_center": "[0.0, 0.4, 0.6]", "bump_radius": 0.22,
                 "eps": 0.0, "tolerance": 0.0},
    "flow": {"t_max": 200.0, "exit_tol": 1e-9, "init_mean": 1.0, "init_amplitude": 0.5,
             "n_r": 24, "n_theta": 24},
    "sweep": {"spec": "", "db": "runs.jsonl"},
    "seed": 0,
}


# ---------------------------------------------------------------------------
# configuration


def _coerce(value, default, path):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ConfigError(path, f"expected a boolean, got {value!r}")
    if isinstance(default, int):
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected an integer, got {value!r}") from None
        if f != int(f):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(f)
    if isinstance(default, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected a number, got {value!r}") from None
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return str(value)


def _merge(raw: dict) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key not in cfg:
            raise ConfigError(key, "unknown section")
        if not isinstance(cfg[key], dict):
            cfg[key] = _coerce(val, cfg[key], key)
            continue
        if not isinstance(val, dict):
            raise ConfigError(key, "expected a section")
        for k, v in val.items():
            path = f"{key}.{k}"
            if k not in cfg[key]:
                raise ConfigError(path, "unknown key")
            cfg[key][k] = _coerce(v, cfg[key][k], path)
    return cfg


def load_config(path: str | None) -> dict:
    """Read an INI or JSON config and fill in defaults. In an INI file the
    top-level ``seed`` lives in a ``[run]`` section."""
    if path is None:
        return _merge({})
    if not os.path.exists(path):
        raise ConfigError("--config", f"no such file {path!r}")
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
    else:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("--config", f"invalid INI: {exc}") from None
        raw = {s: dict(parser[s]) for s in parser.sections()}
        run = raw.pop("run", {})
        raw.update(run)
    return _merge(raw)


def config_hash(cfg: dict) -> str:
    from .flow import config_hash as _h

    return _h(cfg)


def _json_field(cfg, section, key):
    text = cfg[section][key]
    try:
        return json.loads(text) if text else None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{section}.{key}", f"invalid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# builders


def _params(cfg):
    from .errors import AdmissibilityError
    from .params import derive_parameters

    c = cfg["params"]
    try:
        return derive_parameters(c["d"], c["a"], c["b"])
    except AdmissibilityError as exc:
        raise ConfigError("params", str(exc)) from None


def _spec(cfg):
    from .params import nonlinearity_from_dict

    c = dict(cfg["nonlinearity"])
    c["terms"] = _json_field(cfg, "nonlinearity", "terms") or []
    try:
        return nonlinearity_from_dict(c)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("nonlinearity.kind", str(exc)) from None


def _domain(cfg, alpha):
    from .flow import Annulus
    from .geometry import OffsetBall, OriginBall, example_domains

    c = cfg["domain"]
    kind = c["kind"]
    if kind == "origin_ball":
        return OriginBall(c["R"], cfg["params"]["d"])
    if kind == "offset_ball":
        center = np.zeros(cfg["params"]["d"])
        center[-1] = c["offset"]
        return OffsetBall(center, c["R"])
    if kind == "annulus":
        return Annulus(c["r_in"], c["R"])
    if kind in ("flattened", "dimpled", "perturbed"):
        return example_domains(kind, alpha=alpha, eps=c["eps"], R=c["R"],
                               offset=c["offset"] or 1.5)
    raise ConfigError("domain.kind", f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# output


class Output:
    """Collects artifacts and writes each one atomically (temp file, rename)."""

    def __init__(self, out_dir, cfg):
        self.dir = out_dir
        self.meta = {"config_hash": config_hash(cfg), "version": __version__}
        os.makedirs(out_dir, exist_ok=True)

    def _write(self, name, text):
        path = os.path.join(self.dir, name)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
        return path

    def tagged(self, name, writer):
        """Let ``writer(path)`` produce a CSV in a scratch file, then publish
        it with the hash and version columns prepended."""
        fd, scratch = tempfile.mkstemp(dir=self.dir, prefix=".raw-", suffix=".csv")
        os.close(fd)
        os.remove(scratch)
        try:
            writer(scratch)
            with open(scratch, newline="") as fh:
                rows = list(csv.reader(fh))
        finally:
            if os.path.exists(scratch):
                os.remove(scratch)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows:
            w.writerow(["config_hash", "version"] + rows[0])
            for row in rows[1:]:
                w.writerow([self.meta["config_hash"], self.meta["version"]] + row)
        return self._write(name, buf.getvalue())

    def json(self, name, record):
        from .identities import _jsonable

        body = dict(self.meta)
        body.update(_jsonable(record))
        return self._write(name, json.dumps(body, sort_keys=True, indent=2) + "\n")

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["config_hash", "version"] + list(header))
        for row in rows:
            w.writerow([self.meta["config_hash"], self.meta["version"]]
                       + [repr(float(x)) if isinstance(x, (float, np.floating)) else x
                          for x in row])
        return self._write(name, buf.getvalue())


# ---------------------------------------------------------------------------
# commands


def cmd_params(cfg, out, args):
    from .params import classify_regime, phi_monotonicity

    p = _params(cfg)
    spec = _spec(cfg)
    reg = classify_regime(p)
    mono = phi_monotonicity(spec, p)
    rec = {"params": p.as_dict(), "regime": reg.as_dict(), "phi_gate": mono.label(),
           "phi_violated_at": mono.violated_at, "gamma": p.critical_exponent}
    out.json("params.json", rec)
    line = (f"alpha={p.alpha:.6g} n={p.n:.6g} q={p.q:.6g} alpha_fs={p.alpha_fs:.6g} "
            f"strong_threshold={p.strong_threshold:.6g} fs_symmetric={reg.fs_symmetric} "
            f"strong={reg.strong} phi={mono.label()}")
    return True, line


def cmd_check_domain(cfg, out, args):
    from .flow import Annulus, domain_margin
    from .geometry import OffsetBall, OriginBall, condition_margin, is_convex, is_g_convex

    p = _params(cfg)
    dom = _domain(cfg, p.alpha)
    rec = {"domain": repr(dom), "alpha": p.alpha}
    if isinstance(dom, (OriginBall, OffsetBall, Annulus)):
        margin = float(domain_margin(dom, p.alpha))
        rec["margin_exact"] = margin
        if isinstance(dom, (OriginBall, OffsetBall)):
            x0 = float(np.linalg.norm(dom.center))
            rec["ball_criterion"] = bool(x0 <= p.alpha * dom.R or x0 > dom.R) \
                if x0 != dom.R else False
    if not isinstance(dom, Annulus):
        s = int(cfg["domain"]["sampling"])
        rep = condition_margin(dom, p.alpha, sampling=s)
        rec["margin_sampled"] = rep.min_margin
        rec["argmin"] = rep.argmin
        rec["g_convex"] = is_g_convex(dom, p.alpha, sampling=s)
        rec["convex"] = is_convex(dom, sampling=s)
        margin = rec.get("margin_exact", rep.min_margin)
        ok = margin >= -rep.tolerance
    else:
        ok = margin >= 0
    rec["holds"] = bool(ok)
    out.json("domain.json", rec)
    return ok, f"margin={margin:.6g} holds={ok}"


def cmd_solve_radial(cfg, out, args):
    from .radial import check_asymptotics, export_scan_csv, export_solution_csv, scan_solutions, \
        shoot

    p = _params(cfg)
    spec = _spec(cfg)
    c = cfg["radial"]
    if c["mode"] == "shoot":
        sol = shoot(p, spec, c["R"], c["u0"])
        out.tagged("solution.csv", lambda path: export_solution_csv(sol, path))
        asym = check_asymptotics(sol)
        out.json("solve_radial.json", {"solution": sol.summary(), "asymptotics": asym.as_dict()})
        return asym.passed, (f"u0={sol.u0:.6g} du_R={sol.du_R:.3e} "
                             f"class={sol.classification} asymptotics={asym.passed}")
    if c["mode"] != "scan":
        raise ConfigError("radial.mode", f"unknown mode {c['mode']!r}")
    rep = scan_solutions(p, spec, c["R"], (c["u0_min"], c["u0_max"]), grid=c["grid"])
    out.tagged("scan.csv", lambda path: export_scan_csv(rep, path))
    sols = [s.summary() for s in rep]
    out.json("solve_radial.json", {"solutions": sols, "phi_gate": rep.phi_gate,
                                   "regime": rep.regime})
    n_nc = len(rep.nonconstant)
    # nonconstant solutions contradict nonexistence only when the gate holds
    ok = not (n_nc and rep.phi_gate == "NonIncreasing" and p.alpha <= p.alpha_fs)
    return ok, f"solutions={len(sols)} nonconstant={n_nc} phi={rep.phi_gate}"


def _fields(cfg, rng, count):
    from .fields import AnnulusGrid, ScalarField, random_trig_field

    g = cfg["grid"]
    grid = AnnulusGrid(cfg["params"]["d"], g["r_min"], g["r_max"], g["h"], order=g["order"])
    return [ScalarField.from_function(grid, random_trig_field(rng, grid.d), positive=True)
            for _ in range(count)]


def _radial_solution(cfg):
    from .radial import scan_solutions, shoot

    p = _params(cfg)
    spec = _spec(cfg)
    c = cfg["radial"]
    if c["mode"] == "shoot":
        return shoot(p, spec, c["R"], c["u0"])
    rep = scan_solutions(p, spec, c["R"], (c["u0_min"], c["u0_max"]), grid=c["grid"])
    if not len(rep.solutions):
        raise CknLabError("scan returned no solution")
    return (rep.nonconstant or rep.solutions)[0]


def cmd_verify_identity(cfg, out, args):
    from . import identities as ident
    from .fields import AxiPolarGrid, ScalarField, random_axi_field, random_trig_field
    from .geometry import OriginBall

    which = args.identity
    p = _params(cfg)
    rng = np.random.default_rng(cfg["seed"])
    ic = cfg["identity"]
    count = max(1, ic["count"])
    refine = args.refine is None or args.refine > 0
    reports = []
    if which == "lemma22":
        reports = [ident.verify_lemma22(v, p, refine=refine) for v in _fields(cfg, rng, count)]
    elif which == "lemma23":
        center = _json_field(cfg, "identity", "bump_center")
        bump = ident.Bump(tuple(center), ic["bump_radius"])
        reports = [ident.verify_lemma23(v, bump, p, refine=refine)
                   for v in _fields(cfg, rng, count)]
    elif which == "boundary-split":
        g = cfg["grid"]
        for _ in range(count):
            f = random_axi_field(rng)
            grid = AxiPolarGrid(g["r_min"], g["r_max"], g["n_r"], g["n_theta"])
            v = ScalarField.from_function(grid, f.polar, positive=True)
            reports.append(ident.verify_boundary_split(v, OriginBall(g["r_max"]), p,
                                                       refine=refine))
    elif which == "decomposition":
        g = cfg["grid"]
        for _ in range(count):
            f = random_axi_field(rng)
            grid = AxiPolarGrid(0.0, g["r_max"], g["n_r"], g["n_theta"])
            v = ScalarField.from_function(grid, f.polar, positive=True)
            reports.append(ident.verify_decomposition(v, p, **(
                {"tolerance": ic["tolerance"]} if ic["tolerance"] else {})))
    elif which == "k-bound":
        from .fields import AnnulusGrid

        g = cfg["grid"]
        pts = AnnulusGrid(p.d, g["r_min"], g["r_max"], max(g["h"], 0.1)).points()
        for _ in range(count):
            reports.append(ident.pointwise_k_bound(random_trig_field(rng, p.d), p, points=pts))
    elif which in ("prop21", "J-decay", "energy"):
        sol = _radial_solution(cfg)
        if which == "prop21":
            kw = {"eps": ic["eps"]} if ic["eps"] else {}
            reports = [ident.verify_prop21(sol, p, sol.spec, **kw)]
        elif which == "J-decay":
            reports = [ident.boundary_layer_J(sol)]
        else:
            reports = [ident.energy_identity(sol, require_neumann=False)]
    else:
        raise ConfigError("identity", f"unknown identity {which!r}")
    name = which.replace("-", "_")
    out.json(f"{name}.json", {"identity": which, "reports": [r.as_dict() for r in reports]})

    def log(path):
        for i, r in enumerate(reports):
            ident.append_csv(r, path, f"{name}-{i}")

    out.tagged(f"{name}.csv", log)
    ok = all(r.passed for r in reports)
    first = reports[0].as_dict()
    key = next(k for k in ("convergence_order", "min_slack", "residual", "beta")
               if k in first)
    return ok, f"{which}: {sum(r.passed for r in reports)}/{len(reports)} pass ({key}={first[key]})"


def cmd_flow(cfg, out, args):
    from .flow import FlowGrid, evolve, random_init

    p = _params(cfg)
    spec = _spec(cfg)
    dom = _domain(cfg, p.alpha)
    c = cfg["flow"]
    grid = FlowGrid(p, dom, c["n_r"], c["n_theta"])
    rng = np.random.default_rng(cfg["seed"])
    init = random_init(grid, rng, c["init_mean"], c["init_amplitude"])
    res = evolve(p, spec, dom, init, t_max=c["t_max"], exit_tol=c["exit_tol"], grid=grid)
    rec = res.record()
    rec["seed"] = cfg["seed"]
    out.json("flow.json", rec)
    out.csv("flow_final.csv", ["x1", "x3", "u"],
            [(x[0], x[2], u) for x, u in zip(grid.x, res.final)])
    ok = not (res.classification == "Pattern" and res.gates.all_satisfied)
    return ok, (f"classification={res.classification} mean={res.mean:.6g} "
                f"oscillation={res.oscillation:.3e} gates_satisfied={res.gates.all_satisfied}")


def cmd_sweep(cfg, out, args):
    from .flow import consistency_violations, default_sweep_config, sweep

    spec = _json_field(cfg, "sweep", "spec")
    sweep_cfg = default_sweep_config() if spec is None else spec
    db = os.path.join(out.dir, cfg["sweep"]["db"])
    rows = sweep(sweep_cfg, db_path=db)
    bad = consistency_violations(rows)
    counts = {}
    for r in rows:
        counts[r["classification"]] = counts.get(r["classification"], 0) + 1
    out.json("sweep.json", {"runs": len(rows), "counts": counts, "violations": bad,
                            "database": os.path.basename(db)})
    return not bad, f"runs={len(rows)} counts={counts} violations={len(bad)}"


HANDLERS = {"params": cmd_params, "check-domain": cmd_check_domain,
            "solve-radial": cmd_solve_radial, "verify-identity": cmd_verify_identity,
            "flow": cmd_flow, "sweep": cmd_sweep}


def _parser():
    ap = argparse.ArgumentParser(prog="cknlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("identity", nargs="?", choices=IDENTITIES,
                    help="identity name for verify-identity")
    ap.add_argument("--config", help="INI or JSON configuration file")
    ap.add_argument("--out", default="cknlab-out", help="output directory")
    ap.add_argument("--seed", type=int, help="seed for random test fields and inits")
    ap.add_argument("--refine", type=int, help="refinement halvings (0 disables)")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override one config value")
    return ap


def run(argv=None, stdout=None) -> int:
    """Run one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        raw = {}
        for item in args.set:
            key, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(item, "expected SECTION.KEY=VALUE")
            sec, _, k = key.partition(".")
            if k:
                raw.setdefault(sec, {})[k] = val
            else:
                raw[sec] = val
        if raw:
            cur = {k: v for k, v in cfg.items()}
            for sec, val in raw.items():
                if isinstance(val, dict) and isinstance(cur.get(sec), dict):
                    cur[sec] = {**cur[sec], **val}
                else:
                    cur[sec] = val
            cfg = _merge(cur)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.command == "verify-identity" and args.identity is None:
            raise ConfigError("identity", f"verify-identity needs one of {IDENTITIES}")
        out = Output(args.out, cfg)
        ok, line = HANDLERS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"ERROR config {exc}", file=stdout)
        return 1
    except CknLabError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=stdout)
        return 1
    print(f"{'PASS' if ok else 'FAIL'} {args.command} {line}", file=stdout)
    return 0 if ok else 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
