"""Command line front end: ``clwn <subcommand> --config cfg.json``.

Settings are layered: built-in defaults, then the global keys of the config
file (output_dir, log_level, svg), then CLWN_* environment variables, then
command line flags.  Errors are reported on stderr as one JSON object and
mapped to exit codes: 2 configuration, 3 numerical abort, 4 failed check,
1 anything unexpected.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import annulus as an
from . import checks, chordal, driving
from . import field as fd
from . import fuchsian as fu
from . import moebius as mb
from . import surface_flow as sf
from .automorphic import GroupVelocity
from .errors import ConfigError, NumericalError

log = logging.getLogger("clwn")

EXIT_OK, EXIT_UNEXPECTED, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3, 4
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}
DEFAULTS = {"output_dir": "clwn-out", "log_level": "warn", "svg": False, "threads": 1}

# schemas

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COMPLEX = {"oneOf": [{"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                      {"type": "string"}, _NUM]}
_DRIVING = {"oneOf": [_NUM, {"type": "object", "required": ["type"],
                             "properties": {"type": {"enum": ["constant", "linear", "samples", "sle"]}}}]}
_GENERATOR = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 4}
_GLOBAL = {"output_dir": {"type": "string"}, "log_level": {"enum": list(LOG_LEVELS)},
           "svg": {"type": "boolean"}, "threads": {"type": "integer", "minimum": 1}}


def _schema(required, props):
    return {"type": "object", "additionalProperties": False, "required": required,
            "properties": {**_GLOBAL, **props}}


SCHEMAS = {
    "simulate-chordal": _schema(["seeds", "t_end"], {
        "driving": _DRIVING, "seeds": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "t_end": _POS, "tol": _POS}),
    "simulate-annulus": _schema(["tau0", "c", "seeds", "t_end"], {
        "tau0": _POS, "tau_rate": _NUM, "tau_samples": {"type": "object"},
        "xi": _DRIVING, "lambda": _DRIVING, "c": _NUM,
        "seeds": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "t_end": _POS, "tol": _POS}),
    "simulate-surface": _schema(["generators", "base_triple", "c", "t_end", "mesh_dt"], {
        "generators": {"type": "array", "items": _GENERATOR, "minItems": 1},
        "base_triple": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
        "c": _NUM, "driving": _DRIVING, "lambda": _DRIVING,
        "t_end": {"type": "number", "minimum": 0}, "mesh_dt": _POS, "tol": _POS,
        "seeds": {"type": "array", "items": _COMPLEX},
        "max_word_length": {"type": "integer", "minimum": 1},
        "field": {"enum": ["assembled", "hydrodynamic"]},
        "check_times": {"type": "array", "items": {"type": "number", "minimum": 0}}}),
    "enumerate-group": _schema(["generators"], {
        "generators": {"type": "array", "items": _GENERATOR, "minItems": 1},
        "max_word_length": {"type": "integer", "minimum": 0}, "cap": {"type": "integer", "minimum": 1}}),
    "eval-field": _schema(["generators", "xi", "c", "points"], {
        "generators": {"type": "array", "items": _GENERATOR, "minItems": 1},
        "xi": _NUM, "c": _NUM, "lambda": _NUM,
        "velocities": {"oneOf": [{"const": "hydrodynamic"}, {"type": "object"}]},
        "points": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "mode": {"enum": ["raw", "normalized"]},
        "max_word_length": {"type": "integer", "minimum": 1}}),
    "export-driving": _schema(["driving", "t_end"], {
        "driving": _DRIVING, "t_end": _POS, "dt": _POS}),
    "check": _schema([], {}),
}


# parsing helpers

def parse_complex(v, key="seeds"):
    try:
        if isinstance(v, str):
            return complex(v.replace(" ", "").replace("i", "j"))
        if isinstance(v, (list, tuple)):
            return complex(float(v[0]), float(v[1]))
        return complex(float(v))
    except (ValueError, TypeError, IndexError):
        raise ConfigError(f"cannot read {v!r} as a complex number", key=key) from None


def parse_generators(items):
    gens = []
    for g in items:
        if len(g) == 4:
            gens.append(mb.MoebiusMap(*map(float, g)))
        elif len(g) == 3:
            gens.append(mb.hyperbolic(float(g[0]), float(g[1]), float(g[2])))
        else:
            raise ConfigError("a generator is [a, b, c, d] or [attracting, repelling, multiplier]",
                              key="generators")
    try:
        return fu.FuchsianGroup(tuple(gens))
    except ValueError as e:
        raise ConfigError(str(e), key="generators") from None


def load_config(path, command):
    cfg = {}
    if path is not None:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}", key="config") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}", key="config") from None
    validate(cfg, command)
    return cfg


def validate(cfg, command):
    schema = SCHEMAS[command]
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(cfg),
                    key=lambda e: (len(e.path), e.message))
    if not errors:
        return
    e = errors[0]
    if e.validator == "required":
        key = next(k for k in e.validator_value if k not in e.instance)
    elif e.validator == "additionalProperties":
        key = sorted(set(e.instance) - set(e.schema.get("properties", {})))[0]
    else:
        key = ".".join(str(p) for p in e.absolute_path) or None
    raise ConfigError(f"config error: {e.message}", key=key)


def settings(args, cfg):
    """defaults < config < environment < flags."""
    out = dict(DEFAULTS)
    for k in DEFAULTS:
        if k in cfg:
            out[k] = cfg[k]
    env = os.environ
    if "CLWN_OUTPUT" in env:
        out["output_dir"] = env["CLWN_OUTPUT"]
    if "CLWN_LOG_LEVEL" in env:
        out["log_level"] = env["CLWN_LOG_LEVEL"]
    if "CLWN_SVG" in env:
        out["svg"] = env["CLWN_SVG"].lower() in ("1", "true", "yes")
    if "CLWN_THREADS" in env:
        try:
            out["threads"] = int(env["CLWN_THREADS"])
        except ValueError:
            raise ConfigError("CLWN_THREADS must be an integer", key="CLWN_THREADS") from None
    if args.output is not None:
        out["output_dir"] = args.output
    if args.log_level is not None:
        out["log_level"] = args.log_level
    if args.svg:
        out["svg"] = True
    if args.threads is not None:
        out["threads"] = args.threads
    if out["log_level"] not in LOG_LEVELS:
        raise ConfigError(f"unknown log level {out['log_level']!r}", key="log_level")
    if out["threads"] < 1:
        raise ConfigError("threads must be at least 1", key="threads")
    return out


def _driving(cfg, key, default=0.0):
    try:
        return driving.parse_spec(cfg.get(key, default))
    except ConfigError as e:
        raise ConfigError(str(e), key=f"{key}.{e.key}" if e.key else key) from None
    except ValueError as e:
        raise ConfigError(str(e), key=key) from None


# output

def fmt(x):
    return "%.17g" % x


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) if isinstance(x, float) else x for x in r])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None if math.isnan(o) else ("inf" if o > 0 else "-inf")
    return o


def flow_rows(results):
    for r in results:
        n = len(r.times)
        for i, (t, g) in enumerate(zip(r.times, r.values)):
            sw = 1 if (r.swallowed and i == n - 1) else 0
            yield [r.seed.real, r.seed.imag, float(t), g.real, g.imag, sw]


FLOW_HEADER = ["seed_re", "seed_im", "t", "g_re", "g_im", "swallowed"]


def flow_summary(results):
    return [{"seed": r.seed, "final": complex(r.final), "swallow_time": r.swallow_time,
             "steps": len(r.times) - 1, "error_estimate": r.error_estimate} for r in results]


def write_svg(path, curves, title):
    """Trajectories as polylines in the (Re, Im) plane."""
    pts = np.concatenate([np.asarray(c, complex) for c in curves if len(c)]) if curves else np.zeros(0)
    if len(pts) == 0:
        pts = np.array([0j, 1 + 1j])
    x0, x1 = float(pts.real.min()), float(pts.real.max())
    y0, y1 = 0.0, float(max(pts.imag.max(), 1e-12))
    dx = max(x1 - x0, 1e-12)
    dy = max(y1 - y0, 1e-12)
    W, H, pad = 640, 400, 30

    def sx(v):
        return pad + (v - x0) / dx * (W - 2 * pad)

    def sy(v):
        return H - pad - (v - y0) / dy * (H - 2 * pad)

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             f'<title>{title}</title>',
             f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
             f'<line x1="{pad}" y1="{sy(0):.2f}" x2="{W - pad}" y2="{sy(0):.2f}" stroke="black"/>']
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]
    for i, c in enumerate(curves):
        c = np.asarray(c, complex)
        coords = " ".join(f"{sx(v.real):.2f},{sy(v.imag):.2f}" for v in c)
        lines.append(f'<polyline fill="none" stroke="{palette[i % len(palette)]}" '
                     f'stroke-width="1.2" points="{coords}"/>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


# subcommands

def _seeds(cfg):
    return [parse_complex(s) for s in cfg.get("seeds", [])]


def cmd_simulate_chordal(cfg, opts, out):
    t_end = float(cfg["t_end"])
    try:
        run = chordal.ChordalRun(_driving(cfg, "driving"), tuple(_seeds(cfg)), t_end,
                                 float(cfg.get("tol", 1e-10)))
    except ValueError as e:
        raise ConfigError(str(e), key="seeds") from None
    res = chordal.chordal_flow(run, opts["threads"])
    _write_flow(out, "chordal", res, opts)
    return EXIT_OK


def _write_flow(out, name, res, opts):
    write_csv(out / f"{name}.csv", FLOW_HEADER, flow_rows(res))
    write_json(out / f"{name}_summary.json", flow_summary(res))
    if opts["svg"]:
        write_svg(out / f"{name}.svg", [r.values for r in res], f"{name} trajectories")
    log.info("wrote %s outputs for %d seeds to %s", name, len(res), out)


def cmd_simulate_annulus(cfg, opts, out):
    t_end = float(cfg["t_end"])
    if ("tau_rate" in cfg) == ("tau_samples" in cfg):
        raise ConfigError("give exactly one of tau_rate and tau_samples", key="tau_rate")
    try:
        s = an.AnnulusSchedule.build(float(cfg["tau0"]), float(cfg["c"]), t_end,
                                     xi=_driving(cfg, "xi", 1.0), lam=_driving(cfg, "lambda"),
                                     tau_rate=cfg.get("tau_rate"), tau_samples=cfg.get("tau_samples"))
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), key="tau_samples" if "tau_samples" in cfg else "tau_rate") from None
    seeds = _seeds(cfg)
    for z in seeds:
        if not z.imag > 0:
            raise ConfigError(f"seed {z} is not in the upper half-plane", key="seeds")
    res = an.simulate(s, seeds, t_end, float(cfg.get("tol", 1e-10)), opts["threads"])
    _write_flow(out, "annulus", res, opts)
    return EXIT_OK


def cmd_simulate_surface(cfg, opts, out):
    G = parse_generators(cfg["generators"])
    policy = fu.EnumerationPolicy(max_word_length=int(cfg.get("max_word_length", 6)))
    seeds = _seeds(cfg)
    for z in seeds:
        if not z.imag > 0:
            raise ConfigError(f"seed {z} is not in the upper half-plane", key="seeds")
    tol = float(cfg.get("tol", 1e-10))
    try:
        triples, tl = sf.evolve_triples(G, cfg["base_triple"], _driving(cfg, "driving"),
                                        _driving(cfg, "lambda"), float(cfg["c"]),
                                        float(cfg["t_end"]), float(cfg["mesh_dt"]), tol, policy,
                                        field=cfg.get("field", "assembled"))
    except ConfigError:
        raise
    except NumericalError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), key="base_triple") from None
    res = sf.simulate_seeds(tl, seeds, tol, opts["threads"])
    write_json(out / "surface_timeline.json", {
        "times": tl.times, "timeline": tl.summary(),
        "reconstruction_error": tl.reconstruction_error, "triple_error": tl.triple_error,
        "horizon": tl.t_end})
    write_csv(out / "surface_triples.csv", ["t", "row", "p1", "p2", "p3"],
              ([s.t, str(i)] + [float(x) for x in row] for s in triples for i, row in enumerate(s.p)))
    write_csv(out / "surface_seeds.csv", FLOW_HEADER, flow_rows(res))
    write_json(out / "surface_summary.json", flow_summary(res))
    report = {"conjugacy": [], "invariance": None}
    for z in seeds:
        for l in range(1, G.rank + 1):
            try:
                prof = sf.conjugacy_profile(tl, l, z, tol)
                report["conjugacy"].append({"seed": z, "generator": l, "max": float(prof.max()),
                                            "final": float(prof[-1])})
            except NumericalError as e:
                report["conjugacy"].append({"seed": z, "generator": l, "skipped": type(e).__name__})
    if seeds:
        report["invariance"] = sf.invariant_domain_check(tl, seeds, tol=tol, threads=opts["threads"])
    write_json(out / "surface_checks.json", report)
    if opts["svg"]:
        write_svg(out / "surface.svg", [r.values for r in res], "surface-flow trajectories")
    return EXIT_OK


def cmd_enumerate_group(cfg, opts, out):
    G = parse_generators(cfg["generators"])
    L = int(cfg.get("max_word_length", 4))
    cap = int(cfg.get("cap", fu.DEFAULT_CAP))
    if L > 0 and fu.ball_size(G.rank, L) > cap:
        raise ConfigError(f"ball of radius {L} exceeds cap {cap}", key="max_word_length")
    b = fu.build_ball(G, L, cap)
    rows = []
    for w, m in zip(b.words, b.matrices):
        g = mb.unimodular(m)
        rows.append([str(w) or "e", str(len(w))] + [float(x) for x in g.coefficients])
    write_csv(out / "group_ball.csv", ["word", "length", "a", "b", "c", "d"], rows)
    cert = fu.kind_certificate(G, min(L, 6)) if L >= 1 else None
    write_json(out / "group.json", {
        "generators": [list(g.coefficients) for g in G.generators],
        "max_word_length": L, "ball_size": len(b), "expected_size": fu.ball_size(G.rank, L),
        "ping_pong": fu.ping_pong(G),
        "isometric_intervals": fu.isometric_intervals(G),
        "kind_certificate": cert})
    return EXIT_OK


def _velocity(G, spec, xi, policy):
    if spec is None or spec == "hydrodynamic":
        # induced by the hydrodynamic field on a triple outside the isometric circles
        base = np.array(_hydro_triple(G))
        p = np.vstack([base] + [mb.mapply(g.matrix, base) for g in G.generators])
        V, _ = sf.hydrodynamic_velocity(G, xi, p, policy)
        return V
    if "sl2" in spec:
        return GroupVelocity.from_sl2(G, [np.asarray(x, float) for x in spec["sl2"]])
    if "rates" in spec:
        return GroupVelocity(G, tuple(tuple(map(float, np.ravel(r))) for r in spec["rates"]))
    raise ConfigError("velocities must be 'hydrodynamic', {'sl2': [...]} or {'rates': [...]}",
                      key="velocities")


def _hydro_triple(G):
    """Three real points outside the isometric intervals."""
    iv = fu.isometric_intervals(G)
    hi = max(b for _, b in iv)
    return (hi + 1.0, hi + 2.0, hi + 3.0)


def cmd_eval_field(cfg, opts, out, dump_system=False):
    G = parse_generators(cfg["generators"])
    policy = fu.EnumerationPolicy(max_word_length=int(cfg.get("max_word_length", 6)))
    xi, c = float(cfg["xi"]), float(cfg["c"])
    try:
        V = _velocity(G, cfg.get("velocities"), xi, policy)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"bad velocities: {e}", key="velocities") from None
    ctx = fd.build_context(G, V, xi, c, float(cfg.get("lambda", 0.0)), policy,
                           cfg.get("mode", "raw"))
    pts = [parse_complex(z, "points") for z in cfg["points"]]
    rows = []
    for z in pts:
        v = fd.eval_P(ctx, z)
        p = complex(v.value)
        rows.append([z.real, z.imag, p.real, p.imag, float(v.tail_estimate)])
    write_csv(out / "field.csv", ["z_re", "z_im", "P_re", "P_im", "tail"], rows)
    write_json(out / "field_summary.json", {"deltas": list(ctx.deltas), "sigma": ctx.sigma,
                                            "residue": ctx.residue, "mode": ctx.mode})
    if dump_system:
        fd.dump_diagnostics(ctx, out / "delta_system.json")
    return EXIT_OK


def cmd_export_driving(cfg, opts, out):
    spec = _driving(cfg, "driving")
    t_end = float(cfg["t_end"])
    dt = float(cfg.get("dt", spec.dt if isinstance(spec, driving.Sle) else 1e-3))
    try:
        sched = driving.realize(spec, t_end)
    except ValueError as e:
        raise ConfigError(str(e), key="driving") from None
    t, v = driving.sample_path(sched, t_end, dt)
    write_csv(out / "driving.csv", ["t", "xi"], ([float(a), float(b)] for a, b in zip(t, v)))
    return EXIT_OK


def cmd_check(cfg, opts, out, suite="all"):
    results = checks.run_suite(suite, opts["threads"])
    width = max(len(r.name) for r in results)
    print(f"{'criterion':<{width}}  result  runtime")
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.runtime:.3g}s")
    for r in results:
        log.info(r.line())
    write_json(out / f"check_{suite}.json",
               [{k: v for k, v in r.as_dict().items() if k != "runtime"} for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "simulate-chordal": cmd_simulate_chordal,
    "simulate-annulus": cmd_simulate_annulus,
    "simulate-surface": cmd_simulate_surface,
    "enumerate-group": cmd_enumerate_group,
    "eval-field": cmd_eval_field,
    "export-driving": cmd_export_driving,
    "check": cmd_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="clwn", description="Loewner flows on hyperbolic surfaces.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--output", help="output directory")
    common.add_argument("--svg", action="store_true", help="also write SVG plots")
    common.add_argument("--threads", type=int, help="worker threads for per-seed work")
    common.add_argument("--log-level", choices=list(LOG_LEVELS))
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "eval-field":
            sp.add_argument("--dump-system", action="store_true",
                            help="write the delta system diagnostics as JSON")
        if name == "check":
            sp.add_argument("--suite", default="all", choices=sorted(checks.SUITES))
    return p


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("key", "t", "z", "margins", "condition", "nearest", "point", "margin",
                 "seed", "swallow_time"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    if getattr(exc, "word", None) is not None:
        payload["word"] = str(exc.word)
    sys.stderr.write(json.dumps(_jsonable(payload), sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.command)
        opts = settings(args, cfg)
        logging.basicConfig(level=LOG_LEVELS[opts["log_level"]],
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        log.setLevel(LOG_LEVELS[opts["log_level"]])
        out = Path(opts["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        kw = {}
        if args.command == "eval-field":
            kw["dump_system"] = args.dump_system
        if args.command == "check":
            kw["suite"] = args.suite
        t0 = time.perf_counter()
        code = COMMANDS[args.command](cfg, opts, out, **kw)
        log.info("%s finished in %.3gs", args.command, time.perf_counter() - t0)
        return code
    except ConfigError as e:
        return _error(e, EXIT_CONFIG)
    except NumericalError as e:
        return _error(e, EXIT_NUMERICAL)
    except Exception as e:  # noqa: BLE001
        return _error(e, EXIT_UNEXPECTED)


if __name__ == "__main__":
    sys.exit(main())
