"""Command-line front end.

Every subcommand reads an ellipsoid or body spec (``--input``: a path, or
inline JSON), runs one analysis and writes a JSON report embedding the
resolved configuration, or a CSV table of per-sample rows.

Exit status: 0 on success, 2 on bad input or a violated precondition, 3 on
a numerical failure. Errors go to stderr as one line of JSON.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._parallel import resolve_threads
from .bezdek import Thresholds, bezdek_scan, classify_plane
from .bodies import body_from_dict
from .body import (
    ClassifyConfig,
    boundary_sample,
    classify_body,
    direction_scan,
    has_reflection,
    orthogonal_reflection_scan,
)
from .errors import ReflectaError, SpecError
from .mvee import mvee
from .quadric import (
    BINORMAL_TOL,
    GROUPING_TOL,
    Ellipsoid,
    ProjHyperplane,
    ProjLine,
    binormal_angle,
    ground,
    spectrum_partition,
)
from .section import SCAN_TOL, chart_loop, cover_scan, fiber, track_fiber

COMMANDS = (
    "spectrum", "ground", "fiber", "cover-scan", "monodromy",
    "mirror-fit", "direction-scan", "ortho-scan", "mvee", "classify",
    "bezdek-scan", "classify-plane",
)
SCAN_DEFAULT_SAMPLES = {
    "cover-scan": 1000, "direction-scan": 2000, "ortho-scan": 200, "bezdek-scan": 200,
    "classify": 100, "mvee": 1000, "monodromy": 64,
}


@dataclass
class RunConfig:
    command: str
    input: str = None
    samples: int = None
    seed: int = 0
    binormal_tol: float = None
    grouping_tol: float = GROUPING_TOL
    threshold: float = 1e-3
    eps: float = 1e-4
    output: str = None
    format: str = "json"
    threads: int = 1
    line: list = None
    normal: list = None
    offset: float = 0.0
    radius: float = 0.01
    path: str = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.samples is not None and self.samples < 1:
            raise SpecError("--samples must be >= 1")
        for name in ("binormal_tol", "grouping_tol", "threshold", "eps"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise SpecError(f"--{name.replace('_', '-')} must be positive")
        if not 0 <= self.seed < 2**64:
            raise SpecError("--seed must be a 64-bit unsigned value")
        if self.radius <= 0:
            raise SpecError("--radius must be positive")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(message)


def _vector(text):
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--input", help="spec file path or inline JSON")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threshold", type=float, default=1e-3)
    common.add_argument("--tol", dest="binormal_tol", type=float, help="binormal/genericity tolerance")
    common.add_argument("--grouping-tol", type=float, default=GROUPING_TOL)
    common.add_argument("--eps", type=float, default=1e-4)
    common.add_argument("--output", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int)
    common.add_argument("--line", type=_vector, help="direction, e.g. 1,1,0")
    common.add_argument("--normal", type=_vector, help="hyperplane normal")
    common.add_argument("--offset", type=float, default=0.0, help="plane offset for classify-plane")
    common.add_argument("--radius", type=float, default=0.01, help="monodromy loop radius")
    common.add_argument("--path", help="JSON file with a list of hyperplane normals (monodromy)")
    parser = _Parser(prog="reflecta", description="Reflection geometry of ellipsoids and convex bodies.")
    parser.add_argument("--version", action="version", version=f"reflecta {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _load_json(text):
    if text is None:
        raise SpecError("--input is required for this command")
    stripped = text.strip()
    try:
        if stripped.startswith(("{", "[")):
            return json.loads(stripped)
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {text}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON: {exc}") from exc


def _ellipsoid(cfg):
    spec = _load_json(cfg.input)
    if not isinstance(spec, dict):
        raise SpecError("ellipsoid spec must be a JSON object")
    E = Ellipsoid.from_dict(spec)
    if not E.is_centered():
        E = Ellipsoid.centered(E.form)
    return E


def _body(cfg):
    return body_from_dict(_load_json(cfg.input))


def _need(value, flag, n):
    if value is None:
        raise SpecError(f"{flag} is required for this command")
    if len(value) != n:
        raise SpecError(f"{flag} has dimension {len(value)}, expected {n}")
    return np.asarray(value, dtype=float)


def _run_spectrum(cfg):
    return spectrum_partition(_ellipsoid(cfg), cfg.grouping_tol).to_dict(), None


def _run_ground(cfg):
    E = _ellipsoid(cfg)
    l = ProjLine.from_vector(_need(cfg.line, "--line", E.n))
    tol = cfg.binormal_tol or BINORMAL_TOL
    G = ground(E, l, tol)
    return {"line": l.tolist(), "ground": G.tolist(), "binormal_angle": binormal_angle(E, l)}, None


def _run_fiber(cfg):
    E = _ellipsoid(cfg)
    G = ProjHyperplane.from_normal(_need(cfg.normal, "--normal", E.n))
    P = spectrum_partition(E, cfg.grouping_tol)
    return fiber(E, G, cfg.binormal_tol or BINORMAL_TOL, P).to_dict(), None


def _run_cover_scan(cfg):
    E = _ellipsoid(cfg)
    rep = cover_scan(E, cfg.samples, cfg.binormal_tol or SCAN_TOL, cfg.seed, cfg.threads, cfg.grouping_tol)
    return rep.to_dict(), rep


def _run_monodromy(cfg):
    E = _ellipsoid(cfg)
    if cfg.path:
        normals = _load_json(cfg.path)
        if not isinstance(normals, list) or not normals:
            raise SpecError("--path must hold a non-empty list of normals")
        path = [ProjHyperplane.from_normal(_need(v, "path entry", E.n)) for v in normals]
    else:
        G = ProjHyperplane.from_normal(_need(cfg.normal, "--normal", E.n))
        path = chart_loop(G, cfg.radius, cfg.samples)
    res = track_fiber(E, path, cfg.binormal_tol or SCAN_TOL, partition=spectrum_partition(E, cfg.grouping_tol))
    return res.to_dict(), None


def _run_mirror_fit(cfg):
    K = _body(cfg)
    l = ProjLine.from_vector(_need(cfg.line, "--line", K.n))
    test = has_reflection(K, l, cfg.threshold)
    return {"accepted": test.accepted, "fit": test.fit.to_dict(), "invariance_error": test.invariance_error}, None


def _run_direction_scan(cfg):
    rep = direction_scan(_body(cfg), cfg.samples, cfg.threshold, cfg.seed, cfg.threads)
    return rep.to_dict(), rep


def _run_ortho_scan(cfg):
    return orthogonal_reflection_scan(_body(cfg), cfg.samples, cfg.threshold, cfg.seed, cfg.threads).to_dict(), None


def _run_mvee(cfg):
    spec = _load_json(cfg.input)
    if isinstance(spec, dict) and "points" in spec:
        points = np.asarray(spec["points"], dtype=float)
    elif isinstance(spec, list):
        points = np.asarray(spec, dtype=float)
    else:
        K = body_from_dict(spec)
        points = boundary_sample(K, cfg.samples, cfg.seed)
    if points.ndim != 2:
        raise SpecError("points must be a list of equal-length coordinate lists")
    return mvee(points, cfg.eps).to_dict(), None


def _run_classify(cfg):
    K = _body(cfg)
    conf = ClassifyConfig(threshold=cfg.threshold, direction_samples=cfg.samples, seed=cfg.seed, threads=cfg.threads)
    return classify_body(K, conf).to_dict(), None


def _run_bezdek_scan(cfg):
    th = Thresholds(cfg.threshold, cfg.threshold, cfg.threshold)
    rep = bezdek_scan(_body(cfg), cfg.samples, th, cfg.seed, cfg.threads)
    return rep.to_dict(), rep


def _run_classify_plane(cfg):
    K = _body(cfg)
    th = Thresholds(cfg.threshold, cfg.threshold, cfg.threshold)
    return classify_plane(K, _need(cfg.normal, "--normal", K.n), cfg.offset, th).to_dict(), None


RUNNERS = {
    "spectrum": _run_spectrum, "ground": _run_ground, "fiber": _run_fiber,
    "cover-scan": _run_cover_scan, "monodromy": _run_monodromy, "mirror-fit": _run_mirror_fit,
    "direction-scan": _run_direction_scan, "ortho-scan": _run_ortho_scan, "mvee": _run_mvee,
    "classify": _run_classify, "bezdek-scan": _run_bezdek_scan, "classify-plane": _run_classify_plane,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def fmt_number(x):
    """17 significant digits, '.' decimal point, independent of locale."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _flatten(header, row):
    names, values = [], []
    for name, v in zip(header, row):
        if isinstance(v, (list, tuple, np.ndarray)):
            names += [f"{name}_{i}" for i in range(len(v))]
            values += [fmt_number(x) for x in v]
        else:
            names.append(name)
            values.append(v if isinstance(v, str) else fmt_number(v))
    return names, values


def render_csv(result, report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report is not None and hasattr(report, "csv_rows"):
        header = None
        for row in report.csv_rows():
            names, values = _flatten(report.csv_header, row)
            if header is None:
                header = names
                writer.writerow(header)
            writer.writerow(values)
        if header is None:
            writer.writerow(report.csv_header)
        return buf.getvalue()
    writer.writerow(["key", "value"])
    for key, value in _walk(result):
        writer.writerow([key, value])
    return buf.getvalue()


def _walk(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _walk(v, f"{prefix}{k}." if prefix or k else k)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _walk(v, f"{prefix}{i}.")
    else:
        key = prefix.rstrip(".")
        if obj is None or isinstance(obj, str):
            yield key, "" if obj is None else obj
        else:
            yield key, fmt_number(obj)


def resolve_config(args):
    cfg = RunConfig(
        command=args.command, input=args.input, samples=args.samples, seed=args.seed,
        binormal_tol=args.binormal_tol, grouping_tol=args.grouping_tol, threshold=args.threshold,
        eps=args.eps, output=args.output, format=args.format, threads=resolve_threads(args.threads),
        line=args.line, normal=args.normal, offset=args.offset, radius=args.radius, path=args.path,
    )
    if cfg.samples is None:
        cfg.samples = SCAN_DEFAULT_SAMPLES.get(cfg.command)
    cfg.validate()
    return cfg


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        result, report = RUNNERS[cfg.command](cfg)
        if cfg.format == "csv":
            text = render_csv(_jsonable(result), report)
        else:
            envelope = {"command": cfg.command, "version": __version__, "config": asdict(cfg),
                        "result": result}
            text = json.dumps(_jsonable(envelope), indent=2) + "\n"
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 0
    except ReflectaError as exc:
        return _fail(stderr, exc, exc.exit_code)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(stderr, exc, 3)
    except SystemExit as exc:
        return int(exc.code or 0)


def _fail(stderr, exc, code):
    stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main():
    sys.exit(run())
