"""Command-line front end: ``levels``, ``compare`` and ``scan``.

A run is described by a flat TOML document (one nesting level for the well
parameters, quadrature overrides, oracle and scan settings); command-line
flags override file values.  Output is CSV with a header row, or a JSON
document with ``--format obj``.  Numbers are written with 17 significant
digits and rows in a fixed order, so identical runs give identical bytes.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 scheme not applicable to the well.  Failures print a single line
``error[<kind>]: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .correction import Q_FORMS, CorrectionScheme, LevelShift
from .errors import ConfigError, NoSuchLevelError, NumericError, SemiquantError, StencilError
from .oracle import fd_spectrum
from .potential import PhysicalScale, WellDescriptor, make_well
from .quadrature import QuadratureConfig, phase_integral
from .solver import gamma, solve_level, spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LEVEL_COLUMNS = ["scheme", "n", "eps", "delta", "delta1", "q", "mu", "gamma", "residual"]
COMPARE_COLUMNS = ["scheme", "n", "eps", "eps_oracle", "abs_err", "delta", "delta_ex",
                   "delta_err", "q", "mu", "gamma", "oracle_err"]
SCAN_COLUMNS = ["parameter", "value", "scheme", "status", "eps0", "eps0_oracle",
                "delta1", "q", "mu", "gamma"]

_TOP_KEYS = {"well", "beta", "schemes", "scheme", "n_max", "format", "output", "q_form",
             "per_level_q", "params", "quadrature", "oracle", "scan"}
_QUAD_KEYS = {f.name for f in dataclasses.fields(QuadratureConfig)}


@dataclass
class RunConfig:
    well: str = ""
    params: dict[str, float] = field(default_factory=dict)
    beta: float = 1.0
    schemes: list[CorrectionScheme] = field(default_factory=list)
    n_max: int = 10
    quadrature: dict[str, Any] = field(default_factory=dict)
    oracle_L: float | None = None
    oracle_N: int | None = None
    use_oracle: bool = True
    q_form: str = "product"
    per_level_q: bool = False
    format: str = "csv"
    output: str | None = None
    sweep_parameter: str | None = None
    sweep_values: list[float] = field(default_factory=list)

    def validate(self) -> None:
        if not self.well:
            raise ConfigError("field 'well': a well name is required")
        if not self.schemes:
            raise ConfigError("field 'schemes': at least one scheme is required")
        if self.n_max < 0:
            raise ConfigError("field 'n_max': must be non-negative")
        if self.format not in ("csv", "obj"):
            raise ConfigError(f"field 'format': expected csv or obj, got {self.format!r}")
        if self.q_form not in Q_FORMS:
            raise ConfigError(f"field 'q_form': expected product or quotient, got {self.q_form!r}")
        unknown = set(self.quadrature) - _QUAD_KEYS
        if unknown:
            raise ConfigError(f"field 'quadrature': unknown key(s) {sorted(unknown)}")

    def scale(self) -> PhysicalScale:
        return PhysicalScale(self.beta)

    def quad(self) -> QuadratureConfig:
        try:
            return QuadratureConfig(**self.quadrature)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'quadrature': {exc}") from None

    def make_well(self, **override: float) -> WellDescriptor:
        return make_well(self.well, {**self.params, **override})


# --------------------------------------------------------------------------
# configuration


def _number(value: Any, where: str, kind=float):
    if isinstance(value, bool):
        raise ConfigError(f"field {where!r}: expected a number, got {value!r}")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {where!r}: expected a number, got {value!r}") from None
    if kind is int and float(value) != out:
        raise ConfigError(f"field {where!r}: expected an integer, got {value!r}")
    return out


def _table(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"field {key!r}: expected a table")
    return value


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_from_document(doc: dict) -> RunConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    cfg = RunConfig()
    if "well" in doc:
        cfg.well = str(doc["well"])
    cfg.params = {str(k): _number(v, f"params.{k}") for k, v in _table(doc, "params").items()}
    if "beta" in doc:
        cfg.beta = _number(doc["beta"], "beta")
    schemes = doc.get("schemes", doc.get("scheme", []))
    if isinstance(schemes, str):
        schemes = [schemes]
    if not isinstance(schemes, list):
        raise ConfigError("field 'schemes': expected a list of scheme names")
    cfg.schemes = [CorrectionScheme.parse(str(s)) for s in schemes]
    if "n_max" in doc:
        cfg.n_max = _number(doc["n_max"], "n_max", int)
    cfg.quadrature = dict(_table(doc, "quadrature"))
    oracle = _table(doc, "oracle")
    extra = set(oracle) - {"L", "N", "enabled"}
    if extra:
        raise ConfigError(f"field 'oracle': unknown key(s) {sorted(extra)}")
    if "L" in oracle:
        cfg.oracle_L = _number(oracle["L"], "oracle.L")
    if "N" in oracle:
        cfg.oracle_N = _number(oracle["N"], "oracle.N", int)
    if "enabled" in oracle:
        cfg.use_oracle = bool(oracle["enabled"])
    for key in ("format", "output", "q_form"):
        if key in doc:
            setattr(cfg, key, str(doc[key]))
    if "per_level_q" in doc:
        cfg.per_level_q = bool(doc["per_level_q"])
    scan = _table(doc, "scan")
    if "parameter" in scan:
        cfg.sweep_parameter = str(scan["parameter"])
    if "values" in scan:
        values = scan["values"]
        if not isinstance(values, list):
            raise ConfigError("field 'scan.values': expected a list of numbers")
        cfg.sweep_values = [_number(v, "scan.values") for v in values]
    return cfg


def _key_value(text: str, flag: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"{flag}: expected key=value, got {text!r}")
    return key.strip(), value.strip()


def parse_sweep(text: str) -> tuple[str, list[float]]:
    key, values = _key_value(text, "--sweep")
    grid = [_number(v, f"--sweep {key}") for v in values.split(",") if v.strip()]
    if not grid:
        raise ConfigError("--sweep: empty grid")
    return key, grid


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = config_from_document(load_config_file(args.config)) if args.config else RunConfig()
    if args.well:
        if cfg.well and args.well != cfg.well:
            cfg.params = {}
        cfg.well = args.well
    for item in args.param or []:
        key, value = _key_value(item, "--param")
        cfg.params[key] = _number(value, f"--param {key}")
    for item in args.quad or []:
        key, value = _key_value(item, "--quad")
        kind = int if key in ("n_nodes", "refine_limit") else float
        cfg.quadrature[key] = _number(value, f"--quad {key}", kind)
    if args.beta is not None:
        cfg.beta = args.beta
    if args.scheme:
        cfg.schemes = [CorrectionScheme.parse(s) for s in args.scheme]
    if args.n_max is not None:
        cfg.n_max = args.n_max
    if args.oracle_L is not None:
        cfg.oracle_L = args.oracle_L
    if args.oracle_N is not None:
        cfg.oracle_N = args.oracle_N
    if args.no_oracle:
        cfg.use_oracle = False
    if args.q_form:
        cfg.q_form = args.q_form
    if args.per_level_q:
        cfg.per_level_q = True
    if args.format:
        cfg.format = args.format
    if args.output:
        cfg.output = args.output
    if getattr(args, "sweep", None):
        cfg.sweep_parameter, cfg.sweep_values = parse_sweep(args.sweep)
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# reports


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        return format(float(value), ".17g")
    return str(value)


def _plain(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str)):
        return value
    x = float(value)
    return x if math.isfinite(x) else repr(x)


def render(cfg: RunConfig, command: str, columns: Sequence[str],
           rows: Iterable[dict[str, Any]], meta: dict[str, Any]) -> str:
    rows = list(rows)
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
        return buf.getvalue()
    doc = {"command": command, **meta,
           "rows": [{c: _plain(row.get(c)) for c in columns} for row in rows]}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _meta(cfg: RunConfig) -> dict[str, Any]:
    return {"well": cfg.well, "params": {k: cfg.params[k] for k in sorted(cfg.params)},
            "beta": cfg.beta, "schemes": [s.value for s in cfg.schemes],
            "q_form": cfg.q_form}


def cmd_levels(cfg: RunConfig) -> str:
    well, scale, quad = cfg.make_well(), cfg.scale(), cfg.quad()
    rows = []
    terminations = {}
    for scheme in cfg.schemes:
        report = spectrum(well, scheme, cfg.n_max, scale, quad,
                          q_form=cfg.q_form, per_level_q=cfg.per_level_q)
        terminations[scheme.value] = report.termination
        for rec in report.levels:
            rows.append({"scheme": scheme.value, **dataclasses.asdict(rec)})
    return render(cfg, "levels", LEVEL_COLUMNS, rows,
                  {**_meta(cfg), "termination": terminations})


def cmd_compare(cfg: RunConfig) -> str:
    well, scale, quad = cfg.make_well(), cfg.scale(), cfg.quad()
    m = None if well.asymptote is not None else cfg.n_max + 1
    ref = fd_spectrum(well, scale, cfg.oracle_L, cfg.oracle_N, m)
    rows = []
    for scheme in cfg.schemes:
        report = spectrum(well, scheme, cfg.n_max, scale, quad,
                          q_form=cfg.q_form, per_level_q=cfg.per_level_q)
        for rec in report.levels:
            row = {"scheme": scheme.value, "n": rec.n, "eps": rec.eps, "delta": rec.delta,
                   "q": rec.q, "mu": rec.mu, "gamma": rec.gamma}
            if rec.n < len(ref):
                eps_ref = float(ref.eigenvalues[rec.n])
                delta_ex = phase_integral(well, eps_ref, scale, quad) - (rec.n + 0.5)
                row.update(eps_oracle=eps_ref, abs_err=abs(rec.eps - eps_ref),
                           delta_ex=delta_ex, delta_err=rec.delta - delta_ex,
                           oracle_err=float(ref.errors[rec.n]))
            rows.append(row)
    meta = {**_meta(cfg), "oracle": {"L": ref.L, "N": ref.N, "count": len(ref)}}
    return render(cfg, "compare", COMPARE_COLUMNS, rows, meta)


def _scan_point(cfg: RunConfig, value: float, quad: QuadratureConfig) -> list[dict[str, Any]]:
    well = cfg.make_well(**{cfg.sweep_parameter: value})
    scale = cfg.scale()
    q = mu = None
    if well.asymptote is not None:
        ref_shift = LevelShift(well, CorrectionScheme.IMPROVED, scale, quad, q_form=cfg.q_form)
        q, mu = ref_shift.q, ref_shift.mu
    eps_oracle = None
    if cfg.use_oracle:
        m = None if well.asymptote is not None else 1
        ref = fd_spectrum(well, scale, cfg.oracle_L, cfg.oracle_N, m)
        if len(ref):
            eps_oracle = float(ref.eigenvalues[0])
    rows = []
    for scheme in cfg.schemes:
        row = {"parameter": cfg.sweep_parameter, "value": value, "scheme": scheme.value,
               "eps0_oracle": eps_oracle, "q": q, "mu": mu}
        shift = LevelShift(well, scheme, scale, quad, q_form=cfg.q_form,
                           per_level_q=cfg.per_level_q)
        try:
            rec = solve_level(well, scheme, 0, scale, quad, shift=shift)
        except NoSuchLevelError:
            row["status"] = "missed"
        except StencilError:
            row["status"] = "unresolved"
        else:
            row.update(status="ok", eps0=rec.eps, delta1=rec.delta1,
                       gamma=gamma(well, scheme, rec, scale, quad, shift=shift))
        rows.append(row)
    return rows


def cmd_scan(cfg: RunConfig) -> str:
    if not cfg.sweep_parameter or not cfg.sweep_values:
        raise ConfigError("scan needs a sweep: --sweep NAME=v1,v2,... or a [scan] table")
    quad = cfg.quad()
    rows = []
    for value in cfg.sweep_values:
        rows.extend(_scan_point(cfg, value, quad))
    meta = {**_meta(cfg), "sweep": {"parameter": cfg.sweep_parameter,
                                    "values": list(cfg.sweep_values)}}
    return render(cfg, "scan", SCAN_COLUMNS, rows, meta)


COMMANDS = {"levels": cmd_levels, "compare": cmd_compare, "scan": cmd_scan}


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--well", help="catalog well name or 'shape'")
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="well parameter (repeatable)")
    common.add_argument("--beta", type=float, help="scale with beta**2 = hbar**2/2m")
    common.add_argument("--scheme", action="append", help="correction scheme (repeatable)")
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--quad", action="append", metavar="KEY=VALUE",
                        help="quadrature override (repeatable)")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["csv", "obj"])
    common.add_argument("--oracle-N", dest="oracle_N", type=int)
    common.add_argument("--oracle-L", dest="oracle_L", type=float)
    common.add_argument("--no-oracle", action="store_true", help="scan without the oracle")
    common.add_argument("--q-form", dest="q_form", choices=list(Q_FORMS))
    common.add_argument("--per-level-q", action="store_true")

    parser = _Parser(prog="semiquant",
                     description="Bound-state levels from corrected semiclassical quantization.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("levels", parents=[common], help="solve spectra per scheme")
    sub.add_parser("compare", parents=[common], help="compare schemes with the oracle")
    scan = sub.add_parser("scan", parents=[common], help="n = 0 diagnostics over a sweep")
    scan.add_argument("--sweep", metavar="NAME=v1,v2,...")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = build_config(args)
        text = COMMANDS[args.command](cfg)
        if cfg.output:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except SemiquantError as exc:
        code, kind = exc.exit_code, exc.kind
        message = str(exc)
    except (ArithmeticError, ValueError) as exc:
        code, kind = NumericError.exit_code, NumericError.kind
        message = str(exc)
    except OSError as exc:
        code, kind = ConfigError.exit_code, ConfigError.kind
        message = f"cannot write output: {exc}"
    print(f"error[{kind}]: {' '.join(message.split())}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
