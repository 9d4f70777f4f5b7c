"""Command-line front end.

    cqedprobe spectrum   --config cfg --set n_sites=12 --output out.csv
    cqedprobe sweep      --set sweep_param=hx_over_2j --workers 4 --format json
    cqedprobe equal-time --set pair=1,4
    cqedprobe backaction --set n_sites=400
    cqedprobe certify    --set cert_sizes=4

Configuration is a flat ``key = value`` file (``#`` starts a comment) with
``--set`` overrides applied on top. Frequencies are ordinary frequencies
(GHz, MHz, kHz as the key says), temperatures in mK. A JSON file written by
this tool is also accepted as ``--config``; its stored configuration is used.

Exit codes: 0 success, 2 invalid configuration, 3 resource guard,
4 certification above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .backaction import Regime, max_array_size, perturbative_validity
from .certify import SCENARIOS, certify
from .model import (Boundary, ChainModel, CouplingProfile, ProbeModel, Statistics, ThermalState,
                    to_units)
from .oracle import LEHMANN_MAX_SITES, ResourceGuardError
from .response import (MIN_SAMPLES_PER_EPSILON, SpectrumSeries, build_grid, chain_density,
                       equal_time_spectrum, extract_peaks, spectrum_from_density)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_CERTIFY = 4

MODES = ("spectrum", "sweep", "equal-time", "backaction", "certify")
SWEEP_PARAMS = ("hx_over_2j", "temperature_mk", "lambda_mhz")
MAX_SITES = 4096
MAX_GRID_POINTS = 2_000_000
CSV_COLUMNS = ("omega_over_J", "C_total", "C_bath", "C_zero", "C_finite", "log10_C_total")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """All run parameters in external units (GHz/MHz/kHz as named, mK)."""

    mode: str = "spectrum"
    omega_c_ghz: float = 12.0
    kappa_khz: float = 100.0
    epsilon_khz: float = 600.0
    j_ghz: float = 1.0
    lambda_mhz: float = 40.0
    hx_over_2j: float = 1.0
    temperature_mk: float = 20.0
    n_sites: int = 20
    boundary: str = "periodic"
    coupling_profile: str = "uniform"
    n_th: float = 0.0
    statistics: str = "fermi-dirac"
    sweep_param: str = "hx_over_2j"
    sweep_start: float = 0.2
    sweep_stop: float = 1.5
    sweep_steps: int = 27
    pair: str = ""
    grid: str = "adaptive"
    grid_points: int = 2001
    log_floor: float = 1e-30
    peak_floor: float = 1e-15
    regime: str = "general"
    cert_sizes: str = "2,3,4,6"
    cert_fields: str = "0.2,1.0,1.5"
    cert_temperatures_mk: str = "0,100"
    cert_scenarios: str = ",".join(SCENARIOS)
    cert_tol: float = 1e-6
    output: str = "-"
    format: str = "csv"
    workers: int = 1

    # run-control keys that do not change results and stay out of the config hash
    _CONTROL = ("output", "format", "workers")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def physics(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in self._CONTROL}

    def config_hash(self) -> str:
        blob = json.dumps(self.physics(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def unit_hz(self) -> float:
        return self.j_ghz * 1e9

    def chain(self) -> ChainModel:
        return ChainModel.from_ratio(self.n_sites, self.hx_over_2j, boundary=self.boundary,
                                     coupling_profile=self.coupling_profile, unit_hz=self.unit_hz)

    def probe(self) -> ProbeModel:
        u = self.unit_hz
        return ProbeModel(omega_c=to_units(self.omega_c_ghz * 1e9, u),
                          kappa=to_units(self.kappa_khz * 1e3, u),
                          lam=to_units(self.lambda_mhz * 1e6, u),
                          epsilon=to_units(self.epsilon_khz * 1e3, u),
                          n_th=self.n_th)

    def state(self) -> ThermalState:
        return ThermalState(temperature=self.temperature_mk * 1e-3, statistics=self.statistics,
                            unit_hz=self.unit_hz)

    def pair_sites(self) -> tuple[int, int] | None:
        if not self.pair.strip():
            return None
        parts = [p for p in self.pair.replace(" ", "").split(",") if p]
        if len(parts) != 2:
            raise ConfigError(f"pair must look like 'i,j', got {self.pair!r}")
        return int(parts[0]), int(parts[1])

    def sweep_values(self) -> np.ndarray:
        return np.linspace(self.sweep_start, self.sweep_stop, self.sweep_steps)


_FIELD_TYPES = {f.name: type(f.default) for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    kind = _FIELD_TYPES[key]
    try:
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind is float:
            return float(raw)
        return str(raw).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}") from None


def parse_assignments(lines) -> dict:
    out = {}
    for n, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"line {n}: expected key = value, got {line.strip()!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | Path | None, overrides=(), mode: str = "spectrum", **control) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        if p.suffix == ".json":
            try:
                stored = json.loads(text)["meta"]["config"]
            except (ValueError, KeyError, TypeError):
                raise ConfigError(f"{p} is not an output file of this tool") from None
            values.update({k: _coerce(k, v) for k, v in stored.items() if k != "mode"})
        else:
            values.update(parse_assignments(text.splitlines()))
    values.update(parse_assignments(overrides))
    values.update({k: _coerce(k, v) for k, v in control.items() if v is not None})
    values["mode"] = mode
    return RunConfig(**values)


@dataclass(frozen=True)
class Diagnostic:
    level: str
    code: str
    message: str


def _csv_floats(text: str, key: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def validate(config: RunConfig) -> list[Diagnostic]:
    """Errors and warnings for ``config``; never raises, never mutates."""
    diags: list[Diagnostic] = []

    def error(code, msg):
        diags.append(Diagnostic("error", code, msg))

    def warn(code, msg):
        diags.append(Diagnostic("warning", code, msg))

    if config.mode not in MODES:
        error("mode", f"mode must be one of {MODES}")
    if config.format not in ("csv", "json"):
        error("format", "format must be csv or json")
    if config.workers < 1:
        error("workers", "workers must be >= 1")
    if config.j_ghz <= 0:
        error("j_ghz", "Ising coupling must be positive")
        return diags
    if config.grid not in ("adaptive", "uniform"):
        error("grid", "grid must be adaptive or uniform")
    if config.grid_points < 3:
        error("grid_points", "grid_points must be >= 3")
    if config.log_floor <= 0:
        error("log_floor", "log_floor must be positive")
    try:
        chain = config.chain()
        probe = config.probe()
        config.state()
        pair = config.pair_sites()
    except (ValueError, ConfigError) as exc:
        error("model", str(exc))
        return diags
    if pair is not None:
        for s in pair:
            if not 1 <= s <= chain.n_sites:
                error("pair", f"pair site {s} outside 1..{chain.n_sites}")
    if config.mode == "sweep":
        if config.sweep_param not in SWEEP_PARAMS:
            error("sweep_param", f"sweep_param must be one of {SWEEP_PARAMS}")
        if config.sweep_steps < 2:
            error("sweep_steps", "sweep needs at least 2 steps")
    if config.mode == "certify":
        try:
            for key in ("cert_sizes", "cert_fields", "cert_temperatures_mk"):
                _csv_floats(getattr(config, key), key)
        except ConfigError as exc:
            error("certify", str(exc))
        unknown = set(config.cert_scenarios.split(",")) - set(SCENARIOS)
        if unknown:
            error("cert_scenarios", f"unknown scenarios {sorted(unknown)}")

    if probe.lam > 0.1 * chain.J:
        warn("weak-probe", f"lambda = {probe.lam:g} J exceeds J/10; the probe is not weak")
    if probe.lam > 0 and not perturbative_validity(probe, chain):
        room = probe.omega_c - chain.bandwidth
        bound = 2.0 * room / probe.lam if room > 0 else 0.0
        warn("backaction", f"N = {chain.n_sites} violates lambda N/2 < omega_c - (4J + 2h_x); "
                           f"the perturbative treatment needs N <~ {bound:.0f}")
    elif chain.boundary is Boundary.PERIODIC:
        report = max_array_size(probe, chain, config.regime if config.regime != "auto" else "auto")
        if report.max_n is not None and chain.n_sites > report.max_n:
            warn("backaction", f"N = {chain.n_sites} exceeds the {report.regime.value} "
                               f"mode-spacing bound max_n = {report.max_n}")
    if config.grid == "uniform":
        reach = max(chain.bandwidth, probe.omega_c) + 10 * probe.kappa_tilde
        spacing = 2 * reach / (config.grid_points - 1)
        if spacing > probe.epsilon / MIN_SAMPLES_PER_EPSILON:
            warn("grid", f"uniform grid spacing {spacing:.3g} J does not resolve epsilon "
                         f"({MIN_SAMPLES_PER_EPSILON} samples per epsilon need "
                         f"{math.ceil(2 * reach * MIN_SAMPLES_PER_EPSILON / probe.epsilon) + 1} points)")
    return diags


# ---------------------------------------------------------------- computation

def _frequency_grid(config: RunConfig, chain, probe, dens):
    if config.grid == "uniform":
        reach = max(chain.bandwidth, probe.omega_c) + 10 * probe.kappa_tilde
        return np.linspace(-reach, reach, config.grid_points)
    return build_grid(probe, chain, dens, n_base=config.grid_points)


def compute_spectrum(config: RunConfig) -> tuple[SpectrumSeries, list[dict]]:
    chain, probe, state = config.chain(), config.probe(), config.state()
    if chain.n_sites > MAX_SITES:
        raise ResourceGuardError(f"n_sites = {chain.n_sites} exceeds the limit {MAX_SITES}")
    dens = chain_density(chain, state)
    grid = _frequency_grid(config, chain, probe, dens)
    if len(grid) > MAX_GRID_POINTS:
        raise ResourceGuardError(f"grid of {len(grid)} points exceeds {MAX_GRID_POINTS}")
    series = spectrum_from_density(probe, dens, grid)
    floor = config.peak_floor * float(series.total.max())
    try:
        peaks = extract_peaks(series, floor)
    except ValueError as exc:
        log.warning("peak extraction skipped: %s", exc)
        peaks = ()
    return series, [dataclasses.asdict(p) for p in peaks]


def _sweep_point(config: RunConfig) -> dict:
    series, peaks = compute_spectrum(config)
    floor = config.peak_floor * float(series.finite_part.max(initial=0.0))
    finite = [p for p in _finite_peaks(series, floor) if p > 0]
    return {"series": series, "peaks": peaks, "finite_positive": finite}


def _finite_peaks(series: SpectrumSeries, floor: float) -> list[float]:
    if not np.any(series.finite_part > 0):
        return []
    try:
        return extract_peaks(series, floor, component="finite").centers.tolist()
    except ValueError:
        return []


def run_sweep(config: RunConfig) -> list[dict]:
    points = [config.replace(**{config.sweep_param: float(v)}) for v in config.sweep_values()]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            # map preserves submission order, so output follows the sweep index
            return list(pool.map(_sweep_point, points))
    return [_sweep_point(p) for p in points]


# ---------------------------------------------------------------- serialization

def _fmt(x: float) -> str:
    return repr(float(x))


def _meta(config: RunConfig, **extra) -> dict:
    meta = {"tool": "cqedprobe", "version": __version__, "mode": config.mode,
            "config_hash": config.config_hash(), "config": config.physics()}
    meta.update(extra)
    return meta


def _series_rows(series: SpectrumSeries, log_floor: float):
    total = series.total
    logs = np.log10(np.maximum(total, log_floor))
    for row in zip(series.grid, total, series.bath, series.zero_part, series.finite_part, logs):
        yield [_fmt(x) for x in row]


def _series_json(series: SpectrumSeries) -> dict:
    return {"total": series.total.tolist(), "bath": series.bath.tolist(),
            "zero": series.zero_part.tolist(), "finite": series.finite_part.tolist()}


def _csv_header(buf, meta: dict):
    buf.write(f"# tool: {meta['tool']} {meta['version']}\n")
    buf.write(f"# config_hash: {meta['config_hash']}\n")
    buf.write(f"# mode: {meta['mode']}\n")
    buf.write(f"# config: {json.dumps(meta['config'], sort_keys=True)}\n")


def render_spectrum(config: RunConfig, series: SpectrumSeries, peaks: list[dict]) -> str:
    meta = _meta(config, units={"grid": "omega/J", "spectra": "dimensionless"})
    if config.format == "json":
        doc = {"meta": meta, "grid": series.grid.tolist(), "series": _series_json(series),
               "peaks": peaks}
        return json.dumps(doc, sort_keys=True) + "\n"
    buf = io.StringIO()
    _csv_header(buf, meta)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(_series_rows(series, config.log_floor))
    return buf.getvalue()


def _sweep_summary(config: RunConfig, results: list[dict]) -> list[dict]:
    out = []
    for i, (v, r) in enumerate(zip(config.sweep_values(), results)):
        pos = r["finite_positive"]
        out.append({"index": i, "value": float(v), "n_positive_peaks": len(pos),
                    "min_positive_peak": min(pos) if pos else None})
    return out


def render_sweep(config: RunConfig, results: list[dict]) -> str:
    summary = _sweep_summary(config, results)
    meta = _meta(config, sweep={"param": config.sweep_param,
                                "values": config.sweep_values().tolist()})
    if config.format == "json":
        points = [{"index": i, "value": s["value"], "grid": r["series"].grid.tolist(),
                   "series": _series_json(r["series"]), "peaks": r["peaks"]}
                  for i, (s, r) in enumerate(zip(summary, results))]
        return json.dumps({"meta": meta, "points": points, "summary": summary},
                          sort_keys=True) + "\n"
    buf = io.StringIO()
    _csv_header(buf, meta)
    w = csv.writer(buf, lineterminator="\n")
    for s, r in zip(summary, results):
        buf.write(f"# block {s['index']}: {config.sweep_param} = {_fmt(s['value'])}\n")
        w.writerow(("sweep_index", config.sweep_param) + CSV_COLUMNS)
        for row in _series_rows(r["series"], config.log_floor):
            w.writerow([s["index"], _fmt(s["value"])] + row)
    buf.write("# peaks summary\n")
    w.writerow(("sweep_index", config.sweep_param, "n_positive_peaks", "min_positive_peak"))
    for s in summary:
        low = "" if s["min_positive_peak"] is None else _fmt(s["min_positive_peak"])
        w.writerow([s["index"], _fmt(s["value"]), s["n_positive_peaks"], low])
    return buf.getvalue()


def render_records(config: RunConfig, records: list[dict], **extra) -> str:
    meta = _meta(config, **extra)
    if config.format == "json":
        return json.dumps({"meta": meta, "results": records}, sort_keys=True, default=str) + "\n"
    buf = io.StringIO()
    _csv_header(buf, meta)
    if records:
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(records)
    return buf.getvalue()


def load_json_series(path: str | Path) -> tuple[dict, SpectrumSeries]:
    """Read a JSON spectrum written by this tool back into a SpectrumSeries."""
    doc = json.loads(Path(path).read_text())
    cfg = doc["meta"]["config"]
    config = RunConfig(**{k: _coerce(k, v) for k, v in cfg.items()})
    probe = config.probe()
    s = doc["series"]
    series = SpectrumSeries(grid=np.array(doc["grid"]), bath=np.array(s["bath"]),
                            zero_part=np.array(s["zero"]), finite_part=np.array(s["finite"]),
                            epsilon=probe.epsilon, kappa_tilde=probe.kappa_tilde)
    return doc["meta"], series


def _emit(text: str, output: str):
    if output in ("", "-"):
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head); discard the rest
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- entry points

def run(config: RunConfig) -> int:
    diags = validate(config)
    errors = [d for d in diags if d.level == "error"]
    if errors:
        raise ConfigError("; ".join(f"{d.code}: {d.message}" for d in errors))
    for d in diags:
        log.warning("%s: %s", d.code, d.message)

    if config.mode == "spectrum":
        series, peaks = compute_spectrum(config)
        _emit(render_spectrum(config, series, peaks), config.output)
        return EXIT_OK
    if config.mode == "sweep":
        _emit(render_sweep(config, run_sweep(config)), config.output)
        return EXIT_OK
    if config.mode == "equal-time":
        chain, probe, state = config.chain(), config.probe(), config.state()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            value = equal_time_spectrum(probe, chain, state, config.pair_sites())
        record = {"C_t0": value, "pair": config.pair or "all",
                  "warnings": " | ".join(str(w.message) for w in caught)}
        _emit(render_records(config, [record]), config.output)
        return EXIT_OK
    if config.mode == "backaction":
        report = max_array_size(config.probe(), config.chain(), config.regime)
        record = dataclasses.asdict(report)
        record["regime"] = report.regime.value
        record["perturbative_validity"] = perturbative_validity(config.probe(), config.chain())
        _emit(render_records(config, [record]), config.output)
        return EXIT_OK
    return _run_certify(config)


def _run_certify(config: RunConfig) -> int:
    sizes = [int(n) for n in _csv_floats(config.cert_sizes, "cert_sizes")]
    too_big = [n for n in sizes if n > LEHMANN_MAX_SITES]
    if too_big:
        raise ResourceGuardError(f"certification sizes {too_big} exceed the ED limit {LEHMANN_MAX_SITES}")
    results = certify(sizes=sizes,
                      fields=_csv_floats(config.cert_fields, "cert_fields"),
                      temperatures_mk=_csv_floats(config.cert_temperatures_mk, "cert_temperatures_mk"),
                      scenarios=[s for s in config.cert_scenarios.split(",") if s],
                      tol=config.cert_tol)
    records = [r.as_dict() for r in results]
    worst = max((r.deviation for r in results), default=0.0)
    ok = all(r.passed for r in results)
    _emit(render_records(config, records, max_deviation=worst, passed=ok), config.output)
    print(f"certify: {len(results)} points, max deviation {worst:.3e}, "
          f"{'pass' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CERTIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqedprobe", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat key = value file, or a JSON output of this tool")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one configuration key (repeatable)")
        p.add_argument("--output", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--workers", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, args.overrides, mode=args.mode, output=args.output,
                             format=args.format, workers=args.workers)
        return run(config)
    except ResourceGuardError as exc:
        return _fail("resource_guard", str(exc), EXIT_RESOURCE)
    except (ConfigError, ValueError) as exc:
        return _fail("invalid_config", str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
