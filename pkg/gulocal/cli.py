# gulocal\cli.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Command-line driver: wires the modules into reproducible experiments with machine-readable reports.

Every subcommand returns a `Report` holding the echoed configuration, one
verdict per check, the computed data and a digest of that data. The process
exit status is 0 iff every verdict is PASS, 1 if any check fails, 2 on usage
errors and 3 when an enumeration would exceed its budget.

Key Functions:
- `build_parser()`: the argparse surface (subcommand plus shared flags).
- `run(config, pmap)`: dispatches one validated `RunConfig`.
- `emit(report, fmt)`: canonical JSON, census CSV or a rich text rendering.
- `main(argv)`: merges defaults, `--config` files, `GULOCAL_*` variables and flags,
  owns the worker pool and maps failures to exit codes.
"""

# 1. IMPORTS ####################################################################################################
import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, ValidationError, field_validator, \
    model_validator
from rich.console import Console
from rich.table import Table
from sympy import isprime

from . import __version__, hecke, weyl
from .config_manager import DEFAULT_CONFIG, get_config, merged_config, reset_to_defaults, set_config
from .forms import Direction, FormError, HermitianForm, apply_matrix, convert_form, determinant_class, \
    hensel_unitarize, is_similitude, isometry_class
from .gfring import field_ctx
from .hecke import HeckeAlgebra, ParameterFitError, ParameterSystem
from .latmodel import (
    BudgetExceededError,
    Census,
    ModelWindow,
    approximate_iwahori,
    cached_census,
    cell_census,
    convolution_count,
    enumerate_points,
    generator_ring,
    is_local_model_point,
    iwahori_generators,
    relative_position,
    standard_lattice,
)
from .logging_config import setup_logging
from .weyl import Cocharacter, WeylElement, reduced_word

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

# Settings that change how a run executes but not what it computes.
_EXECUTION_KEYS = {"jobs", "out", "format", "log_level", "timing", "regen_golden", "fixtures_dir"}


class UsageError(ValueError):
    """Raised for requests the driver cannot honour (bad format, bad combination of options)."""


class Command(str, Enum):
    CENSUS = "census"
    POINT_DUMP = "point-dump"
    ADMISSIBLE = "admissible"
    BERNSTEIN = "bernstein"
    CENTER_CHECK = "center-check"
    FIT_PARAMS = "fit-params"
    CROSS_VALIDATE = "cross-validate"
    CLASSIFY_FORM = "classify-form"
    UNITARIZE_DEMO = "unitarize-demo"
    CONFIG = "config"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


# 3. MODELS #####################################################################################################
def _int_list(value: Any) -> Any:
    if isinstance(value, str):
        return [int(x) for x in value.replace(" ", "").split(",") if x]
    return value


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    d: int = DEFAULT_CONFIG["d"]
    q: int = DEFAULT_CONFIG["q"]
    q_list: list[int] = Field(default_factory=lambda: [3, 5])
    m: NonNegativeInt = DEFAULT_CONFIG["m"]
    n: NonNegativeInt = DEFAULT_CONFIG["n"]
    mu: Optional[list[int]] = None
    exponents: Optional[list[int]] = None
    gram: Optional[list[list[Any]]] = None
    seed: int = DEFAULT_CONFIG["seed"]
    budget: PositiveInt = DEFAULT_CONFIG["budget"]
    jobs: PositiveInt = DEFAULT_CONFIG["jobs"]
    format: OutputFormat = OutputFormat.JSON
    out: Optional[str] = None
    verify_generators: NonNegativeInt = DEFAULT_CONFIG["verify_generators"]
    convolution_samples: PositiveInt = DEFAULT_CONFIG["convolution_samples"]
    trials: PositiveInt = DEFAULT_CONFIG["trials"]
    fixtures_dir: str = DEFAULT_CONFIG["fixtures_dir"]
    regen_golden: bool = False
    timing: bool = False
    log_level: str = DEFAULT_CONFIG["log_level"]
    set_values: Optional[list[str]] = None
    reset: Optional[bool] = None

    @field_validator("mu", "q_list", "exponents", mode="before")
    @classmethod
    def _split_lists(cls, value):
        return _int_list(value)

    @field_validator("gram", mode="before")
    @classmethod
    def _parse_gram(cls, value):
        if isinstance(value, str):
            return json.loads(value)
        return value

    @field_validator("d")
    @classmethod
    def _check_rank(cls, value: int) -> int:
        if value < 2 or value % 2:
            raise ValueError(f"d must be even and at least 2 (got {value})")
        return value

    @field_validator("q")
    @classmethod
    def _check_q(cls, value: int) -> int:
        if value == 2 or not isprime(value):
            raise ValueError(f"q must be an odd prime (got {value})")
        return value

    @field_validator("q_list")
    @classmethod
    def _check_q_list(cls, value: list[int]) -> list[int]:
        if not value or any(q == 2 or not isprime(q) for q in value):
            raise ValueError(f"q_list must be a nonempty list of odd primes (got {value})")
        return value

    @model_validator(mode="after")
    def _check_mu(self) -> "RunConfig":
        if self.mu is not None and len(self.mu) != self.d:
            raise ValueError(f"mu needs {self.d} entries (got {len(self.mu)})")
        # WeylError and HeckeError are ValueErrors, so pydantic reports them as validation errors.
        self.cocharacter()
        self.parameters()
        return self

    def cocharacter(self) -> Cocharacter:
        if self.mu is None:
            return Cocharacter.standard_minuscule(self.d)
        return Cocharacter(tuple(self.mu), self.mu[0] + self.mu[-1])

    def window(self) -> ModelWindow:
        return ModelWindow(self.d, self.q, self.m, self.n)

    def parameters(self) -> ParameterSystem:
        if self.exponents is None:
            return ParameterSystem.equal(self.d)
        classes = weyl.reflection_classes(weyl.group_ctx(self.d))
        return ParameterSystem(self.d, classes, tuple(self.exponents))


class Check(BaseModel):
    name: str
    verdict: Verdict
    detail: str = ""


class Report(BaseModel):
    command: str
    version: str = __version__
    settings: dict[str, Any] = Field(default_factory=dict)
    checks: list[Check] = Field(default_factory=list)
    data: dict[str, Any] = Field(default_factory=dict)
    digests: dict[str, str] = Field(default_factory=dict)
    timing: Optional[dict[str, float]] = None

    @property
    def passed(self) -> bool:
        return all(check.verdict is Verdict.PASS for check in self.checks)

    def check(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(Check(name=name, verdict=Verdict.PASS if ok else Verdict.FAIL, detail=detail))


# 4. HELPERS ####################################################################################################
def _omega_label(om: WeylElement) -> str:
    if om == WeylElement.identity(om.d):
        return ""
    if om == weyl.omega(weyl.group_ctx(om.d), om.gamma):
        return "tau" if om.gamma == 1 else f"tau^{om.gamma}"
    return f"omega{list(om.pi)}{list(om.a)}"


def word_label(w: WeylElement) -> str:
    """Reduced word followed by the length-zero part, e.g. "s0.tau"; "1" is the identity."""
    word, om = reduced_word(w)
    parts = [f"s{i}" for i in word]
    tail = _omega_label(om)
    if tail:
        parts.append(tail)
    return ".".join(parts) or "1"


def element_row(w: WeylElement) -> dict:
    return {"word": word_label(w), "gamma": w.gamma, "length": weyl.length(w), "pi": list(w.pi), "a": list(w.a)}


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def _canonical(obj: Any) -> Any:
    """Order-insensitive normal form: lists of dicts are sorted by their JSON text."""
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, list):
        items = [_canonical(v) for v in obj]
        if items and all(isinstance(v, dict) for v in items):
            return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
        return items
    return obj


def _digest(data: dict) -> str:
    return hashlib.sha256(canonical_json(_canonical(data)).encode("utf-8")).hexdigest()


def golden_path(config: RunConfig) -> Path:
    return Path(config.fixtures_dir) / f"{config.command.value}_d{config.d}_q{config.q}_m{config.m}_n{config.n}.json"


def _apply_golden(config: RunConfig, report: Report):
    """Writes the golden file in regen mode; otherwise compares against it when present."""
    path = golden_path(config)
    if config.regen_golden:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(_canonical(report.data)) + "\n", encoding="utf-8")
        logger.info(f"Golden values written to {path}")
        return
    if not path.is_file():
        logger.debug(f"No golden file at {path}; skipping comparison.")
        return
    golden = json.loads(path.read_text(encoding="utf-8"))
    mismatched = [key for key in golden if _canonical(report.data.get(key)) != _canonical(golden[key])]
    report.digests["golden"] = _digest(golden)
    report.check("golden", not mismatched, f"mismatched keys: {mismatched}" if mismatched else str(path))


def census_parameters(config: RunConfig, census: Census) -> ParameterSystem:
    """Explicit exponents win; otherwise they are fitted to the census itself."""
    if config.exponents is not None:
        return config.parameters()
    if all(weyl.is_length_zero(w) for w in census.cells):
        return ParameterSystem.equal(config.d)
    return hecke.fit_from_cells(config.d, {config.q: census.counts()})


# 5. COMMANDS ###################################################################################################
def _cmd_census(config: RunConfig, report: Report, pmap: Callable):
    window = config.window()
    generators = iwahori_generators(window, config.verify_generators, config.seed) if config.verify_generators else ()
    census = cell_census(window, budget=config.budget, pmap=pmap, generators=generators)
    cells = []
    for w in sorted(census.cells, key=weyl.element_key):
        row = element_row(w)
        row["size"] = census.cells[w].size
        cells.append(row)
    report.data["window"] = window.to_dict()
    report.data["total"] = census.total
    report.data["cells"] = cells
    report.data["size_histogram"] = {str(size): k for size, k in census.size_histogram().items()}
    if generators:
        report.data["orbit_components"] = [{"word": word_label(w), "gamma": w.gamma, "components": k}
                                           for w, k in sorted(census.orbit_components.items(),
                                                              key=lambda item: weyl.element_key(item[0]))]
        report.check("cell_closure", not census.violations,
                     "; ".join(v.describe() for v in census.violations[:5]))

    expected = set()
    for lam in weyl.dominant_in_window(window.d, window.m, window.n):
        expected |= set(weyl.admissible(lam))
    report.check("labels_admissible", set(census.cells) == expected,
                 f"{len(census.cells)} cell(s), {len(expected)} admissible element(s)")

    try:
        params = census_parameters(config, census)
    except ParameterFitError as e:
        report.check("cell_sizes", False, str(e))
    else:
        algebra = HeckeAlgebra(params)
        report.data["parameters"] = params.to_dict()
        wrong = [word_label(w) for w, cell in census.cells.items()
                 if cell.size != algebra.specialized_index(w, window.q)]
        report.check("cell_sizes", not wrong, f"cells with unexpected size: {wrong}" if wrong else "")
    _apply_golden(config, report)


def _cmd_point_dump(config: RunConfig, report: Report, pmap: Callable):
    points = []
    failures = 0
    for chain in enumerate_points(config.window(), budget=config.budget, pmap=pmap, verify=False):
        diagnostics = is_local_model_point(chain)
        failures += not diagnostics.passed
        entry = {"chain": chain.to_dict()["members"], "diagnostics": diagnostics.to_dict()}
        if diagnostics.passed:
            entry["label"] = element_row(relative_position(chain))
        points.append(entry)
    report.data["window"] = config.window().to_dict()
    report.data["points"] = points
    report.check("points_valid", failures == 0, f"{failures} chain(s) fail the point conditions")


def _cmd_admissible(config: RunConfig, report: Report, pmap: Callable):
    mu = config.cocharacter()
    adm = weyl.admissible(mu)
    report.data["mu"] = mu.to_dict()
    report.data["size"] = len(adm)
    report.data["elements"] = [element_row(w) for w in adm]
    adm_set = set(adm)
    translations = {weyl.translation(lam) for lam in weyl.finite_orbit(mu)}
    report.check("contains_translations", translations <= adm_set)
    report.check("downward_closed", all(weyl.downset(w) <= adm_set for w in adm))
    _apply_golden(config, report)


def _cmd_bernstein(config: RunConfig, report: Report, pmap: Callable):
    mu = config.cocharacter()
    algebra = HeckeAlgebra(config.parameters())
    z = algebra.bernstein_z(mu)
    trace = algebra.sstrace_element(mu)
    t_mu = weyl.translation(mu.dominant())
    sign = -1 if weyl.length(t_mu) % 2 else 1
    report.data["mu"] = mu.to_dict()
    report.data["parameters"] = algebra.params.to_dict()
    report.data["z_mu"] = z.to_json()
    report.data["sstrace"] = trace.to_json()
    report.check("trace_normalization", trace.coeff(t_mu) == sign, f"coefficient {trace.coeff(t_mu)}")
    report.check("support_admissible", z.support <= set(weyl.admissible(mu)))
    _apply_golden(config, report)


def _cmd_center_check(config: RunConfig, report: Report, pmap: Callable):
    mu = config.cocharacter()
    algebra = HeckeAlgebra(config.parameters())
    z = algebra.bernstein_z(mu)
    report.data["mu"] = mu.to_dict()
    report.data["parameters"] = algebra.params.to_dict()
    report.check("z_central", algebra.is_central(z))
    report.check("sstrace_central", algebra.is_central(algebra.sstrace_element(mu)))
    solved = algebra.central_from_characterization(mu, verify=False)
    report.check("characterization", solved == z, f"{len(solved.terms)} term(s) solved")


def _cmd_fit_params(config: RunConfig, report: Report, pmap: Callable):
    params = hecke.fit_parameters(config.d, config.q_list, config.budget, pmap=pmap)
    mu = Cocharacter.standard_minuscule(config.d)
    report.data["parameters"] = params.to_dict()
    totals = {}
    for q in config.q_list:
        census = cached_census(ModelWindow(config.d, q, 0, 1), budget=config.budget, pmap=pmap)
        expected = hecke.expected_point_count(mu, params, q)
        totals[str(q)] = census.total
        report.check(f"point_count_q{q}", census.total == expected, f"{census.total} counted, {expected} expected")
        bad = [word_label(w) for w, size in census.counts().items()
               if size != q ** params.word_exponent(reduced_word(w)[0])]
        report.check(f"cell_sizes_q{q}", not bad, f"mismatched cells: {bad}" if bad else "")
    report.data["totals"] = totals


def _cmd_cross_validate(config: RunConfig, report: Report, pmap: Callable):
    window = ModelWindow(config.d, config.q, 0, 1)
    mu = Cocharacter.standard_minuscule(config.d)
    census = cached_census(window, budget=config.budget, pmap=pmap)
    params = hecke.fit_from_cells(config.d, {config.q: census.counts()})
    algebra = HeckeAlgebra(params)
    adm = weyl.admissible(mu)
    rows = []
    mismatches = 0
    for x in adm:
        for y in adm:
            product = algebra.specialize(algebra.multiply(algebra.basis(x), algebra.basis(y)), config.q)
            for w, symbolic in sorted(product.items(), key=lambda item: weyl.element_key(item[0])):
                counted = convolution_count(x, y, w, window, samples=config.convolution_samples,
                                            budget=config.budget, pmap=pmap)
                mismatches += counted != symbolic
                rows.append({"x": word_label(x), "y": word_label(y), "w": word_label(w), "gamma": w.gamma,
                             "symbolic": symbolic, "counted": counted})
    report.data["parameters"] = params.to_dict()
    report.data["structure_constants"] = rows
    report.check("structure_constants", mismatches == 0, f"{mismatches} of {len(rows)} constant(s) differ")
    _apply_golden(config, report)


def _random_hermitian(fld, d: int, rng: np.random.Generator) -> np.ndarray:
    upper = rng.integers(0, fld.q, size=(d, d))
    gram = np.triu(upper, 1)
    gram = fld.add(gram, fld.frob(gram).T)
    np.fill_diagonal(gram, rng.integers(0, fld.p, size=d))
    return gram


def _cmd_classify_form(config: RunConfig, report: Report, pmap: Callable):
    p = config.q
    gram = config.gram
    if gram is None:
        gram = [[1 if i + j == config.d - 1 else 0 for j in range(config.d)] for i in range(config.d)]
    if len(gram) % 2:
        raise UsageError("classify-form needs a Gram matrix of even size.")
    try:
        det = determinant_class(gram, p)
        report.data["class"] = isometry_class(gram, p).value
    except FormError as e:
        raise UsageError(f"Gram matrix rejected: {e}") from e
    report.data["determinant"] = {"valuation": det.valuation, "unit_class": det.unit_class}
    if config.gram is None:
        report.check("anti_identity_quasi_split", report.data["class"] == "quasi-split")

    fld = field_ctx(p, 2)
    rng = np.random.default_rng(config.seed)
    failures = 0
    for _ in range(config.trials):
        herm = _random_hermitian(fld, config.d, rng)
        psi = convert_form(fld, herm, Direction.HERMITIAN_TO_ALTERNATING)
        try:
            back = convert_form(fld, psi, Direction.ALTERNATING_TO_HERMITIAN)
        except FormError:
            failures += 1
            continue
        failures += not np.array_equal(back, herm)
    report.check("trace_roundtrip", failures == 0, f"{failures} of {config.trials} Gram(s) failed")


def _cmd_unitarize_demo(config: RunConfig, report: Report, pmap: Callable):
    window = config.window()
    ring = generator_ring(window)
    form = HermitianForm(ring, window.d)
    flags = [standard_lattice(window.ring, window.d, j) for j in range(window.d)]
    rng = np.random.default_rng(config.seed)
    similitude = congruent = preserved = 0
    for _ in range(config.trials):
        approx, c = approximate_iwahori(window, rng)
        fixed = hensel_unitarize(approx, form, c)
        similitude += is_similitude(fixed, form, c)
        congruent += np.array_equal(fixed.mod_t(), approx.mod_t())
        preserved += all(flag.contains(apply_matrix(fixed, flag)) for flag in flags)
    trials = config.trials
    report.data["trials"] = trials
    report.data["window_height"] = ring.width
    report.check("exact_similitude", similitude == trials, f"{similitude}/{trials}")
    report.check("congruent_mod_t", congruent == trials, f"{congruent}/{trials}")
    report.check("chain_preserved", preserved == trials, f"{preserved}/{trials}")


def _parse_assignment(item: str) -> tuple[str, str]:
    key, sep, value = item.partition("=")
    key = key.strip().lower().replace("-", "_")
    if not sep or key not in DEFAULT_CONFIG:
        raise UsageError(f"--set expects KEY=VALUE with KEY one of {sorted(DEFAULT_CONFIG)} (got {item!r}).")
    return key, value.strip()


def _cmd_config(config: RunConfig, report: Report, pmap: Callable):
    """Shows, updates or clears the persisted run defaults."""
    if config.reset:
        reset_to_defaults()
    updates = dict(_parse_assignment(item) for item in config.set_values or ())
    if updates:
        current = {key: get_config(key) for key in DEFAULT_CONFIG}
        try:
            RunConfig(**{**current, **updates, "command": Command.CONFIG})
        except ValidationError as e:
            raise UsageError(f"Rejected settings {sorted(updates)}: {e}") from e
        for key, value in updates.items():
            set_config(key, value)
        logger.info(f"Persisted {len(updates)} setting(s): {sorted(updates)}")
    report.data["reset"] = bool(config.reset)
    report.data["updated"] = sorted(updates)
    report.data["settings"] = {key: str(get_config(key)) for key in sorted(DEFAULT_CONFIG)}


_COMMANDS: dict[Command, Callable[[RunConfig, Report, Callable], None]] = {
    Command.CENSUS: _cmd_census,
    Command.POINT_DUMP: _cmd_point_dump,
    Command.ADMISSIBLE: _cmd_admissible,
    Command.BERNSTEIN: _cmd_bernstein,
    Command.CENTER_CHECK: _cmd_center_check,
    Command.FIT_PARAMS: _cmd_fit_params,
    Command.CROSS_VALIDATE: _cmd_cross_validate,
    Command.CLASSIFY_FORM: _cmd_classify_form,
    Command.UNITARIZE_DEMO: _cmd_unitarize_demo,
    Command.CONFIG: _cmd_config,
}


# 6. RUN & EMIT #################################################################################################
def run(config: RunConfig, pmap: Callable = map) -> Report:
    echo = config.model_dump(mode="json", exclude=_EXECUTION_KEYS, exclude_none=True)
    report = Report(command=config.command.value, settings=echo)
    started = time.perf_counter()
    _COMMANDS[config.command](config, report, pmap)
    report.digests["data"] = _digest(report.data)
    if config.timing:
        report.timing = {"seconds": round(time.perf_counter() - started, 3)}
    verdicts = ", ".join(f"{c.name}={c.verdict.value}" for c in report.checks)
    logger.info(f"{config.command.value}: {verdicts or 'no checks'}")
    return report


def emit(report: Report, fmt: OutputFormat | str) -> bytes:
    try:
        fmt = OutputFormat(fmt)
    except ValueError as e:
        raise UsageError(f"Unsupported output format: {fmt!r}") from e

    if fmt is OutputFormat.JSON:
        return (canonical_json(report.model_dump(mode="json", exclude_none=True)) + "\n").encode("utf-8")

    if fmt is OutputFormat.CSV:
        if "cells" not in report.data:
            raise UsageError(f"CSV output is only available for census reports (got {report.command}).")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["word", "gamma", "size"])
        for cell in report.data["cells"]:
            writer.writerow([cell["word"], cell["gamma"], cell["size"]])
        return buffer.getvalue().encode("utf-8")

    console = Console(record=True, width=120, file=io.StringIO())
    checks = Table(title=f"{report.command} (gulocal {report.version})")
    checks.add_column("check")
    checks.add_column("verdict")
    checks.add_column("detail")
    for check in report.checks:
        checks.add_row(check.name, check.verdict.value, check.detail)
    console.print(checks)
    if "cells" in report.data:
        cells = Table(title=f"{report.data.get('total', 0)} point(s)")
        for column in ("word", "gamma", "length", "size"):
            cells.add_column(column, justify="right" if column != "word" else "left")
        for cell in report.data["cells"]:
            cells.add_row(cell["word"], str(cell["gamma"]), str(cell["length"]), str(cell["size"]))
        console.print(cells)
    if report.command == Command.CONFIG.value:
        settings = Table(title="persisted defaults")
        settings.add_column("key")
        settings.add_column("value")
        for key, value in report.data.get("settings", {}).items():
            settings.add_row(key, value)
        console.print(settings)
    return console.export_text().encode("utf-8")


# 7. ENTRY POINT ################################################################################################
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gulocal", description="Local models and Iwahori-Hecke algebras of GU_d.")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", help="key=value file with run settings")
    parser.add_argument("--d", type=int)
    parser.add_argument("--q", type=int)
    parser.add_argument("--q-list", dest="q_list", help="comma-separated primes for fit-params")
    parser.add_argument("--m", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--mu", help="comma-separated cocharacter, e.g. 1,1,0,0")
    parser.add_argument("--exponents", help="comma-separated parameter exponents, one per reflection class")
    parser.add_argument("--gram", help="JSON Gram matrix for classify-form")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--verify-generators", dest="verify_generators", type=int)
    parser.add_argument("--convolution-samples", dest="convolution_samples", type=int)
    parser.add_argument("--trials", dest="trials", type=int)
    parser.add_argument("--fixtures-dir", dest="fixtures_dir")
    parser.add_argument("--regen-golden", dest="regen_golden", action="store_true", default=None)
    parser.add_argument("--timing", action="store_true", default=None)
    parser.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--set", dest="set_values", action="append", metavar="KEY=VALUE",
                        help="config: persist a default (repeatable)")
    parser.add_argument("--reset", action="store_true", default=None, help="config: clear every persisted default")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.command == Command.CONFIG.value:
        # Starts from the flags alone so that a broken persisted layer can still be repaired.
        return RunConfig(**flags)
    values = merged_config(args.config)
    values.update(flags)
    return RunConfig(**values)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    errors = Console(stderr=True)
    try:
        config = load_run_config(args)
    except (ValidationError, FileNotFoundError) as e:
        errors.print(f"[red]Invalid configuration:[/red] {e}")
        return EXIT_USAGE

    setup_logging(config.log_level)
    try:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            report = run(config, pmap=pool.map)
        payload = emit(report, config.format)
    except BudgetExceededError as e:
        logger.error(str(e))
        return EXIT_BUDGET
    except UsageError as e:
        logger.error(f"Invalid request: {e}")
        return EXIT_USAGE
    except Exception:
        logger.exception(f"'{config.command.value}' failed.")
        return EXIT_FAIL

    if config.out:
        Path(config.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return EXIT_PASS if report.passed else EXIT_FAIL


def main_entry():
    sys.exit(main())
