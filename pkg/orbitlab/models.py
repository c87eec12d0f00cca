"""Data models for orbitlab reports, run records and run configuration."""

import contextlib
import json
import os
import re
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .config import config

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .utils.error_handler import ConfigParseError, ValidationError

OUTPUT_SUBDIRS = ("reports", "plots", "samples")


def ensure_output_directories(out_dir: Optional[Path] = None) -> Path:
    """Ensure the report, plot and sample directories exist under ``out_dir``."""
    root = Path(out_dir) if out_dir is not None else config.out_dir()
    for name in OUTPUT_SUBDIRS:
        (root / name).mkdir(parents=True, exist_ok=True)
    return root


def write_output_file(file_path: Path, text: str) -> Path:
    """Replace ``file_path`` with ``text`` so readers never see a partial report.

    The text goes to a sibling ``.partial`` file first and is swapped in with
    ``os.replace`` once it is on disk.
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    fd, staging = tempfile.mkstemp(prefix=f".{file_path.name}.", suffix=".partial", dir=file_path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(staging, file_path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.remove(staging)
        raise
    return file_path


class Report(BaseModel):
    """Base for serializable results.

    ``metadata`` holds wall time and timestamps; it is written to a sidecar file
    so the report itself is byte-identical across identical runs.
    """

    metadata: Dict[str, Any] = Field(default_factory=dict, description="Non-deterministic run facts")

    def deterministic_dump(self) -> str:
        return json.dumps(
            self.model_dump(mode="json", exclude={"metadata"}),
            sort_keys=True,
            indent=2,
            default=str,
        )

    def save(self, file_path: Path) -> Path:
        """Save report JSON (without metadata) plus a ``.meta.json`` sidecar."""
        file_path = Path(file_path)
        write_output_file(file_path, self.deterministic_dump() + "\n")
        if self.metadata:
            sidecar = file_path.with_suffix(".meta.json")
            write_output_file(sidecar, json.dumps(self.metadata, sort_keys=True, indent=2, default=str) + "\n")
        return file_path

    @classmethod
    def load(cls, file_path: Path):
        with open(file_path, 'r') as f:
            return cls(**json.load(f))


class HMEstimate(Report):
    """Harmonic measure estimate."""

    value: float = Field(..., ge=0.0, le=1.0)
    std_error: float = Field(default=0.0, ge=0.0)
    n_samples: int = Field(default=0, ge=0)
    method: Literal["exact", "walk-on-spheres", "quadrature"] = "exact"
    seed: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(
            self.model_dump(mode="json", include={"value", "std_error", "n_samples", "method", "seed"}),
            sort_keys=True,
        )


class AlphaFit(Report):
    """Log-log fit of harmonic measure against distance to a boundary point."""

    exponent: float
    intercept: float
    residual: float = Field(..., description="Root mean square residual of the log fit")
    r_squared: float
    radii: List[float]
    measures: List[float]
    std_errors: List[float]


class ClassificationReport(Report):
    """Evidence and verdict for the contracting / semi-contracting / isometric split."""

    verdict: Literal["contracting", "semi-contracting", "eventually-isometric", "inconclusive"]
    distortion_series: List[float]
    partial_sums: List[float]
    pairwise_distance_series: List[List[float]] = Field(default_factory=list)
    excluded_pairs: List[int] = Field(default_factory=list)
    heuristics: Dict[str, Any] = Field(default_factory=dict, description="Fit exponent, horizon, thresholds")

    def verdict_line(self) -> str:
        horizon = self.heuristics.get("horizon", len(self.distortion_series))
        return f"{self.verdict} (N={horizon}, sum={self.partial_sums[-1] if self.partial_sums else 0.0:.6g})"


class ConvergenceReport(Report):
    """Distance-to-boundary series of an interior orbit and its trichotomy verdict."""

    dist_series: List[float]
    thmB_sum: List[float]
    thmC_sum: List[float]
    verdict: Literal["stays-away", "oscillates", "converges", "inconclusive"]
    heuristics: Dict[str, Any] = Field(default_factory=dict)


GapRule = Literal["nonincreasing", "block-max"]


class DWEstimate(Report):
    """Fraction of sampled boundary angles whose orbit joins the interior limit."""

    fraction: float = Field(..., ge=0.0, le=1.0)
    n_samples: int
    horizon: int
    tol: float
    seed: int
    sequence_id: str = ""
    precision: int = 0
    converged: List[bool] = Field(default_factory=list)
    final_gaps: List[float] = Field(default_factory=list)
    gap_rule: GapRule = "nonincreasing"


class DensityStatistics(Report):
    """Per-sample density scores of boundary orbits over K equal arcs."""

    scores: List[float]
    mean_score: float
    full_fraction: float
    K: int
    horizon: int
    min_visits: int
    n_samples: int
    seed: int
    sequence_id: str = ""


class ConvergenceSplit(Report):
    """Per-angle tail distance from a limit angle."""

    angles: List[float]
    tail_max_distance: List[float]
    converges: List[bool]
    limit_turns: float
    horizon: int


class OverlapEntry(BaseModel):
    m: int
    n: int
    measure: float
    exact: str
    bound: str
    within_bound: bool
    disjoint_regime: bool
    empty: bool


class ShrinkingTargetReport(Report):
    """Exact overlap matrix of shrinking-target arcs and empirical visit fractions."""

    epsilon_description: str
    max_index: int
    overlaps: List[OverlapEntry]
    all_within_bound: bool
    disjointness_holds: bool
    horizon: int
    n_samples: int
    k: int
    seed: int
    visit_fractions: Dict[int, float] = Field(default_factory=dict, description="share with at least j visits")

    @property
    def limsup_fraction(self) -> float:
        return self.visit_fractions.get(self.k, 0.0)


class EscapeSample(BaseModel):
    angle: str
    escapes: List[int]


class EscapeLedger(Report):
    """Escape indices of boundary samples for the rotated Möbius construction."""

    horizon: int
    total_turns: str
    wraps: int
    samples: List[EscapeSample]
    zeta_one_escapes: List[int]
    all_covered: bool
    interior_values: List[float]
    image_checks_passed: bool


class GrowthLedger(Report):
    """Boundary coordinate growth y_n against n^{3/4}."""

    start: int
    y0: float
    horizon: int
    first_exceed_index: Optional[int]
    persists: bool
    sign_loss_index: Optional[int] = None
    final_y: Optional[float] = None
    fixed_point: Optional[float] = None


class CrossRatioResult(Report):
    """Invariance of the boundary cross-ratio along the Möbius pull sequence."""

    max_residual: float
    consequence_residual: float
    target: str
    horizon: int
    degenerate: bool = False


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    # The stated threshold cannot be confirmed at the horizon that was run
    inconclusive: bool = False

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "INCONCLUSIVE" if self.inconclusive else "FAIL"


class ReproductionReport(Report):
    """Outcome of one acceptance-grade reproduction."""

    example_id: str
    checks: List[CheckResult] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)
    plots: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failed_checks

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [check for check in self.checks if check.status == "FAIL"]

    @property
    def inconclusive_checks(self) -> List[CheckResult]:
        return [check for check in self.checks if check.status == "INCONCLUSIVE"]

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))
        return bool(passed)

    def check_threshold(self, name: str, value: float, threshold: float, reachable: bool, detail: str = "") -> bool:
        """Record ``value > threshold``; a miss is inconclusive rather than failed when not ``reachable``."""
        passed = value > threshold
        text = f"{value:.3f} vs > {threshold}" + (f"; {detail}" if detail else "")
        inconclusive = not passed and not reachable
        self.checks.append(CheckResult(name=name, passed=passed, detail=text, inconclusive=inconclusive))
        return passed


class RunRecord(BaseModel):
    """One line of the run log."""

    experiment: str
    sequence_id: str
    params: Dict[str, Any]
    seed: Optional[int]
    results: Dict[str, Any]
    wall_time: float
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


def append_run_log(record: RunRecord, log_path: Optional[Path] = None) -> Path:
    """Append one JSON document per line to the run log."""
    log_path = Path(log_path) if log_path is not None else config.out_dir() / config.RUN_LOG
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, 'a') as f:
        f.write(json.dumps(record.model_dump(mode="json"), sort_keys=True, default=str) + "\n")
    return log_path


def read_run_log(log_path: Path) -> List[RunRecord]:
    records = []
    with open(log_path, 'r') as f:
        for line in f:
            if line.strip():
                records.append(RunRecord(**json.loads(line)))
    return records


Experiment = Literal[
    "dw-fraction",
    "orbit-density",
    "shrinking-target",
    "classification",
    "convergence",
    "theorem-a",
    "escape-ledger",
    "growth",
    "cross-ratio",
]


class RunConfig(BaseModel):
    """Parameters of one ``run`` invocation."""

    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    sequence_id: str = "ex8.3:a=1-1/n"
    horizon: int = Field(default=config.DEFAULT_HORIZON, ge=1)
    n_samples: int = Field(default=config.DEFAULT_SAMPLES, ge=1)
    tol: float = Field(default=config.DW_TOL, gt=0.0, lt=1.0)
    gap_rule: GapRule = "nonincreasing"
    K: int = Field(default=16, ge=2)
    k_visits: int = Field(default=config.DEFAULT_VISITS, ge=1)
    min_visits: int = Field(default=1, ge=1)
    seed: int = Field(default=config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    precision: Optional[int] = Field(default=None, ge=16)
    workers: Optional[int] = Field(default=None, ge=1)
    z0: str = "0"
    epsilon: str = "1/n"
    overlap_max: int = Field(default=20, ge=2)
    y0: float = Field(default=100.0, gt=0.0)
    start: int = Field(default=100, ge=1)
    zeta: str = "1/4"
    """Boundary angle in turns for cross-ratio runs."""
    out_dir: str = config.OUT_DIR

    @field_validator("z0")
    @classmethod
    def _parse_point(cls, value: str) -> str:
        try:
            complex(value.replace(" ", ""))
        except ValueError:
            raise ValueError(f"z0 must be a complex literal such as '0.5j', got {value!r}")
        return value.replace(" ", "")

    @property
    def base_point(self) -> complex:
        return complex(self.z0)

    def canonical(self) -> str:
        """Sorted TOML rendering; parsing it yields an equal config."""
        lines = []
        for key, value in sorted(self.model_dump().items()):
            if value is None:
                continue
            if isinstance(value, str):
                lines.append(f"{key} = {json.dumps(value)}")
            elif isinstance(value, bool):
                lines.append(f"{key} = {'true' if value else 'false'}")
            else:
                lines.append(f"{key} = {value!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_toml(cls, text: str, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """Parse TOML text; ``overrides`` (command-line flags) win over file values.

        Raises:
            ConfigParseError: For TOML syntax errors, with line and column.
            ValidationError: For unknown keys or out-of-range values.
        """
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            line = getattr(e, "lineno", None)
            column = getattr(e, "colno", None)
            if line is None:
                match = re.search(r"line (\d+), column (\d+)", str(e))
                if match:
                    line, column = int(match.group(1)), int(match.group(2))
            raise ConfigParseError(str(e), line, column)
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.validated(data)

    @classmethod
    def validated(cls, data: Dict[str, Any]) -> "RunConfig":
        try:
            return cls(**data)
        except Exception as e:
            raise ValidationError(f"Invalid run configuration: {e}")
