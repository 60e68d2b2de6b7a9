"""
Benchmark of the fairness metrics on the synthetic bias scenarios.

:func:`run_benchmark` draws one population per scenario, evaluates all metrics on each
and checks that the metrics react to the injected bias as expected:

- the distribution fairness index ignores bias confined to a tail but reacts to shifted
  centers
- the rate based metrics see genuine tail bias in the false non-match rate and impostor
  tail bias in the false match rate
- the comprehensive equity index sees tail bias in the affected kind only, and shifted
  centers most strongly in the impostor scores

With all strengths at zero the populations are unbiased and every metric has to stay
at its fair point instead.
"""
from logging import getLogger
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from ..core.evaluation import EvalConfig, MetricReport, evaluate_all
from ..core.metrics import Variant
from ..core.scores import Kind
from . import (
    DEFAULT_GROUPS,
    DEFAULT_N_COMPARISONS,
    ScenarioKind,
    ScenarioSpec,
    generate,
)

_logger = getLogger(__name__)

BENCHMARK_SCENARIOS: Tuple[ScenarioKind, ...] = (
    ScenarioKind.BG,
    ScenarioKind.BI,
    ScenarioKind.BC,
)
"""Scenarios of the benchmark, in column order"""

BENCHMARK_TARGET_FMR: float = 1e-3
"""Pooled false match rate of the benchmark operating point"""

CHECK_PERCENTILE: float = 95.0
"""Split percentile of the checked CEI cell"""

CHECK_WEIGHTS: Tuple[float, float] = (0.8, 0.2)
"""(tail, center) weights of the checked CEI cell"""

FAIR_POINT_TOLERANCE: float = 0.02
"""Largest distance from the fair point tolerated without bias"""

NO_BIAS_DETECTED: str = "no bias detected anywhere"
"""Verdict of a passed check on unbiased populations"""


class Check(NamedTuple):
    """
    Outcome of a single expectation.
    """

    name: str
    """Short description of the expectation"""

    passed: bool
    """Whether the expectation holds"""

    observed: str
    """Values the expectation was evaluated on"""


class PatternCheck:
    """
    Outcome of all expectations of a benchmark run.
    """

    checks: Tuple[Check, ...]
    """Individual expectations"""

    null: bool
    """Whether the populations were unbiased"""

    def __init__(self, checks: Sequence[Check], null: bool = False):
        self.checks = tuple(checks)
        self.null = null

    @property
    def passed(self) -> bool:
        """
        bool: ``True`` if every expectation holds
        """
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[Check]:
        """
        list: Expectations which do not hold
        """
        return [c for c in self.checks if not c.passed]

    @property
    def verdict(self) -> str:
        """
        str: One line verdict
        """
        if self.null:
            if self.passed:
                return NO_BIAS_DETECTED
            return "FAIL: bias detected without injected bias"
        if self.passed:
            return "PASS: detection pattern reproduced"
        return "FAIL: detection pattern not reproduced"

    def summary(self) -> str:
        """
        Verdict followed by one line per expectation.
        """
        lines = [self.verdict]
        for check in self.checks:
            lines.append(
                "[{}] {}: {}".format(
                    "PASS" if check.passed else "FAIL", check.name, check.observed
                )
            )
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, object]:
        """
        Get JSON-ready representation.
        """
        return {
            "verdict": self.verdict,
            "passed": self.passed,
            "null": self.null,
            "checks": [c._asdict() for c in self.checks],
        }

    def __repr__(self) -> str:
        return "PatternCheck({!r})".format(self.verdict)


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else "{:.4f}".format(value)


def _at_least(name: str, value: Optional[float], bound: float) -> Check:
    passed = value is not None and value >= bound
    return Check(name, passed, "{} >= {:g}".format(_fmt(value), bound))


def _at_most(name: str, value: Optional[float], bound: float) -> Check:
    passed = value is not None and value <= bound
    return Check(name, passed, "{} <= {:g}".format(_fmt(value), bound))


def _ratio(
    name: str, large: Optional[float], small: Optional[float], factor: float
) -> Check:
    passed = large is not None and small is not None and large >= factor * small
    return Check(
        name,
        passed,
        "{} >= {:g} x {}".format(_fmt(large), factor, _fmt(small)),
    )


def _cei_value(
    report: MetricReport,
    kind: Kind,
    percentile: float,
    weights: Tuple[float, float],
    variant: Variant = Variant.NORMAL,
) -> Optional[float]:
    cell = report.cei_cell(percentile, weights)
    if cell is None:
        return None
    return cell.value(variant, kind)


def check_detection_pattern(
    reports: Mapping[Union[ScenarioKind, str], MetricReport],
    percentile: float = CHECK_PERCENTILE,
    weights: Tuple[float, float] = CHECK_WEIGHTS,
) -> PatternCheck:
    """
    Check how the metrics react to the biased scenarios.

    Parameters
    ----------
    reports
        Reports of the ``bg``, ``bi`` and ``bc`` scenarios
    percentile
        Split percentile of the checked CEI cell
    weights
        (tail, center) weights of the checked CEI cell

    Returns
    -------
    :obj:`PatternCheck`
        Outcome of every expectation

    Raises
    ------
    KeyError
        A report of one of the three scenarios is missing
    """
    by_kind = {ScenarioKind.from_scenario_kind(k): r for k, r in reports.items()}
    bg, bi, bc = (by_kind[s] for s in BENCHMARK_SCENARIOS)

    checks = []
    for label, report in (("BG", bg), ("BI", bi)):
        for name in ("dfi_n", "dfi_e"):
            checks.append(
                _at_least(
                    "{} {} misses tail bias".format(label, name.upper()),
                    report.metrics.get(name),
                    0.99,
                )
            )
    for name in ("dfi_n", "dfi_e"):
        checks.append(
            _at_most(
                "BC {} detects shifted centers".format(name.upper()),
                bc.metrics.get(name),
                0.90,
            )
        )

    checks += [
        _ratio(
            "GARBE_FNMR larger on BG than on BI",
            bg.garbe_fnmr,
            bi.garbe_fnmr,
            5.0,
        ),
        _ratio(
            "GARBE_FMR larger on BI than on BG",
            bi.garbe_fmr,
            bg.garbe_fmr,
            5.0,
        ),
        _at_least("BG IN_FNMR detects genuine tail bias", bg.in_fnmr, 1.5),
        _at_least("BI IN_FMR detects impostor tail bias", bi.in_fmr, 1.5),
        _at_most("BG IN_FMR stays fair", bg.in_fmr, 1.1),
        _at_most("BI IN_FNMR stays fair", bi.in_fnmr, 1.1),
    ]

    cei_n = {
        (label, kind): _cei_value(report, kind, percentile, weights)
        for label, report in (("BG", bg), ("BI", bi), ("BC", bc))
        for kind in Kind
    }
    for label, biased, fair in (
        ("BG", Kind.GENUINE, Kind.IMPOSTOR),
        ("BI", Kind.IMPOSTOR, Kind.GENUINE),
    ):
        checks += [
            _at_most(
                "{} CEI_N {} detects tail bias".format(label, biased.value),
                cei_n[label, biased],
                0.90,
            ),
            _at_least(
                "{} CEI_N {} stays fair".format(label, fair.value),
                cei_n[label, fair],
                0.99,
            ),
        ]

    bc_impostor = cei_n["BC", Kind.IMPOSTOR]
    known = [v for v in cei_n.values() if v is not None]
    smallest = min(known) if known else None
    checks.append(
        Check(
            "BC CEI_N impostor is the smallest CEI_N",
            bc_impostor is not None
            and len(known) == len(cei_n)
            and bc_impostor == smallest,
            "{} vs min {}".format(_fmt(bc_impostor), _fmt(smallest)),
        )
    )

    return PatternCheck(checks)


def _fair_points(
    report: MetricReport,
) -> List[Tuple[str, Optional[float], float]]:
    points: List[Tuple[str, Optional[float], float]] = []
    for name, value in report.metrics.items():
        points.append((name.upper(), value, 0.0 if name.startswith("garbe") else 1.0))
    for cell in report.cei:
        for key, value in cell.values.items():
            points.append(
                (
                    "CEI {} P{:g} w=({:g}, {:g})".format(
                        key, cell.percentile, cell.w_tail, cell.w_center
                    ),
                    value,
                    1.0,
                )
            )
    return points


def check_no_bias(
    reports: Mapping[Union[ScenarioKind, str], MetricReport],
    tolerance: float = FAIR_POINT_TOLERANCE,
) -> PatternCheck:
    """
    Check that every metric of unbiased populations is at its fair point.

    The fair point is 0 for GARBE and 1 for all other metrics.

    Parameters
    ----------
    reports
        Reports of unbiased populations, keyed by scenario
    tolerance
        Largest tolerated distance from the fair point

    Returns
    -------
    :obj:`PatternCheck`
        One expectation per scenario, listing the values off their fair point
    """
    checks = []
    for scenario, report in reports.items():
        label = ScenarioKind.from_scenario_kind(scenario).value.upper()
        off = [
            "{}={}".format(name, _fmt(value))
            for name, value, fair in _fair_points(report)
            if value is None or abs(value - fair) > tolerance
        ]
        checks.append(
            Check(
                "{} metrics at their fair point".format(label),
                not off,
                ", ".join(off) if off else "all within {:g}".format(tolerance),
            )
        )

    return PatternCheck(checks, null=True)


def benchmark_config(**overrides: object) -> EvalConfig:
    """
    Evaluation configuration of the benchmark.

    The operating point is placed at a pooled false match rate of
    :data:`BENCHMARK_TARGET_FMR`, all other values are the evaluation defaults.
    ``overrides`` replace individual values.
    """
    return EvalConfig(target_fmr=BENCHMARK_TARGET_FMR).replace(**overrides)


class BenchmarkResult(NamedTuple):
    """
    Reports and pattern check of a benchmark run.
    """

    reports: Dict[str, MetricReport]
    """Report per scenario value (``bg``, ``bi``, ``bc``)"""

    check: PatternCheck
    """Outcome of the expectations"""


def run_benchmark(  # pylint: disable=too-many-arguments
    seed: int = 0,
    strengths: Union[float, Mapping[Union[ScenarioKind, str], float]] = 1.0,
    n_genuine: int = DEFAULT_N_COMPARISONS,
    n_impostor: int = DEFAULT_N_COMPARISONS,
    groups: Sequence[str] = DEFAULT_GROUPS,
    config: Optional[EvalConfig] = None,
) -> BenchmarkResult:
    """
    Evaluate all metrics on the biased scenarios and check the detection pattern.

    Parameters
    ----------
    seed
        Seed shared by all scenarios
    strengths
        Bias strength of all scenarios or per scenario (missing scenarios use
        strength 1)
    n_genuine
        Number of genuine comparisons per group
    n_impostor
        Number of impostor comparisons per group
    groups
        Group keys, the last one is biased
    config
        Evaluation configuration, :func:`benchmark_config` if ``None``

    Returns
    -------
    :obj:`BenchmarkResult`
        Reports and pattern check. If all strengths are zero the populations are
        unbiased and :func:`check_no_bias` is applied instead of
        :func:`check_detection_pattern`.

    Raises
    ------
    InvalidSpecError
        A scenario cannot be generated with the given parameters
    """
    if isinstance(strengths, Mapping):
        per_scenario = {
            ScenarioKind.from_scenario_kind(k): float(v) for k, v in strengths.items()
        }
        resolved = {s: per_scenario.get(s, 1.0) for s in BENCHMARK_SCENARIOS}
    else:
        resolved = {s: float(strengths) for s in BENCHMARK_SCENARIOS}
    if config is None:
        config = benchmark_config()

    reports = {}
    for scenario in BENCHMARK_SCENARIOS:
        spec = ScenarioSpec(
            scenario,
            n_genuine=n_genuine,
            n_impostor=n_impostor,
            groups=groups,
            strength=resolved[scenario],
            seed=seed,
        )
        _logger.info("Benchmarking %r", spec)
        reports[scenario.value] = evaluate_all(
            generate(spec), config, provenance={"synthetic": spec.to_dict()}
        )

    if all(s == 0 for s in resolved.values()):
        check = check_no_bias(reports)
    else:
        check = check_detection_pattern(reports)
    _logger.info("Benchmark verdict: %s", check.verdict)

    return BenchmarkResult(reports, check)
