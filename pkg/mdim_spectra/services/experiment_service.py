"""Experiment service: runs every estimator and oracle behind the command line.

This service turns an ``ExperimentConfig`` into report tables. It handles:
- Building the configured system, potential and measure family
- Sharing one count cache across all counters of a run
- Assembling the rows, summary records and template variables of each subcommand
- Writing ``<name>.csv``, ``<name>.counts.csv``, ``<name>.summary.jsonl`` and ``<name>.txt``
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from mdim_spectra.common.config import ExperimentConfig
from mdim_spectra.common.errors import ConfigError, DomainError, EmptyLevelError, InconclusiveError
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import GridFullShift, SystemSpec, WeightedShiftCompact
from mdim_spectra.counting.separated import CountResult, SeparatedCounter, write_count_rows
from mdim_spectra.database.models import CountCache
from mdim_spectra.measures.finite import (
    FiniteMeasure,
    gibbs_measure_for_level,
    h_phi_at_scale,
    integrate,
)
from mdim_spectra.oracles.gibbs import constrained_max_entropy, dp_rate_vs_gibbs
from mdim_spectra.oracles.weighted_shift import (
    certify_weighted_shift_cover,
    certify_weighted_shift_grid,
    weighted_shift_bounds,
)
from mdim_spectra.spectra.rates import (
    SPECTRUM_CSV_HEADER,
    RateEstimate,
    RateMethod,
    bowen_level_exponent,
    coupled_grid_schedule,
    entropy_at_scale,
    lambda_at_scale,
    mdim_estimate,
    spectrum_table,
)
from mdim_spectra.specification.moran import birkhoff_control, build_moran, edp_lower_bound, eta_measure
from mdim_spectra.templates.manager import TemplateManager, get_template_manager
from mdim_spectra.utils.reports import CellValue, format_number, write_csv, write_jsonl

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("entropy-scale", "mdim", "level-spectrum", "hphi", "variational-check", "spec-demo", "oracle")

ENTROPY_CSV_HEADER = (
    "epsilon",
    "h",
    "ratio",
    "residual",
    "method",
    "lower_bound",
    "n_min",
    "n_max",
    "cross_check",
    "converged",
    "module",
)
MDIM_CSV_HEADER = ("j", "m", "epsilon", "h", "ratio", "residual", "converged", "lower_bound", "module")
LEVEL_SPECTRUM_CSV_HEADER = (*SPECTRUM_CSV_HEADER, "gibbs_entropy", "gap", "pass", "module")
HPHI_CSV_HEADER = (
    "epsilon",
    "alpha",
    "h_phi",
    "residual",
    "upper_bound",
    "measure",
    "gibbs_entropy",
    "empty",
    "module",
)
VARIATIONAL_CSV_HEADER = (
    "epsilon",
    "alpha",
    "lambda",
    "lambda_residual",
    "delta",
    "delta_rule",
    "h_phi",
    "gibbs_entropy",
    "difference",
    "bowen",
    "bowen_delta",
    "bowen_lambda",
    "bowen_difference",
    "lower_bound",
    "pass",
    "module",
)
MORAN_CSV_HEADER = (
    "k",
    "n_k",
    "m_k",
    "blocks",
    "c_k",
    "t_k",
    "s_count",
    "c_count",
    "t_count",
    "min_separation",
    "separation_threshold",
    "max_nesting",
    "birkhoff_deviation",
    "birkhoff_bound",
    "edp",
    "edp_degenerate",
    "window_rate",
    "lambda",
    "edp_pass",
    "module",
)
ORACLE_CSV_HEADER = ("section", "parameters", "n", "quantity", "value", "module")


@dataclass
class RunReport:
    """Tables produced by one subcommand.

    Attributes:
        name: Subcommand name, also the report file stem.
        header: CSV column names, ending in ``module``.
        module: Package the rows come from, written into the ``module`` column.
        rows: CSV rows. Runners leave out the ``module`` cell, which ``ExperimentService.run`` appends.
        summary: One JSON object per line of the summary report.
        template_vars: Variables of the ``<name>`` text template.
        counts: Every separated count the run produced.
        passed: False when a tolerance check failed.
    """

    name: str
    header: tuple[str, ...]
    module: str = ""
    rows: list[tuple[CellValue, ...]] = field(default_factory=list)
    summary: list[dict[str, Any]] = field(default_factory=list)
    template_vars: dict[str, str] = field(default_factory=dict)
    counts: list[CountResult] = field(default_factory=list)
    passed: bool = True


@dataclass(frozen=True)
class BowenCheck:
    """Bowen exponent of a level hull next to Lambda at the same window."""

    value: float
    delta: float
    lambda_value: float

    @property
    def difference(self) -> float:
        """|bowen - lambda| in nats."""
        return abs(self.value - self.lambda_value)


class ExperimentService:
    """Runs subcommands against one configuration."""

    def __init__(
        self,
        *,
        config: ExperimentConfig,
        cache: CountCache | None = None,
        timings: bool = False,
        template_manager: TemplateManager | None = None,
    ) -> None:
        """Initialize the service.

        Args:
            config: Validated experiment configuration.
            cache: Persistent count cache shared by every counter. If None, counts are not cached.
            timings: Record wall times in the count rows.
            template_manager: Renders the text summaries. If None, uses the default manager.
        """
        self.config = config
        self.cache = cache
        self.timings = timings
        self.template_manager = template_manager or get_template_manager()
        self.system = config.system()
        self.phi = config.potential(self.system)
        self._counters: list[SeparatedCounter] = []

    def make_counter(self, sys: SystemSpec) -> SeparatedCounter:
        """Counter carrying the run's budgets, seed, cache and timing flag."""
        counter = SeparatedCounter(
            sys=sys,
            max_candidates=self.config.max_candidates,
            dp_cap=self.config.dp_cap,
            seed=self.config.seed,
            cache=self.cache,
            timings=self.timings,
        )
        self._counters.append(counter)
        return counter

    def _collected_counts(self) -> list[CountResult]:
        return [result for counter in self._counters for result in counter.results]

    def _base_vars(self) -> dict[str, str]:
        return {
            "system": self.system.key,
            "potential": self.phi.key,
            "n_schedule": ", ".join(str(n) for n in self.config.n),
            "seed": str(self.config.seed),
        }

    def run(self, *, subcommand: str) -> RunReport:
        """Dispatch one subcommand.

        Every row gets the report's ``module`` cell, and every summary record
        its ``module``, ``system`` and ``phi`` keys unless the runner set them.

        Raises:
            ConfigError: If the subcommand is unknown.
        """
        runners = {
            "entropy-scale": self.entropy_scale,
            "mdim": self.mdim,
            "level-spectrum": self.level_spectrum,
            "hphi": self.hphi,
            "variational-check": self.variational_check,
            "spec-demo": self.spec_demo,
            "oracle": self.oracle,
        }
        if subcommand not in runners:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        self._counters.clear()
        report = runners[subcommand]()
        report.rows = [(*row, report.module) for row in report.rows]
        for record in report.summary:
            record.setdefault("module", report.module)
            record.setdefault("system", self.system.key)
            record.setdefault("phi", self.phi.key)
        report.counts = self._collected_counts()
        return report

    def entropy_scale(self) -> RunReport:
        """h(f, eps) at every configured scale."""
        report = RunReport(name="entropy-scale", header=ENTROPY_CSV_HEADER, module="spectra")
        counter = self.make_counter(self.system)
        for eps in self.config.epsilon:
            h = entropy_at_scale(self.system, eps, self.config.n, counter=counter)
            ratio = h.value / abs(math.log(eps)) if eps != 1 else None
            report.rows.append(
                (
                    eps,
                    h.value,
                    ratio,
                    h.residual,
                    h.method.value,
                    h.lower_flag,
                    h.n_schedule[0],
                    h.n_schedule[-1],
                    h.cross_check,
                    h.converged,
                )
            )
            report.summary.append(
                {
                    "epsilon": eps,
                    "h": h.value,
                    "residual": h.residual,
                    "method": h.method.value,
                    "cross_check": h.cross_check,
                    "converged": h.converged,
                    "lower_bound": h.lower_flag,
                    "series": [list(point) for point in h.series],
                }
            )
        report.template_vars = {
            **self._base_vars(),
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def mdim(self) -> RunReport:
        """Upper metric mean dimension along the coupled grid schedule."""
        report = RunReport(name="mdim", header=MDIM_CSV_HEADER, module="spectra")
        family = coupled_grid_schedule(self.config.coupled_j, self.config.coupled_divisor)
        estimate = mdim_estimate(family, self.config.n, make_counter=self.make_counter, method=RateMethod.SLOPE_FIT)
        scales = zip(self.config.coupled_j, family, estimate.series, estimate.parts, strict=True)
        for j, (sys, _), (eps, ratio), h in scales:
            assert isinstance(sys, GridFullShift)
            report.rows.append((j, sys.m, eps, h.value, ratio, h.residual, h.converged, h.lower_flag))
        label = "coupled grid full shifts m_j = 2^j + 1"
        report.summary.append(
            {
                "system": label,
                "mdim": estimate.value,
                "residual": estimate.residual,
                "lower_bound": estimate.lower_flag,
                "method": estimate.method.value,
                "scale_method": RateMethod.SLOPE_FIT.value,
                "ratios": [ratio for _, ratio in estimate.series],
                "final_ratio": estimate.series[-1][1],
            }
        )
        report.template_vars = {
            **self._base_vars(),
            "system": label,
            "table": _text_table(report.header, _with_module(report)),
            "estimate": format_number(estimate.value),
            "residual": format_number(estimate.residual),
            "lower_bound": format_number(estimate.lower_flag),
        }
        return report

    def level_spectrum(self) -> RunReport:
        """Lambda_phi(alpha, eps) over the alpha grid and eps schedule, checked against H*(alpha)."""
        report = RunReport(name="level-spectrum", header=LEVEL_SPECTRUM_CSV_HEADER, module="spectra")
        tolerance = self.config.tolerance_variational
        table = spectrum_table(
            self.system,
            self.phi,
            self.config.alpha,
            self.config.epsilon,
            self.config.delta,
            self.config.n,
            counter=self.make_counter(self.system),
            delta_tolerance=self.config.tolerance_delta,
        )
        for cells, row in zip(table.csv_rows(), table.rows, strict=True):
            gibbs = self._gibbs_entropy(row.alpha)
            gap = abs(row.lambda_value - gibbs) if row.lambda_value is not None and gibbs is not None else None
            passed = None if gap is None else gap <= tolerance
            if passed is False:
                logger.warning("Lambda at alpha=%s, eps=%s is %.4f nats away from H*", row.alpha, row.epsilon, gap)
                report.passed = False
            report.rows.append((*cells, gibbs, gap, passed))
        report.summary = [dict(zip(LEVEL_SPECTRUM_CSV_HEADER[:-1], row, strict=True)) for row in report.rows]
        report.template_vars = {
            **self._base_vars(),
            "deltas": ", ".join(format_number(d) for d in table.delta_schedule),
            "tolerance": format_number(tolerance),
            "verdict": "PASS" if report.passed else "FAIL",
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def measure_family(self, alpha: float) -> list[FiniteMeasure]:
        """Measures fed to h_phi: the Gibbs level measure, or the configured Bernoulli/Markov measure."""
        if self.config.measure_kind == "gibbs":
            return [gibbs_measure_for_level(self.system, self.phi, alpha)]
        if self.config.measure_kind == "bernoulli":
            return [FiniteMeasure.bernoulli(self.config.measure_p, name="configured-bernoulli")]
        return [FiniteMeasure.markov(self.config.measure_matrix, name="configured-markov")]

    def _alphas_for_measures(self) -> tuple[float, ...]:
        if self.config.measure_kind == "gibbs":
            return self.config.alpha
        if self.config.measure_kind == "bernoulli" and len(self.config.measure_p) != self.system.alphabet_size:
            raise ConfigError("measure.p needs one probability per letter", key="measure.p")
        if self.config.measure_kind == "markov" and len(self.config.measure_matrix) != self.system.alphabet_size:
            raise ConfigError("measure.matrix needs one row per letter", key="measure.matrix")
        return (integrate(self.measure_family(0.0)[0], self.phi),)

    def _gibbs_entropy(self, alpha: float) -> float | None:
        if self.phi.depth != 1:
            return None
        try:
            return constrained_max_entropy(self.phi.table, alpha).entropy
        except DomainError:
            return None

    def hphi(self) -> RunReport:
        """H_phi(alpha, eps) over the alpha grid, from the configured measure family."""
        report = RunReport(name="hphi", header=HPHI_CSV_HEADER, module="measures")
        for eps in self.config.epsilon:
            for alpha in self._alphas_for_measures():
                try:
                    family = self.measure_family(alpha)
                except EmptyLevelError as err:
                    logger.info("no level measure at alpha=%s: %s", alpha, err)
                    report.rows.append((eps, alpha, None, None, None, self.config.measure_kind, None, True))
                    continue
                h = h_phi_at_scale(self.system, self.phi, alpha, eps, family)
                gibbs = self._gibbs_entropy(alpha)
                report.rows.append(
                    (eps, alpha, h.value, h.residual, h.upper_flag, family[0].name, gibbs, False)
                )
                report.summary.append({"epsilon": eps, "alpha": alpha, "h_phi": h.value, "residual": h.residual})
        report.template_vars = {
            **self._base_vars(),
            "measure_kind": self.config.measure_kind,
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def variational_check(self) -> RunReport:
        """Lambda against H_phi and the Bowen exponent per alpha, with pass/fail at the configured tolerances."""
        report = RunReport(name="variational-check", header=VARIATIONAL_CSV_HEADER, module="spectra+measures")
        tolerance = self.config.tolerance_variational
        counter = self.make_counter(self.system)
        for eps in self.config.epsilon:
            for alpha in self.config.alpha:
                try:
                    lam = lambda_at_scale(
                        self.system,
                        self.phi,
                        alpha,
                        eps,
                        self.config.delta,
                        self.config.n,
                        counter=counter,
                        delta_tolerance=self.config.tolerance_delta,
                    )
                except EmptyLevelError as err:
                    logger.info("alpha=%s unreachable at eps=%s: %s", alpha, eps, err)
                    report.rows.append((eps, alpha, *(None,) * (len(VARIATIONAL_CSV_HEADER) - 3)))
                    continue
                h_phi = h_phi_at_scale(self.system, self.phi, alpha, eps, self.measure_family(alpha))
                bowen = self._bowen(alpha, eps, counter)
                difference = abs(lam.value - h_phi.value)
                bowen_passed = bowen is None or bowen.difference <= self.config.tolerance_bowen
                passed = difference <= tolerance and bowen_passed
                report.passed = report.passed and passed
                report.rows.append(
                    (
                        eps,
                        alpha,
                        lam.value,
                        lam.residual,
                        lam.delta,
                        _delta_rule(lam),
                        h_phi.value,
                        self._gibbs_entropy(alpha),
                        difference,
                        bowen.value if bowen else None,
                        bowen.delta if bowen else None,
                        bowen.lambda_value if bowen else None,
                        bowen.difference if bowen else None,
                        lam.lower_flag,
                        passed,
                    )
                )
                report.summary.append(
                    {
                        "epsilon": eps,
                        "alpha": alpha,
                        "lambda": lam.value,
                        "delta": lam.delta,
                        "delta_rule": _delta_rule(lam),
                        "h_phi": h_phi.value,
                        "difference": difference,
                        "tolerance": tolerance,
                        "bowen": bowen.value if bowen else None,
                        "bowen_lambda": bowen.lambda_value if bowen else None,
                        "bowen_difference": bowen.difference if bowen else None,
                        "bowen_tolerance": self.config.tolerance_bowen,
                        "pass": passed,
                    }
                )
        report.template_vars = {
            **self._base_vars(),
            "tolerance": format_number(tolerance),
            "bowen_tolerance": format_number(self.config.tolerance_bowen),
            "bowen_delta": format_number(self.config.bowen_delta),
            "verdict": "PASS" if report.passed else "FAIL",
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def _bowen(self, alpha: float, eps: float, counter: SeparatedCounter) -> BowenCheck | None:
        config = self.config
        if config.bowen_k_start > config.n[-1]:
            return None
        n_values = [n for n in config.n if n >= config.bowen_k_start]
        try:
            result = bowen_level_exponent(
                self.system,
                self.phi,
                alpha,
                config.bowen_delta,
                config.bowen_k_start,
                eps,
                n_values,
                config.bowen_s_grid,
                counter=counter,
            )
            lam = lambda_at_scale(
                self.system, self.phi, alpha, eps, (config.bowen_delta,), config.n, counter=counter
            )
        except EmptyLevelError as err:
            logger.warning("no Bowen exponent at alpha=%s, delta=%s: %s", alpha, config.bowen_delta, err)
            return None
        except InconclusiveError as err:
            logger.warning("Bowen exponent at alpha=%s is inconclusive: %s", alpha, err)
            return None
        return BowenCheck(value=result.estimate.value, delta=config.bowen_delta, lambda_value=lam.value)

    def spec_demo(self) -> RunReport:
        """Moran construction transcript with the per-stage EDP lower bound against Lambda."""
        report = RunReport(name="spec-demo", header=MORAN_CSV_HEADER, module="specification")
        config = self.config
        eps = config.moran_epsilon
        levels = build_moran(
            self.system,
            self.phi,
            config.moran_alpha,
            deltas=config.moran_delta,
            n_values=config.moran_n,
            R=config.moran_R,
            N=config.moran_N,
            epsilon=eps,
            cap=config.max_candidates,
            tuple_cap=config.tuple_cap,
        )
        counter = self.make_counter(self.system)
        transcript = []
        for level in levels:
            control = birkhoff_control(self.system, level)
            eta = eta_measure(level.T_k, self.system.alphabet_size)
            edp = edp_lower_bound(self.system, eta, level.T_k, level.t_k, eps)
            window_rate = math.log(level.S_k.count) / level.n_k
            lam = lambda_at_scale(
                self.system,
                self.phi,
                config.moran_alpha,
                eps,
                (config.moran_delta[level.k - 1],),
                config.n,
                counter=counter,
            )
            edp_passed = edp.value >= lam.value - config.tolerance_edp
            report.passed = report.passed and control.holds and edp_passed
            report.rows.append(
                (
                    level.k,
                    level.n_k,
                    level.m_k,
                    level.blocks,
                    level.c_k,
                    level.t_k,
                    level.S_k.count,
                    len(level.C_k),
                    len(level.T_k),
                    level.min_separation,
                    level.separation_threshold,
                    level.max_nesting,
                    control.max_deviation,
                    control.bound,
                    edp.value,
                    edp.degenerate,
                    window_rate,
                    lam.value,
                    edp_passed,
                )
            )
            report.summary.append(
                {
                    "k": level.k,
                    "t_k": level.t_k,
                    "t_count": len(level.T_k),
                    "min_separation": level.min_separation,
                    "c_separation": level.c_separation,
                    "max_nesting": level.max_nesting,
                    "birkhoff_holds": control.holds,
                    "edp": edp.value,
                    "edp_degenerate": edp.degenerate,
                    "window_rate": window_rate,
                    "lambda": lam.value,
                    "edp_pass": edp_passed,
                }
            )
            transcript.append(
                f"stage {level.k}: #S={level.S_k.count} blocks={level.blocks} gap={level.m_k} "
                f"c={level.c_k} t={level.t_k} #T={len(level.T_k)} EDP={format_number(edp.value)} "
                f"Lambda={format_number(lam.value)}"
            )
        report.template_vars = {
            **self._base_vars(),
            "alpha": format_number(config.moran_alpha),
            "epsilon": format_number(eps),
            "edp_margin": format_number(config.tolerance_edp),
            "verdict": "PASS" if report.passed else "FAIL",
            "transcript": "\n".join(transcript),
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def oracle(self) -> RunReport:
        """DP window counts against the Gibbs maximum, or the weighted-shift bounds."""
        report = RunReport(name="oracle", header=ORACLE_CSV_HEADER, module="oracles")
        if isinstance(self.system, WeightedShiftCompact):
            self._weighted_shift_rows(report, self.system)
        else:
            self._dp_gibbs_rows(report, self.system, self.phi)
        report.template_vars = {
            **self._base_vars(),
            "table": _text_table(report.header, _with_module(report)),
        }
        return report

    def _dp_gibbs_rows(self, report: RunReport, sys: GridFullShift, phi: Potential) -> None:
        if phi.depth != 1:
            raise ConfigError("the DP/Gibbs oracle needs a depth-1 potential", key="potential.depth")
        delta = self.config.delta[-1]
        for alpha in self.config.alpha:
            result = dp_rate_vs_gibbs(
                m=sys.m, table=phi.table, alpha=alpha, delta=delta, n_schedule=self.config.n, cap=self.config.dp_cap
            )
            parameters = f"m={sys.m} alpha={format_number(alpha)} delta={format_number(delta)}"
            for row in result.rows:
                report.rows.append(("dp-gibbs", parameters, row.n, "count", row.count))
                report.rows.append(("dp-gibbs", parameters, row.n, "rate", row.rate))
                report.rows.append(("dp-gibbs", parameters, row.n, "gap", row.gap))
            report.summary.append(
                {
                    "section": "dp-gibbs",
                    "alpha": alpha,
                    "delta": delta,
                    "gibbs_entropy": result.gibbs_entropy,
                    "gap_shrinks": result.gap_shrinks,
                }
            )

    def _weighted_shift_rows(self, report: RunReport, sys: WeightedShiftCompact) -> None:
        n = self.config.n[-1]
        for eps in self.config.epsilon:
            bounds = weighted_shift_bounds(sys, eps, n)
            parameters = f"eps={format_number(eps)} ell={bounds.ell}"
            for quantity, value in (
                ("grid_size", bounds.grid_size),
                ("cover_size", bounds.cover_size),
                ("log_lower", bounds.log_lower),
                ("log_upper", bounds.log_upper),
                ("lower_ratio", bounds.lower_ratio),
                ("upper_ratio", bounds.upper_ratio),
            ):
                report.rows.append(("weighted-shift", parameters, n, quantity, value))
            report.summary.append(
                {
                    "section": "weighted-shift",
                    "epsilon": eps,
                    "lower_ratio": bounds.lower_ratio,
                    "upper_ratio": bounds.upper_ratio,
                }
            )
        eps = self.config.epsilon[0]
        grid = certify_weighted_shift_grid(sys, eps, 1, cap=self.config.max_candidates)
        cover = certify_weighted_shift_cover(sys, eps, 1, seed=self.config.seed)
        report.summary.append(
            {
                "section": "weighted-shift-certificates",
                "epsilon": eps,
                "grid_points": grid.points,
                "grid_certificate": grid.certificate.value,
                "grid_min_distance": grid.min_distance,
                "grid_strict": grid.strict,
                "grid_non_strict": grid.non_strict,
                "cover_max_distance": cover.max_distance,
                "cover_valid": cover.valid,
            }
        )

    def write_report(self, *, report: RunReport, out_dir: Path) -> list[Path]:
        """Write the CSV, count CSV, JSON-lines summary and text summary of a run.

        Returns:
            Paths written, in that order.
        """
        out_dir.mkdir(parents=True, exist_ok=True)
        table_path = out_dir / f"{report.name}.csv"
        counts_path = out_dir / f"{report.name}.counts.csv"
        summary_path = out_dir / f"{report.name}.summary.jsonl"
        text_path = out_dir / f"{report.name}.txt"
        write_csv(table_path, header=report.header, rows=report.rows)
        write_count_rows(counts_path, report.counts)
        write_jsonl(summary_path, report.summary)
        text_path.write_text(self.render_summary(report=report), encoding="utf-8")
        logger.info("wrote %s reports to %s", report.name, out_dir)
        return [table_path, counts_path, summary_path, text_path]

    def render_summary(self, *, report: RunReport) -> str:
        """Text summary of a run from its template."""
        return self.template_manager.render_report(report_name=report.name, variables=report.template_vars)


def _delta_rule(estimate: RateEstimate) -> str | None:
    return estimate.delta_rule.value if estimate.delta_rule is not None else None


def _with_module(report: RunReport) -> list[tuple[CellValue, ...]]:
    return [(*row, report.module) for row in report.rows]


def _text_table(header: tuple[str, ...], rows: list[tuple[CellValue, ...]]) -> str:
    cells = [list(header)] + [[format_number(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ("  ".join(cell.ljust(width) for cell, width in zip(row, widths, strict=True)) for row in cells)
    return "\n".join(line.rstrip() for line in lines)


def get_experiment_service(
    *, config: ExperimentConfig, cache: CountCache | None = None, timings: bool = False
) -> ExperimentService:
    """Get an experiment service for ``config``.

    Returns:
        ExperimentService instance with the default template manager.
    """
    return ExperimentService(config=config, cache=cache, timings=timings)
