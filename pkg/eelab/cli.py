"""
Kommandoradsgränssnitt och körpipeline för eelab.

Denna modul innehåller ExperimentPipeline som kör ett läge enligt en
RunConfig, skriver results.csv, summary.json och series.gp, samt
jämförelsen av två resultatfiler.

Användning:
    python -m eelab <läge> --config <fil> [--out <katalog>] [--seed <n>] [--threads <n>]
    python -m eelab compare <a.csv> <b.csv> [--out <katalog>]
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import __version__
from .config import MODES, RunConfig, config_lines, load_config
from .data_model import ResultRow, columns_for, convert_to_rows
from .entropy_functions import verify_scalar_suite
from .errors import ConfigError, EelabError, ShapeMismatchError
from .free_kernel import imag_sqrt_identity, resolvent_residual, verify_green_decay
from .lattice_model import (LatticeBox, PotentialSpec, boundary_effect, free_lattice_entropy, projection_pair,
                            run_point)
from .restricted_projection import DomainSpec, run_free_point
from .riesz_projector import (ContourSpec, WeightOperator, convergence_study, integrate_contour,
                              lap_constant, spectral_oracle)
from .scaling_fit import (LOG_BASE_TOLERANCE, FitResult, ScalingSeries, bound_verdict, dyadic_pairs, dyadic_sigma,
                          fit_enhanced, methods_agree, resolve_log_base, sigma0, sigma_bounds,
                          sigma_lower_from_purity, trend_slope)
from .schatten import verify_corpus
from .utils import load_rows_from_csv, make_rng, save_rows_to_csv, save_to_json, setup_logger

logger = logging.getLogger(__name__)

# Största relativa avvikelse mellan Nyström och gitterorakel
CROSS_METHOD_TOLERANCE = 0.02

# Trendgränser mot ln L för störda svep
CROSS_TERM_SLOPE_LIMIT = 0.02
PURITY_SLOPE_MINIMUM = 0.05

# Största relativa residual i den gemensamma anpassningen
MAX_RESIDUAL = 0.02

# Relativt fel mot det spektrala oraklet, små slumpfall respektive gitterfallet
RIESZ_TOLERANCE = 1e-8
LATTICE_RIESZ_TOLERANCE = 1e-4

LOWER_BOUND_TOLERANCE = 1e-10

# Största relativa ändring av S när lådans halvbredd dubblas
BOUNDARY_EFFECT_LIMIT = 0.005

# Kolumner per logaritmbas
BASE_COLUMNS = {"2": "S", "e": "S_nat"}


def _free_point_task(payload: Tuple[int, str, float, float, float, float]) -> ResultRow:
    """En Nyströmpunkt med gitterorakel; körs i en separat process."""
    d, shape, L, E, resolution, oracle_spacing = payload
    inputs = {"L": L, "E": E, "d": d, "shape": shape, "resolution": resolution,
              "oracle_spacing": oracle_spacing}
    try:
        record = run_free_point(DomainSpec(d, shape, L), E, resolution)
        record["resolution"] = resolution
        record["oracle_spacing"] = oracle_spacing
        if d == 1:
            record["S_oracle"] = free_lattice_entropy(E, L, oracle_spacing)
            record["S_oracle_nat"] = free_lattice_entropy(E, L, oracle_spacing, base=math.e)
        else:
            record["S_oracle"] = record["S_oracle_nat"] = float("nan")
        return ResultRow.success("sweep-free", record)
    except EelabError as exc:
        logger.error("Punkten L=%g misslyckades: %s", L, exc)
        return ResultRow.failure("sweep-free", inputs, exc)


def _fits_for(rows: Sequence[Dict[str, Any]], column: str, d: int) -> Dict[str, Any]:
    """Gemensam anpassning och dyadisk skattning för en kolumn."""
    series = ScalingSeries.from_rows(rows, d, column=column)
    result: Dict[str, Any] = {"column": column}
    joint = fit_enhanced(series)
    result["joint"] = joint
    if dyadic_pairs(series):
        dyadic = dyadic_sigma(series)
        result["dyadic"] = dyadic
        result["methods_agree"] = methods_agree(joint, dyadic)
    return result


def _fits_to_dict(fits: Dict[str, Any]) -> Dict[str, Any]:
    return {key: value.to_dict() if isinstance(value, FitResult) else value for key, value in fits.items()}


def potential_from_config(config: RunConfig) -> Optional[PotentialSpec]:
    """
    Bygg potentialen från konfigurationen.

    En samplad profil läses från potential.file (ett värde per rad).
    """
    potential = config.potential
    if potential.profile == "none":
        return None
    samples = None
    if potential.profile == "sampled":
        if not potential.file:
            raise ConfigError("potential.file krävs för en samplad profil", field="potential.file")
        path = Path(potential.file)
        if not path.is_file():
            raise ConfigError(f"Potentialfilen {path} finns inte", field="potential.file")
        samples = tuple(float(v) for v in np.loadtxt(path, ndmin=1))
    return PotentialSpec(potential.radius, potential.amplitude, potential.profile, samples)


def write_plot_data(rows: Sequence[Dict[str, Any]], path: Union[str, Path],
                    columns: Sequence[str] = ("L", "S", "S_nat"),
                    fit: Optional[FitResult] = None, dimension: int = 1) -> None:
    """
    Skriv blankstegsseparerade kolumner för gnuplot.

    Med en anpassning läggs en kolumn med fit(L) till.
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    header = list(columns) + (["fit"] if fit is not None else [])
    with open(path, "w", encoding="utf-8") as f:
        f.write("# " + " ".join(header) + "\n")
        for row in rows:
            if row.get("status", "ok") != "ok":
                continue
            values = [float(row[c]) for c in columns]
            if fit is not None:
                L = float(row["L"])
                area = L ** (dimension - 1)
                if dimension == 1:
                    values.append(fit.sigma_hat * math.log(L) + fit.constant)
                else:
                    values.append(fit.sigma_hat * area * math.log(L) + fit.area_coeff * area + fit.constant)
            f.write(" ".join(f"{v:.12g}" for v in values) + "\n")


class ExperimentPipeline:
    """Pipeline som kör ett läge och sparar resultatfilerna."""

    def __init__(self, config: RunConfig, output_dir: Optional[Union[str, Path]] = None,
                 log_level: int = logging.INFO):
        """
        Initiera pipelinen.

        Args:
            config: Validerad konfiguration
            output_dir: Katalog för resultat; standard är config.output
            log_level: Loggnivå
        """
        self.config = config
        self.output_dir = Path(output_dir or config.output)
        self.logger = setup_logger("eelab", log_level)
        self.rows: List[ResultRow] = []
        self.summary: Dict[str, Any] = {}
        self.failed_checks: List[str] = []
        self.plot: Optional[Dict[str, Any]] = None

    # Lägen

    def sweep_free(self) -> None:
        """Nyströmsvep över L för den fria gasen, med gitterorakel i d = 1."""
        cfg = self.config
        payloads = [(cfg.dimension, cfg.domain_shape, float(L), cfg.fermi_energy, cfg.resolution,
                     cfg.lattice.oracle_spacing) for L in cfg.l_values]
        results: Dict[float, ResultRow] = {}
        if cfg.threads > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                futures = {pool.submit(_free_point_task, p): p[2] for p in payloads}
                for future in tqdm(as_completed(futures), total=len(futures), desc="sweep-free",
                                   disable=not sys.stderr.isatty()):
                    results[futures[future]] = future.result()
        else:
            for payload in tqdm(payloads, desc="sweep-free", disable=not sys.stderr.isatty()):
                results[payload[2]] = _free_point_task(payload)
        # Rader i L-ordning oavsett när de blev klara
        self.rows = [results[float(L)] for L in cfg.l_values]
        self.summarize_sweep(oracle_columns=cfg.dimension == 1)

    def sweep_perturbed(self) -> None:
        """Gittersvep med potential; en egenvärdesuppdelning delas av alla L."""
        cfg = self.config
        V = potential_from_config(cfg)
        inputs = {"E": cfg.fermi_energy, "d": cfg.dimension, "a": cfg.lattice.spacing}
        try:
            box = LatticeBox(cfg.dimension, cfg.lattice.buffer_ratio * max(cfg.l_values), cfg.lattice.spacing)
            projections = projection_pair(box, cfg.fermi_energy, V)
        except EelabError as exc:
            self.logger.error("Projektionerna kunde inte beräknas: %s", exc)
            self.rows = [ResultRow.failure("sweep-perturbed", dict(inputs, L=float(L)), exc)
                         for L in cfg.l_values]
            return

        def task(L: float) -> ResultRow:
            try:
                record = run_point(box, cfg.fermi_energy, L, V, cfg.shape, cfg.lattice.schatten_s,
                                   projections=projections)
                return ResultRow.success("sweep-perturbed", record)
            except EelabError as exc:
                self.logger.error("Punkten L=%g misslyckades: %s", L, exc)
                return ResultRow.failure("sweep-perturbed", dict(inputs, L=L), exc)

        scales = [float(L) for L in cfg.l_values]
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            self.rows = list(tqdm(pool.map(task, scales), total=len(scales), desc="sweep-perturbed",
                                  disable=not sys.stderr.isatty()))
        self.summarize_sweep(oracle_columns=False)
        self.summarize_perturbation()
        self.check_boundary_effect(V)

    def check_boundary_effect(self, V: Optional[PotentialSpec]) -> None:
        """
        Randeffekten vid minsta L i en låda med svepets kvot W/L.

        Kvoten är densamma som för största L i svepet, men lådan är så liten
        att den dubblade lådan ryms under gränsen för antalet gitterpunkter.
        """
        cfg = self.config
        L = float(min(cfg.l_values))
        ratio = cfg.lattice.buffer_ratio
        try:
            box = LatticeBox(cfg.dimension, ratio * L, cfg.lattice.spacing)
            change = boundary_effect(box, cfg.fermi_energy, L, V, cfg.shape)
        except EelabError as exc:
            self.logger.error("Randeffekten kunde inte beräknas: %s", exc)
            self.failed_checks.append("boundary_effect")
            return
        self.summary["boundary_effect"] = {
            "L": L, "buffer_ratio": ratio, "relative_change": change, "limit": BOUNDARY_EFFECT_LIMIT,
        }
        if change > BOUNDARY_EFFECT_LIMIT:
            self.logger.warning("Dubblad låda ändrar S med %.2f %% vid L=%g", 100 * change, L)
            self.failed_checks.append("boundary_effect")

    def summarize_sweep(self, oracle_columns: bool) -> None:
        """Anpassningar, logaritmbas och skrankor för ett svep."""
        cfg = self.config
        records = [row.to_record() for row in self.rows if row.ok]
        if oracle_columns:
            # Kvoten är densamma i båda baserna
            diffs = [abs(r["S"] - r["S_oracle"]) / r["S_oracle"] for r in records if r["S_oracle"] > 0]
            if diffs:
                self.summary["cross_method_max_relative"] = max(diffs)
                if max(diffs) > CROSS_METHOD_TOLERANCE:
                    self.logger.warning("Nyström och gitterorakel skiljer sig upp till %.1f %%", 100 * max(diffs))
                    self.failed_checks.append("cross_method")
        if len(records) < 4:
            self.logger.warning("För få lyckade punkter (%d) för anpassning", len(records))
            return
        d = cfg.dimension
        s0 = sigma0(DomainSpec(d, cfg.domain_shape, 1.0), cfg.fermi_energy)
        sigma_l, sigma_u = sigma_bounds(s0)
        fits = {base: _fits_for(records, column, d) for base, column in BASE_COLUMNS.items()}
        self.summary["sigma0"] = s0
        self.summary["sigma_bounds"] = {"sigma_l": sigma_l, "sigma_u": sigma_u}
        self.summary["fits"] = {base: _fits_to_dict(f) for base, f in fits.items()}

        # Logaritmbasen avgörs av den oberoende referensen när den finns
        if oracle_columns:
            reference = {"2": "S_oracle", "e": "S_oracle_nat"}
        elif self.config.mode == "sweep-perturbed":
            reference = {"2": "S_free", "e": "S_free_nat"}
        else:
            reference = BASE_COLUMNS
        reference_fits = {base: _fits_for(records, column, d) for base, column in reference.items()}
        self.summary["reference_fits"] = {base: _fits_to_dict(f) for base, f in reference_fits.items()}
        decision = resolve_log_base({b: f["joint"] for b, f in reference_fits.items()}, s0)
        self.summary["log_base"] = decision.to_dict()
        if decision.base is None:
            self.failed_checks.append("log_base")

        pinned = fits[decision.base or "2"]
        verdict = bound_verdict(pinned["joint"], sigma_l, sigma_u)
        self.summary["verdict"] = verdict.to_dict()
        self.summary["sigma_relative_error"] = abs(pinned["joint"].sigma_hat - s0) / s0
        if not verdict.passed:
            self.failed_checks.append("bound_verdict")
        if pinned.get("methods_agree") is False:
            self.failed_checks.append("methods_agree")
        if pinned["joint"].residual_rms > MAX_RESIDUAL:
            self.failed_checks.append("residual_rms")
        if self.summary["sigma_relative_error"] > LOG_BASE_TOLERANCE:
            self.failed_checks.append("sigma0")

        purity = sigma_lower_from_purity(ScalingSeries.from_rows(
            records, d, column="purity_defect_free" if "purity_defect_free" in records[0] else "purity_defect"))
        self.summary["sigma_lower_from_purity"] = purity.to_dict()
        self.plot = {"fit": pinned["joint"], "columns": ("L", "S", "S_nat")}

    def summarize_perturbation(self) -> None:
        """Korstermernas trender och skrankorna punkt för punkt."""
        records = [row.to_record() for row in self.rows if row.ok]
        if not records:
            return
        checks: Dict[str, Any] = {}
        checks["lower_bound_holds"] = all(r["lower_bound_gap"] >= -LOWER_BOUND_TOLERANCE for r in records)
        checks["upper_bound_f_holds"] = all(r["S"] <= r["upper_bound_f"] + LOWER_BOUND_TOLERANCE for r in records)
        checks["power_sum_bound_holds"] = all(r["S"] <= r["power_sum_bound"] + LOWER_BOUND_TOLERANCE for r in records)
        for name in ("lower_bound_holds", "upper_bound_f_holds", "power_sum_bound_holds"):
            if not checks[name]:
                self.failed_checks.append(name)

        if len(records) >= 3:
            log_L = [math.log(r["L"]) for r in records]
            cross = trend_slope(log_L, [r["cross_term_hs"] for r in records])
            purity = trend_slope(log_L, [r["purity_defect"] for r in records])
            checks["cross_term_trend"] = cross.to_dict()
            checks["purity_trend"] = purity.to_dict()
            if abs(cross.slope) > CROSS_TERM_SLOPE_LIMIT:
                self.failed_checks.append("cross_term_trend")
            if purity.slope < PURITY_SLOPE_MINIMUM:
                self.failed_checks.append("purity_trend")
            schatten = [r["schatten_difference"] for r in records]
            if all(value > 0 for value in schatten):
                d = self.config.dimension
                s = self.config.lattice.schatten_s
                loglog = trend_slope(log_L, [math.log(v) for v in schatten])
                checks["schatten_loglog_trend"] = loglog.to_dict()
                checks["schatten_slope_limit"] = 2 * d * (1 - s) + 0.1
                if loglog.slope > checks["schatten_slope_limit"]:
                    self.failed_checks.append("schatten_loglog_trend")
        self.summary["perturbation_checks"] = checks

    def fit(self) -> None:
        """Anpassa en tidigare resultatfil."""
        cfg = self.config
        frame = load_rows_from_csv(cfg.fit.input)
        records = frame.to_dict("records")
        d = int(records[0].get("d", cfg.dimension)) if records else cfg.dimension
        column = cfg.fit.column
        fits = _fits_for(records, column, d)
        for key in ("joint", "dyadic"):
            if key in fits:
                self.rows.append(ResultRow.success("fit", dict(fits[key].to_dict(), column=column, base="")))
        self.summary["fits"] = _fits_to_dict(fits)
        energy = cfg.fermi_energy or float(records[0]["E"])
        shape = cfg.shape or str(records[0].get("shape", "interval" if d == 1 else "box"))
        s0 = sigma0(DomainSpec(d, shape, 1.0), energy)
        sigma_l, sigma_u = sigma_bounds(s0)
        verdict = bound_verdict(fits["joint"], sigma_l, sigma_u)
        self.summary["sigma0"] = s0
        self.summary["verdict"] = verdict.to_dict()
        if not verdict.passed:
            self.failed_checks.append("bound_verdict")

    def verify_inequalities(self) -> None:
        """Skalära skanningar och den slumpmässiga matriskorpusen."""
        cfg = self.config.inequalities
        reports = verify_scalar_suite(cfg.points, cfg.s_values, cfg.pair_points)
        reports.update(verify_corpus(cfg.samples, cfg.matrix_size, self.config.seed,
                                     workers=self.config.threads))
        violations = 0
        for key in sorted(reports):
            record = reports[key].to_dict()
            record["worst_input"] = str(record["worst_input"])
            record.pop("slacks")
            row = ResultRow.success("verify-inequalities", record)
            if not reports[key].passed:
                row.status = "fail"
                violations += 1
                self.failed_checks.append(key)
            self.rows.append(row)
        self.summary["violations"] = violations
        self.summary["reports"] = {key: reports[key].to_dict() for key in sorted(reports)}

    def riesz_check(self) -> None:
        """Konturintegralen mot det spektrala oraklet."""
        cfg = self.config.riesz
        cases = self._riesz_cases()
        solved = []
        for name, K, A1, A2, E in cases:
            inputs = {"case": name, "n": K.shape[0], "energy": E}
            try:
                contour = ContourSpec.for_operator(np.linalg.eigvalsh(K), E, cfg.half_height)
                result = integrate_contour(K, A1, A2, E, contour, target=cfg.target,
                                           max_solves=cfg.max_solves, workers=self.config.threads)
                oracle = spectral_oracle(K, A1, A2, E)
                scale = np.linalg.norm(oracle)
                taller = integrate_contour(K, A1, A2, E, contour.with_half_height(2 * cfg.half_height),
                                           target=cfg.target, max_solves=cfg.max_solves,
                                           workers=self.config.threads)
                record = dict(inputs)
                record.update({
                    "gap": float(np.min(np.abs(np.linalg.eigvalsh(K) - E))),
                    "relative_error": float(np.linalg.norm(result.value - oracle) / scale),
                    "solves": result.solves,
                    "panels": result.panels,
                    "converged": result.converged,
                    "max_imag": result.max_imag,
                    "height_change": float(np.linalg.norm(taller.value - result.value) / scale),
                })
                row = ResultRow.success("riesz-check", record)
                limit = LATTICE_RIESZ_TOLERANCE if name.startswith("lattice") else RIESZ_TOLERANCE
                if record["relative_error"] > limit or record["height_change"] > limit:
                    row.status = "fail"
                    self.failed_checks.append(f"riesz({name})")
                self.rows.append(row)
                solved.append((name, K, A1, A2, E))
            except EelabError as exc:
                self.logger.error("Fallet %s misslyckades: %s", name, exc)
                self.rows.append(ResultRow.failure("riesz-check", inputs, exc))

        # Studierna körs bara på fall som gick att lösa
        studies = {}
        for name, K, A1, A2, E in solved:
            if name not in ("random-0", "lattice-midband"):
                continue
            try:
                studies[name] = convergence_study(K, A1, A2, E, cfg.node_counts).to_dict("records")
            except EelabError as exc:
                self.logger.error("Konvergensstudien för %s misslyckades: %s", name, exc)
                self.failed_checks.append(f"convergence({name})")
        self.summary["convergence"] = studies

        lattice = [case for case in solved if case[0] == "lattice-midband"]
        if not lattice:
            self.logger.warning("Inget löst gitterfall; lap_constant hoppas över")
            return
        _, K, _, _, E = lattice[0]
        sites = np.arange(K.shape[0]) - 0.5 * (K.shape[0] - 1)
        etas = np.geomspace(1e-6, 1.0, 13)
        try:
            self.summary["lap_constant"] = {
                "weighted": lap_constant(K, WeightOperator.japanese_bracket(sites), E, etas),
                "unweighted": lap_constant(K, WeightOperator.identity(K.shape[0]), E, etas),
            }
        except EelabError as exc:
            self.logger.error("lap_constant misslyckades: %s", exc)
            self.failed_checks.append("lap_constant")

    def _riesz_cases(self) -> List[Tuple[str, np.ndarray, np.ndarray, np.ndarray, float]]:
        cfg = self.config.riesz
        cases = [("diagonal", np.diag([0.0, 2.0]), np.eye(2), np.eye(2), 1.0)]
        n = cfg.random_size
        for i in range(cfg.random_cases):
            rng = make_rng(self.config.seed, i)
            M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            K = 0.5 * (M + M.conj().T)
            values = np.sort(np.linalg.eigvalsh(K))
            # E mitt i det största inre gapet
            k = int(np.argmax(np.diff(values)[1:-1])) + 1
            E = 0.5 * (values[k] + values[k + 1])
            A = rng.standard_normal((n, n))
            cases.append((f"random-{i}", K, A, A.T, float(E)))
        N = cfg.lattice_sites
        K = 2.0 * np.eye(N) - np.eye(N, k=1) - np.eye(N, k=-1)
        weights = WeightOperator.japanese_bracket(np.arange(N) - 0.5 * (N - 1)).matrix
        cases.append(("lattice-midband", K, weights, weights, 2.0))
        return cases

    def green_decay(self) -> None:
        """Exponentiellt avtagande av G₀ och identiteten för |Im √z|."""
        cfg = self.config.green
        residuals = {}
        for d in cfg.dimensions:
            for z in cfg.points:
                inputs = {"dimension": d, "z_real": z.real, "z_imag": z.imag}
                try:
                    record = verify_green_decay(z, d).to_dict()
                    low, high = record.pop("sample_range")
                    record.update({"r_min": low, "r_max": high})
                    row = ResultRow.success("green-decay", record)
                    if record["relative_rate_error"] > 0.05:
                        row.status = "fail"
                        self.failed_checks.append(f"decay(d={d},z={z})")
                    self.rows.append(row)
                    residuals[f"d={d},z={z}"] = resolvent_residual(z, d)
                except EelabError as exc:
                    self.logger.error("Avtagandet för d=%d z=%s misslyckades: %s", d, z, exc)
                    self.rows.append(ResultRow.failure("green-decay", inputs, exc))

        worst = 0.0
        for E in np.geomspace(1e-3, 1e3, 13):
            for eta in cfg.eta_values:
                for sign in (1.0, -1.0):
                    try:
                        lhs, rhs = imag_sqrt_identity(float(E), sign * eta)
                    except EelabError as exc:
                        self.logger.error("Identiteten för E=%g eta=%g misslyckades: %s", E, sign * eta, exc)
                        self.rows.append(ResultRow.failure(
                            "green-decay", {"z_real": float(E), "z_imag": sign * eta}, exc))
                        continue
                    worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        self.summary["imag_sqrt_identity_max_relative"] = worst
        self.summary["resolvent_residuals"] = residuals
        if worst > 1e-10:
            self.failed_checks.append("imag_sqrt_identity")

    # Körning

    def execute(self) -> None:
        """Kör det konfigurerade läget."""
        handler = getattr(self, self.config.mode.replace("-", "_"))
        self.logger.info("Kör läget %s", self.config.mode)
        handler()

    def load(self) -> None:
        """Spara results.csv, summary.json och series.gp."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        rows = convert_to_rows(self.rows)
        save_rows_to_csv(rows, self.output_dir / "results.csv", columns_for(self.config.mode))
        save_to_json(self.summary, self.output_dir / "summary.json")
        if self.plot is not None:
            write_plot_data(rows, self.output_dir / "series.gp", self.plot["columns"],
                            self.plot["fit"], self.config.dimension)
        self.logger.info("Sparade %d rader till %s", len(rows), self.output_dir)

    def run(self) -> int:
        """
        Kör hela pipelinen.

        Returns:
            0 om alla rader lyckades och alla kontroller passerade, annars 1
        """
        start_time = datetime.now()
        self.execute()
        errors = sum(not row.ok for row in self.rows)
        self.summary.update({
            "mode": self.config.mode,
            "version": __version__,
            "config": config_lines(self.config),
            "error_rows": errors,
            "failed_checks": sorted(set(self.failed_checks)),
            "duration_seconds": (datetime.now() - start_time).total_seconds(),
        })
        self.load()
        self.logger.info("Läget %s slutfört på %.1f sekunder (%d felrader)",
                         self.config.mode, self.summary["duration_seconds"], errors)
        return 1 if errors or self.failed_checks else 0


def compare(run_a: Union[str, Path], run_b: Union[str, Path]) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    """
    Jämför två svep punkt för punkt.

    Args:
        run_a: Första results.csv
        run_b: Andra results.csv

    Returns:
        (rader med skillnader per L, sammanfattning med trender mot ln L)

    Raises:
        ShapeMismatchError: Om L-näten skiljer sig
    """
    a = load_rows_from_csv(run_a)
    b = load_rows_from_csv(run_b)
    a = a[a["status"] == "ok"].set_index("L").sort_index()
    b = b[b["status"] == "ok"].set_index("L").sort_index()
    if len(a.index) != len(b.index) or not np.allclose(a.index.values, b.index.values, rtol=1e-12, atol=0):
        raise ShapeMismatchError(f"L-näten skiljer sig: {list(a.index)} mot {list(b.index)}")

    def column(frame: pd.DataFrame, name: str) -> pd.Series:
        if name in frame.columns:
            return frame[name].astype(float)
        return pd.Series(np.nan, index=frame.index)

    rows = []
    for L in a.index:
        cross_a = column(a, "cross_term_hs")[L]
        cross_b = column(b, "cross_term_hs")[L]
        rows.append({
            "mode": "compare",
            "status": "ok",
            "error": "",
            "L": float(L),
            "S_a": float(a.at[L, "S"]),
            "S_b": float(b.at[L, "S"]),
            "delta_S": float(b.at[L, "S"] - a.at[L, "S"]),
            "delta_S_nat": float(column(b, "S_nat")[L] - column(a, "S_nat")[L]),
            "cross_term_hs_a": float(cross_a),
            "cross_term_hs_b": float(cross_b),
            "delta_cross_term_hs": float(cross_b - cross_a),
            "delta_purity_defect": float(column(b, "purity_defect")[L] - column(a, "purity_defect")[L]),
        })

    summary: Dict[str, Any] = {"points": len(rows), "max_abs_delta_S": max((abs(r["delta_S"]) for r in rows), default=0.0)}
    if len(rows) >= 3:
        log_L = [math.log(r["L"]) for r in rows]
        summary["delta_S_trend"] = trend_slope(log_L, [r["delta_S"] for r in rows]).to_dict()
        for key in ("cross_term_hs_a", "cross_term_hs_b"):
            values = [r[key] for r in rows]
            if all(np.isfinite(values)):
                summary[f"{key}_trend"] = trend_slope(log_L, values).to_dict()
    return rows, summary


def print_config(config: RunConfig, stream=None) -> None:
    """Skriv den fullständiga konfigurationen som nyckel/värde-text."""
    stream = stream or sys.stdout
    for line in config_lines(config):
        stream.write(line + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eelab", description="Numeriskt labb för entanglemententropi")
    parser.add_argument("mode", choices=list(MODES) + ["compare"], help="Körläge")
    parser.add_argument("inputs", nargs="*", help="Två resultatfiler för compare")
    parser.add_argument("--config", type=str, help="Experimentfil (nyckel/värde)")
    parser.add_argument("--out", type=str, help="Katalog för resultat")
    parser.add_argument("--seed", type=int, help="Slumpfrö")
    parser.add_argument("--threads", type=int, help="Antal arbetare")
    parser.add_argument("--print-config", action="store_true", help="Skriv konfigurationen och avsluta")
    parser.add_argument("--log-level", type=str, default=None, help="Loggnivå")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Huvudfunktion för kommandoraden."""
    args = build_parser().parse_args(argv)

    level_name = args.log_level or os.environ.get("EELAB_LOG_LEVEL", "INFO")
    log_level = getattr(logging, level_name.upper(), logging.INFO)
    log = setup_logger("eelab", log_level)

    if args.mode == "compare":
        if len(args.inputs) != 2:
            log.error("compare kräver exakt två resultatfiler")
            return 2
        try:
            rows, summary = compare(*args.inputs)
        except (EelabError, OSError, KeyError) as exc:
            log.error("Jämförelsen misslyckades: %s", exc)
            return 1
        out = Path(args.out or "results/compare")
        save_rows_to_csv(rows, out / "results.csv", columns_for("compare"))
        save_to_json(summary, out / "summary.json")
        log.info("Jämförelse av %d punkter sparad i %s", len(rows), out)
        return 0

    overrides = {"MODE": args.mode, "SEED": args.seed, "THREADS": args.threads, "OUTPUT": args.out}
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        log.error("%s (fält: %s)", exc, exc.field)
        return 2

    if args.print_config:
        print_config(config)
        return 0

    try:
        return ExperimentPipeline(config, log_level=log_level).run()
    except EelabError as exc:
        log.error("Körningen avbröts: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
