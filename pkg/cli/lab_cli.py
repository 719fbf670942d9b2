import itertools
import json
import logging
import os
import uuid
from datetime import datetime
from typing import Callable, Optional, Union

import click
import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from cli.plot import render_disk
from config import LAB_CONFIG_PATH, LAB_LOG_PATH, LAB_OUT_DIR
from core.db import init_db
from core.db_functions import save_report, setup_logging, write_table
from core.errors import ConfigError, LabError
from core.forms import OneForm, TwoForm, forms_from_specs, VOLUME_NAME
from core.fuchsian import GroupWord, OctagonPresentation
from core.repository import Repository
from lab import cocycles, harness
from lab.boundary_maps import Earthquake
from lab.mcg import (
    abelianization_rank,
    boundary_map_fixed_point,
    h1_matrix,
    three_region_experiment,
    twist_direction,
    twist_images,
    twist_word,
)
from lab.qm import DeRhamQM, sample_pairs
from models.experiment import ExperimentConfig
from models.report import PropertyRow

logger = logging.getLogger(__name__)

Tables = dict[str, pd.DataFrame]


def load_config(path: str, required: bool = True) -> ExperimentConfig:
    """
    Read the experiment YAML file into a validated config.

    Args:
        path (str): YAML path.
        required (bool): when False a missing file yields the defaults.

    Raises:
        click.UsageError: unreadable YAML or failed validation.
    """
    if not os.path.exists(path):
        if required:
            raise click.UsageError(f"Config file {path} not found")
        logger.warning(f"Config file {path} not found, using defaults")
        return ExperimentConfig()
    with open(path, encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle) or {}
        except yaml.YAMLError as e:
            raise click.UsageError(f"Cannot parse {path}: {e}")
    try:
        return ExperimentConfig(**data)
    except (ValidationError, TypeError) as e:
        raise click.UsageError(f"Invalid config {path}:\n{e}")


def parse_words(text: Optional[str]) -> Optional[list[GroupWord]]:
    if text is None:
        return None
    try:
        return [GroupWord.parse(token) for token in text.split(",")]
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--words")


def parse_regions(ctx, param, value: str) -> tuple[int, int, int]:
    try:
        regions = tuple(int(token) for token in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected three comma-separated integers, got {value!r}")
    if len(regions) != 3 or len(set(regions)) != 3 or min(regions) < 0:
        raise click.BadParameter(f"expected three distinct non-negative indices, got {value!r}")
    return regions


def strictly_decreasing_failures(residuals: list[float], noise: float = 0.0) -> int:
    """Steps where a residual above the noise floor fails to drop, or any residual grows past it."""
    return sum(1 for a, b in zip(residuals, residuals[1:]) if b > a + noise or (a > noise and b >= a))


class LabRunner:
    """
    Holds everything a command needs: the validated config, the group, the
    named forms and the output directory.

    Attributes:
        config (ExperimentConfig): validated experiment settings.
        group (OctagonPresentation): the genus-2 group.
        forms (dict[str, OneForm | TwoForm]): named forms, "volume" included.
        out_dir (str): where CSV, JSON and SVG files go.
        words (list[GroupWord] | None): words given with --words.
        depth (int): earthquake chain depth.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        out_dir: str,
        words: Optional[list[GroupWord]] = None,
        depth: Optional[int] = None,
    ) -> None:
        self.config = config
        self.out_dir = out_dir
        self.words = words
        self.depth = depth or config.words.earthquake_depth
        self.group = OctagonPresentation(ball_cap=config.words.ball_cap)
        try:
            self.forms = forms_from_specs(self.group, config.forms, config.margin)
        except ConfigError as e:
            raise click.UsageError(str(e))
        os.makedirs(out_dir, exist_ok=True)
        logger.info(f"Lab ready: seed {config.seed}, output in {out_dir}")

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def form(self, name: str, degree: int) -> Union[OneForm, TwoForm]:
        if name not in self.forms:
            raise click.BadParameter(f"unknown form {name!r}; known: {', '.join(sorted(self.forms))}")
        form = self.forms[name]
        expected = OneForm if degree == 1 else TwoForm
        if not isinstance(form, expected):
            raise click.BadParameter(f"form {name!r} is not a {degree}-form")
        return form

    def earthquake(self, curve: str, direction: int = 1) -> Earthquake:
        return Earthquake(self.group, curve, depth=self.depth, direction=direction)

    def run(self, command: str, job: Callable[[], tuple[list[PropertyRow], Tables]]) -> None:
        """
        Run one command: write its tables and property rows, store the rows in
        the ledger and exit 0 iff every row passed.
        """
        ctx = click.get_current_context()
        run_id = f"{command}-{datetime.now():%Y%m%dT%H%M%S}-{uuid.uuid4().hex[:6]}"
        logger.info(f"Run {run_id} started")
        try:
            rows, tables = job()
        except LabError as e:
            logger.error(f"{command} failed: {type(e).__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(1)
        for name, frame in tables.items():
            write_table(frame, self.path(name))
        if not rows:
            ctx.exit(0)
        frame = save_report(rows, run_id, command, self.path(f"{command}.csv"))
        click.echo(frame.to_string(index=False))
        failed = [row.name for row in rows if not row.passed]
        if failed:
            logger.warning(f"Run {run_id}: {len(failed)} of {len(rows)} rows failed: {failed}")
            ctx.exit(1)
        logger.info(f"Run {run_id}: all {len(rows)} rows passed")
        ctx.exit(0)

    def write_json(self, name: str, payload: dict) -> None:
        with open(self.path(name), "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
        logger.info(f"Wrote {self.path(name)}")

    def svg_path(self, command: str) -> str:
        return self.path(f"{command}-{datetime.now():%Y%m%dT%H%M%S}.svg")

    def qm(self, form_name: str) -> tuple[list[PropertyRow], Tables]:
        config = self.config
        q = DeRhamQM(self.form(form_name, 1), config.tolerances.quadrature)
        words = self.words if self.words is not None else [w for w, _ in self.group.ball(2)]
        values = pd.DataFrame(
            {
                "word": [str(w) for w in words],
                "length": [len(w) for w in words],
                "q": [q.eval(w) for w in words],
                "q_inverse": [q.eval(w.inverse()) for w in words],
            }
        )
        pairs = sample_pairs(self.group, config.samples.qm_ball, config.samples.qm_pairs, config.seed)
        defects = pd.DataFrame(
            {
                "length_u": [len(u) for u, _ in pairs],
                "length_v": [len(v) for _, v in pairs],
                "defect": q.pair_defects(pairs),
            }
        )
        defect_table = (
            defects.groupby(["length_u", "length_v"])["defect"]
            .agg(pairs="count", max_defect="max", mean_defect="mean")
            .reset_index()
        )
        defect_table["bound"] = q.defect_bound
        report = q.is_trivial(pairs, config.tolerances.exact_qm)
        self.write_json("qm-triviality.json", report.model_dump())
        rows = harness.qm_rows(q, words, config)
        return rows, {"qm-values.csv": values, "qm-defects.csv": defect_table}

    def cocycle_check(self) -> tuple[list[PropertyRow], Tables]:
        two_forms = {name: self.form(name, 2) for name in [VOLUME_NAME, *self.config.cocycle_forms]}
        rows = harness.representation_rows(self.group, self.config)
        rows += harness.cocycle_rows(self.group, two_forms, self.config)
        return rows, {}

    def pinned_earthquake(self, curve: str):
        """Earthquake and twist with the earthquake direction matched to the twist on H1."""
        phi = twist_images(curve)
        E = self.earthquake(curve)
        sign = twist_direction(E, phi)
        if sign == -1:
            E = self.earthquake(curve, direction=-1)
        elif sign == 0:
            logger.warning(f"Twist direction for {curve} undecided, keeping +1")
        return E, phi, sign

    def orbits(self, E: Earthquake, steps: int) -> pd.DataFrame:
        records = []
        for index, region in enumerate(E.regions[:3]):
            for point, start in enumerate(region.interior_grid(self.config.samples.region_grid)):
                for n, angle in enumerate(E.orbit(float(start), steps), start=1):
                    records.append(
                        {
                            "region": index,
                            "point": point,
                            "step": n,
                            "angle": float(angle),
                            "residual": float(region.residual(angle)),
                        }
                    )
        return pd.DataFrame(records, columns=["region", "point", "step", "angle", "residual"])

    def twist(self, curve: str, steps: int) -> tuple[list[PropertyRow], Tables]:
        config = self.config
        E, phi, sign = self.pinned_earthquake(curve)
        F = boundary_map_fixed_point(self.group, phi, config.words.fixed_point_length)
        rows = harness.twist_rows(E, F, phi, config)

        orbit = self.orbits(E, steps)
        noise = config.tolerances.orbit_noise
        for index, region_orbits in orbit.groupby("region"):
            failures = sum(
                strictly_decreasing_failures(list(points["residual"]), noise)
                for _, points in region_orbits.groupby("point")
            )
            last = region_orbits[region_orbits["step"] == steps]["residual"].max()
            rows.append(
                PropertyRow.check(
                    f"region {index}: interior orbits approach the attracting endpoint",
                    len(region_orbits),
                    failures,
                    0.0,
                    note=f"largest last residual {last:.3e}",
                )
            )

        points = cocycles.sample_boundary_tuples(1, config.samples.twist_points, config.seed, 0.0)[:, 0]
        quake = E.boundary_map()
        samples = pd.DataFrame(
            {"theta": points, "earthquake": quake(points), "fixed_point": F(points)}
        )
        samples["displacement"] = quake.displacement(points)
        self.write_json(
            f"twist-{curve}.json",
            {
                "curve": curve,
                "earthquake_direction": E.direction,
                "twist_direction": sign,
                "sign_convention": "earthquake realizes the twist on H1; M^T J M = J",
                "curve_length": E.length,
                "depth": self.depth,
                "fixed_point_length": config.words.fixed_point_length,
                "fixed_point_accuracy": F.accuracy,
            },
        )
        orbits = [points["angle"].to_numpy() for _, points in orbit.groupby(["region", "point"])]
        render_disk(self.svg_path("twist"), self.group, E, orbits)
        return rows, {f"twist-{curve}-samples.csv": samples, f"twist-{curve}-orbits.csv": orbit}

    def three_region(self, form_name: str, regions: tuple[int, int, int]) -> tuple[list[PropertyRow], Tables]:
        config = self.config
        omega = self.form(form_name, 2)
        euler = form_name == VOLUME_NAME
        if euler:
            f = cocycles.orientation_cocycle().scaled(np.pi)
        else:
            f = cocycles.integral_cocycle(omega, config.tolerances.quadrature)
        E = self.earthquake(config.twist_curve)
        if max(regions) >= len(E.regions):
            raise click.BadParameter(
                f"region indices must be below {len(E.regions)}, got {regions}", param_hint="--regions"
            )
        report = three_region_experiment(
            f, E, regions, grid=config.samples.region_grid, steps=config.samples.orbit_steps,
            noise=config.tolerances.orbit_noise,
        )
        rows = [
            PropertyRow.check(
                f"{form_name}: spread over region grid",
                config.samples.region_grid**3,
                report.spread,
                0.0 if euler else np.inf,
                note=report.verdict,
            ),
            PropertyRow.check(
                f"{form_name}: orbit residuals decrease",
                len(report.orbit_residuals),
                strictly_decreasing_failures(report.orbit_residuals, config.tolerances.orbit_noise),
                0.0,
                note=f"attracting value {report.attracting_value:.6e}",
            ),
            PropertyRow.check(
                "interior points approach the attracting endpoints",
                3 * config.samples.region_grid * len(report.endpoint_residuals),
                0.0 if report.converging else 1.0,
                0.0,
                note=f"last endpoint residual {report.endpoint_residuals[-1]:.3e}",
            ),
        ]
        table = pd.DataFrame(
            {
                "step": np.arange(1, len(report.orbit_residuals) + 1),
                "residual": report.orbit_residuals,
                "endpoint_residual": report.endpoint_residuals,
            }
        )
        table["spread"] = report.spread
        return rows, {f"three-region-{form_name}.csv": table}

    def h1(self, twists: list[str]) -> tuple[list[PropertyRow], Tables]:
        records = []
        for text in twists:
            try:
                M = h1_matrix(twist_word(text))
            except ValueError as e:
                raise click.BadParameter(str(e), param_hint="TWISTS")
            click.echo(f"{text}:\n{M}")
            for r, line in enumerate(M):
                records.append({"twist": text, "row": r, **{f"c{k}": int(x) for k, x in enumerate(line)}})
        rows = harness.h1_rows(twists)
        rank = abelianization_rank(self.group)
        rows.append(PropertyRow.check("abelianization rank is 4", 1, abs(rank - 4), 0.0))
        table = pd.DataFrame(records, columns=["twist", "row", "c0", "c1", "c2", "c3"])
        return rows, {"h1-matrices.csv": table}

    def plot(self, curve: str, steps: int) -> tuple[list[PropertyRow], Tables]:
        E = self.earthquake(curve)
        orbit = self.orbits(E, steps)
        orbits = [group["angle"].to_numpy() for _, group in orbit.groupby("region")]
        path = render_disk(self.svg_path("plot"), self.group, E, orbits)
        click.echo(path)
        return [], {}


def default_twists() -> list[str]:
    """The four standard twists and all their 2- and 3-fold compositions."""
    return ["".join(letters) for k in (1, 2, 3) for letters in itertools.product("abcd", repeat=k)]


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help=f"Experiment YAML file (default {LAB_CONFIG_PATH}).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help=f"Output directory (default from config, then {LAB_OUT_DIR}).")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override the config seed.")
@click.option("--tolerance-scale", type=click.FloatRange(min=0.0, min_open=True), default=1.0,
              help="Multiply every threshold.")
@click.option("--words", default=None, help="Comma-separated words, e.g. 'a,ab,1'.")
@click.option("--depth", type=click.IntRange(min=1), default=None, help="Earthquake chain depth.")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING"]), default="INFO")
@click.pass_context
def cli(ctx, config_path, out_dir, seed, tolerance_scale, words, depth, log_level):
    """
    Bounded-cohomology lab for the genus-2 surface group.

    Every command writes <command>.csv with the columns name, sample_size,
    max_residual, threshold, passed, note and exits 0 iff all rows pass.
    """
    if ctx.resilient_parsing:
        return
    setup_logging(LAB_LOG_PATH, getattr(logging, log_level))
    init_db()
    config = load_config(config_path or LAB_CONFIG_PATH, required=config_path is not None)
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    if tolerance_scale != 1.0:
        config = config.scaled(tolerance_scale)
    if ctx.invoked_subcommand in ("history",):
        ctx.obj = None
        return
    ctx.obj = LabRunner(config, out_dir or config.out_dir or LAB_OUT_DIR, parse_words(words), depth)


@cli.command("qm")
@click.option("--form", "form_name", default=None, help="1-form name (default: qm_form of the config).")
@click.pass_obj
def qm_command(runner: LabRunner, form_name: Optional[str]):
    """
    de Rham quasimorphism values and defects.

    Writes qm-values.csv (word, length, q, q_inverse), qm-defects.csv
    (length_u, length_v, pairs, max_defect, mean_defect, bound) and
    qm-triviality.json.
    """
    runner.run("qm", lambda: runner.qm(form_name or runner.config.qm_form))


@cli.command("cocycle-check")
@click.pass_obj
def cocycle_check_command(runner: LabRunner):
    """Representation, Euler identity, cocycle, invariance and psi rows."""
    runner.run("cocycle-check", runner.cocycle_check)


@cli.command("twist")
@click.option("--curve", type=click.Choice(list("abcd")), default=None, help="Twist curve.")
@click.option("--n", "steps", type=click.IntRange(min=2), default=None, help="Orbit steps.")
@click.pass_obj
def twist_command(runner: LabRunner, curve: Optional[str], steps: Optional[int]):
    """
    Dehn twist on the boundary by the earthquake and fixed-point algorithms.

    Writes twist-<curve>-samples.csv (theta, earthquake, fixed_point,
    displacement), twist-<curve>-orbits.csv (region, point, step, angle, residual),
    twist-<curve>.json and twist-<timestamp>.svg.
    """
    curve = curve or runner.config.twist_curve
    runner.run("twist", lambda: runner.twist(curve, steps or runner.config.samples.orbit_steps))


@cli.command("three-region")
@click.option("--form", "form_name", default=None, help="2-form name (default: region_form).")
@click.option("--regions", default="0,1,2", callback=parse_regions, help="Three region indices.")
@click.pass_obj
def three_region_command(runner: LabRunner, form_name: Optional[str], regions: tuple[int, int, int]):
    """
    Cocycle spread over three affected regions and orbit convergence.

    Writes three-region-<form>.csv (step, residual, endpoint_residual, spread).
    """
    runner.run("three-region", lambda: runner.three_region(form_name or runner.config.region_form, regions))


@cli.command("h1")
@click.argument("twists", nargs=-1)
@click.pass_obj
def h1_command(runner: LabRunner, twists: tuple[str, ...]):
    """
    Integer H1 matrices of twist words such as 'aB' and the symplectic check.

    Without arguments, checks the four twists and all 2- and 3-fold
    compositions. Writes h1-matrices.csv (twist, row, c0..c3).
    """
    runner.run("h1", lambda: runner.h1(list(twists) or default_twists()))


@cli.command("plot")
@click.option("--curve", type=click.Choice(list("abcd")), default=None, help="Twist curve.")
@click.option("--n", "steps", type=click.IntRange(min=1), default=None, help="Orbit steps.")
@click.pass_obj
def plot_command(runner: LabRunner, curve: Optional[str], steps: Optional[int]):
    """Draw the octagon, lifts, basepoint, affected regions and orbits to plot-<timestamp>.svg."""
    runner.run(
        "plot", lambda: runner.plot(curve or runner.config.twist_curve, steps or runner.config.samples.orbit_steps)
    )


@cli.command("history")
@click.option("--limit", type=click.IntRange(min=1), default=10)
def history_command(limit: int):
    """Latest runs in the ledger: run_id, command, rows, passed, started."""
    runs = Repository().latest_runs(limit)
    frame = pd.DataFrame(runs, columns=["run_id", "command", "rows", "passed", "started"])
    click.echo(frame.to_string(index=False) if not frame.empty else "No runs recorded")
