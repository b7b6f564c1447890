"""
Calibrate command - Single-link two-step calibration with a TOML report.
"""

import time
from pathlib import Path
from typing import List, Optional

import numpy as np
import tomlkit
import typer
from tomlkit.items import Array

from app.cli.commands.common import fail, load_config
from app.cli.output import ReportConsole
from app.core.errors import TandemcalError
from app.core.harness import LinkReport, calibrate_single_link
from app.core.logger import setup_logger
from app.utils.file_utils import write_text_atomic

logger = setup_logger(__name__)


def _pairs(values: np.ndarray) -> Array:
    """Complex vector as [[re, im], ...]."""
    array = tomlkit.array()
    for v in np.asarray(values, dtype=complex):
        array.append([float(v.real), float(v.imag)])
    return array


def build_report(report: LinkReport) -> tomlkit.TOMLDocument:
    """TOML document for a single-link calibration."""
    config, est = report.config, report.estimate
    doc = tomlkit.document()
    doc.add(tomlkit.comment("single-link calibration report, AP 0 -> MU 0"))

    scenario = tomlkit.table()
    scenario.add("antennas_ap", config.antennas_ap)
    scenario.add("digital_chains_ap", config.digital_chains_ap)
    scenario.add("antennas_mu", config.antennas_mu)
    scenario.add("digital_chains_mu", config.digital_chains_mu)
    scenario.add("num_paths", config.num_paths)
    scenario.add("mismatch_sigma_mag", config.mismatch_sigma_mag)
    scenario.add("mismatch_sigma_phase", config.mismatch_sigma_phase)
    scenario.add("noise_variance", config.noise_variance)
    scenario.add("master_seed", str(config.master_seed))
    doc.add("scenario", scenario)

    pilots = tomlkit.table()
    pilots.add("digital_dl", report.pilots.digital_dl)
    pilots.add("digital_ul", report.pilots.digital_ul)
    pilots.add("analog_dl", report.pilots.analog_dl)
    pilots.add("analog_ul", report.pilots.analog_ul)
    pilots.add("total", report.pilots.total)
    doc.add("pilots", pilots)

    estimate = tomlkit.table()
    estimate.add("residual", float(est.residual))
    estimate.add("ambiguous", bool(est.ambiguous))
    for name, value in report.mse.items():
        estimate.add(f"mse_{name}", float(value))
    estimate.add("t1_hat", _pairs(est.t1_hat))
    estimate.add("r1_hat", _pairs(est.r1_hat))
    estimate.add("alpha_hat", _pairs(est.alpha_hat))
    estimate.add("r1_hat_peer", _pairs(est.r1_hat_peer))
    estimate.add("t1_hat_peer", _pairs(est.t1_hat_peer))
    estimate.add("alpha_hat_peer", _pairs(est.alpha_hat_peer))
    doc.add("estimate", estimate)

    beams = tomlkit.table()
    beams.add("best_tx", report.best_pair[0])
    beams.add("best_rx", report.best_pair[1])
    beams.add("snr_threshold_db", report.snr_threshold_db)
    beams.add("pairs_above_threshold", report.pairs_above_threshold)
    beams.add("beam_set_columns", report.beam_set_columns)
    beams.add("beam_set_condition", float(report.beam_set_condition))
    doc.add("beam_search", beams)
    return doc


def calibrate(
    config_path: Optional[str] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
    seed: Optional[int] = typer.Option(
        None, "--seed", min=0, help="Override master_seed"
    ),
    out: Path = typer.Option(..., "--out", "-o", help="TOML report path"),
    snr_threshold_db: float = typer.Option(
        10.0, "--snr-threshold-db", help="Beam-pair SNR threshold in dB"
    ),
    epsilon: float = typer.Option(
        0.3, "--epsilon", help="Phase jitter of the beam-set perturbation, radians"
    ),
) -> None:
    """
    Calibrate one AP against one user and write a report.

    Runs the digital and analog steps in both directions on the link between
    AP 0 and user 0 of trial 0, then searches the forward sweep for the best
    beam pair.
    """
    console = ReportConsole()
    config = load_config(console, config_path, seed)

    started = time.monotonic()
    try:
        with console.stage_status("calibrate", "calibrating AP 0 -> MU 0..."):
            report = calibrate_single_link(config, snr_threshold_db, epsilon)
    except TandemcalError as e:
        fail(console, "calibrate", e)
    elapsed = f"{time.monotonic() - started:.2f}s"
    pilots = report.pilots
    console.stage_ok(
        "calibrate",
        f"{pilots.total} pilots, residual {report.estimate.residual:.3e}",
        duration=elapsed,
    )
    console.stage_ok(
        "search",
        f"best pair tx {report.best_pair[0]} / rx {report.best_pair[1]}, "
        f"{report.pairs_above_threshold} above {snr_threshold_db:g} dB",
    )

    rows: List[List[str]] = [
        ["digital pilots (DL/UL)", f"{pilots.digital_dl} / {pilots.digital_ul}"],
        ["analog pilots (DL/UL)", f"{pilots.analog_dl} / {pilots.analog_ul}"],
        ["analog residual", f"{report.estimate.residual:.3e}"],
    ]
    rows += [[f"MSE {name}", f"{value:.3e}"] for name, value in report.mse.items()]
    console.print_table("Calibration", ["Quantity", "Value"], rows)

    try:
        path = write_text_atomic(out, tomlkit.dumps(build_report(report)))
    except OSError as e:
        fail(console, "report", e)
    console.print_saved([("report", str(path))])
