# fusion/pipeline.py
"""
Runs behind the management commands: load the inputs of a ``RunConfig``,
call the library and write the artifacts.
"""

import csv
import itertools
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from django.conf import settings

from .baselines import (
    OsmosisEvolutionConfig,
    direct_blend,
    linear_osmosis,
    osmosis_fusion,
    poisson_edit,
)
from .exceptions import ShapeMismatchError
from .imaging import blur_alpha, load_alpha, load_image, load_mask, save_field, save_image
from .images import ModelWeights, check_same_shape
from .metrics import chroma_error_norm, metric_rows, write_metrics_csv
from .solvers import IPianoConfig, PDConfig, ipiano_fuse
from .trace import format_value, write_trace_csv

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("eta", "mu", "gamma", "init", "E0", "E_final", "iterations", "converged")


@dataclass
class RunConfig:
    """Everything one subcommand needs: input and output paths plus solver settings."""

    subcommand: str
    inputs: tuple = ()
    output: Optional[Path] = None
    save_v: Optional[Path] = None
    trace: Optional[Path] = None
    metrics: Optional[Path] = None
    weights: ModelWeights = field(default_factory=ModelWeights)
    ipiano: IPianoConfig = field(default_factory=IPianoConfig)
    primal_dual: PDConfig = field(default_factory=PDConfig)
    osmosis: OsmosisEvolutionConfig = field(default_factory=OsmosisEvolutionConfig)
    init: str = "f"
    regularizer: str = "huber-tv"
    alpha_blur: float = 0.0
    drift_blend: str = "alpha"
    # sweep grid
    etas: tuple = (0.0, 0.1, 0.5)
    mus: tuple = (10.0, 100.0)
    gammas: tuple = (0.0, 1.0)
    inits: tuple = ("f",)


def csv_digits():
    return settings.FUSION["CSV_SIGNIFICANT_DIGITS"]


def channel_workers():
    return max(1, int(settings.FUSION["CHANNEL_WORKERS"]))


def _match_channels(f, b):
    """Broadcast a grayscale input to RGB when the other input is in colour."""
    if f.shape[0] == b.shape[0]:
        return f, b
    if f.shape[0] == 1:
        return np.repeat(f, 3, axis=0), b
    return f, np.repeat(b, 3, axis=0)


def load_fusion_inputs(config):
    """Read ``(f, b, alpha)``; the alpha map is blurred by ``config.alpha_blur``."""
    foreground, background, alpha_path = config.inputs
    f = load_image(foreground, config.weights.offset)
    b = load_image(background, config.weights.offset)
    f, b = _match_channels(f, b)
    alpha = blur_alpha(load_alpha(alpha_path), config.alpha_blur)
    check_same_shape(f=f, b=b, alpha=alpha)
    return f, b, alpha


def _save_outputs(config, u, v=None):
    save_image(u, config.output)
    written = [config.output]
    if v is not None and config.save_v:
        save_field(v, config.save_v)
        written.append(config.save_v)
    return written


def run_fuse(config, callback=None):
    f, b, alpha = load_fusion_inputs(config)
    result = ipiano_fuse(
        f, b, alpha, weights=config.weights, cfg=config.ipiano, init=config.init,
        pd_cfg=config.primal_dual, regularizer=config.regularizer, callback=callback,
    )
    written = _save_outputs(config, result.u, result.v)
    if config.trace:
        write_trace_csv(result.trace, config.trace, csv_digits())
        written.append(config.trace)
    for iteration, gap in result.trace.warnings:
        logger.warning("inner primal-dual solve hit its cap at iteration %d (gap %.3e)", iteration, gap)
    return result, written


def run_osmosis(config):
    """Two inputs evolve the first image under the drift of the second; three run osmosis fusion."""
    workers = channel_workers()
    if len(config.inputs) == 2:
        u0 = load_image(config.inputs[0], config.weights.offset)
        v = load_image(config.inputs[1], config.weights.offset)
        u0, v = _match_channels(u0, v)
        result = linear_osmosis(u0, v, cfg=config.osmosis, workers=workers)
    else:
        f, b, alpha = load_fusion_inputs(config)
        result = osmosis_fusion(f, b, alpha, cfg=config.osmosis, drift_blend=config.drift_blend, workers=workers)
    return result, _save_outputs(config, result.u)


def run_poisson(config):
    foreground, background, mask_path = config.inputs
    f = load_image(foreground)
    b = load_image(background)
    f, b = _match_channels(f, b)
    u = poisson_edit(f, b, load_mask(mask_path), workers=channel_workers())
    return u, _save_outputs(config, u)


def run_blend(config):
    f, b, alpha = load_fusion_inputs(config)
    u = direct_blend(f, b, alpha)
    return u, _save_outputs(config, u)


def run_metrics(config, stream):
    """Chroma error report of two colour images, written to ``config.metrics`` or ``stream``."""
    first = load_image(config.inputs[0], config.weights.offset)
    second = load_image(config.inputs[1], config.weights.offset)
    if first.shape != second.shape:
        raise ShapeMismatchError(f"{config.inputs[0]} is {first.shape} but {config.inputs[1]} is {second.shape}")
    rows = metric_rows(chroma_error_norm(first, second))
    if config.metrics:
        with open(config.metrics, "w", newline="") as handle:
            write_metrics_csv(rows, handle, csv_digits())
    else:
        write_metrics_csv(rows, stream, csv_digits())
    return rows


def sweep_cells(config):
    return itertools.product(config.etas, config.mus, config.gammas, config.inits)


def run_sweep(config, output_dir, on_cell=None):
    """
    Fuse once per (eta, mu, gamma, init) cell, saving ``u_<cell>.png`` and
    a ``summary.csv`` in ``output_dir``.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    f, b, alpha = load_fusion_inputs(config)
    digits = csv_digits()
    rows = []
    for eta, mu, gamma, init in sweep_cells(config):
        weights = replace(config.weights, eta=eta, mu=mu, gamma=gamma)
        result = ipiano_fuse(
            f, b, alpha, weights=weights, cfg=config.ipiano, init=init,
            pd_cfg=config.primal_dual, regularizer=config.regularizer,
        )
        name = f"u_eta{format_value(eta)}_mu{format_value(mu)}_gamma{format_value(gamma)}_{init}.png"
        save_image(result.u, output_dir / name)
        final = result.trace.last.E if len(result.trace) else result.trace.initial.E
        row = (eta, mu, gamma, init, result.trace.initial.E, final, len(result.trace), result.trace.converged)
        rows.append(row)
        if on_cell is not None:
            on_cell(row)

    with open(output_dir / "summary.csv", "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for eta, mu, gamma, init, e0, e_final, iterations, converged in rows:
            writer.writerow([
                format_value(eta, digits), format_value(mu, digits), format_value(gamma, digits), init,
                format_value(e0, digits), format_value(e_final, digits), iterations, int(converged),
            ])
    return rows
