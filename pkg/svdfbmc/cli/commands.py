"""
Command-line interface for svdfbmc.
"""

import os
import logging
import dataclasses
from typing import Any, Callable, Dict

import click
import numpy as np

from svdfbmc.core.config import SimConfig, create_default_config_file, load_config
from svdfbmc.core.errors import ConfigurationError
from svdfbmc.core.utils import Utils
from svdfbmc.phy.prototype_filter import design_phydyas
from svdfbmc.phy.smoothing import (
    SMOOTHING_NONE,
    SMOOTHING_ORTHO,
    SMOOTHING_PHASE,
    flops_estimate,
    flops_rows,
)
from svdfbmc.schemes import default_manager
from svdfbmc.sim.harness import (
    PROBE_FULL,
    PROBE_SINGLE,
    beamformer_distance_histogram,
    collect_beamformer_sets,
    dump_tone_frames,
    measure_leaked_interference,
    run_ber_sweep,
    snr_at_ber,
    total_variation,
    write_ber_results,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

# Fields given as comma-separated lists on the command line
LIST_FIELDS = {"SNR_GRID_DB": float, "ACTIVE_SUBCHANNELS": int}
# Fields whose default is None
OPTIONAL_FIELDS = {"CHANNEL_PROFILE_FILE": str, "FFT_FACTOR": int}


def _option_name(field_name: str) -> str:
    return "--" + field_name.lower().replace("_", "-")


def config_options(func: Callable) -> Callable:
    """
    Add one command-line option per SimConfig field.

    Options default to None, meaning "keep the value from the config file".
    """
    defaults = SimConfig()
    for field in reversed(dataclasses.fields(SimConfig)):
        name = field.name
        dest = name.lower()
        if name in LIST_FIELDS:
            option = click.option(
                _option_name(name), dest, default=None, help=f"Comma-separated {name}"
            )
        elif isinstance(getattr(defaults, name), bool):
            flag = name.lower().replace("_", "-")
            option = click.option(
                f"--{flag}/--no-{flag}", dest, default=None, help=f"Override {name}"
            )
        else:
            kind = OPTIONAL_FIELDS.get(name, type(getattr(defaults, name)))
            option = click.option(
                _option_name(name), dest, type=kind, default=None, help=f"Override {name}"
            )
        func = option(func)
    return func


def apply_overrides(config: SimConfig, options: Dict[str, Any]) -> SimConfig:
    """
    Copy a configuration with the command-line overrides applied.

    Args:
        config (SimConfig): Loaded configuration
        options (Dict[str, Any]): Click keyword arguments

    Returns:
        SimConfig: Updated copy
    """
    changes = {}
    for field in dataclasses.fields(SimConfig):
        value = options.get(field.name.lower())
        if value is None:
            continue
        if field.name in LIST_FIELDS:
            cast = LIST_FIELDS[field.name]
            value = [cast(v) for v in str(value).split(",") if v.strip()]
        changes[field.name] = value
    return dataclasses.replace(config, **changes)


@click.group()
@click.option("--config", "-c", help="Path to configuration file")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.pass_context
def cli(ctx, config, verbose):
    """svdfbmc - SVD-beamformed FS-FBMC/OQAM MIMO link simulator"""
    # Set up logging level
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    # Load configuration
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = load_config(config)
    except ConfigurationError as e:
        click.echo(f"Error: {e}")
        ctx.exit(1)


@cli.command()
@click.option(
    "--file",
    "-f",
    type=click.Path(),
    default="config.py",
    help="Path to create the configuration file (default: config.py)",
)
def init(file):
    """Initialize a new configuration file with default settings"""
    if os.path.exists(file):
        if not click.confirm(f"File {file} already exists. Overwrite?"):
            click.echo("Aborted.")
            return

    if create_default_config_file(file):
        click.echo(f"Configuration file created at {file}")
        click.echo("Edit the system, channel and SNR grid before running 'svdfbmc ber'.")
    else:
        click.echo(f"Failed to create configuration file at {file}")


@cli.command()
@click.option(
    "--dump-frames",
    type=click.Path(),
    default=None,
    help="Also dump the first frame's beamformed tone values as complex64",
)
@click.option(
    "--target-ber", type=float, default=1e-3, help="BER level to report the SNR at"
)
@config_options
@click.pass_context
def ber(ctx, dump_frames, target_ber, **options):
    """Run a BER sweep and write CSV results plus a run manifest"""
    try:
        config = apply_overrides(ctx.obj["config"], options).validate()
        click.echo(
            f"Simulating {config.SYSTEM}, {config.MODULATION}-QAM, "
            f"{'coded' if config.CODING else 'uncoded'}, channel {config.CHANNEL_MODEL}"
        )
        if dump_frames:
            shape = dump_tone_frames(config, dump_frames)
        records = run_ber_sweep(config)
        csv_path, manifest_path = write_ber_results(records, config)
    except ConfigurationError as e:
        click.echo(f"Error: {e}")
        ctx.exit(1)

    click.echo(f"\n{'SNR (dB)':>9}  {'BER':>10}  {'+/-':>9}  {'bits':>9}")
    for r in records:
        click.echo(
            f"{r.snr_db:>9g}  {r.ber:>10.3e}  {r.wilson_half_width:>9.2e}  {r.bits_simulated:>9d}"
        )
    crossing = snr_at_ber(records, target_ber)
    if crossing is not None:
        click.echo(f"\nSNR at BER {target_ber:g}: {crossing:.2f} dB")
    click.echo(f"\nResults written to {csv_path}")
    click.echo(f"Manifest written to {manifest_path}")
    if dump_frames:
        click.echo(f"Tone frames of shape {shape} written to {dump_frames}")


@cli.command()
@click.option("--draws", "-n", type=int, default=50, help="Channel draws (default: 50)")
@click.option("--threshold", type=float, default=1.0, help="Distance threshold to report")
@click.option("--dump", is_flag=True, help="Also dump the first draw's beamformers as complex64")
@config_options
@click.pass_context
def hist(ctx, draws, threshold, dump, **options):
    """Histogram of distances between beamformers of adjacent tones"""
    try:
        config = apply_overrides(ctx.obj["config"], options).validate()
        histograms = {}
        for method in (SMOOTHING_NONE, SMOOTHING_PHASE, SMOOTHING_ORTHO):
            sets = collect_beamformer_sets(config, method, draws)
            histograms[method] = beamformer_distance_histogram(sets)
            if dump:
                Utils.export_complex64(
                    os.path.join(config.OUTPUT_DIR, f"beamformers_{method}.c64"), sets[0].V
                )
    except ConfigurationError as e:
        click.echo(f"Error: {e}")
        ctx.exit(1)

    click.echo(f"\n=== Adjacent-tone beamformer distance, channel {config.CHANNEL_MODEL} ===")
    for method, h in histograms.items():
        click.echo(f"{method:>6}: mass above {threshold:g} = {h.mass_above(threshold):.4%}")
    tv = total_variation(histograms[SMOOTHING_PHASE], histograms[SMOOTHING_ORTHO])
    click.echo(f"Total variation phase vs ortho: {tv:.4f}")

    edges = histograms[SMOOTHING_NONE].edges
    path = os.path.join(config.OUTPUT_DIR, f"hist_{config.digest()}.csv")
    rows = [
        [float(edges[i]), float(edges[i + 1])]
        + [float(h.probabilities[i]) for h in histograms.values()]
        for i in range(len(edges) - 1)
    ]
    Utils.write_csv(path, ["left", "right"] + list(histograms), rows)
    click.echo(f"Histogram written to {path}")


@cli.command()
@click.option(
    "--probe",
    type=click.Choice([PROBE_FULL, PROBE_SINGLE]),
    default=PROBE_FULL,
    help="Probe grid (default: full)",
)
@click.option("--draws", "-n", type=int, default=20, help="Channel draws (default: 20)")
@click.option(
    "--systems",
    default="sc,sc-smooth,finer,proposed",
    help="Comma-separated FS-FBMC systems to probe",
)
@config_options
@click.pass_context
def leak(ctx, probe, draws, systems, **options):
    """Measure real-part interference leaked by each FS-FBMC system"""
    base = apply_overrides(ctx.obj["config"], options)
    click.echo(f"\n=== Leaked interference, {probe} probe, channel {base.CHANNEL_MODEL} ===")
    for system in [s.strip() for s in systems.split(",") if s.strip()]:
        try:
            config = dataclasses.replace(base, SYSTEM=system).validate()
            leakage = measure_leaked_interference(config, probe, draws)
        except ConfigurationError as e:
            click.echo(f"Error: {e}")
            ctx.exit(1)
        mean = float(np.mean(leakage[np.asarray(config.active_mask())]))
        level = 10 * np.log10(mean) if mean > 0 else -np.inf
        click.echo(f"{system:>10}: {mean:.3e} ({level:.1f} dB)")


@cli.command()
@click.option("--max-antennas", type=int, default=8, help="Largest Nt = Nr to report")
@click.option("--n-iter", type=int, default=3, help="Orthogonal iteration steps")
def flops(max_antennas, n_iter):
    """FLOPS per tone of the two smoothing methods"""
    click.echo(f"\n=== Orthogonal iteration steps, Nt = Nr = 2, {n_iter} iterations ===")
    for step, count in flops_rows(2, 2, n_iter).items():
        click.echo(f"{step:>22}: {float(count):g}")

    click.echo(f"\n{'Nt=Nr':>6}  {'ortho':>8}  {'phase':>8}")
    for n in range(1, max_antennas + 1):
        ortho = flops_estimate(n, n, SMOOTHING_ORTHO, n_iter)
        phase = flops_estimate(n, n, SMOOTHING_PHASE)
        click.echo(f"{n:>6}  {ortho:>8d}  {phase:>8d}")


@cli.command("filter")
@click.option(
    "--output",
    "-o",
    type=click.Path(),
    default="phydyas_filter.txt",
    help="Output file (default: phydyas_filter.txt)",
)
@click.pass_context
def filter_cmd(ctx, output):
    """Export the prototype filter coefficients as text columns"""
    config = ctx.obj["config"]
    try:
        filt = design_phydyas(config.NUM_SUBCARRIERS, config.OVERLAP)
    except ConfigurationError as e:
        click.echo(f"Error: {e}")
        ctx.exit(1)
    Utils.export_columns(
        output,
        {
            "i": np.arange(filt.length),
            "g": filt.g,
            "G_re": filt.G.real,
            "G_im": filt.G.imag,
            "G_abs": np.abs(filt.G),
        },
    )
    click.echo(f"PHYDYAS filter M={filt.M} K={filt.K} written to {output}")
    click.echo(f"Non-negligible tones: {len(filt.significant_tones())}")


@cli.command()
@click.pass_context
def schemes(ctx):
    """Show the available link schemes"""
    config = ctx.obj["config"]
    scheme_manager = default_manager()

    click.echo("\n=== Link Schemes ===")
    click.echo(f"Configured system: {config.SYSTEM}")
    for name in scheme_manager.get_scheme_types():
        scheme_class = scheme_manager.scheme_types[name]
        smoothing = (
            f"{config.SMOOTHING_METHOD} (from config)"
            if scheme_class.smoothing == "config"
            else scheme_class.smoothing
        )
        click.echo(f"- {name}: {scheme_class.granularity} beamforming, smoothing {smoothing}")


def generate_cli():
    """Entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    generate_cli()
