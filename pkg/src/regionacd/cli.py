"""Command-line interface for batch decomposition, evaluation, and benchmarks.

Exit codes: 0 success, 2 validation/usage error, 1 internal error.  With
``--json-errors`` failures are printed to stderr as one-line JSON objects.
"""

from __future__ import annotations

import json
import sys

import click

from .acd import AcdParams
from .bench import build_scene, run_bench
from .errors import ParseError, RegionAcdError
from .mesh import load_mesh
from .metrics import evaluate_decomposition
from .pipeline import (
    PipelineParams,
    interactive_decomposition,
    load_decomposition,
    load_regions_file,
    save_decomposition,
)

VALIDATION_ERRORS = (ParseError,)


def _fail(exc: Exception, json_errors: bool, code: int):
    if json_errors:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        click.echo(json.dumps(payload), err=True)
    else:
        click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _error_code(exc: Exception) -> int:
    # user-input problems exit 2, internal faults exit 1
    from . import errors as E

    validation = (E.ParseError, E.IoError, E.NotWatertight, E.EmptyMesh,
                  E.OverlappingRegions, E.EmptyRegion, E.EmptyInput,
                  E.NoSamplesInRegion, ValueError, FileNotFoundError,
                  KeyError, json.JSONDecodeError)
    return 2 if isinstance(exc, validation) else 1


@click.group()
def main():
    """Region-aware approximate convex decomposition toolkit."""


@main.command()
@click.argument("mesh_path", type=click.Path(exists=True))
@click.option("--regions", "regions_path", type=click.Path(exists=True),
              help="Regions JSON file.")
@click.option("--remainder-eps", type=float, default=None,
              help="Override the remainder tolerance.")
@click.option("--merge-tau", type=float, default=None,
              help="Override the merge tolerance.")
@click.option("--seed", type=int, default=None, help="Override the seed.")
@click.option("--threads", type=int, default=None, help="Worker thread count.")
@click.option("--max-parts", type=int, default=4096, help="Part budget.")
@click.option("-o", "--output", "output_dir", required=True,
              type=click.Path(), help="Output directory for parts + manifest.")
@click.option("--json-errors", is_flag=True, help="Machine-readable errors.")
def decompose(mesh_path, regions_path, remainder_eps, merge_tau, seed,
              threads, max_parts, output_dir, json_errors):
    """Decompose MESH_PATH into convex parts honoring per-region tolerances."""
    try:
        mesh = load_mesh(mesh_path)
        if regions_path:
            params = load_regions_file(regions_path)
        else:
            params = PipelineParams()
        overrides = {}
        if remainder_eps is not None:
            overrides["remainder_tolerance"] = remainder_eps
        if merge_tau is not None:
            overrides["merge_tolerance"] = merge_tau
        if seed is not None:
            overrides["seed"] = seed
        if threads is not None:
            overrides["threads"] = threads
        params = PipelineParams(
            regions=params.regions,
            remainder_tolerance=overrides.get("remainder_tolerance",
                                              params.remainder_tolerance),
            merge_tolerance=overrides.get("merge_tolerance", params.merge_tolerance),
            acd=AcdParams(tolerance=params.remainder_tolerance, max_parts=max_parts),
            seed=overrides.get("seed", params.seed),
            threads=overrides.get("threads", params.threads),
        )
        decomp = interactive_decomposition(mesh, params)
        manifest = save_decomposition(decomp, output_dir)
        click.echo(json.dumps({
            "parts": len(decomp.convex_parts),
            "exact_meshes": len(decomp.exact_meshes),
            "warnings": decomp.stats.warnings,
            "output": str(output_dir),
        }, indent=1))
        for warning in decomp.stats.warnings:
            click.echo(f"warning: {warning}", err=True)
    except Exception as exc:
        _fail(exc, json_errors, _error_code(exc))


@main.command()
@click.argument("mesh_path", type=click.Path(exists=True))
@click.option("--parts", "parts_path", required=True, type=click.Path(exists=True),
              help="Parts directory or manifest.json.")
@click.option("--regions", "regions_path", required=True, type=click.Path(exists=True),
              help="Regions JSON file.")
@click.option("-n", "n_samples", type=int, default=20000, help="Samples per direction.")
@click.option("--seed", type=int, default=0)
@click.option("--json-errors", is_flag=True, help="Machine-readable errors.")
def evaluate(mesh_path, parts_path, regions_path, n_samples, seed, json_errors):
    """Per-region symmetric Hausdorff error of a saved decomposition."""
    try:
        mesh = load_mesh(mesh_path)
        decomp = load_decomposition(parts_path)
        params = load_regions_file(regions_path)
        report = evaluate_decomposition(mesh, decomp, list(params.regions),
                                        n=n_samples, seed=seed)
        click.echo(json.dumps(report.to_dict(), indent=1))
    except Exception as exc:
        _fail(exc, json_errors, _error_code(exc))


@main.command()
@click.option("--parts", "parts_path", required=True, type=click.Path(exists=True),
              help="Parts directory or manifest.json.")
@click.option("--steps", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--json-errors", is_flag=True, help="Machine-readable errors.")
def bench(parts_path, steps, seed, json_errors):
    """Collision-query throughput of a saved decomposition."""
    try:
        decomp = load_decomposition(parts_path)
        scene = build_scene(decomp, seed=seed)
        report = run_bench(scene, steps=steps, seed=seed)
        click.echo(json.dumps(report.to_dict(), indent=1))
        click.echo(report.summary(), err=True)
    except Exception as exc:
        _fail(exc, json_errors, _error_code(exc))


@main.command()
@click.option("--port", type=int, default=8732)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", default="./regionacd-data", type=click.Path())
@click.option("--max-jobs", type=int, default=2)
def serve(port, host, data_dir, max_jobs):
    """Run the HTTP job service."""
    from .service import serve as run_service

    run_service(port=port, data_dir=data_dir, max_jobs=max_jobs, host=host)


if __name__ == "__main__":
    main()
