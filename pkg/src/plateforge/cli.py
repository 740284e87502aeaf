"""Command-line front door: plan, inspect, serve.

Reports are JSON on stdout; diagnostics go to stderr. The catalog can be
replaced by pointing PLATEFORGE_CATALOG at a catalog JSON file.
"""

import json
import os
import socket
import sys

import click

from .catalog import catalog as builtin_catalog
from .catalog import load_catalog, save_catalog
from .errors import BaselineTooShort, MalformedStl, PlanningError
from .pipeline import run_plan
from .spatial import build_index
from .stl import load_stl

CATALOG_ENV = "PLATEFORGE_CATALOG"

EXIT_BAD_INPUT = 1
EXIT_TOO_SHORT = 2
EXIT_UNKNOWN_MODEL = 3


def active_catalog():
    path = os.environ.get(CATALOG_ENV)
    if not path:
        return builtin_catalog()
    with open(path, "rb") as fh:
        return load_catalog(fh.read())


def _fail(code, message):
    click.echo(message, err=True)
    sys.exit(code)


def _load_mesh(path):
    try:
        with open(path, "rb") as fh:
            return load_stl(fh.read())
    except (OSError, MalformedStl, PlanningError) as exc:
        _fail(EXIT_BAD_INPUT, f"cannot read mesh {path}: {exc}")


@click.group()
def main():
    """Miniplate position planning on STL surfaces."""


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path())
@click.option("--seed", required=True, help="x,y,z click position in mm")
@click.option("--angle", default=0.0, show_default=True, help="baseline rotation in degrees")
@click.option("--model", "model_id", required=True, help="plate model id")
@click.option("--step", default=0.5, show_default=True, help="marker spacing in mm")
@click.option("--out", "out_path", default=None, help="output STL path")
@click.option("--report", is_flag=True, help="print a JSON planning report")
def plan(mesh_path, seed, angle, model_id, step, out_path, report):
    """Plan one implant and write it as binary STL."""
    try:
        click_point = [float(c) for c in seed.split(",")]
        if len(click_point) != 3:
            raise ValueError
    except ValueError:
        _fail(EXIT_BAD_INPUT, f"--seed wants x,y,z  (got {seed!r})")

    models = active_catalog()
    mesh = _load_mesh(mesh_path)
    index = build_index(mesh)
    try:
        result = run_plan(index, models, click_point, angle, model_id, step)
    except KeyError:
        ids = ", ".join(m.id for m in models)
        _fail(EXIT_UNKNOWN_MODEL, f"unknown model {model_id!r}; catalog has: {ids}")
    except BaselineTooShort as exc:
        _fail(EXIT_TOO_SHORT, str(exc))
    except PlanningError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))

    out_path = out_path or f"implant_{model_id}.stl"
    with open(out_path, "wb") as fh:
        fh.write(result.stl_bytes)
    if report:
        click.echo(json.dumps(result.report))


@main.command()
@click.option("--catalog", "show_catalog", is_flag=True, help="list plate models")
@click.option("--mesh", "mesh_path", default=None, type=click.Path())
def info(show_catalog, mesh_path):
    """Print catalog models or mesh statistics as JSON."""
    if show_catalog:
        click.echo(save_catalog(active_catalog()).decode())
        return
    if mesh_path is None:
        _fail(EXIT_BAD_INPUT, "info wants --catalog or --mesh <path>")
    mesh = _load_mesh(mesh_path)
    lo, hi = mesh.bbox()
    click.echo(
        json.dumps(
            {
                "faces": mesh.n_faces,
                "bbox_min": list(lo),
                "bbox_max": list(hi),
                "degenerate_dropped": mesh.degenerate_dropped,
            }
        )
    )


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path())
@click.option("--port", default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(mesh_path, port, host):
    """Run the local planning service for the browser UI."""
    import uvicorn

    from .service import create_app

    mesh = _load_mesh(mesh_path)  # bad mesh fails before any socket opens
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        _fail(EXIT_BAD_INPUT, f"cannot bind {host}:{port}: {exc}")

    app = create_app(mesh=mesh, models=active_catalog(), mesh_ref=os.path.basename(mesh_path))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
