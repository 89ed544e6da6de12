"""Command-line interface: identify, manipulate, compare, config init, serve.

Exit codes: 0 success, 2 parse/validation error, 3 infeasible manipulation.
The VLC_CONFIG environment variable supplies a default --config path;
SOURCE_DATE_EPOCH pins report timestamps for reproducible output.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .errors import InfeasibleRequest, ParseError, ValidationError, VLCError
from .io import (
    config_hash,
    json_dumps_pretty,
    load_scene_file,
    report_document,
    scene_hash,
    write_json,
)
from .manipulate import ConstraintSet, ManipulationRequest, manipulate, manipulate_segment
from .scale import ATTRIBUTES, Attribute, ScaleConfig, identify


def _load_config(path: str | None) -> ScaleConfig:
    if not path:
        return ScaleConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScaleConfig.from_dict({**ScaleConfig().to_dict(), **data})
    except (OSError, json.JSONDecodeError, TypeError, VLCError) as exc:
        raise ParseError(f"bad config file {path}: {exc}", "/") from exc


def _fail(exc: Exception, code: int):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _load_inputs(scene_file: str, path_name: str, config_path: str | None):
    config = _load_config(config_path)
    doc = load_scene_file(scene_file)
    if path_name not in doc.path_lines:
        raise ValidationError(f"path not found: {path_name!r} (have {doc.path_names()})")
    nav = doc.nav_path(path_name, config.turn_threshold_deg)
    return config, doc, nav


_config_option = click.option(
    "--config",
    "config_path",
    envvar="VLC_CONFIG",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Scale config JSON (defaults from VLC_CONFIG or built-ins).",
)


@click.group()
def main():
    """Visuo-locomotive complexity analysis and manipulation."""


@main.command("identify")
@click.argument("scene_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--path", "path_name", default="main", show_default=True, help="Named path in the scene file.")
@_config_option
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report JSON output (stdout if omitted).")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None, help="Write the class profile as SVG.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Write the per-segment class table as CSV.")
def cli_identify(scene_file, path_name, config_path, out, svg_path, csv_path):
    """Compute the complexity report for a scene's named path."""
    try:
        config, doc, nav = _load_inputs(scene_file, path_name, config_path)
        report = identify(doc.scene, nav, config)
    except (ParseError, ValidationError, VLCError) as exc:
        _fail(exc, 2)
    payload = report_document(report, doc, config, path_name)
    if out:
        write_json(out, payload)
        click.echo(f"report written to {out}")
    else:
        click.echo(json_dumps_pretty(payload), nl=False)
    if svg_path:
        from .render import render_profile, save_svg

        save_svg(render_profile(report), svg_path)
        click.echo(f"profile written to {svg_path}")
    if csv_path:
        _write_segment_csv(csv_path, report)
        click.echo(f"segment table written to {csv_path}")


def _write_segment_csv(path, report):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["segment", "chainage_start", "chainage_end"]
            + [a.value for a in ATTRIBUTES]
            + ["aggregate_mean", "class"]
        )
        for seg in report.segments:
            writer.writerow(
                [seg.index, f"{seg.chainage_start:.3f}", f"{seg.chainage_end:.3f}"]
                + [seg.attributes[a.value].cls for a in ATTRIBUTES]
                + [f"{seg.mean:.4f}", seg.cls]
            )


@main.command("manipulate")
@click.argument("scene_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--path", "path_name", default="main", show_default=True)
@_config_option
@click.option("--target", type=float, default=3.0, show_default=True, help="Target class (segment target in --segment mode).")
@click.option("--attributes", default=None, help="Comma-separated attribute subset (default: all six).")
@click.option("--segment", "segment_index", type=int, default=None, help="Manipulate one segment; requires a single --attributes entry.")
@click.option("--overall-target", type=float, default=3.0, show_default=True, help="Overall aggregate target in --segment mode.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=int, default=5000, show_default=True, help="Max objective evaluations.")
@click.option("--min-width", type=float, default=1.2, show_default=True)
@click.option("--max-width", type=float, default=12.0, show_default=True)
@click.option("--out-scene", type=click.Path(dir_okay=False), default=None, help="Modified scene output (default <stem>-modified.json).")
@click.option("--out-result", type=click.Path(dir_okay=False), default=None, help="Result JSON output (default <stem>-result.json).")
@click.option("--svg/--no-svg", "render_svg", default=False, show_default=True, help="Write before/after SVG overviews.")
def cli_manipulate(
    scene_file,
    path_name,
    config_path,
    target,
    attributes,
    segment_index,
    overall_target,
    seed,
    budget,
    min_width,
    max_width,
    out_scene,
    out_result,
    render_svg,
):
    """Drive the scene toward a target complexity class and write the results."""
    stem = Path(scene_file).with_suffix("")
    out_scene = out_scene or f"{stem}-modified.json"
    out_result = out_result or f"{stem}-result.json"
    try:
        config, doc, nav = _load_inputs(scene_file, path_name, config_path)
    except (ParseError, ValidationError, VLCError) as exc:
        _fail(exc, 2)
    try:
        constraints = ConstraintSet(min_width=min_width, max_width=max_width)
        attr_list = (
            tuple(Attribute(a.strip()) for a in attributes.split(",") if a.strip())
            if attributes
            else tuple(Attribute)
        )
    except ValueError as exc:
        _fail(ValidationError(f"unknown attribute in --attributes: {exc}"), 2)
    try:
        if segment_index is not None:
            if len(attr_list) != 1:
                raise InfeasibleRequest("--segment mode needs exactly one --attributes entry")
            result = manipulate_segment(
                doc.scene,
                nav,
                segment_index,
                attr_list[0],
                int(round(target)),
                overall_target,
                constraints=constraints,
                seed=seed,
                budget=budget,
                config=config,
            )
        else:
            request = ManipulationRequest(
                target_class=target,
                attributes=attr_list,
                constraints=constraints,
                seed=seed,
                budget=budget,
            )
            result = manipulate(doc.scene, nav, request, config)
    except InfeasibleRequest as exc:
        _fail(exc, 3)
    except VLCError as exc:
        _fail(exc, 2)

    new_doc = doc.replace_scene(result.scene, {**doc.path_lines, path_name: result.line})
    write_json(out_scene, new_doc.to_dict())
    result_payload = result.to_dict()
    result_payload["provenance"] = {
        "input_scene_hash": scene_hash(doc),
        "output_scene_hash": scene_hash(new_doc),
        "config_hash": config_hash(config),
        "path_name": path_name,
        "seed": seed,
    }
    write_json(out_result, result_payload)
    click.echo(
        f"{'converged' if result.converged else 'best effort'}: aggregate "
        f"{result.before_report.aggregate_mean:.3f} -> {result.after_report.aggregate_mean:.3f} "
        f"({result.evaluations} evaluations, {len(result.steps)} steps)"
    )
    click.echo(f"scene written to {out_scene}")
    click.echo(f"result written to {out_result}")
    if render_svg:
        from .render import render_overview, save_svg

        out_stem = Path(out_scene).with_suffix("")
        before_svg = f"{out_stem}-before.svg"
        after_svg = f"{out_stem}-after.svg"
        save_svg(render_overview(doc.scene, nav, result.before_report, "before"), before_svg)
        save_svg(render_overview(result.scene, result.nav_path, result.after_report, "after"), after_svg)
        click.echo(f"figures written to {before_svg}, {after_svg}")


@main.command("compare")
@click.argument("scene_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("scene_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--path", "path_name", default="main", show_default=True)
@_config_option
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Comparison JSON output (stdout if omitted).")
def cli_compare(scene_a, scene_b, path_name, config_path, out):
    """Side-by-side per-attribute classes and deltas for two scene versions."""
    try:
        config, doc_a, nav_a = _load_inputs(scene_a, path_name, config_path)
        _, doc_b, nav_b = _load_inputs(scene_b, path_name, config_path)
        rep_a = identify(doc_a.scene, nav_a, config)
        rep_b = identify(doc_b.scene, nav_b, config)
    except (ParseError, ValidationError, VLCError) as exc:
        _fail(exc, 2)
    payload = {
        "path_name": path_name,
        "a": {"file": str(scene_a), "scene_hash": scene_hash(doc_a)},
        "b": {"file": str(scene_b), "scene_hash": scene_hash(doc_b)},
        "attributes": {
            a.value: {
                "a": rep_a.attributes[a.value].cls,
                "b": rep_b.attributes[a.value].cls,
                "delta": rep_b.attributes[a.value].cls - rep_a.attributes[a.value].cls,
            }
            for a in ATTRIBUTES
        },
        "aggregate": {
            "a": rep_a.aggregate_mean,
            "b": rep_b.aggregate_mean,
            "delta": rep_b.aggregate_mean - rep_a.aggregate_mean,
            "overall_a": rep_a.overall_class,
            "overall_b": rep_b.overall_class,
        },
    }
    if out:
        write_json(out, payload)
        click.echo(f"comparison written to {out}")
    else:
        click.echo(json_dumps_pretty(payload), nl=False)


@main.group("config")
def cli_config():
    """Scale configuration helpers."""


@cli_config.command("init")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Config output path (stdout if omitted).")
def cli_config_init(out):
    """Emit the default scale configuration as JSON."""
    payload = ScaleConfig().to_dict()
    if out:
        write_json(out, payload)
        click.echo(f"config written to {out}")
    else:
        click.echo(json_dumps_pretty(payload), nl=False)


@main.command("serve")
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--cors-origin", default=None, help="Allowed CORS origin for the designer UI.")
@_config_option
@click.option("--snapshot-dir", type=click.Path(file_okay=False), default=None, help="Persist sessions here on shutdown.")
def cli_serve(port, host, cors_origin, config_path, snapshot_dir):
    """Run the interactive design HTTP service."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path)
    app = create_app(config=config, cors_origin=cors_origin, snapshot_dir=snapshot_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
