from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
from click.testing import CliRunner

from vlcomplexity import ParseError, ValidationError
from vlcomplexity.cli import main
from vlcomplexity.io import (
    canonical_json,
    load_scene,
    parse_scene_document,
    scene_hash,
)

FIXTURES = Path(__file__).parent.parent / "fixtures"


def minimal_doc() -> dict:
    return {
        "format_version": "1",
        "units": "meters",
        "bounds": {"xmin": -1, "ymin": -3, "xmax": 11, "ymax": 3},
        "walls": [],
        "obstacles": [],
        "corridors": [
            {"id": "c0", "axis": [[0, 0], [10, 0]], "width": 3.0, "height": 3.0}
        ],
        "paths": {"main": {"vertices": [[0, 0], [10, 0]]}},
    }


class TestSceneDocuments:
    def test_minimal_document_loads(self):
        doc = parse_scene_document(minimal_doc())
        assert doc.path_names() == ["main"]
        nav = doc.nav_path("main", 15.0)
        assert len(nav.segments) == 1

    def test_missing_units_pointer(self):
        raw = minimal_doc()
        del raw["units"]
        with pytest.raises(ParseError) as err:
            parse_scene_document(raw)
        assert err.value.pointer == "/units"

    def test_bad_number_pointer(self):
        raw = minimal_doc()
        raw["corridors"][0]["width"] = "wide"
        with pytest.raises(ParseError) as err:
            parse_scene_document(raw)
        assert err.value.pointer == "/corridors/0/width"

    def test_self_intersecting_wall_names_the_wall(self):
        raw = minimal_doc()
        raw["walls"] = [{"ring": [[0, 0], [2, 2], [2, 0], [0, 2]]}]
        with pytest.raises(ValidationError) as err:
            parse_scene_document(raw)
        assert "wall 0" in str(err.value)

    def test_unknown_corridor_reference(self):
        raw = minimal_doc()
        raw["paths"]["main"]["corridor_ids"] = ["nope"]
        with pytest.raises(ValidationError):
            parse_scene_document(raw)

    def test_invalid_json_bytes(self):
        with pytest.raises(ParseError):
            load_scene(b"{not json")

    def test_round_trip_identity(self, old_doc):
        again = parse_scene_document(old_doc.to_dict())
        assert again.scene == old_doc.scene
        assert again.path_lines == old_doc.path_lines
        assert canonical_json(again.to_dict()) == canonical_json(old_doc.to_dict())

    def test_fixture_files_load(self):
        for f in sorted(FIXTURES.glob("*.json")):
            doc = load_scene(f.read_bytes())
            assert doc.path_names() == ["main"]

    def test_scene_hash_sensitive_to_coordinates(self, empty_doc):
        h0 = scene_hash(empty_doc)
        raw = empty_doc.to_dict()
        raw["corridors"][0]["axis"][1][0] += 1e-9
        moved = parse_scene_document(raw)
        assert scene_hash(moved) != h0


class TestCliIdentify:
    def test_report_written_with_class_one(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        out = tmp_path / "report.json"
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["identify", str(FIXTURES / "empty-corridor.json"), "--path", "main", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["report"]["overall_class"] == 1
        assert payload["provenance"]["timestamp"] == "2023-11-14T22:13:20Z"

    def test_svg_structure_one_band_per_attribute(self, tmp_path):
        svg = tmp_path / "profile.svg"
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["identify", str(FIXTURES / "old-wing-analog.json"), "--svg", str(svg)],
        )
        assert result.exit_code == 0, result.output
        root = ET.parse(svg).getroot()
        ids = {el.get("id") for el in root.iter() if el.get("id")}
        for attr in ("rotation", "size", "visibility", "symmetry", "clutter", "order", "aggregate"):
            assert any(i.startswith(f"band-{attr}-seg-") for i in ids), attr

    def test_unknown_path_exits_two(self):
        runner = CliRunner()
        result = runner.invoke(
            main, ["identify", str(FIXTURES / "empty-corridor.json"), "--path", "nope"]
        )
        assert result.exit_code == 2
        assert "path not found" in result.output

    def test_parse_error_exits_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format_version": "1"}')
        runner = CliRunner()
        result = runner.invoke(main, ["identify", str(bad)])
        assert result.exit_code == 2
        assert "/units" in result.output

    def test_csv_table(self, tmp_path):
        csv_path = tmp_path / "segs.csv"
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["identify", str(FIXTURES / "zigzag.json"), "--csv", str(csv_path)],
        )
        assert result.exit_code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 1 + 4  # header + four segments
        assert lines[0].startswith("segment,chainage_start,chainage_end,rotation")


class TestCliManipulate:
    def run_once(self, tmp_path, tag, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        out_scene = tmp_path / f"{tag}-scene.json"
        out_result = tmp_path / f"{tag}-result.json"
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "manipulate",
                str(FIXTURES / "l-corridor.json"),
                "--target", "3",
                "--seed", "42",
                "--budget", "400",
                "--out-scene", str(out_scene),
                "--out-result", str(out_result),
            ],
        )
        assert result.exit_code == 0, result.output
        return out_scene.read_bytes(), out_result.read_bytes()

    def test_seeded_runs_byte_identical(self, tmp_path, monkeypatch):
        s1, r1 = self.run_once(tmp_path, "run1", monkeypatch)
        s2, r2 = self.run_once(tmp_path, "run2", monkeypatch)
        assert s1 == s2
        assert r1 == r2

    def test_change_log_replays_to_output_scene(self, tmp_path, monkeypatch):
        from vlcomplexity.io import load_scene_file
        from vlcomplexity.manipulate import ChangeStep, replay_changes

        s_bytes, r_bytes = self.run_once(tmp_path, "replay", monkeypatch)
        result_payload = json.loads(r_bytes)
        steps = [ChangeStep.from_dict(s) for s in result_payload["change_log"]]
        original = load_scene_file(FIXTURES / "l-corridor.json")
        scene2, line2 = replay_changes(original.scene, original.path_lines["main"], steps)
        rebuilt = original.replace_scene(scene2, {"main": line2})
        assert canonical_json(rebuilt.to_dict()) == canonical_json(json.loads(s_bytes))

    def test_infeasible_exits_three(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "manipulate",
                str(FIXTURES / "empty-corridor.json"),
                "--segment", "0",
                "--attributes", "clutter",
                "--target", "5",
                "--overall-target", "1",
                "--out-scene", str(tmp_path / "s.json"),
                "--out-result", str(tmp_path / "r.json"),
            ],
        )
        assert result.exit_code == 3

    def test_svg_pair_written(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        scene_copy = tmp_path / "scene.json"
        scene_copy.write_bytes((FIXTURES / "l-corridor.json").read_bytes())
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "manipulate", str(scene_copy),
                "--target", "2", "--seed", "1", "--budget", "200", "--svg",
            ],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "scene-modified-before.svg").exists()
        assert (tmp_path / "scene-modified-after.svg").exists()


class TestCliCompare:
    def test_same_scene_zero_deltas(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "cmp.json"
        result = runner.invoke(
            main,
            [
                "compare",
                str(FIXTURES / "zigzag.json"),
                str(FIXTURES / "zigzag.json"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert all(v["delta"] == 0 for v in payload["attributes"].values())
        assert payload["aggregate"]["delta"] == 0

    def test_added_obstacles_raise_clutter(self, tmp_path):
        base = json.loads((FIXTURES / "empty-corridor.json").read_text())
        more = json.loads(json.dumps(base))
        more["obstacles"] = [
            {"footprint": [[4, -0.9], [6, -0.9], [6, 0.9], [4, 0.9]], "height": 1.0, "tag": "crate", "movable": True}
        ]
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        a.write_text(json.dumps(base))
        b.write_text(json.dumps(more))
        runner = CliRunner()
        out = tmp_path / "cmp.json"
        result = runner.invoke(main, ["compare", str(a), str(b), "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["attributes"]["clutter"]["delta"] >= 0

    def test_old_vs_new_overall(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "cmp.json"
        result = runner.invoke(
            main,
            [
                "compare",
                str(FIXTURES / "old-wing-analog.json"),
                str(FIXTURES / "new-wing-analog.json"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["aggregate"]["overall_a"] == 4
        assert payload["aggregate"]["overall_b"] == 2


class TestCliConfig:
    def test_config_init_defaults(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "config.json"
        result = runner.invoke(main, ["config", "init", "--out", str(out)])
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["bin_edges"] == [0.2, 0.4, 0.6, 0.8]
        assert data["rotation_degrees_cap"] == 360.0

    def test_config_roundtrips_through_identify(self, tmp_path):
        runner = CliRunner()
        cfg_path = tmp_path / "config.json"
        runner.invoke(main, ["config", "init", "--out", str(cfg_path)])
        result = runner.invoke(
            main,
            ["identify", str(FIXTURES / "empty-corridor.json"), "--config", str(cfg_path)],
        )
        assert result.exit_code == 0


class TestSvgDeterminism:
    def test_profile_bytes_reproducible(self, tmp_path, old_doc, config):
        from vlcomplexity import identify
        from vlcomplexity.render import render_profile, save_svg

        nav = old_doc.nav_path("main", config.turn_threshold_deg)
        report = identify(old_doc.scene, nav, config)
        p1 = tmp_path / "a.svg"
        p2 = tmp_path / "b.svg"
        save_svg(render_profile(report), p1)
        save_svg(render_profile(report), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCliValidation:
    def test_unknown_attribute_exits_two(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "manipulate", str(FIXTURES / "empty-corridor.json"),
                "--attributes", "luminance",
                "--out-scene", str(tmp_path / "s.json"),
                "--out-result", str(tmp_path / "r.json"),
            ],
        )
        assert result.exit_code == 2
        assert "attribute" in result.output


class TestEncodingAndConfig:
    def test_non_utf8_bytes_rejected(self):
        with pytest.raises(ParseError):
            load_scene(b"\xff\xfe{}")

    def test_custom_bin_edges_flow_through_identify(self, tmp_path, l_doc):
        # Widening the bottom bin swallows the L-corridor's visibility score.
        from vlcomplexity import ScaleConfig, identify

        cfg = ScaleConfig(bin_edges=(0.55, 0.7, 0.8, 0.9))
        nav = l_doc.nav_path("main", cfg.turn_threshold_deg)
        report = identify(l_doc.scene, nav, cfg)
        assert report.attributes["visibility"].cls == 1
