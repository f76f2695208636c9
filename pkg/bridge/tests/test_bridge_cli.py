import json

import numpy as np
import pytest
from click.testing import CliRunner

from gmi_bridge import EncoderConfig, load_vision
from gmi_bridge.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def write_prompts(path, lines):
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


class TestEncodeSpecCommand:
    def test_happy_path(self, runner, images, tmp_path):
        images.red_gradient()
        images.red_disc()
        images.noise(2, (1.0, 0.5, 0.5))
        (tmp_path / "notes.txt").write_text("ignored", encoding="utf-8")
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, ["one", "two", "three"])
        out = tmp_path / "spec.json"
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "cli-model", "--images",
            str(tmp_path), "--prompts", str(prompts), "--out", str(out),
            "--download-count", "3"])
        assert result.exit_code == 0, result.output
        assert result.output.strip() == str(out)
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["model_id"] == "cli-model"
        assert doc["download_count"] == 3
        assert len(doc["images"]) == 3  # the stray .txt was skipped

    def test_sorted_filename_alignment(self, runner, images, tmp_path):
        z = images.red_gradient("z.png")
        a = images.blue_checker("a.png")
        m = images.red_disc("m.png")
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, ["for a", "for m", "for z"])
        out = tmp_path / "spec.json"
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "sorted", "--images", str(tmp_path),
            "--prompts", str(prompts), "--out", str(out)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert [p["text"] for p in doc["prompts"]] == ["for a", "for m", "for z"]
        vision = load_vision(EncoderConfig())
        for row, path in zip(doc["images"], [a, m, z]):
            assert np.array_equal(np.asarray(row), vision.encode_path(path))

    def test_prompt_count_mismatch(self, runner, images, tmp_path):
        images.red_gradient()
        images.red_disc()
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, ["only one"])
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "x", "--images", str(tmp_path),
            "--prompts", str(prompts), "--out", str(tmp_path / "s.json")])
        assert result.exit_code == 4
        assert "error:" in result.stderr

    def test_empty_image_directory(self, runner, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, [])
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "x", "--images", str(empty),
            "--prompts", str(prompts), "--out", str(tmp_path / "s.json")])
        assert result.exit_code == 4
        assert "no image files" in result.stderr

    def test_unknown_vision_encoder(self, runner, images, tmp_path):
        images.red_gradient()
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, ["p"])
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "x", "--images", str(tmp_path),
            "--prompts", str(prompts), "--out", str(tmp_path / "s.json"),
            "--vision", "clip-vit-l"])
        assert result.exit_code == 4
        assert "unknown vision model" in result.stderr

    def test_bad_batch_size(self, runner, images, tmp_path):
        images.red_gradient()
        prompts = tmp_path / "prompts.txt"
        write_prompts(prompts, ["p"])
        result = runner.invoke(main, [
            "encode-spec", "--model-id", "x", "--images", str(tmp_path),
            "--prompts", str(prompts), "--out", str(tmp_path / "s.json"),
            "--batch-size", "0"])
        assert result.exit_code == 4

    def test_missing_required_option(self, runner, tmp_path):
        result = runner.invoke(main, ["encode-spec", "--images", str(tmp_path)])
        assert result.exit_code == 2


class TestEncodeReqCommand:
    def test_pseudo(self, runner, images, tmp_path):
        query = images.red_gradient()
        out = tmp_path / "req.json"
        result = runner.invoke(main, [
            "encode-req", "--image", str(query), "--out", str(out)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["prompt_provenance"] == "pseudo"
        assert doc["prompt_text"].strip()

    def test_user_prompt(self, runner, images, tmp_path):
        out = tmp_path / "req.json"
        result = runner.invoke(main, [
            "encode-req", "--image", str(images.blue_checker()),
            "--out", str(out), "--prompt", "a blue checkerboard"])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["prompt_provenance"] == "user"
        assert doc["prompt_text"] == "a blue checkerboard"

    def test_missing_image(self, runner, tmp_path):
        result = runner.invoke(main, [
            "encode-req", "--image", str(tmp_path / "nope.png"),
            "--out", str(tmp_path / "req.json")])
        assert result.exit_code == 2

    def test_corrupt_image(self, runner, images, tmp_path):
        result = runner.invoke(main, [
            "encode-req", "--image", str(images.corrupt()),
            "--out", str(tmp_path / "req.json")])
        assert result.exit_code == 4
        assert "cannot read image" in result.stderr


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "gmi-bridge" in result.output


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    assert "encode-spec" in result.output
    assert "encode-req" in result.output
