"""gmi-bridge command line: encode-spec, encode-req.

Exit codes: 0 success, 2 usage error (click's own), 4 anything the
bridge rejects (unreadable image, unknown encoder, length mismatch,
document validation).
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from gmi_bridge import __version__
from gmi_bridge.encoders import EncoderConfig
from gmi_bridge.errors import BridgeError
from gmi_bridge.pipeline import encode_requirement, encode_spec

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp", ".tiff")


def _guarded(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except BridgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
    return wrapper


def _encoder_options(f):
    f = click.option("--batch-size", default=8, show_default=True, type=int)(f)
    f = click.option("--interrogator", default="tiny-interrogator-v1",
                     show_default=True, help="Interrogator name.")(f)
    f = click.option("--text", "text_model", default="tiny-hash-v1",
                     show_default=True, help="Text encoder name.")(f)
    f = click.option("--vision", default="tiny-patch-v1", show_default=True,
                     help="Vision encoder name.")(f)
    return f


def _config(vision, text_model, interrogator, batch_size) -> EncoderConfig:
    return EncoderConfig(vision_model_name=vision, text_model_name=text_model,
                         interrogator_name=interrogator, batch_size=batch_size)


@click.group()
@click.version_option(version=__version__, prog_name="gmi-bridge")
def main():
    """Encode images and prompts into gmi spec/requirement documents."""


@main.command("encode-spec")
@click.option("--model-id", required=True)
@click.option("--images", "images_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory of images; filenames sorted lexicographically.")
@click.option("--prompts", "prompts_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="One prompt per line, aligned with the sorted filenames.")
@click.option("--out", required=True,
              type=click.Path(dir_okay=False, path_type=Path))
@click.option("--download-count", default=0, show_default=True, type=int)
@_encoder_options
@_guarded
def encode_spec_cmd(model_id: str, images_dir: Path, prompts_file: Path,
                    out: Path, download_count: int, vision: str,
                    text_model: str, interrogator: str, batch_size: int):
    """Encode a directory of images plus a prompt list into a spec file."""
    paths = sorted(
        (p for p in images_dir.iterdir()
         if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name)
    if not paths:
        raise BridgeError(f"no image files in {str(images_dir)!r}")
    prompts = prompts_file.read_text(encoding="utf-8").splitlines()
    written = encode_spec(
        model_id, paths, prompts, out, download_count=download_count,
        config=_config(vision, text_model, interrogator, batch_size))
    click.echo(str(written))


@main.command("encode-req")
@click.option("--image", "image_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--prompt", "prompt_text", default=None,
              help="User prompt; omit to caption via the interrogator.")
@click.option("--out", required=True,
              type=click.Path(dir_okay=False, path_type=Path))
@_encoder_options
@_guarded
def encode_req_cmd(image_file: Path, prompt_text: str | None, out: Path,
                   vision: str, text_model: str, interrogator: str,
                   batch_size: int):
    """Encode one image (and optionally a prompt) into a requirement file."""
    written = encode_requirement(
        image_file, out, prompt_text=prompt_text,
        config=_config(vision, text_model, interrogator, batch_size))
    click.echo(str(written))


if __name__ == "__main__":
    main()
