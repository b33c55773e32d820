#!/usr/bin/env python3
"""Generate a synthetic dataset for offline pipeline experiments.

Writes a media tree (PPM frames + WAV audio per video), an annotation file,
and a mock fixture file to the output directory. The fixture replies are
consistent with the generated media, so `emodeid run-pipeline` with
`--mock-fixtures` reproduces each video's true label deterministically.
"""

import click

from emodeid.pipeline import SamplingConfig
from emodeid.synthetic import make_mock_dataset


@click.command()
@click.argument("output_dir", type=click.Path(file_okay=False))
@click.option("--videos", default=6, show_default=True, help="Number of synthetic videos.")
@click.option("--frames", default=6, show_default=True, help="Frames per video.")
@click.option("--frame-count", default=4, show_default=True,
              help="Frames sampled per request when precomputing fixtures.")
@click.option("--seed", default=0, show_default=True)
def main(output_dir, videos, frames, frame_count, seed):
    records, media, fixtures, ann_path, fix_path = make_mock_dataset(
        output_dir,
        n_videos=videos,
        frames_per_video=frames,
        sampling=SamplingConfig(frame_count=frame_count),
        seed=seed,
    )
    click.echo(f"media tree:   {media.root}")
    click.echo(f"annotations:  {ann_path} ({len(records)} videos)")
    click.echo(
        f"fixtures:     {fix_path} "
        f"({len(fixtures['mllm'])} mllm, {len(fixtures['judge'])} judge replies)"
    )
    click.echo(
        "next: emodeid run-pipeline "
        f"{ann_path} {media.root} <out> --mode all "
        f"--mock-fixtures {fix_path} --frame-count {frame_count}"
    )


if __name__ == "__main__":
    main()
