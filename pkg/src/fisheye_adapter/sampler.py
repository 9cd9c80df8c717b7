"""Grid sampling of pixel/bearing correspondences through the input model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import TooFewValidSamples
from .models import CameraModel, ImageSize, unproject_many

MIN_SAMPLES = 8
DEFAULT_N = 500


@dataclass(frozen=True)
class Correspondence:
    u: np.ndarray
    bearing: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Accepted correspondences stored column-wise for vectorized use."""

    pixels: np.ndarray  # (N, 2)
    bearings: np.ndarray  # (N, 3), unit norm
    image_size: ImageSize
    requested_n: int

    @property
    def accepted_n(self) -> int:
        return int(self.pixels.shape[0])

    def __len__(self) -> int:
        return self.accepted_n

    def __iter__(self) -> Iterator[Correspondence]:
        for u, b in zip(self.pixels, self.bearings):
            yield Correspondence(u, b)

    def subset(self, mask) -> "SampleSet":
        mask = np.asarray(mask)
        return SampleSet(self.pixels[mask], self.bearings[mask], self.image_size, self.requested_n)


def grid_shape(n: int, width: int, height: int) -> tuple[int, int]:
    gx = math.ceil(math.sqrt(n * width / height))
    gy = math.ceil(n / gx)
    return gx, gy


def grid_pixels(n: int, width: int, height: int) -> np.ndarray:
    """Centres of an aspect-aware grid of at least ``n`` cells, thinned to exactly ``n``.

    When the grid has more than ``n`` cells, ``n`` of them are kept at evenly
    spaced row-major indices so coverage stays uniform.
    """
    gx, gy = grid_shape(n, width, height)
    xs = (np.arange(gx) + 0.5) * width / gx
    ys = (np.arange(gy) + 0.5) * height / gy
    grid = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    if grid.shape[0] > n:
        keep = np.round(np.linspace(0, grid.shape[0] - 1, n)).astype(int)
        grid = grid[keep]
    return grid


def sample_grid(input_model: CameraModel, n: int = DEFAULT_N) -> SampleSet:
    """Unproject ``n`` grid-cell centres through ``input_model``.

    Pixels outside the model's unprojection domain are dropped.

    Raises:
        TooFewValidSamples: if fewer than 8 correspondences survive.
    """
    if n < MIN_SAMPLES:
        raise ValueError(f"n must be >= {MIN_SAMPLES}")
    size = input_model.image_size
    pixels = grid_pixels(n, size.width, size.height)
    bearings, ok = unproject_many(input_model, pixels)
    if np.count_nonzero(ok) < MIN_SAMPLES:
        raise TooFewValidSamples(
            f"only {np.count_nonzero(ok)} of {n} samples lie in the input model's domain"
        )
    return SampleSet(pixels[ok], bearings[ok], size, n)
