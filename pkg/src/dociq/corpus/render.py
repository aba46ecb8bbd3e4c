"""Procedural rendering of document-like pages with aligned layout masks.

Pages are white with dark text-line blocks, ruled table grids, and filled
figure rectangles, stacked top to bottom with seeded randomness.  The mask
labels every pixel with a layout class; geometry is shared between image
and mask so they stay aligned by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..seeding import make_rng

MIN_PAGE_SIDE = 64

# Layout classes shared by renderer, masks on disk, and the model's one-hot path.
CLASS_BACKGROUND = 0
CLASS_TEXT = 1
CLASS_TABLE = 2
CLASS_FIGURE = 3
N_LAYOUT_CLASSES = 4


@dataclass(frozen=True)
class SyntheticDocument:
    """A rendered page: RGB image, per-pixel layout classes, and the seed used."""

    image: np.ndarray  # (H, W, 3) uint8
    mask: np.ndarray   # (H, W) uint8, values in {0, 1, 2, 3}
    seed: int


def _text_block(image, mask, rng, y0, y1, x0, x1):
    """Rows of dark word-runs; block bounding box labelled as text."""
    h = y1 - y0
    line_h = max(2, h // 12)
    gap = max(1, line_h // 2)
    ink = int(rng.integers(10, 50))
    y = y0 + gap
    while y + line_h <= y1:
        x = x0
        last_line = y + line_h + gap + line_h > y1
        # leave a ragged right edge on the last line
        line_end = x1 if not last_line else x0 + int((x1 - x0) * rng.uniform(0.3, 0.9))
        while x < line_end - 2:
            word = int(rng.integers(3, max(4, (x1 - x0) // 4)))
            xe = min(x + word, line_end)
            image[y : y + line_h, x:xe] = ink + int(rng.integers(0, 25))
            x = xe + max(1, line_h // 2)
        y += line_h + gap
    mask[y0:y1, x0:x1] = CLASS_TEXT


def _table_block(image, mask, rng, y0, y1, x0, x1):
    """Ruled grid with light cell shading; bounding box labelled as table."""
    rows = int(rng.integers(2, 6))
    cols = int(rng.integers(2, 5))
    ink = int(rng.integers(20, 70))
    t = max(1, (y1 - y0) // 80)
    ys = np.linspace(y0, y1 - 1, rows + 1).astype(int)
    xs = np.linspace(x0, x1 - 1, cols + 1).astype(int)
    if rng.random() < 0.5:
        shade = int(rng.integers(215, 245))
        image[ys[0] : ys[1], x0:x1] = shade  # header band
    for y in ys:
        image[y : y + t, x0:x1] = ink
    for x in xs:
        image[y0:y1, x : x + t] = ink
    mask[y0:y1, x0:x1] = CLASS_TABLE


def _figure_block(image, mask, rng, y0, y1, x0, x1):
    """Filled panel with a diagonal luminance gradient and an inset shape."""
    base = rng.integers(60, 200, size=3)
    h, w = y1 - y0, x1 - x0
    gy = np.linspace(-0.5, 0.5, h)[:, None]
    gx = np.linspace(-0.5, 0.5, w)[None, :]
    grad = (gy + gx) * float(rng.uniform(30, 80))
    panel = np.clip(base[None, None, :] + grad[:, :, None], 0, 255)
    image[y0:y1, x0:x1] = panel.astype(np.uint8)
    # inset rectangle in a contrasting tone
    iy0 = y0 + h // 4
    ix0 = x0 + w // 4
    image[iy0 : iy0 + h // 3, ix0 : ix0 + w // 3] = (255 - base).astype(np.uint8)
    mask[y0:y1, x0:x1] = CLASS_FIGURE


def render_document(seed: int, size: tuple[int, int]) -> SyntheticDocument:
    """Render a page of ``size`` (height, width), deterministic in ``seed``.

    Raises ``InvalidArgumentError`` when either side is below 64 pixels.
    """
    height, width = int(size[0]), int(size[1])
    if height < MIN_PAGE_SIDE or width < MIN_PAGE_SIDE:
        raise InvalidArgumentError(
            f"page size {height}x{width} below minimum {MIN_PAGE_SIDE}"
        )
    rng = make_rng(seed, "render")
    image = np.full((height, width, 3), 255, dtype=np.uint8)
    mask = np.zeros((height, width), dtype=np.uint8)

    margin_y = max(2, height // 16)
    margin_x = max(2, width // 16)
    x0, x1 = margin_x, width - margin_x
    y = margin_y
    gap = max(2, height // 32)
    first = True
    while y < height - margin_y - MIN_PAGE_SIDE // 8:
        block_h = int(rng.integers(height // 8, height // 3))
        y1 = min(y + block_h, height - margin_y)
        if y1 - y < height // 10:
            break
        # always lead with text so every page has high-frequency content
        kind = "text" if first else rng.choice(
            ["text", "table", "figure"], p=[0.55, 0.25, 0.20]
        )
        first = False
        # occasional indented block for layout variety
        bx0 = x0 + (int(rng.integers(0, width // 8)) if rng.random() < 0.3 else 0)
        if kind == "text":
            _text_block(image, mask, rng, y, y1, bx0, x1)
        elif kind == "table":
            _table_block(image, mask, rng, y, y1, bx0, x1)
        else:
            _figure_block(image, mask, rng, y, y1, bx0, x1)
        y = y1 + gap
    return SyntheticDocument(image=image, mask=mask, seed=int(seed))
