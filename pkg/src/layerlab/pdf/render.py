"""Page rendering from the words layer.

There is no rasterizer dependency; pages are redrawn by placing each word's
text inside its box on a white canvas. Geometry is exact (that is what the
crop endpoints rely on); glyph appearance is an approximation.
"""

from __future__ import annotations

from functools import lru_cache
from io import BytesIO

from PIL import Image, ImageDraw, ImageFont

from layerlab.docmodel import Box, Document

_FONT_PATH = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"


@lru_cache(maxsize=64)
def _font(size_px: int) -> ImageFont.FreeTypeFont | ImageFont.ImageFont:
    size_px = max(size_px, 4)
    try:
        return ImageFont.truetype(_FONT_PATH, size_px)
    except OSError:
        return ImageFont.load_default(size_px)


def page_pixel_size(doc: Document, page_index: int, dpi: int) -> tuple[int, int]:
    page = doc.pages[page_index]
    return (
        max(1, round(page.width_pts * dpi / 72.0)),
        max(1, round(page.height_pts * dpi / 72.0)),
    )


class PageRenderer:
    """Renders document pages and entity crops as PIL images."""

    def __init__(self, doc: Document):
        self.doc = doc

    def render_page(self, page_index: int, dpi: int = 150) -> Image.Image:
        if not (0 <= page_index < len(self.doc.pages)):
            raise IndexError(f"page {page_index} out of range")
        width, height = page_pixel_size(self.doc, page_index, dpi)
        image = Image.new("RGB", (width, height), "white")
        draw = ImageDraw.Draw(image)
        if self.doc.has_layer("words"):
            for word in self.doc.layers["words"].entities:
                box = word.boxes[0]
                if box.page != page_index:
                    continue
                x = box.x * width
                y = box.y * height
                h = box.h * height
                draw.text((x, y), self.doc.text_of(word), fill="black", font=_font(round(h)))
        return image

    def crop(self, box: Box, dpi: int = 150, pad: float = 0.0) -> Image.Image:
        """Crop of a page region, padded by `pad` normalized units, clamped."""
        page_img = self.render_page(box.page, dpi)
        width, height = page_img.size
        x0 = max(0.0, box.x - pad)
        y0 = max(0.0, box.y - pad)
        x1 = min(1.0, box.x + box.w + pad)
        y1 = min(1.0, box.y + box.h + pad)
        px0, py0 = round(x0 * width), round(y0 * height)
        px1, py1 = round(x1 * width), round(y1 * height)
        px1 = max(px1, px0 + 1)
        py1 = max(py1, py0 + 1)
        return page_img.crop((px0, py0, px1, py1))


def to_png_bytes(image: Image.Image) -> bytes:
    buf = BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()
