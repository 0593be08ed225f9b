"""Writes small raster files whose dimensions the header decoder must report.

Pillow is the reference encoder; expected sizes go to expected.json.
"""
import json
import pathlib

from PIL import Image

OUT = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "images"

CASES = [
    ("photo.jpg", "JPEG", (640, 480), {"quality": 60}),
    ("progressive.jpg", "JPEG", (33, 17), {"progressive": True}),
    ("icon.png", "PNG", (37, 23), {}),
    ("anim.gif", "GIF", (19, 41), {}),
    ("lossy.webp", "WEBP", (45, 31), {"lossless": False}),
    ("lossless.webp", "WEBP", (29, 13), {"lossless": True}),
    ("bitmap.bmp", "BMP", (11, 7), {}),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    expected = {}
    for name, fmt, size, opts in CASES:
        img = Image.new("RGB", size)
        px = img.load()
        for x in range(size[0]):
            for y in range(size[1]):
                px[x, y] = (x * 255 // size[0], y * 255 // size[1], 128)
        img.save(OUT / name, fmt, **opts)
        expected[name] = {"width": size[0], "height": size[1], "format": fmt.lower()}
    (OUT / "not_an_image.html").write_text("<html><body>404</body></html>\n")
    (OUT / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
