"""Render every corruption kind on one synthetic frame.

Produces two contact sheets under demos/output/:
  gallery.png        -- all 18 kinds at severity 3, labeled by grid position
  severity_ladder.png -- four representative kinds across severities 1..5

Run:  python demos/01_corruption_gallery.py
"""

from pathlib import Path

import numpy as np

from corrbench import fileio
from corrbench.corruptions import ALL_KINDS, CorruptionKind, CorruptionSpec, apply_corruption
from corrbench.imagecore import ImageBuffer, derive_seed
from corrbench.synthetic import synthetic_frame

OUT = Path(__file__).parent / "output"


def contact_sheet(tiles, cols, pad=4):
    h, w, _ = tiles[0].shape
    rows = (len(tiles) + cols - 1) // cols
    sheet = np.ones((rows * (h + pad) + pad, cols * (w + pad) + pad, 3))
    for idx, tile in enumerate(tiles):
        r, c = divmod(idx, cols)
        y, x = pad + r * (h + pad), pad + c * (w + pad)
        sheet[y:y + h, x:x + w] = tile
    return ImageBuffer(np.clip(sheet, 0.0, 1.0))


def main():
    OUT.mkdir(exist_ok=True)
    frame = synthetic_frame(3, 200, 120)

    tiles = [frame.data]
    print("rendering 18 corruption kinds at severity 3 ...")
    for kind in ALL_KINDS:
        spec = CorruptionSpec(kind, 3, derive_seed(42, "gallery.png", kind, 3))
        tiles.append(apply_corruption(frame, spec).data)
        print(f"  {kind.name}")
    fileio.save_image(OUT / "gallery.png", contact_sheet(tiles, cols=5))
    print(f"wrote {OUT / 'gallery.png'} (clean frame first, then the 18 kinds)")

    ladder_kinds = [CorruptionKind.fog, CorruptionKind.snow,
                    CorruptionKind.motion_blur, CorruptionKind.gaussian_noise]
    tiles = []
    for kind in ladder_kinds:
        for severity in range(1, 6):
            spec = CorruptionSpec(kind, severity,
                                  derive_seed(42, "ladder.png", kind, severity))
            tiles.append(apply_corruption(frame, spec).data)
    fileio.save_image(OUT / "severity_ladder.png", contact_sheet(tiles, cols=5))
    print(f"wrote {OUT / 'severity_ladder.png'} "
          f"(rows: {', '.join(k.name for k in ladder_kinds)}; columns: severity 1..5)")


if __name__ == "__main__":
    main()
