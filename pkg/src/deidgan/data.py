"""Procedural toy-face dataset and the labelled image set it loads into.

Each identity owns a smooth random color field plus face geometry (ellipse,
eyes, skin tone); the expression index bends the mouth; a hair band carries
one of three colors.  Identity appearance therefore dominates within-person
variation, which the clustering stage relies on.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .netpbm import read_image, write_image


@dataclass
class ToyFaceSpec:
    identities: int = 12
    per_identity: int = 8
    size: int = 32
    expressions: int = 8
    hair_colors: int = 3
    seed: int = 0


@dataclass
class LabeledImage:
    pixels: np.ndarray  # (3,H,W) float32 in [-1,1]
    identity: int
    expression: int
    hair: int
    file: str = ""


@dataclass
class ImageSet:
    images: list[LabeledImage]
    identity_index: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.identity_index:
            for idx, img in enumerate(self.images):
                self.identity_index.setdefault(img.identity, []).append(idx)
        ids = sorted(self.identity_index)
        if ids != list(range(len(ids))):
            raise ContractViolation(
                f"identities must be contiguous integers from 0, got {ids}"
            )

    def __len__(self):
        return len(self.images)

    @property
    def n_identities(self) -> int:
        return len(self.identity_index)

    def attribute_cardinalities(self) -> tuple[int, int]:
        n_expr = max(img.expression for img in self.images) + 1
        n_hair = max(img.hair for img in self.images) + 1
        return n_expr, n_hair

    def pixel_batch(self, indices) -> np.ndarray:
        return np.stack([self.images[i].pixels for i in indices])


def _bilinear_upsample(grid: np.ndarray, size: int) -> np.ndarray:
    c, gh, gw = grid.shape
    ys = np.linspace(0.0, gh - 1.0, size)
    xs = np.linspace(0.0, gw - 1.0, size)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, gh - 1)
    x1 = np.minimum(x0 + 1, gw - 1)
    wy = (ys - y0)[None, :, None]
    wx = (xs - x0)[None, None, :]
    g00 = grid[:, y0][:, :, x0]
    g01 = grid[:, y0][:, :, x1]
    g10 = grid[:, y1][:, :, x0]
    g11 = grid[:, y1][:, :, x1]
    return (
        g00 * (1 - wy) * (1 - wx)
        + g01 * (1 - wy) * wx
        + g10 * wy * (1 - wx)
        + g11 * wy * wx
    )


_HAIR_COLORS = np.array(
    [
        [-0.85, -0.9, -0.9],  # near-black
        [0.75, 0.5, -0.35],  # blond
        [0.25, -0.45, -0.55],  # auburn
    ]
)


def _render_face(spec: ToyFaceSpec, identity: int, expression: int) -> np.ndarray:
    s = spec.size
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 7, identity]))

    img = _bilinear_upsample(rng.uniform(-0.45, 0.45, (3, 4, 4)), s)

    cy = s / 2.0 + rng.uniform(-1.5, 1.5)
    cx = s / 2.0 + rng.uniform(-1.5, 1.5)
    ry = s * rng.uniform(0.34, 0.44)
    rx = s * rng.uniform(0.26, 0.36)
    skin = rng.uniform(-0.1, 0.75, 3)

    yy, xx = np.mgrid[0:s, 0:s].astype(np.float64)
    ell = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2

    hair = _HAIR_COLORS[identity % spec.hair_colors]
    hair_mask = (ell <= 1.45) & (yy < cy - 0.45 * ry)
    img[:, hair_mask] = hair[:, None] + 0.08 * img[:, hair_mask]

    face_mask = ell <= 1.0
    img[:, face_mask] = skin[:, None] + 0.30 * img[:, face_mask]

    rim = (ell <= 1.0) & (ell >= 0.82)
    img[:, rim] -= 0.55

    for sx in (-1.0, 1.0):
        ey, ex = cy - 0.30 * ry, cx + sx * 0.42 * rx
        eye = ((yy - ey) ** 2 + (xx - ex) ** 2) <= (1.0 + identity % 2) ** 2 + 0.5
        img[:, eye] = -0.8

    curv = np.linspace(-0.9, 0.9, spec.expressions)[expression % spec.expressions]
    thickness = 1 + (expression % 2)
    half_w = 0.55 * rx
    for px in range(int(np.floor(cx - half_w)), int(np.ceil(cx + half_w)) + 1):
        if not 0 <= px < s:
            continue
        u = (px - cx) / max(half_w, 1e-9)
        py = cy + 0.42 * ry - curv * (u * u - 0.5) * 0.22 * ry
        top = int(round(py))
        for t in range(thickness):
            if 0 <= top + t < s:
                img[0, top + t, px] = -0.55
                img[1, top + t, px] = -0.8
                img[2, top + t, px] = -0.8

    return np.clip(img, -1.0, 1.0).astype(np.float32)


def generate_toy_faces(spec: ToyFaceSpec) -> list[LabeledImage]:
    if spec.identities < 2 or spec.per_identity < 2:
        raise ContractViolation(
            "toy dataset needs >= 2 identities and >= 2 images per identity, "
            f"got {spec.identities} x {spec.per_identity}"
        )
    images = []
    for i in range(spec.identities):
        for j in range(spec.per_identity):
            e = j % spec.expressions
            images.append(
                LabeledImage(
                    pixels=_render_face(spec, i, e),
                    identity=i,
                    expression=e,
                    hair=i % spec.hair_colors,
                    file=f"img_{i:03d}_{j:02d}.ppm",
                )
            )
    return images


def write_dataset(spec: ToyFaceSpec, out_dir: str) -> list[LabeledImage]:
    """Render the toy set and write PPM files plus labels.json."""
    os.makedirs(out_dir, exist_ok=True)
    images = generate_toy_faces(spec)
    entries = []
    for img in images:
        write_image(os.path.join(out_dir, img.file), img.pixels)
        entries.append(
            {
                "file": img.file,
                "identity": img.identity,
                "expression": img.expression,
                "hair": img.hair,
            }
        )
    with open(os.path.join(out_dir, "labels.json"), "w") as fh:
        json.dump(entries, fh, indent=1)
        fh.write("\n")
    return images


def load_image_set(data_dir: str) -> ImageSet:
    labels_path = os.path.join(data_dir, "labels.json")
    with open(labels_path) as fh:
        entries = json.load(fh)
    images = [
        LabeledImage(
            pixels=read_image(os.path.join(data_dir, e["file"])),
            identity=int(e["identity"]),
            expression=int(e["expression"]),
            hair=int(e["hair"]),
            file=e["file"],
        )
        for e in entries
    ]
    return ImageSet(images)


def split_holdout(image_set: ImageSet, n_hold: int, seed: int, per_identity_cap: int = 2):
    """Deterministically hold out n_hold images, at most per_identity_cap per
    identity, so every identity stays represented in the training split.

    Returns (training ImageSet, held-out images as a plain list); the
    held-out subset need not cover identities contiguously.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
    order = rng.permutation(len(image_set.images))
    held: list[int] = []
    per_id: dict[int, int] = {}
    for idx in order:
        ident = image_set.images[idx].identity
        if per_id.get(ident, 0) >= per_identity_cap:
            continue
        held.append(int(idx))
        per_id[ident] = per_id.get(ident, 0) + 1
        if len(held) == n_hold:
            break
    if len(held) < n_hold:
        raise ContractViolation(
            f"cannot hold out {n_hold} images with cap {per_identity_cap}"
        )
    held_set = set(held)
    train = [img for i, img in enumerate(image_set.images) if i not in held_set]
    hold = [image_set.images[i] for i in sorted(held)]
    return ImageSet(train), hold
