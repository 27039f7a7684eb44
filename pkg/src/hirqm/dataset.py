"""MOS-annotated dataset manifests.

Two layouts are supported: a generic CSV with header
``reference,distorted,mos[,tag]`` (paths relative to the manifest), and the
TID2013 native ``mos.txt`` convention where each line is ``<mos>
<distorted-filename>`` and the distorted name ``iXX_YY_Z.bmp`` encodes its
reference image ``IXX.BMP`` and distortion type ``YY``.
"""

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestParseError, MissingFileError


@dataclass(frozen=True)
class MosRecord:
    reference_path: Path
    distorted_path: Path
    mos: float
    distortion_tag: str = None


_TID_NAME = re.compile(r"^[iI](\d+)_(\d+)_\d+\.\w+$")


def load_dataset(manifest_path, fmt: str = "csv"):
    """Parse a manifest into MosRecords and verify every path exists."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    if fmt == "csv":
        records = _load_csv(manifest_path)
    elif fmt == "tid2013":
        records = _load_tid2013(manifest_path)
    else:
        raise ValueError(f"unknown manifest format {fmt!r}")
    missing = sorted(
        {
            str(p)
            for rec in records
            for p in (rec.reference_path, rec.distorted_path)
            if not p.is_file()
        }
    )
    if missing:
        raise MissingFileError(
            "manifest references missing files: " + ", ".join(missing)
        )
    return records


def _load_csv(manifest_path: Path):
    root = manifest_path.parent
    records = []
    with open(manifest_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestParseError(f"{manifest_path}: empty manifest") from None
        header = [h.strip().lower() for h in header]
        if header[:3] != ["reference", "distorted", "mos"]:
            raise ManifestParseError(
                f"{manifest_path}: line 1: expected header "
                f"'reference,distorted,mos[,tag]', got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 3:
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: expected at least 3 fields"
                )
            try:
                mos = float(row[2])
            except ValueError:
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: non-numeric mos {row[2]!r}"
                ) from None
            if not math.isfinite(mos):
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: mos must be finite"
                )
            tag = row[3].strip() if len(row) > 3 and row[3].strip() else None
            records.append(
                MosRecord(
                    reference_path=root / row[0].strip(),
                    distorted_path=root / row[1].strip(),
                    mos=mos,
                    distortion_tag=tag,
                )
            )
    return records


def _find_existing(candidates):
    for cand in candidates:
        if cand.is_file():
            return cand
    # fall back to the first candidate so the missing-file check can name it
    return candidates[0]


def _load_tid2013(manifest_path: Path):
    root = manifest_path.parent
    records = []
    with open(manifest_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: expected '<mos> <filename>'"
                )
            try:
                mos = float(parts[0])
            except ValueError:
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: non-numeric mos {parts[0]!r}"
                ) from None
            name = parts[1]
            match = _TID_NAME.match(name)
            if not match:
                raise ManifestParseError(
                    f"{manifest_path}: line {lineno}: filename {name!r} does not "
                    "follow the iXX_YY_Z convention"
                )
            ref_id, tag = match.group(1), match.group(2)
            distorted = _find_existing(
                [root / "distorted_images" / name, root / name]
            )
            reference = _find_existing(
                [
                    root / "reference_images" / f"I{ref_id}.BMP",
                    root / "reference_images" / f"i{ref_id}.bmp",
                    root / f"I{ref_id}.BMP",
                    root / f"i{ref_id}.bmp",
                ]
            )
            records.append(
                MosRecord(
                    reference_path=reference,
                    distorted_path=distorted,
                    mos=mos,
                    distortion_tag=tag,
                )
            )
    return records
