"""Point cloud files (CSV, ASCII PLY), corner CSVs and PGM images."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import EmptyCloudError, FormatError, IoError, ParseError
from .geom import PointCloud


def _fmt(x: float) -> str:
    # repr() is the shortest string that round-trips the double exactly.
    return repr(float(x))


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_csv_cloud(path) -> PointCloud:
    """Comma-separated rows of equal length; one optional header row.

    Blank lines and lines starting with ``#`` are skipped. A non-numeric first
    row is taken as a header; a trailing ``support`` column (as written by
    :func:`write_corners`) is dropped.
    """
    rows: list[list[float]] = []
    width = None
    drop_last = False
    reader = csv.reader(_read_text(path).splitlines())
    for lineno, fields in enumerate(reader, 1):
        fields = [f.strip() for f in fields]
        if not any(fields) or fields[0].startswith("#"):
            continue
        if width is None and not all(_is_number(f) for f in fields):
            width = len(fields)
            drop_last = fields[-1] == "support"
            continue
        if width is None:
            width = len(fields)
        if len(fields) != width:
            raise ParseError(f"expected {width} columns, found {len(fields)}", lineno)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"non-numeric value in {fields!r}", lineno) from None
        rows.append(values[:-1] if drop_last else values)
    if not rows:
        raise EmptyCloudError(f"{path} holds no points")
    try:
        return PointCloud(rows)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def read_ply_cloud(path) -> PointCloud:
    """Vertex x, y, z of an ASCII PLY file."""
    lines = _read_text(path).splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", 1)
    n_vertex = None
    props: list[str] = []
    in_vertex = False
    header_end = None
    for lineno, line in enumerate(lines[1:], 2):
        words = line.split()
        if not words or words[0] == "comment" or words[0] == "obj_info":
            continue
        if words[0] == "format":
            if len(words) < 2 or words[1] != "ascii":
                raise FormatError("only ASCII PLY is supported")
        elif words[0] == "element":
            in_vertex = words[1] == "vertex"
            if in_vertex:
                try:
                    n_vertex = int(words[2])
                except (IndexError, ValueError):
                    raise ParseError("bad vertex element line", lineno) from None
        elif words[0] == "property":
            if in_vertex:
                props.append(words[-1])
        elif words[0] == "end_header":
            header_end = lineno
            break
    if header_end is None or n_vertex is None:
        raise ParseError("incomplete PLY header")
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise ParseError("vertex element lacks x, y or z") from None
    body = lines[header_end:]
    if len(body) < n_vertex:
        raise ParseError(f"header promises {n_vertex} vertices, body has {len(body)} lines")
    rows = []
    for k in range(n_vertex):
        lineno = header_end + 1 + k
        words = body[k].split()
        if len(words) != len(props):
            raise ParseError(f"expected {len(props)} values, found {len(words)}", lineno)
        try:
            rows.append([float(words[c]) for c in cols])
        except ValueError:
            raise ParseError("non-numeric vertex value", lineno) from None
    if not rows:
        raise EmptyCloudError(f"{path} holds no vertices")
    return PointCloud(rows)


def read_cloud(path, format: str | None = None) -> PointCloud:
    """Read a cloud; the format defaults to the file extension (``csv``/``ply``)."""
    fmt = (format or Path(path).suffix.lstrip(".") or "csv").lower()
    if not Path(path).is_file():
        raise IoError(f"no such file: {path}")
    if fmt == "csv":
        return read_csv_cloud(path)
    if fmt in ("ply", "ply_ascii"):
        return read_ply_cloud(path)
    raise FormatError(f"unsupported cloud format {fmt!r}")


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def cloud_to_csv(cloud: PointCloud) -> str:
    return "".join(",".join(_fmt(x) for x in p) + "\n" for p in cloud.points)


def write_cloud(cloud: PointCloud, path) -> None:
    _write_text(path, cloud_to_csv(cloud))


def write_ply(cloud: PointCloud, path) -> None:
    if cloud.dim != 3:
        raise FormatError("PLY output needs a 3D cloud")
    header = f"ply\nformat ascii 1.0\nelement vertex {cloud.n}\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
    _write_text(path, header + "".join(" ".join(_fmt(x) for x in p) + "\n" for p in cloud.points))


def corners_to_csv(corner_set, dim: int | None = None) -> str:
    """Header ``axis0,...,axis{D-1},support`` then rows sorted by centroid."""
    dim = corner_set.dim if dim is None else dim
    lines = [",".join([f"axis{k}" for k in range(dim)] + ["support"])]
    for c in sorted(corner_set.corners, key=lambda c: tuple(c.centroid)):
        lines.append(",".join([_fmt(x) for x in c.centroid] + [str(c.support)]))
    return "\n".join(lines) + "\n"


def write_corners(corner_set, path) -> None:
    _write_text(path, corners_to_csv(corner_set))


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Decode a P2 (ASCII) or P5 (binary) PGM into ``(rows x cols array, maxval)``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path} is not a PGM (magic {magic!r})")
    # Header: magic, width, height, maxval, separated by whitespace and comments.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if width < 0 or height < 0 or not 0 < maxval < 65536:
        raise FormatError("bad PGM dimensions")
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        count = width * height
        need = count * np.dtype(dtype).itemsize
        if len(data) - pos < need:
            raise FormatError("truncated PGM raster")
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        img = raw.reshape(height, width)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise FormatError("truncated PGM raster")
        img = np.array([int(v) for v in values[: width * height]], dtype=np.int64).reshape(height, width)
    return img.astype(np.int64), maxval


def write_pgm(image: np.ndarray, path, binary: bool = True) -> None:
    img = np.asarray(image)
    if img.ndim != 2:
        raise FormatError("PGM images are 2-d")
    h, w = img.shape
    if binary:
        payload = f"P5\n{w} {h}\n255\n".encode() + img.astype(np.uint8).tobytes()
    else:
        body = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
        payload = f"P2\n{w} {h}\n255\n{body}\n".encode()
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def image_to_cloud(path, threshold: int = 128) -> PointCloud:
    """Pixels at or above ``threshold`` as ``(column, row)`` points, y pointing up.

    ``threshold`` is on a 0-255 scale and is rescaled for other PGM maxvals.
    The result may be empty.
    """
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be within 0..255")
    img, maxval = read_pgm(path)
    level = threshold if maxval == 255 else threshold * maxval / 255.0
    rows, cols = np.nonzero(img >= level)
    height = img.shape[0]
    pts = np.column_stack([cols, height - 1 - rows]).astype(float)
    return PointCloud(pts, dim=2) if len(pts) else PointCloud(np.empty((0, 2)), dim=2)
