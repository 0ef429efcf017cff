"""Parse pose-estimator keypoint files into validated sequences.

One JSON document per frame, schema::

    {"people": [{"pose_keypoints_2d": [x0, y0, c0, ..., x24, y24, c24]}]}

Coordinates are pixels with the origin at the top-left of the frame;
confidence is in [0, 1], with 0 meaning the part was not detected in
that frame. All operations here are pure; clips can be processed in
parallel by the caller.
"""

from __future__ import annotations

import csv
import json
import re
import warnings
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bodyparts import NUM_BODY_PARTS, part_name
from .errors import (
    EmptyClipError,
    GapTooLargeError,
    InvalidParamsError,
    MalformedDocumentError,
    MultiplePeopleWarning,
    NoPersonDetectedError,
)
from .series import MultivariateSeries

_VALUES_PER_FRAME = NUM_BODY_PARTS * 3
_FRAME_INDEX_RE = re.compile(r"(\d+)\D*$")

AXES = ("x", "y")


@dataclass(frozen=True)
class ChannelSpec:
    """Which body parts and coordinate axes become series channels.

    Channel order is parts-major, then axes, so the layout is a pure
    function of the fields: ``part0_x, part0_y, part1_x, ...`` for
    ``axes=("x", "y")``.
    """

    parts: tuple[int, ...]
    axes: tuple[str, ...] = AXES

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        axes = tuple(self.axes)
        if len(parts) == 0:
            raise InvalidParamsError("channel spec needs at least one part")
        if len(set(parts)) != len(parts):
            raise InvalidParamsError("duplicate body parts in channel spec")
        for p in parts:
            if not 0 <= p < NUM_BODY_PARTS:
                raise InvalidParamsError(f"body part index out of range: {p}")
        if len(axes) == 0 or any(a not in AXES for a in axes) or len(set(axes)) != len(axes):
            raise InvalidParamsError(f"axes must be a non-empty subset of {AXES}, got {axes}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "axes", axes)

    @property
    def n_channels(self) -> int:
        return len(self.parts) * len(self.axes)

    def channel_names(self) -> tuple[str, ...]:
        return tuple(f"{part_name(p)}_{a}" for p in self.parts for a in self.axes)


@dataclass
class KeypointFrame:
    """Keypoints of one person in one frame: (25, 3) array of x, y, confidence."""

    index: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (NUM_BODY_PARTS, 3):
            raise MalformedDocumentError(f"expected (25, 3) points, got {pts.shape}")
        self.points = pts


@dataclass
class KeypointSequence:
    """All frames of one clip for one person, with clip metadata.

    ``xy`` is (T, 25, 2) pixel coordinates, ``confidence`` is (T, 25) in
    [0, 1]. A confidence of 0 marks a part that was not detected (its
    coordinates were filled by interpolation or are meaningless zeros).
    """

    clip_id: str
    participant_id: str
    xy: np.ndarray
    confidence: np.ndarray
    frame_indices: np.ndarray
    class_label: str | None = None
    fps: float = 30.0

    def __post_init__(self):
        self.xy = np.asarray(self.xy, dtype=np.float64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        self.frame_indices = np.asarray(self.frame_indices, dtype=np.int64)
        if self.xy.ndim != 3 or self.xy.shape[1:] != (NUM_BODY_PARTS, 2):
            raise InvalidParamsError(f"xy must be (T, 25, 2), got {self.xy.shape}")
        if self.confidence.shape != self.xy.shape[:2]:
            raise InvalidParamsError("confidence shape does not match xy")
        if len(self.frame_indices) != self.xy.shape[0]:
            raise InvalidParamsError("frame_indices length does not match xy")
        if self.n_frames == 0:
            raise EmptyClipError(f"clip {self.clip_id!r} has no frames")
        if np.any(np.diff(self.frame_indices) <= 0):
            raise InvalidParamsError("frame indices must be strictly increasing")

    @property
    def n_frames(self) -> int:
        return self.xy.shape[0]


@dataclass(frozen=True)
class QualityReport:
    """Per-part detection quality and an overall pass/fail verdict.

    ``passed`` is judged only on the parts requested by the channel spec;
    statistics cover all 25 parts.
    """

    mean_confidence: np.ndarray      # (25,)
    undetected_fraction: np.ndarray  # (25,)
    passed: bool
    failing_parts: tuple[str, ...]


def parse_frame(document: bytes | str, index: int = 0) -> KeypointFrame:
    """Parse one keypoint JSON document into a frame.

    Raises ``MalformedDocumentError`` for unparseable documents or wrong
    array lengths and ``NoPersonDetectedError`` when ``people`` is empty;
    the caller decides whether to interpolate or reject. With multiple
    people, the first is taken and a ``MultiplePeopleWarning`` is issued.
    """
    try:
        obj = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocumentError(f"frame {index}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "people" not in obj or not isinstance(obj["people"], list):
        raise MalformedDocumentError(f"frame {index}: missing 'people' array")
    people = obj["people"]
    if len(people) == 0:
        raise NoPersonDetectedError(f"frame {index}: no person detected")
    if len(people) > 1:
        warnings.warn(
            f"frame {index}: {len(people)} people detected, using the first",
            MultiplePeopleWarning,
            stacklevel=2,
        )
    person = people[0]
    flat = person.get("pose_keypoints_2d") if isinstance(person, dict) else None
    if flat is None:
        raise MalformedDocumentError(f"frame {index}: missing 'pose_keypoints_2d'")
    if len(flat) != _VALUES_PER_FRAME:
        raise MalformedDocumentError(
            f"frame {index}: expected {_VALUES_PER_FRAME} values, got {len(flat)}"
        )
    try:
        points = np.asarray(flat, dtype=np.float64).reshape(NUM_BODY_PARTS, 3)
    except (TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"frame {index}: non-numeric keypoints") from exc
    if not np.isfinite(points).all():
        raise MalformedDocumentError(f"frame {index}: non-finite keypoints")
    conf = points[:, 2]
    if np.any(conf < 0.0) or np.any(conf > 1.0):
        raise MalformedDocumentError(f"frame {index}: confidence outside [0, 1]")
    return KeypointFrame(index=index, points=points)


def serialize_frame(frame: KeypointFrame) -> bytes:
    """Inverse of ``parse_frame`` for well-formed frames (round-trips exactly)."""
    flat = [float(v) for v in frame.points.reshape(-1)]
    return json.dumps({"people": [{"pose_keypoints_2d": flat}]}).encode()


def _frame_sort_key(path: Path) -> tuple:
    m = _FRAME_INDEX_RE.search(path.stem)
    return (int(m.group(1)), path.name) if m else (1 << 62, path.name)


def _interpolate_undetected(xy: np.ndarray, confidence: np.ndarray) -> None:
    """Fill undetected (confidence == 0) points per part, in place.

    Gaps bracketed by detections are filled linearly; boundary gaps take
    the nearest detected value. Parts never detected are left untouched.
    Confidence stays 0 on filled points so downstream quality checks see
    them as undetected.
    """
    n_frames = xy.shape[0]
    t = np.arange(n_frames, dtype=np.float64)
    for part in range(xy.shape[1]):
        detected = confidence[:, part] > 0.0
        if detected.all() or not detected.any():
            continue
        for axis in (0, 1):
            xy[~detected, part, axis] = np.interp(
                t[~detected], t[detected], xy[detected, part, axis]
            )


def _read_clip_documents(path: Path) -> list[tuple[str, bytes]]:
    """Per-frame documents from a clip directory or a zip archive of one."""
    if path.is_file() and path.suffix.lower() == ".zip":
        with zipfile.ZipFile(path) as archive:
            members = sorted(
                (n for n in archive.namelist() if n.endswith(".json")),
                key=lambda n: _frame_sort_key(Path(n)),
            )
            return [(Path(n).name, archive.read(n)) for n in members]
    files = sorted(path.glob("*.json"), key=_frame_sort_key)
    return [(p.name, p.read_bytes()) for p in files]


def load_sequence(
    clip_path: str | Path,
    clip_id: str | None = None,
    participant_id: str = "",
    class_label: str | None = None,
    fps: float = 30.0,
    max_gap: int = 15,
) -> KeypointSequence:
    """Load a clip (directory or zip archive) of per-frame keypoint files.

    Filenames must encode the frame index (lexicographic order equals
    frame order); frames where no person was detected are filled by
    linear interpolation of the neighbouring detected keypoints and
    marked with confidence 0. More than ``max_gap`` consecutive missing
    frames raises ``GapTooLargeError``.
    """
    clip_path = Path(clip_path)
    if clip_id is None:
        clip_id = clip_path.stem if clip_path.suffix else clip_path.name
    documents = _read_clip_documents(clip_path)
    if not documents:
        raise EmptyClipError(f"clip {clip_id!r}: no keypoint files in {clip_path}")

    xy = np.zeros((len(documents), NUM_BODY_PARTS, 2), dtype=np.float64)
    confidence = np.zeros((len(documents), NUM_BODY_PARTS), dtype=np.float64)
    missing = np.zeros(len(documents), dtype=bool)
    for i, (name, blob) in enumerate(documents):
        try:
            frame = parse_frame(blob, index=i)
        except NoPersonDetectedError:
            missing[i] = True
            continue
        except MalformedDocumentError as exc:
            raise MalformedDocumentError(f"clip {clip_id!r}, file {name}: {exc}") from exc
        xy[i] = frame.points[:, :2]
        confidence[i] = frame.points[:, 2]

    if missing.all():
        raise EmptyClipError(f"clip {clip_id!r}: no person detected in any frame")
    gap = _longest_run(missing)
    if gap > max_gap:
        raise GapTooLargeError(
            f"clip {clip_id!r}: {gap} consecutive frames without a person (limit {max_gap})"
        )
    _interpolate_undetected(xy, confidence)

    return KeypointSequence(
        clip_id=clip_id,
        participant_id=participant_id,
        class_label=class_label,
        xy=xy,
        confidence=confidence,
        frame_indices=np.arange(len(documents)),
        fps=fps,
    )


def _longest_run(mask: np.ndarray) -> int:
    longest = run = 0
    for m in mask:
        run = run + 1 if m else 0
        longest = max(longest, run)
    return longest


def extract_series(
    seq: KeypointSequence, spec: ChannelSpec, frame_step: int = 1
) -> MultivariateSeries:
    """Turn a keypoint sequence into per-part coordinate channels.

    Takes every ``frame_step``-th frame, so the output length is
    ``ceil(T / frame_step)``. One channel per (part, axis) pair in
    parts-major order, values in pixels.
    """
    if frame_step < 1:
        raise InvalidParamsError(f"frame_step must be >= 1, got {frame_step}")
    sub = seq.xy[::frame_step]
    channels = []
    for p in spec.parts:
        for a in spec.axes:
            channels.append(sub[:, p, AXES.index(a)])
    return MultivariateSeries(np.stack(channels), spec.channel_names())


def quality_gate(
    seq: KeypointSequence,
    spec: ChannelSpec,
    min_mean_conf: float = 0.3,
    max_undetected: float = 0.2,
) -> QualityReport:
    """Assess detection quality; fail if any requested part is unreliable.

    A part fails when its mean confidence is below ``min_mean_conf`` or
    it is undetected in more than ``max_undetected`` of the frames. Parts
    outside the channel spec never cause failure (face parts are routinely
    undetected without harming the motion channels).
    """
    mean_conf = seq.confidence.mean(axis=0)
    undetected = (seq.confidence == 0.0).mean(axis=0)
    failing = [
        part_name(p)
        for p in spec.parts
        if mean_conf[p] < min_mean_conf or undetected[p] > max_undetected
    ]
    return QualityReport(
        mean_confidence=mean_conf,
        undetected_fraction=undetected,
        passed=not failing,
        failing_parts=tuple(failing),
    )


@dataclass(frozen=True)
class ManifestEntry:
    clip_id: str
    participant_id: str
    class_label: str | None
    path: Path
    fps: float = 30.0


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read a clip manifest (CSV or JSON) listing clip metadata and paths.

    Columns/keys: clip_id, participant_id, class_label, path, fps.
    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    rows: list[dict]
    if path.suffix.lower() == ".json":
        rows = json.loads(path.read_text())
        if not isinstance(rows, list):
            raise MalformedDocumentError(f"manifest {path}: expected a JSON list")
    else:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    entries = []
    for i, row in enumerate(rows):
        try:
            clip_path = Path(row["path"])
            entries.append(
                ManifestEntry(
                    clip_id=str(row["clip_id"]),
                    participant_id=str(row["participant_id"]),
                    class_label=(str(row["class_label"]) or None)
                    if row.get("class_label") not in (None, "")
                    else None,
                    path=clip_path if clip_path.is_absolute() else base / clip_path,
                    fps=float(row.get("fps") or 30.0),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocumentError(f"manifest {path}, row {i}: {exc}") from exc
    if not entries:
        raise EmptyClipError(f"manifest {path}: no clips listed")
    return entries
