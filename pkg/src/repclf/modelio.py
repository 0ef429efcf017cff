"""Versioned binary files for datasets and trained models.

Layout: 4 magic bytes, little-endian u32 format version, little-endian
u64 header length, a canonical JSON header (``meta`` plus a ``sections``
table of name/dtype/shape/offset/nbytes), then the raw array payload.
All numeric payloads are little-endian; floats are 64-bit. Saving a
loaded file reproduces it byte for byte.

Kernel banks are not stored as arrays: the model keeps
``(seed, num_kernels, num_channels, input_length)`` plus the RNG
algorithm id and a checksum, and the bank is regenerated and verified on
load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .errors import FileFormatError
from .minirocket import MiniRocketFeatures, MiniRocketParams
from .pipeline import PipelineConfig, RepetitionClassifier, TrainedModel
from .ridge import ColumnScaler, RidgeClassifierLOO
from .rocket import RNG_ALGORITHM, RocketFeatures, generate_kernels

DATASET_MAGIC = b"RCDS"
MODEL_MAGIC = b"RCMD"
FORMAT_VERSION = 1


def _write_container(path: str | Path, magic: bytes, meta: dict, arrays: dict) -> None:
    sections = []
    blobs = []
    offset = 0
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        blob = arr.tobytes()
        sections.append(
            {
                "name": name,
                "dtype": arr.dtype.str,
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps(
        {"meta": meta, "sections": sections}, sort_keys=True, separators=(",", ":")
    ).encode()
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def _read_container(path: str | Path, magic: bytes) -> tuple[dict, dict]:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != magic:
        raise FileFormatError(f"{path}: bad magic bytes (expected {magic!r})")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != FORMAT_VERSION:
        raise FileFormatError(
            f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    (header_len,) = struct.unpack("<Q", raw[8:16])
    if len(raw) < 16 + header_len:
        raise FileFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[16 : 16 + header_len])
        meta = header["meta"]
        sections = header["sections"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: corrupt header: {exc}") from exc
    payload = raw[16 + header_len :]
    arrays = {}
    for sec in sections:
        start, nbytes = sec["offset"], sec["nbytes"]
        if start + nbytes > len(payload):
            raise FileFormatError(f"{path}: truncated payload at section {sec['name']!r}")
        arr = np.frombuffer(payload[start : start + nbytes], dtype=sec["dtype"])
        arrays[sec["name"]] = arr.reshape(sec["shape"]).copy()
    return meta, arrays


def save_dataset(path: str | Path, dataset: Dataset, config_hash: str = "") -> None:
    meta = {
        "kind": "dataset",
        "config_hash": config_hash,
        "preprocessing_hash": dataset.preprocessing_hash,
        "channel_names": list(dataset.channel_names),
        "labels": [str(x) for x in dataset.labels],
        "participant_ids": [str(x) for x in dataset.participant_ids],
        "clip_ids": [str(x) for x in dataset.clip_ids],
    }
    arrays = {"X": dataset.X, "rep_indices": dataset.rep_indices}
    _write_container(path, DATASET_MAGIC, meta, arrays)


def load_dataset(path: str | Path) -> Dataset:
    meta, arrays = _read_container(path, DATASET_MAGIC)
    try:
        return Dataset(
            X=arrays["X"],
            labels=np.array(meta["labels"]),
            participant_ids=np.array(meta["participant_ids"]),
            clip_ids=np.array(meta["clip_ids"]),
            rep_indices=arrays["rep_indices"],
            channel_names=tuple(meta["channel_names"]),
            preprocessing_hash=meta["preprocessing_hash"],
        )
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing field {exc}") from exc


def save_model(path: str | Path, model: TrainedModel) -> None:
    clf = model.classifier
    ridge: RidgeClassifierLOO = clf.ridge_
    scaler: ColumnScaler = clf.scaler_
    meta = {
        "kind": "model",
        "config": model.config.to_dict(),
        "config_hash": model.config.config_hash(),
        "preprocessing_hash": model.config.preprocessing_hash(),
        "channel_names": list(model.channel_names),
        "classes": [str(c) for c in ridge.classes_],
        "alpha": ridge.alpha_,
    }
    arrays = {
        "scaler_mean": scaler.mean_,
        "scaler_scale": scaler.scale_,
        "coef": ridge.coef_,
        "intercept": ridge.intercept_,
        "loo_mse": ridge.loo_mse_,
    }
    if model.config.transform == "rocket":
        bank = clf.features_.bank_
        meta["rocket"] = {
            "seed": bank.seed,
            "num_kernels": bank.num_kernels,
            "num_channels": bank.num_channels,
            "input_length": bank.input_length,
            "rng": RNG_ALGORITHM,
            "checksum": bank.checksum(),
        }
    else:
        params: MiniRocketParams = clf.features_.params_
        meta["minirocket"] = {
            "num_channels": params.num_channels,
            "input_length": params.input_length,
            "seed": params.seed,
        }
        arrays.update(
            mr_dilations=params.dilations,
            mr_num_features_per_dilation=params.num_features_per_dilation,
            mr_quantiles=params.quantiles,
            mr_biases=params.biases,
            mr_channel_counts=params.channel_counts,
            mr_channel_indices=params.channel_indices,
            mr_channel_starts=params.channel_starts,
            mr_feature_starts=params.feature_starts,
            mr_fit_sample_indices=params.fit_sample_indices,
        )
    _write_container(path, MODEL_MAGIC, meta, arrays)


def load_model(path: str | Path) -> TrainedModel:
    meta, arrays = _read_container(path, MODEL_MAGIC)
    try:
        config = PipelineConfig.from_dict(meta["config"])
        clf = RepetitionClassifier.from_config(config)

        if config.transform == "rocket":
            info = meta["rocket"]
            if info["rng"] != RNG_ALGORITHM:
                raise FileFormatError(
                    f"{path}: unknown RNG algorithm {info['rng']!r}"
                )
            bank = generate_kernels(
                info["num_kernels"],
                info["num_channels"],
                info["input_length"],
                info["seed"],
            )
            if bank.checksum() != info["checksum"]:
                raise FileFormatError(
                    f"{path}: regenerated kernel bank does not match stored checksum"
                )
            features = RocketFeatures(info["num_kernels"], info["seed"])
            features.bank_ = bank
        else:
            info = meta["minirocket"]
            params = MiniRocketParams(
                num_channels=info["num_channels"],
                input_length=info["input_length"],
                seed=info["seed"],
                dilations=arrays["mr_dilations"],
                num_features_per_dilation=arrays["mr_num_features_per_dilation"],
                quantiles=arrays["mr_quantiles"],
                biases=arrays["mr_biases"],
                channel_counts=arrays["mr_channel_counts"],
                channel_indices=arrays["mr_channel_indices"],
                channel_starts=arrays["mr_channel_starts"],
                feature_starts=arrays["mr_feature_starts"],
                fit_sample_indices=arrays["mr_fit_sample_indices"],
            )
            features = MiniRocketFeatures(config.num_features, random_state=info["seed"])
            features.params_ = params

        scaler = ColumnScaler()
        scaler.mean_ = arrays["scaler_mean"]
        scaler.scale_ = arrays["scaler_scale"]

        ridge = RidgeClassifierLOO(alphas=config.alphas)
        ridge.classes_ = np.array(meta["classes"])
        ridge.coef_ = arrays["coef"]
        ridge.intercept_ = arrays["intercept"]
        ridge.alpha_ = float(meta["alpha"])
        ridge.loo_mse_ = arrays["loo_mse"]

        clf.features_ = features
        clf.scaler_ = scaler
        clf.ridge_ = ridge
        clf.classes_ = ridge.classes_
        return TrainedModel(
            config=config,
            channel_names=tuple(meta["channel_names"]),
            classifier=clf,
        )
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing field {exc}") from exc
