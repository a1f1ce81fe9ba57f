"""
JSON file formats: datasets, generator/experiment configs and results.

Datasets store relative motions as unit quaternions ``(w, x, y, z)`` with
``w >= 0`` plus translations.  Files are written with sorted keys and a fixed
indent so that write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .geometry import RigidTransform, quat_to_rotation, rotation_to_quat
from .problem import EgomotionDataset, GroundTruth
from .synth import NoiseConfig, TrajectoryConfig

SCHEMA_VERSION = 1


class FormatError(ValueError):
    pass


def _pose_entry(R, t) -> dict:
    return {"q": [float(v) for v in rotation_to_quat(R)], "t": [float(v) for v in np.asarray(t)]}


def _read_pose(entry: dict, where: str):
    try:
        q = np.asarray(entry["q"], dtype=float)
        t = np.asarray(entry["t"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected {{'q': [w,x,y,z], 't': [x,y,z]}}") from exc
    if q.shape != (4,) or t.shape != (3,):
        raise FormatError(f"{where}: wrong quaternion or translation length")
    if abs(np.linalg.norm(q) - 1.0) > 1e-9:
        raise FormatError(f"{where}: quaternion is not unit norm")
    return q, t


@dataclass
class DatasetFile:
    """In-memory mirror of a dataset file."""

    sensor_a: list[dict]
    sensor_b: list[dict]
    scale_known: bool = False
    ground_truth: dict | None = None
    generator: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if len(self.sensor_a) != len(self.sensor_b):
            raise FormatError("sensor_a and sensor_b have different lengths")
        for name, seq in (("sensor_a", self.sensor_a), ("sensor_b", self.sensor_b)):
            for k, entry in enumerate(seq):
                _read_pose(entry, f"{name}[{k}]")

    @classmethod
    def from_dataset(cls, data: EgomotionDataset, generator: dict | None = None) -> "DatasetFile":
        gt = None
        if data.ground_truth is not None:
            g = data.ground_truth
            gt = _pose_entry(g.rotation, g.translation)
            gt["alpha"] = float(g.scale)
        return cls(sensor_a=[_pose_entry(R, t) for R, t in zip(data.Ra, data.ta)],
                   sensor_b=[_pose_entry(R, t) for R, t in zip(data.Rb, data.tb)],
                   scale_known=data.scale_known, ground_truth=gt, generator=generator)

    def to_dataset(self) -> EgomotionDataset:
        def unpack(seq, name):
            poses = [_read_pose(e, f"{name}[{k}]") for k, e in enumerate(seq)]
            return [RigidTransform(quat_to_rotation(q), t) for q, t in poses]

        gt = None
        if self.ground_truth is not None:
            q, t = _read_pose(self.ground_truth, "meta.ground_truth")
            gt = GroundTruth(quat_to_rotation(q), t, float(self.ground_truth.get("alpha", 1.0)))
        try:
            return EgomotionDataset.from_transforms(unpack(self.sensor_a, "sensor_a"),
                                                    unpack(self.sensor_b, "sensor_b"),
                                                    scale_known=self.scale_known, ground_truth=gt)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc

    def to_json(self) -> dict:
        meta: dict[str, Any] = {"scale_known": self.scale_known}
        if self.ground_truth is not None:
            meta["ground_truth"] = self.ground_truth
        if self.generator is not None:
            meta["generator"] = self.generator
        return {"schema_version": self.schema_version, "sensor_a": self.sensor_a,
                "sensor_b": self.sensor_b, "meta": meta}

    @classmethod
    def from_json(cls, obj: dict) -> "DatasetFile":
        try:
            meta = obj.get("meta", {})
            if obj["schema_version"] != SCHEMA_VERSION:
                raise FormatError(f"unsupported schema_version {obj['schema_version']}")
            return cls(sensor_a=obj["sensor_a"], sensor_b=obj["sensor_b"],
                       scale_known=bool(meta.get("scale_known", False)),
                       ground_truth=meta.get("ground_truth"), generator=meta.get("generator"),
                       schema_version=obj["schema_version"])
        except (KeyError, AttributeError, TypeError) as exc:
            raise FormatError(f"malformed dataset file: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_dataset(path, data: EgomotionDataset | DatasetFile, generator: dict | None = None) -> None:
    f = data if isinstance(data, DatasetFile) else DatasetFile.from_dataset(data, generator)
    write_json(path, f.to_json())


def read_dataset_file(path) -> DatasetFile:
    return DatasetFile.from_json(read_json(path))


def read_dataset(path) -> EgomotionDataset:
    return read_dataset_file(path).to_dataset()


def write_trajectory(path, poses: list[RigidTransform]) -> None:
    write_json(path, {"schema_version": SCHEMA_VERSION,
                      "poses": [_pose_entry(p.rotation, p.translation) for p in poses]})


# ---------------------------------------------------------------------------
# configs

def _from_dict(cls, obj: dict | None, where: str):
    obj = dict(obj or {})
    known = {f.name for f in fields(cls)}
    unknown = set(obj) - known
    if unknown:
        raise FormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    for k, v in obj.items():
        if isinstance(v, list):
            obj[k] = tuple(v)
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def trajectory_config_from_dict(obj: dict | None) -> TrajectoryConfig:
    obj = dict(obj or {})
    ext = obj.pop("gt_extrinsic", None)
    cfg = _from_dict(TrajectoryConfig, obj, "trajectory")
    if ext is not None:
        q, t = _read_pose(ext, "trajectory.gt_extrinsic")
        cfg = TrajectoryConfig(**{**_config_fields(cfg), "gt_extrinsic": RigidTransform(quat_to_rotation(q), t)})
    return cfg


def _config_fields(cfg) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def trajectory_config_to_dict(cfg: TrajectoryConfig) -> dict:
    d = _config_fields(cfg)
    ext = d.pop("gt_extrinsic")
    d = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}
    if ext is not None:
        d["gt_extrinsic"] = _pose_entry(ext.rotation, ext.translation)
    return d


def noise_config_from_dict(obj: dict | None) -> NoiseConfig:
    return _from_dict(NoiseConfig, obj, "noise")


@dataclass
class GeneratorConfig:
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    scale_range: tuple[float, float] | None = None
    scale_known: bool = False

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorConfig":
        obj = dict(obj or {})
        unknown = set(obj) - {"trajectory", "noise", "scale_range", "scale_known"}
        if unknown:
            raise FormatError(f"generator config: unknown field(s) {sorted(unknown)}")
        sr = obj.get("scale_range")
        return cls(trajectory=trajectory_config_from_dict(obj.get("trajectory")),
                   noise=noise_config_from_dict(obj.get("noise")),
                   scale_range=tuple(sr) if sr is not None else None,
                   scale_known=bool(obj.get("scale_known", False)))

    def to_json(self) -> dict:
        return {"trajectory": trajectory_config_to_dict(self.trajectory),
                "noise": asdict(self.noise),
                "scale_range": list(self.scale_range) if self.scale_range else None,
                "scale_known": self.scale_known}
