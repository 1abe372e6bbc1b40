"""Experiment configuration: TOML file -> validated dataclasses."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .fedse import FedConfig
from .perf_model import PayloadModel
from .training import TrainConfig
from .wpcn import NetworkConfig

# sub-seed = global seed + offset; new modules take new offsets
SEED_OFFSETS = {"wpcn": 1, "auction": 2, "fedse": 3, "heldout": 4}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class FedSEBlock:
    rounds: int = 50
    groups: int = 2
    dim: int = 4
    samples: int = 32
    devices_per_group: int = 3
    fed: FedConfig = FedConfig()


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    out: str = "out"
    heldout: int = 100_000
    wpcn: Optional[NetworkConfig] = None
    auction: Optional[TrainConfig] = None
    fedse: Optional[FedSEBlock] = None

    def sub_seed(self, module: str) -> int:
        return self.seed + SEED_OFFSETS[module]


_WPCN_KEYS = {
    "devices": "devices", "eta": "eta", "power_w": "power_w", "slot_s": "slot_s",
    "energy_per_bit_j": "energy_per_bit_j", "w_sim": "w_sim", "w_bleu": "w_bleu", "channel": "channel",
}
_PAYLOAD_KEYS = {"words": "words", "bits_per_feature": "bits_per_feature"}
_AUCTION_KEYS = {
    "iterations": "iterations", "batch": "batch_size", "learning_rate": "learning_rate",
    "final_lr_fraction": "final_lr_fraction", "temp_start": "temp_start", "temp_end": "temp_end",
    "groups": "groups", "units": "units", "init_noise": "init_noise", "smoothing": "smoothing",
    "eval_size": "eval_size",
}
_FED_KEYS = {"epochs": "epochs", "lr": "lr", "upload_batch": "upload_batch", "label_noise": "label_noise"}
_FEDSE_KEYS = {"rounds": "rounds", "groups": "groups", "dim": "dim", "samples": "samples",
               "devices_per_group": "devices_per_group"}


def _pick(block: dict, keys: dict) -> dict:
    return {keys[k]: v for k, v in block.items() if k in keys}


def _unknown(block: dict, allowed, prefix: str, errors: list) -> None:
    for k in block:
        if k not in allowed:
            errors.append(f"{prefix}.{k}: unknown key")


def _typed(cls, kwargs: dict, prefix: str, errors: list, reverse: dict):
    hints = {f.name: f.type for f in dataclasses.fields(cls)}
    ok = True
    for name, value in kwargs.items():
        want = hints[name]
        key = reverse.get(name, name)
        if want in ("int", int) and (isinstance(value, bool) or not isinstance(value, int)):
            errors.append(f"{prefix}.{key}: expected an integer")
            ok = False
        elif want in ("float", float) and (isinstance(value, bool) or not isinstance(value, (int, float))):
            errors.append(f"{prefix}.{key}: expected a number")
            ok = False
        elif want in ("str", str) and not isinstance(value, str):
            errors.append(f"{prefix}.{key}: expected a string")
            ok = False
    return ok


def _build(cls, block: dict, keys: dict, prefix: str, errors: list, **extra):
    _unknown(block, set(keys) | extra.pop("_also_allowed", set()), prefix, errors)
    kwargs = _pick(block, keys)
    reverse = {v: k for k, v in keys.items()}
    if not _typed(cls, kwargs, prefix, errors, reverse):
        return None
    obj = cls(**kwargs, **extra)
    for msg in obj.errors() if hasattr(obj, "errors") else []:
        name, _, text = msg.partition(": ")
        errors.append(f"{prefix}.{reverse.get(name, name)}: {text}")
    return obj


def parse_config(data: dict, require: tuple = ()) -> ExperimentConfig:
    """Validate a parsed TOML document, collecting every error."""
    errors: list[str] = []
    _unknown(data, {"seed", "out", "heldout", "wpcn", "auction", "fedse"}, "config", errors)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append("seed: expected a non-negative integer")
        seed = 0
    out = data.get("out", "out")
    if not isinstance(out, str):
        errors.append("out: expected a string")
        out = "out"
    heldout = data.get("heldout", 100_000)
    if isinstance(heldout, bool) or not isinstance(heldout, int) or heldout < 1:
        errors.append("heldout: expected a positive integer")
        heldout = 1

    wpcn = auction = fedse = None
    if "wpcn" in data:
        block = data["wpcn"]
        payload = None
        p_kwargs = _pick(block, _PAYLOAD_KEYS)
        if _typed(PayloadModel, p_kwargs, "wpcn", errors, {}):
            try:
                payload = PayloadModel(**p_kwargs)
            except ValueError as exc:
                errors.append(f"wpcn.payload: {exc}")
        if payload is not None:
            wpcn = _build(NetworkConfig, block, _WPCN_KEYS, "wpcn", errors,
                          payload=payload, _also_allowed=set(_PAYLOAD_KEYS))
    if "auction" in data:
        auction = _build(TrainConfig, data["auction"], _AUCTION_KEYS, "auction", errors, seed=seed + SEED_OFFSETS["auction"])
    if "fedse" in data:
        block = data["fedse"]
        fed = _build(FedConfig, {k: v for k, v in block.items() if k in _FED_KEYS}, _FED_KEYS, "fedse", errors)
        rest = {k: v for k, v in block.items() if k not in _FED_KEYS}
        fedse = _build(FedSEBlock, rest, _FEDSE_KEYS, "fedse", errors, fed=fed or FedConfig())
        if fedse is not None:
            for name in ("rounds", "groups", "dim", "samples", "devices_per_group"):
                if getattr(fedse, name) < 1:
                    errors.append(f"fedse.{name}: must be >= 1")

    for block in require:
        if block not in data:
            errors.append(f"{block}: missing required [{block}] block")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(seed=seed, out=out, heldout=heldout, wpcn=wpcn, auction=auction, fedse=fedse)


def load_config(path=None, require: tuple = ()) -> ExperimentConfig:
    """Read and validate a TOML config; ``None`` loads the packaged default."""
    if path is None:
        text = resources.files("semalloc").joinpath("data/default.toml").read_text("utf-8")
        where = "default.toml"
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError([f"{p}: config file not found"])
        text = p.read_text("utf-8")
        where = str(p)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{where}: parse error: {exc}"]) from None
    return parse_config(data, require)


def default_config_text() -> str:
    return resources.files("semalloc").joinpath("data/default.toml").read_text("utf-8")
