"""Flat ``key = value`` configuration files for experiment grids.

Grammar, one assignment per line::

    # comment (also allowed after a value)
    seeds           = 0..19              # inclusive range, or 0, 1, 5
    datasets        = g241c, digit1, csv:data/my.csv
    n               = 1500               # generator size
    d               = 241
    label_fractions = 0.10, 0.05, 0.025, 0.01
    noise_rates     = 0, 0.05, 0.10, 0.20, 0.35
    k               = 15                 # one affinity per listed k
    weights         = constant           # or rbf (then sigma = ...)
    sigma           = 1.0
    mutual          = true
    algorithms      = gfhf; gtam mu=0.0101; gtam mu=99; lgc alpha=0.1; lgc alpha=0.9; le p=0.2
    seed_root       = 0
    workers         = 1

Unknown keys are rejected.  Every key is optional; missing keys keep the
:class:`~gsslnoise.bench.grid.GridConfig` defaults.
"""

from __future__ import annotations

from pathlib import Path

from .grid import AffinitySpec, AlgorithmSpec, ConfigError, DatasetSpec, GridConfig

__all__ = ["parse_config", "load_config", "parse_seeds", "parse_floats", "parse_algorithms",
           "build_config", "KEYS"]

KEYS = ("seeds", "datasets", "n", "d", "label_fractions", "noise_rates", "k", "weights",
        "sigma", "mutual", "algorithms", "seed_root", "workers")


def parse_seeds(text: str) -> tuple:
    seeds = []
    for part in _split(text, ","):
        if ".." in part:
            lo, hi = part.split("..", 1)
            try:
                lo, hi = int(lo), int(hi)
            except ValueError:
                raise ConfigError(f"bad seed range {part!r}") from None
            if hi < lo:
                raise ConfigError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(_int(part, "seed"))
    return tuple(seeds)


def parse_floats(text: str, what: str = "value") -> tuple:
    out = []
    for part in _split(text, ","):
        try:
            out.append(float(part))
        except ValueError:
            raise ConfigError(f"bad {what} {part!r}") from None
    return tuple(out)


def parse_algorithms(text: str) -> tuple:
    specs = []
    for entry in _split(text, ";"):
        name, *params = entry.split()
        kwargs = {}
        for p in params:
            if "=" not in p:
                raise ConfigError(f"algorithm parameter {p!r} is not key=value")
            key, value = p.split("=", 1)
            if key == "lambda":
                key = "mu"
            if key not in ("alpha", "mu", "p"):
                raise ConfigError(f"unknown algorithm parameter {key!r}")
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        specs.append(AlgorithmSpec(name.lower(), **kwargs))
    return tuple(specs)


def _split(text, sep):
    parts = [p.strip() for p in text.split(sep)]
    parts = [p for p in parts if p]
    if not parts:
        raise ConfigError("empty list")
    return parts


def _int(text, what):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"bad {what} {text!r}") from None


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


def parse_config(text: str) -> dict:
    """Parse config text into a raw ``{key: string}`` mapping."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(values: dict) -> GridConfig:
    """Turn a raw mapping (file values merged with CLI overrides) into a GridConfig."""
    kw = {}
    if "seeds" in values:
        kw["seeds"] = parse_seeds(values["seeds"])
    n = _int(values.get("n", "1500"), "n")
    d = _int(values.get("d", "241"), "d")
    if "datasets" in values:
        kw["datasets"] = tuple(DatasetSpec(name, n, d) for name in _split(values["datasets"], ","))
    elif "n" in values or "d" in values:
        kw["datasets"] = (DatasetSpec("g241c", n, d),)
    if "label_fractions" in values:
        kw["label_fractions"] = parse_floats(values["label_fractions"], "label fraction")
    if "noise_rates" in values:
        kw["noise_rates"] = parse_floats(values["noise_rates"], "noise rate")
    ks = [_int(k, "k") for k in _split(values.get("k", "15"), ",")]
    sigma = float(values["sigma"]) if "sigma" in values else None
    weights = values.get("weights", "constant")
    mutual = _bool(values.get("mutual", "true"))
    kw["affinities"] = tuple(AffinitySpec(k, weights, sigma, mutual) for k in ks)
    if "algorithms" in values:
        kw["algorithms"] = parse_algorithms(values["algorithms"])
    if "seed_root" in values:
        kw["seed_root"] = _int(values["seed_root"], "seed_root")
    if "workers" in values:
        kw["workers"] = _int(values["workers"], "workers")
    return GridConfig(**kw)


def load_config(path, overrides: dict | None = None) -> GridConfig:
    values = parse_config(Path(path).read_text(encoding="utf-8")) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values)
