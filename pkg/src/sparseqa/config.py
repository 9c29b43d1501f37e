"""Pipeline configuration: TOML file with sections per stage, flag and env overrides.

Precedence: command-line flag > SPARSEQA_* environment variable > config
file > built-in default. Every resolved value carries its provenance so the
pipeline can print where each setting came from.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from sparseqa.errors import ConfigError

ENV_PREFIX = "SPARSEQA_"

# section -> key -> (type, default); None default means "no default, optional"
_SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "paths": {
        "corpus": (str, None),
        "questions": (str, None),
        "index_dir": (str, "index"),
        "output_dir": (str, "out"),
        "contexts": (list, []),
        "extra_runs": (list, []),
    },
    "bm25": {
        "k1": (float, 0.9),
        "b": (float, 0.4),
    },
    "retrieval": {
        "k": (int, 100),
        "jobs": (int, 1),
    },
    "fusion": {
        "strategy": (str, "round_robin"),
        "k": (int, 100),
        "rrf_c": (float, 60.0),
    },
    "voting": {
        "n": (int, 5),
    },
    "evaluation": {
        "ks": (list, [1, 5, 20, 100]),
    },
}

_REQUIRED = (("paths", "corpus"), ("paths", "questions"))

# env var name (after prefix) -> (section, key)
_ENV_KEYS = {
    "K1": ("bm25", "k1"),
    "B": ("bm25", "b"),
    "RETRIEVAL_K": ("retrieval", "k"),
    "JOBS": ("retrieval", "jobs"),
    "STRATEGY": ("fusion", "strategy"),
    "FUSION_K": ("fusion", "k"),
    "RRF_C": ("fusion", "rrf_c"),
    "VOTE_N": ("voting", "n"),
    "KS": ("evaluation", "ks"),
}


@dataclass
class PipelineConfig:
    corpus: str
    questions: str
    index_dir: str
    output_dir: str
    contexts: list[str]
    extra_runs: list[str]
    k1: float
    b: float
    retrieval_k: int
    jobs: int
    fusion_strategy: str
    fusion_k: int
    rrf_c: float
    vote_n: int
    eval_ks: list[int]
    provenance: dict[str, str] = field(default_factory=dict)

    def describe(self) -> list[str]:
        """One line per setting with its provenance (default vs user-set)."""
        rows = [
            ("paths.corpus", self.corpus), ("paths.questions", self.questions),
            ("paths.index_dir", self.index_dir), ("paths.output_dir", self.output_dir),
            ("paths.contexts", ",".join(self.contexts) or "(none)"),
            ("paths.extra_runs", ",".join(self.extra_runs) or "(none)"),
            ("bm25.k1", self.k1), ("bm25.b", self.b),
            ("retrieval.k", self.retrieval_k), ("retrieval.jobs", self.jobs),
            ("fusion.strategy", self.fusion_strategy), ("fusion.k", self.fusion_k),
            ("fusion.rrf_c", self.rrf_c), ("voting.n", self.vote_n),
            ("evaluation.ks", ",".join(str(k) for k in self.eval_ks)),
        ]
        return [f"{name} = {value}  [{self.provenance.get(name, 'default')}]"
                for name, value in rows]


def _parse_scalar(raw: str, typ: type, name: str):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is list:
            return [part.strip() for part in raw.split(",") if part.strip()]
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse '{raw}' for {name}") from None


def validate_config(path: str | None, overrides: dict[str, object] | None = None) -> PipelineConfig:
    """Parse, default, and validate a pipeline config.

    Unknown sections or keys are errors (no silent typos); all missing
    required paths are reported at once; evaluation cutoffs must be strictly
    increasing.
    """
    file_data: dict = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, "rb") as fh:
            try:
                file_data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: invalid TOML ({exc})") from exc

    unknown: list[str] = []
    for section, body in file_data.items():
        if section not in _SCHEMA:
            unknown.append(section)
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"{path}: section '{section}' must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                unknown.append(f"{section}.{key}")
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    values: dict[tuple[str, str], object] = {}
    provenance: dict[str, str] = {}
    for section, keys in _SCHEMA.items():
        for key, (typ, default) in keys.items():
            values[(section, key)] = default
            provenance[f"{section}.{key}"] = "default"
            if section in file_data and key in file_data[section]:
                values[(section, key)] = file_data[section][key]
                provenance[f"{section}.{key}"] = "file"

    for env_key, (section, key) in _ENV_KEYS.items():
        raw = os.environ.get(ENV_PREFIX + env_key)
        if raw is not None:
            typ = _SCHEMA[section][key][0]
            parsed = _parse_scalar(raw, typ, f"{section}.{key}")
            if (section, key) == ("evaluation", "ks"):
                parsed = [int(x) for x in parsed]
            values[(section, key)] = parsed
            provenance[f"{section}.{key}"] = "env"

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".", 1)
        values[(section, key)] = value
        provenance[dotted] = "flag"

    missing = [f"{s}.{k}" for s, k in _REQUIRED if values[(s, k)] is None]
    if missing:
        raise ConfigError(f"missing required config value(s): {', '.join(missing)}")

    ks = [int(k) for k in values[("evaluation", "ks")]]
    if not ks or any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
        raise ConfigError(f"evaluation.ks must be strictly increasing cutoffs >= 1, got {ks}")

    strategy = str(values[("fusion", "strategy")])
    if strategy not in ("round_robin", "rrf"):
        raise ConfigError(f"fusion.strategy must be round_robin or rrf, got '{strategy}'")

    cfg = PipelineConfig(
        corpus=str(values[("paths", "corpus")]),
        questions=str(values[("paths", "questions")]),
        index_dir=str(values[("paths", "index_dir")]),
        output_dir=str(values[("paths", "output_dir")]),
        contexts=[str(p) for p in values[("paths", "contexts")]],
        extra_runs=[str(p) for p in values[("paths", "extra_runs")]],
        k1=float(values[("bm25", "k1")]),
        b=float(values[("bm25", "b")]),
        retrieval_k=int(values[("retrieval", "k")]),
        jobs=int(values[("retrieval", "jobs")]),
        fusion_strategy=strategy,
        fusion_k=int(values[("fusion", "k")]),
        rrf_c=float(values[("fusion", "rrf_c")]),
        vote_n=int(values[("voting", "n")]),
        eval_ks=ks,
        provenance=provenance,
    )

    missing_paths = [p for p in [cfg.corpus, cfg.questions, *cfg.contexts, *cfg.extra_runs]
                     if not os.path.exists(p)]
    if missing_paths:
        raise ConfigError(f"input path(s) do not exist: {', '.join(missing_paths)}")
    if cfg.jobs < 1:
        raise ConfigError("retrieval.jobs must be >= 1")
    return cfg
