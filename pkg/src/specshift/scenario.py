"""Scenario configuration: JSON schema, deterministic seeded matrices, and
path construction.

Randomness is generated exclusively by the splitmix64 generator below, so a
scenario is reproducible from its seed alone on any platform. Per-matrix
randomness is decoupled through integer ``stream`` ids: the draw order of
one matrix never shifts another's values.

Matrix entry encoding in JSON: a real number, or a two-element array
[re, im] for complex entries.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Tuple

import jsonschema
import numpy as np

from .errors import ConfigError
from .paths import OperatorPath, Profile, make_profile

MASK64 = (1 << 64) - 1

SCHEMA_VERSION = 1

EXPERIMENTS = ("callias", "index", "ssf-gap", "flow", "trace-formula", "converge")

_MATRIX_SPEC = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "kind": {"const": "diagonal"},
                "entries": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
            "required": ["kind", "entries"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "explicit"},
                "entries": {"type": "array", "minItems": 1},
            },
            "required": ["kind", "entries"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "seeded-random"},
                "negatives": {"type": "integer", "minimum": 0},
                "stream": {"type": "integer", "minimum": 0},
                "spread": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
            "required": ["kind", "negatives", "stream"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "seeded-random-hermitian"},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "stream": {"type": "integer", "minimum": 0},
                "negate": {"type": "boolean"},
            },
            "required": ["kind", "scale", "stream"],
            "additionalProperties": False,
        },
        {
            "properties": {"kind": {"const": "balance"}},
            "required": ["kind"],
            "additionalProperties": False,
        },
    ],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        "dimension": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "A_minus": _MATRIX_SPEC,
        "A_plus": _MATRIX_SPEC,
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "profile": {"enum": list(("tanh-sigmoid", "smoothstep-compact", "piecewise-linear-ramp"))},
                    "center": {"type": "number"},
                    "width": {"type": "number", "exclusiveMinimum": 0},
                    "coefficient": _MATRIX_SPEC,
                },
                "required": ["profile", "center", "width", "coefficient"],
                "additionalProperties": False,
            },
        },
        "truncation": {"type": "number", "exclusiveMinimum": 0},
        "grid": {
            "type": "object",
            "properties": {
                "T": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 3},
            },
            "required": ["T", "N"],
            "additionalProperties": False,
        },
        "disc": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 3},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "cap": {"type": "integer", "minimum": 1},
                "threshold_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["N"],
            "additionalProperties": False,
        },
        "z_list": {"type": "array", "items": {"type": "number", "exclusiveMaximum": 0}, "minItems": 1},
        "lambda_list": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "experiments": {
            "type": "array",
            "items": {"enum": list(EXPERIMENTS)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "dump_kernel_diagnostics": {"type": "boolean"},
        "output": {"type": "string"},
    },
    "required": ["schema_version", "name", "dimension", "A_minus", "terms", "grid", "z_list", "experiments"],
    "additionalProperties": False,
}


class SplitMix64:
    """The splitmix64 sequence: state advances by the 64-bit golden gamma
    and each output is finalized by two xor-shift-multiply rounds."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) / float(1 << 53))

    def normal(self) -> float:
        # Box-Muller; u1 shifted into (0, 1]
        u1 = ((self.next_u64() >> 11) + 1) / float(1 << 53)
        u2 = (self.next_u64() >> 11) / float(1 << 53)
        return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))


def _finalize(x: int) -> int:
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_rng(seed: int, stream: int) -> SplitMix64:
    """Independent generator for (seed, stream): the two ids are finalized
    separately and xored, so streams never overlap for distinct ids."""
    return SplitMix64(_finalize(seed) ^ _finalize(~stream & MASK64))


def _random_unitary(d: int, rng: SplitMix64) -> np.ndarray:
    G = np.empty((d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            G[i, j] = complex(rng.normal(), rng.normal())
    Q, R = np.linalg.qr(G)
    phases = np.diagonal(R).copy()
    phases = np.where(np.abs(phases) == 0.0, 1.0, phases / np.abs(phases))
    return Q * phases[None, :].conj()


def resolve_matrix(spec: Dict[str, Any], d: int, seed: int) -> np.ndarray:
    """Resolve a matrix spec (except 'balance') to a concrete ndarray."""
    kind = spec["kind"]
    if kind == "diagonal":
        entries = spec["entries"]
        if len(entries) != d:
            raise ConfigError(f"diagonal needs {d} entries, got {len(entries)}")
        return np.diag(np.asarray(entries, dtype=np.float64)).astype(np.complex128)
    if kind == "explicit":
        rows = spec["entries"]
        if len(rows) != d or any(len(r) != d for r in rows):
            raise ConfigError(f"explicit matrix must be {d}x{d}")
        M = np.empty((d, d), dtype=np.complex128)
        for i, row in enumerate(rows):
            for j, e in enumerate(row):
                if isinstance(e, (int, float)):
                    M[i, j] = complex(e)
                elif isinstance(e, (list, tuple)) and len(e) == 2:
                    M[i, j] = complex(e[0], e[1])
                else:
                    raise ConfigError(f"bad matrix entry {e!r}")
        return M
    if kind == "seeded-random":
        negatives = spec["negatives"]
        if negatives > d:
            raise ConfigError("more negative eigenvalues than the dimension")
        lo, hi = spec.get("spread", [0.6, 2.2])
        if not lo < hi:
            raise ConfigError("spread must be increasing")
        rng = stream_rng(seed, spec["stream"])
        mags = np.array([rng.uniform(lo, hi) for _ in range(d)])
        signs = np.array([-1.0] * negatives + [1.0] * (d - negatives))
        V = _random_unitary(d, rng)
        return (V * (signs * mags)) @ V.conj().T
    if kind == "seeded-random-hermitian":
        rng = stream_rng(seed, spec["stream"])
        G = np.empty((d, d), dtype=np.complex128)
        for i in range(d):
            for j in range(d):
                G[i, j] = complex(rng.normal(), rng.normal())
        M = spec["scale"] * 0.5 * (G + G.conj().T)
        return -M if spec.get("negate", False) else M
    raise ConfigError(f"matrix kind {kind!r} cannot be resolved directly")


def validate_config(config: Dict[str, Any]) -> None:
    """Schema plus semantic checks; raises ConfigError on any violation."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    if config["grid"]["N"] % 2 == 0:
        raise ConfigError("grid.N must be odd")
    disc = config.get("disc")
    if disc is not None and disc["N"] % 2 == 0:
        raise ConfigError("disc.N must be odd")
    balance_terms = [t for t in config["terms"] if t["coefficient"]["kind"] == "balance"]
    if len(balance_terms) > 1:
        raise ConfigError("at most one term may carry a 'balance' coefficient")
    if balance_terms and "A_plus" not in config:
        raise ConfigError("a 'balance' coefficient requires A_plus")
    needs_seed = any(
        s.get("kind", "").startswith("seeded")
        for s in _matrix_specs(config)
    )
    if needs_seed and "seed" not in config:
        raise ConfigError("seeded matrix specs require a top-level seed")


def _matrix_specs(config) -> List[Dict[str, Any]]:
    specs = [config["A_minus"]]
    if "A_plus" in config:
        specs.append(config["A_plus"])
    specs.extend(t["coefficient"] for t in config["terms"])
    return specs


def build_path(config: Dict[str, Any]) -> OperatorPath:
    """Construct the operator path described by a validated config."""
    validate_config(config)
    d = config["dimension"]
    seed = config.get("seed", 0)
    A_minus = resolve_matrix(config["A_minus"], d, seed)
    terms: List[Tuple[Profile, np.ndarray]] = []
    balance_slot = None
    coeff_sum = np.zeros((d, d), dtype=np.complex128)
    for t in config["terms"]:
        prof = make_profile(t["profile"], t["center"], t["width"])
        if t["coefficient"]["kind"] == "balance":
            balance_slot = len(terms)
            terms.append((prof, None))
            continue
        C = resolve_matrix(t["coefficient"], d, seed)
        coeff_sum += C
        terms.append((prof, C))
    if balance_slot is not None:
        A_plus = resolve_matrix(config["A_plus"], d, seed)
        C = A_plus - A_minus - coeff_sum
        terms[balance_slot] = (terms[balance_slot][0], C)
    return OperatorPath(A_minus, terms)


def generate_random_scenario(seed: int, d: int, flow_target: int) -> Dict[str, Any]:
    """Deterministic scenario whose endpoint signature forces the shift
    function at zero (and hence index and flow) to equal ``flow_target``.

    The endpoints are drawn with controlled numbers of negative
    eigenvalues; a 'balance' term bridges them, and with probability ~1/2
    a zero-sum pair of bump terms enriches the interior of the path.
    """
    if abs(flow_target) > d:
        raise ConfigError(f"cannot force flow {flow_target} in dimension {d}")
    n_minus = max(0, flow_target) + (d - abs(flow_target)) // 2
    rng = stream_rng(seed, 0)
    terms: List[Dict[str, Any]] = [
        {
            "profile": "tanh-sigmoid",
            "center": round(rng.uniform(-1.0, 1.0), 6),
            "width": round(rng.uniform(0.8, 1.3), 6),
            "coefficient": {"kind": "balance"},
        }
    ]
    if rng.uniform() < 0.5 and d > 1:
        width = round(rng.uniform(0.8, 1.2), 6)
        terms.append(
            {
                "profile": "tanh-sigmoid",
                "center": -1.2,
                "width": width,
                "coefficient": {"kind": "seeded-random-hermitian", "scale": 0.3, "stream": 7},
            }
        )
        terms.append(
            {
                "profile": "tanh-sigmoid",
                "center": 1.2,
                "width": width,
                "coefficient": {
                    "kind": "seeded-random-hermitian",
                    "scale": 0.3,
                    "stream": 7,
                    "negate": True,
                },
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "name": f"random-d{d}-flow{flow_target}-seed{seed}",
        "dimension": d,
        "seed": seed,
        "A_minus": {"kind": "seeded-random", "negatives": n_minus, "stream": 1},
        "A_plus": {"kind": "seeded-random", "negatives": n_minus - flow_target, "stream": 2},
        "terms": terms,
        "truncation": 8.0,
        "grid": {"T": 16.0, "N": 32001},
        "disc": {"N": 1401, "T": 14.0, "cap": 9000},
        "z_list": [-1.0],
        "experiments": ["index", "flow", "ssf-gap", "trace-formula"],
    }


def load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    validate_config(config)
    return config
