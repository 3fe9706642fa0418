"""Experiment description files: a line-oriented key=value grammar.

Scalars are `key = value` lines; matrices live between `begin matrix NAME`
and `end matrix` fences, one row per line, entries written as "a+bi" with
decimal (optionally exponent-form) real and imaginary parts.  Blank lines
and `#` comments are ignored.  Unknown keys are rejected, and
emit(parse(text)) reparses to an equal config byte-for-byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

KINDS = ("classify", "ergodic", "semigroup", "group", "folner-audit", "duality")
GROUPS = ("Z", "heisenberg", "cyclic")

_INT_KEYS = ("dim", "seed", "trials", "group_param")
_FLOAT_KEYS = ("tol_psd", "tol_eq")
_LIST_INT_KEYS = ("n_list",)
_LIST_FLOAT_KEYS = ("lambda_list",)
_BOOL_KEYS = ("check_converse",)
_STR_KEYS = ("kind", "group")
_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _LIST_INT_KEYS + _LIST_FLOAT_KEYS + _BOOL_KEYS + _STR_KEYS

_NUM = r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?"
_ENTRY_RE = re.compile(rf"^({_NUM})([+-](?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?)i$")
_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass
class ExperimentConfig:
    """Parsed experiment: a kind, scalar options and named matrix blocks."""

    kind: str
    dim: int | None = None
    seed: int = 0
    trials: int = 50
    n_list: tuple = ()
    lambda_list: tuple = ()
    group: str | None = None
    group_param: int | None = None
    check_converse: bool = False
    tol_psd: float | None = None
    tol_eq: float | None = None
    matrices: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        scalars = ("kind", "dim", "seed", "trials", "n_list", "lambda_list",
                   "group", "group_param", "check_converse", "tol_psd", "tol_eq")
        if any(getattr(self, k) != getattr(other, k) for k in scalars):
            return False
        if set(self.matrices) != set(other.matrices):
            return False
        return all(np.array_equal(self.matrices[k], other.matrices[k])
                   for k in self.matrices)

    def matrix_group(self, prefix: str) -> list:
        """Matrices named `<prefix><k>` for k = 1, 2, ..., in index order."""
        out = []
        k = 1
        while f"{prefix}{k}" in self.matrices:
            out.append(self.matrices[f"{prefix}{k}"])
            k += 1
        return out


def _parse_entry(token: str, lineno: int) -> complex:
    m = _ENTRY_RE.match(token)
    if not m:
        raise ParseError(f"bad complex entry {token!r}, expected a+bi form", lineno)
    return complex(float(m.group(1)), float(m.group(2)))


def _parse_scalar(key: str, value: str, lineno: int):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _LIST_INT_KEYS:
            return tuple(int(v.strip()) for v in value.split(",") if v.strip())
        if key in _LIST_FLOAT_KEYS:
            return tuple(float(v.strip()) for v in value.split(",") if v.strip())
        if key in _BOOL_KEYS:
            if value not in ("true", "false"):
                raise ValueError(value)
            return value == "true"
        return value
    except ValueError:
        raise ParseError(f"bad value {value!r} for key {key!r}", lineno) from None


def parse_problem(text: str) -> ExperimentConfig:
    """Parse an experiment description; raises ParseError with a line number."""
    scalars = {}
    matrices = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        if line.startswith("begin matrix"):
            parts = line.split()
            if len(parts) != 3 or not _NAME_RE.match(parts[2]):
                raise ParseError("expected 'begin matrix NAME'", lineno)
            name = parts[2]
            if name in matrices:
                raise ParseError(f"duplicate matrix block {name!r}", lineno)
            rows = []
            while True:
                if i >= len(lines):
                    raise ParseError(f"matrix block {name!r} missing 'end matrix'", lineno)
                row_no = i + 1
                row_line = lines[i].strip()
                i += 1
                if row_line == "end matrix":
                    break
                if not row_line or row_line.startswith("#"):
                    continue
                row = [_parse_entry(tok, row_no) for tok in row_line.split()]
                if rows and len(row) != len(rows[0]):
                    raise ParseError("ragged matrix row", row_no)
                rows.append(row)
            if not rows:
                raise ParseError(f"matrix block {name!r} is empty", lineno)
            matrices[name] = np.array(rows, dtype=complex)
            continue
        if line == "end matrix":
            raise ParseError("'end matrix' without matching begin", lineno)
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in scalars:
            raise ParseError(f"duplicate key {key!r}", lineno)
        scalars[key] = _parse_scalar(key, value, lineno)

    if "kind" not in scalars:
        raise ParseError("missing required key 'kind'", len(lines) or 1)
    config = ExperimentConfig(matrices=matrices, **scalars)
    validate(config)
    return config


def _format_float(x: float) -> str:
    return repr(float(x))


def _format_entry(z: complex) -> str:
    re_s = _format_float(z.real)
    im = float(z.imag)
    im_s = _format_float(im)
    if not im_s.startswith("-"):
        im_s = "+" + im_s
    return f"{re_s}{im_s}i"


def emit(config: ExperimentConfig) -> str:
    """Deterministic text form; emit(parse(text)) reparses to an equal config."""
    out = [f"kind = {config.kind}"]
    defaults = ExperimentConfig(kind=config.kind)
    for key in sorted(set(_ALL_KEYS) - {"kind"}):
        value = getattr(config, key.replace("-", "_"))
        if value == getattr(defaults, key):
            continue
        if key in _BOOL_KEYS:
            out.append(f"{key} = {'true' if value else 'false'}")
        elif key in _LIST_INT_KEYS:
            out.append(f"{key} = {','.join(str(v) for v in value)}")
        elif key in _LIST_FLOAT_KEYS:
            out.append(f"{key} = {','.join(_format_float(v) for v in value)}")
        elif key in _FLOAT_KEYS:
            out.append(f"{key} = {_format_float(value)}")
        else:
            out.append(f"{key} = {value}")
    for name in sorted(config.matrices):
        out.append(f"begin matrix {name}")
        for row in np.atleast_2d(config.matrices[name]):
            out.append(" ".join(_format_entry(z) for z in row))
        out.append("end matrix")
    return "\n".join(out) + "\n"


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _group_generator_names(config: ExperimentConfig):
    if config.group == "Z":
        d = config.group_param
        _require(d is not None and d >= 1, "Z group requires group_param = d >= 1")
        return [f"u{i + 1}" for i in range(d)]
    if config.group == "heisenberg":
        return ["x", "y", "z"]
    if config.group == "cyclic":
        _require(config.group_param is not None and config.group_param >= 1,
                 "cyclic group requires group_param = N >= 1")
        return ["u1"]
    raise ValidationError(f"unknown group {config.group!r}, expected one of {GROUPS}")


def validate(config: ExperimentConfig):
    """Structural consistency checks; raises ValidationError."""
    _require(config.kind in KINDS, f"unknown kind {config.kind!r}, expected one of {KINDS}")
    _require(config.seed >= 0, "seed must be nonnegative")
    _require(config.trials >= 1, "trials must be >= 1")
    _require(all(n >= 1 for n in config.n_list), "n_list entries must be >= 1")
    _require(all(lam > 0 for lam in config.lambda_list), "lambda_list entries must be > 0")

    dim = config.dim
    for name, mat in config.matrices.items():
        _require(mat.ndim == 2 and mat.shape[0] == mat.shape[1],
                 f"matrix {name!r} must be square")
        if dim is None and name != "superop":
            dim = mat.shape[0]
    if dim is not None:
        for name, mat in config.matrices.items():
            want = dim * dim if name == "superop" else dim
            _require(mat.shape[0] == want,
                     f"matrix {name!r} has size {mat.shape[0]}, expected {want}")
    config.dim = dim

    kind = config.kind
    if kind in ("classify", "ergodic"):
        has_kraus = bool(config.matrix_group("kraus"))
        _require(has_kraus != ("superop" in config.matrices),
                 f"{kind} needs exactly one of kraus1.. blocks or a superop block")
        _require(dim is not None, f"{kind} requires a map of known dimension")
        if kind == "ergodic":
            _require(config.n_list, "ergodic requires a nonempty n_list")
    elif kind == "semigroup":
        _require("hamiltonian" in config.matrices, "semigroup requires a hamiltonian block")
        _require(config.lambda_list, "semigroup requires a nonempty lambda_list")
    elif kind == "duality":
        count = 1
        while config.matrix_group(f"map{count}_kraus"):
            count += 1
        _require(count - 1 >= 2, "duality requires at least map1_kraus1 and map2_kraus1")
        for name in config.matrices:
            if name.startswith("map"):
                _require(re.match(r"^map\d+_kraus\d+$", name) is not None,
                         f"unrecognized duality block {name!r}")
    elif kind in ("group", "folner-audit"):
        _require(config.group is not None, f"{kind} requires a group")
        names = _group_generator_names(config)
        _require(config.n_list, f"{kind} requires a nonempty n_list")
        if kind == "group":
            found = sorted(n[len("unitary_"):] for n in config.matrices
                           if n.startswith("unitary_"))
            _require(found == sorted(names),
                     f"group action needs unitaries for exactly {names}, found {found}")
    if kind != "folner-audit":
        _require(dim is not None, f"{kind} requires at least one matrix block")
