"""TOML model files.

Classical file::

    kind = "classical_ou"
    beta = [[2.0, 1.0], [-0.5, 3.0]]
    diffusion = [[1.0, 0.2], [0.2, 1.0]]     # or: sigma = [[...]]

Quantum file (complex entries as ``[re, im]`` or plain reals)::

    kind = "quadratic_lindblad"
    n_modes = 1
    h = [[[0.7, 0.0]]]
    [[baths]]
    l = [[1.549, 0.0]]
    p = [[0.0, 0.0]]

or the shorthand ``preset = "quantum_optical"`` with ``kappa``, ``nbar`` and
optional ``omega``. Shared ``[options]`` and ``[initial]`` tables are described
in the README.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli
import tomli_w

from ..errors import ParseError, ValidationError

__all__ = [
    "GridOptions",
    "Options",
    "ModelConfig",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "optical_baths",
]

KINDS = ("classical_ou", "quadratic_lindblad")
PRESETS = ("quantum_optical",)
TOP_KEYS = {
    "kind", "preset", "kappa", "nbar", "omega", "beta", "sigma", "diffusion",
    "n_modes", "h", "k", "baths", "options", "initial",
}


@dataclass(frozen=True)
class GridOptions:
    half_width: float = 3.0
    points: int = 41


@dataclass(frozen=True)
class Options:
    max_order: int = 12
    grid: GridOptions = field(default_factory=GridOptions)
    fock_cutoff: int = 30
    seed: int = 0
    tolerances: tuple = ()

    def tolerance(self, name, default):
        return dict(self.tolerances).get(name, default)


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    beta: tuple | None = None
    sigma: tuple | None = None
    diffusion: tuple | None = None
    n_modes: int | None = None
    h: tuple | None = None
    k: tuple | None = None
    baths: tuple = ()
    preset: str | None = None
    preset_params: tuple = ()
    x0: tuple | None = None
    alpha0: tuple | None = None
    t: float | None = None
    options: Options = field(default_factory=Options)

    @property
    def is_quantum(self):
        return self.kind == "quadratic_lindblad"

    def param(self, name, default=None):
        return dict(self.preset_params).get(name, default)


class _Lines:
    """Maps dotted key paths to the line that defines them."""

    header = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.\-\s\"]+?)\s*\]\]?\s*(#.*)?$")
    keyline = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")

    def __init__(self, text):
        self.index = {}
        prefix = ()
        counts = {}
        for num, line in enumerate(text.splitlines(), start=1):
            m = self.header.match(line)
            if m:
                parts = tuple(p.strip().strip('"') for p in m.group(2).split("."))
                if m.group(1) == "[[":
                    counts[parts] = counts.get(parts, -1) + 1
                    prefix = parts + (counts[parts],)
                else:
                    prefix = parts
                self.index.setdefault(prefix, num)
                continue
            m = self.keyline.match(line)
            if m:
                self.index.setdefault(prefix + (m.group(1),), num)

    def line(self, *path):
        while path:
            if path in self.index:
                return self.index[path]
            path = path[:-1]
        return None


def _fail(lines, path, reason):
    raise ValidationError(".".join(str(p) for p in path), reason, lines.line(*path))


def _real(value, lines, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(lines, path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(lines, path, "must be finite")
    return value


def _complex(value, lines, path):
    if isinstance(value, list):
        if len(value) != 2:
            _fail(lines, path, "complex numbers are written [re, im]")
        return complex(_real(value[0], lines, path), _real(value[1], lines, path))
    return complex(_real(value, lines, path), 0.0)


def _matrix(value, lines, path, entry, n=None):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        _fail(lines, path, "expected a non-empty list of rows")
    rows = len(value)
    if n is not None and rows != n:
        _fail(lines, path, f"expected {n} rows, got {rows}")
    out = []
    for i, row in enumerate(value):
        if len(row) != rows:
            _fail(lines, path, f"row {i} has length {len(row)}, matrix must be {rows}x{rows}")
        out.append(tuple(entry(x, lines, path) for x in row))
    return tuple(out)


def _vector(value, lines, path, entry, n):
    if not isinstance(value, list) or len(value) != n:
        _fail(lines, path, f"expected a list of length {n}")
    return tuple(entry(x, lines, path) for x in value)


def _int(value, lines, path, low, high=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(lines, path, f"expected an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        _fail(lines, path, f"must lie in {bound}")
    return value


def optical_baths(kappa, nbar):
    """Loss and pump rows for ``gamma_down = 2 kappa (nbar+1)``, ``gamma_up = 2 kappa nbar``."""
    g_down = 2.0 * kappa * (nbar + 1.0)
    g_up = 2.0 * kappa * nbar
    baths = [((complex(math.sqrt(g_down)),), (0j,))]
    if g_up:
        baths.append(((0j,), (complex(math.sqrt(g_up)),)))
    return tuple(baths)


def _parse_options(raw, lines):
    if raw is None:
        return Options()
    if not isinstance(raw, dict):
        _fail(lines, ("options",), "must be a table")
    unknown = set(raw) - {"max_order", "grid", "fock_cutoff", "seed", "tolerances"}
    if unknown:
        _fail(lines, ("options", sorted(unknown)[0]), "unknown option")
    grid = GridOptions()
    if "grid" in raw:
        g = raw["grid"]
        if not isinstance(g, dict) or set(g) - {"half_width", "points"}:
            _fail(lines, ("options", "grid"), "grid takes half_width and points")
        hw = _real(g.get("half_width", 3.0), lines, ("options", "grid", "half_width"))
        if hw <= 0:
            _fail(lines, ("options", "grid", "half_width"), "must be positive")
        pts = _int(g.get("points", 41), lines, ("options", "grid", "points"), 2, 2001)
        grid = GridOptions(hw, pts)
    tols = []
    for name, val in sorted(raw.get("tolerances", {}).items()):
        v = _real(val, lines, ("options", "tolerances", name))
        if v <= 0:
            _fail(lines, ("options", "tolerances", name), "must be positive")
        tols.append((name, v))
    return Options(
        max_order=_int(raw.get("max_order", 12), lines, ("options", "max_order"), 0, 60),
        grid=grid,
        fock_cutoff=_int(raw.get("fock_cutoff", 30), lines, ("options", "fock_cutoff"), 1, 60),
        seed=_int(raw.get("seed", 0), lines, ("options", "seed"), 0),
        tolerances=tuple(tols),
    )


def _parse_initial(raw, lines, cfg_kind, n):
    if raw is None:
        return {}
    if not isinstance(raw, dict) or set(raw) - {"x0", "alpha0", "t"}:
        _fail(lines, ("initial",), "initial takes x0, alpha0 and t")
    out = {}
    if "t" in raw:
        t = _real(raw["t"], lines, ("initial", "t"))
        if t < 0:
            _fail(lines, ("initial", "t"), "must be non-negative")
        out["t"] = t
    if "x0" in raw:
        if cfg_kind != "classical_ou":
            _fail(lines, ("initial", "x0"), "x0 is for classical models; use alpha0")
        out["x0"] = _vector(raw["x0"], lines, ("initial", "x0"), _real, n)
    if "alpha0" in raw:
        if cfg_kind != "quadratic_lindblad":
            _fail(lines, ("initial", "alpha0"), "alpha0 is for quantum models; use x0")
        val = raw["alpha0"]
        if n == 1 and isinstance(val, list) and len(val) == 2 and not isinstance(val[0], list):
            val = [val]
        out["alpha0"] = _vector(val, lines, ("initial", "alpha0"), _complex, n)
    return out


def parse_config_text(text: str) -> ModelConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        msg = getattr(exc, "msg", str(exc))
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise ParseError(line, msg) from None
    lines = _Lines(text)

    unknown = set(raw) - TOP_KEYS
    if unknown:
        _fail(lines, (sorted(unknown)[0],), "unknown key")
    options = _parse_options(raw.get("options"), lines)

    preset = raw.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            _fail(lines, ("preset",), f"unknown preset {preset!r}; known: {', '.join(PRESETS)}")
        kind = raw.get("kind", "quadratic_lindblad")
        if kind != "quadratic_lindblad":
            _fail(lines, ("kind",), "quantum_optical preset implies kind = 'quadratic_lindblad'")
        clash = set(raw) & {"beta", "sigma", "diffusion", "n_modes", "h", "k", "baths"}
        if clash:
            _fail(lines, (sorted(clash)[0],), "cannot combine a preset with explicit matrices")
        kappa = _real(raw.get("kappa", 1.0), lines, ("kappa",))
        nbar = _real(raw.get("nbar", 0.0), lines, ("nbar",))
        omega = _real(raw.get("omega", 0.0), lines, ("omega",))
        if kappa <= 0:
            _fail(lines, ("kappa",), "must be positive")
        if nbar < 0:
            _fail(lines, ("nbar",), "must be non-negative")
        init = _parse_initial(raw.get("initial"), lines, kind, 1)
        return ModelConfig(
            kind=kind,
            n_modes=1,
            h=((complex(omega),),),
            k=((0j,),),
            baths=optical_baths(kappa, nbar),
            preset=preset,
            preset_params=(("kappa", kappa), ("nbar", nbar), ("omega", omega)),
            options=options,
            **init,
        )
    for key in ("kappa", "nbar", "omega"):
        if key in raw:
            _fail(lines, (key,), "only valid together with a preset")

    kind = raw.get("kind")
    if kind not in KINDS:
        _fail(lines, ("kind",), f"kind must be one of {', '.join(KINDS)}")

    if kind == "classical_ou":
        for key in ("n_modes", "h", "k", "baths"):
            if key in raw:
                _fail(lines, (key,), "not valid for a classical model")
        if "beta" not in raw:
            _fail(lines, ("beta",), "missing drift matrix")
        beta = _matrix(raw["beta"], lines, ("beta",), _real)
        n = len(beta)
        has_sigma, has_diff = "sigma" in raw, "diffusion" in raw
        if has_sigma == has_diff:
            _fail(lines, ("sigma" if has_sigma else "diffusion",), "give exactly one of sigma or diffusion")
        sigma = diffusion = None
        if has_sigma:
            sigma = _matrix(raw["sigma"], lines, ("sigma",), _real, n)
        else:
            diffusion = _matrix(raw["diffusion"], lines, ("diffusion",), _real, n)
            for i in range(n):
                for j in range(i):
                    if abs(diffusion[i][j] - diffusion[j][i]) > 1e-12 * max(1.0, abs(diffusion[i][j])):
                        _fail(lines, ("diffusion",), f"not symmetric at ({i}, {j})")
        init = _parse_initial(raw.get("initial"), lines, kind, n)
        return ModelConfig(kind=kind, beta=beta, sigma=sigma, diffusion=diffusion, options=options, **init)

    for key in ("beta", "sigma", "diffusion"):
        if key in raw:
            _fail(lines, (key,), "not valid for a quantum model")
    if "n_modes" not in raw:
        _fail(lines, ("n_modes",), "missing mode count")
    n = _int(raw["n_modes"], lines, ("n_modes",), 1, 8)
    if "h" not in raw:
        _fail(lines, ("h",), "missing Hamiltonian matrix")
    h = _matrix(raw["h"], lines, ("h",), _complex, n)
    for i in range(n):
        for j in range(i + 1):
            if abs(h[i][j] - h[j][i].conjugate()) > 1e-12:
                _fail(lines, ("h",), f"not Hermitian at ({i}, {j})")
    if "k" in raw:
        k = _matrix(raw["k"], lines, ("k",), _complex, n)
        for i in range(n):
            for j in range(i):
                if abs(k[i][j] - k[j][i]) > 1e-12:
                    _fail(lines, ("k",), f"not symmetric at ({i}, {j})")
    else:
        k = tuple(tuple(0j for _ in range(n)) for _ in range(n))
    baths = []
    raw_baths = raw.get("baths", [])
    if not isinstance(raw_baths, list):
        _fail(lines, ("baths",), "use [[baths]] tables")
    for b, bath in enumerate(raw_baths):
        if not isinstance(bath, dict) or set(bath) - {"l", "p"}:
            _fail(lines, ("baths", b), "each bath takes l and p")
        zero = [0.0] * n
        l = _vector(bath.get("l", zero), lines, ("baths", b, "l"), _complex, n)
        p = _vector(bath.get("p", zero), lines, ("baths", b, "p"), _complex, n)
        baths.append((l, p))
    init = _parse_initial(raw.get("initial"), lines, kind, n)
    return ModelConfig(kind=kind, n_modes=n, h=h, k=k, baths=tuple(baths), options=options, **init)


def parse_config(path) -> ModelConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(None, f"no such file: {path}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(None, f"not UTF-8: {exc}") from None
    return parse_config_text(text)


def _c(z):
    return [z.real, z.imag]


def serialize_config(cfg: ModelConfig) -> str:
    """TOML text that parses back to an equal :class:`ModelConfig`."""
    doc = {}
    if cfg.preset is not None:
        doc["preset"] = cfg.preset
        for name, val in cfg.preset_params:
            doc[name] = val
    else:
        doc["kind"] = cfg.kind
        if cfg.kind == "classical_ou":
            doc["beta"] = [list(r) for r in cfg.beta]
            if cfg.sigma is not None:
                doc["sigma"] = [list(r) for r in cfg.sigma]
            else:
                doc["diffusion"] = [list(r) for r in cfg.diffusion]
        else:
            doc["n_modes"] = cfg.n_modes
            doc["h"] = [[_c(z) for z in r] for r in cfg.h]
            doc["k"] = [[_c(z) for z in r] for r in cfg.k]
            if cfg.baths:
                doc["baths"] = [{"l": [_c(z) for z in l], "p": [_c(z) for z in p]} for l, p in cfg.baths]
    init = {}
    if cfg.t is not None:
        init["t"] = cfg.t
    if cfg.x0 is not None:
        init["x0"] = list(cfg.x0)
    if cfg.alpha0 is not None:
        init["alpha0"] = [_c(z) for z in cfg.alpha0]
    if init:
        doc["initial"] = init
    o = cfg.options
    opts = {
        "max_order": o.max_order,
        "fock_cutoff": o.fock_cutoff,
        "seed": o.seed,
        "grid": {"half_width": o.grid.half_width, "points": o.grid.points},
    }
    if o.tolerances:
        opts["tolerances"] = dict(o.tolerances)
    doc["options"] = opts
    return tomli_w.dumps(doc)


def with_overrides(cfg: ModelConfig, **changes) -> ModelConfig:
    return replace(cfg, **changes)
