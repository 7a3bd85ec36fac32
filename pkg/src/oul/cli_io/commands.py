"""Command implementations behind the ``oul`` entry point."""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .. import __version__
from .. import lindblad_core as lc
from .. import ou_core as oc
from ..errors import PreconditionError, ValidationError
from .acceptance import SUITES, CheckContext, CheckResult, run_check
from .config import ModelConfig, serialize_config
from .table import ResultTable

__all__ = [
    "build_model",
    "cmd_spectrum",
    "cmd_ness",
    "cmd_eigfun",
    "cmd_covariance",
    "cmd_propagate",
    "cmd_verify",
    "report_json",
]

REPORT_SCHEMA = 1


def build_model(cfg: ModelConfig):
    if cfg.is_quantum:
        baths = tuple((np.array(l), np.array(p)) for l, p in cfg.baths)
        return lc.LindbladModel(np.array(cfg.h), np.array(cfg.k), baths)
    if cfg.sigma is not None:
        return oc.OUModel.from_sigma(np.array(cfg.beta), np.array(cfg.sigma))
    return oc.OUModel(np.array(cfg.beta), np.array(cfg.diffusion))


def _normal_form(cfg):
    model = build_model(cfg)
    if cfg.is_quantum:
        return model, lc.q_normal_form(lc.build_complex_ou(model))
    return model, oc.normal_form(model)


def _metadata(cfg, command, seed=None):
    text = serialize_config(cfg)
    return {
        "model_hash": hashlib.sha256(text.encode()).hexdigest()[:16],
        "tool_version": __version__,
        "command": command,
        "seed": cfg.options.seed if seed is None else seed,
    }


def _grid_points(cfg, dim):
    """Tensor grid from the options; ``dim`` real axes."""
    if dim > 2:
        raise ValidationError("options.grid", f"grid output supports at most 2 real axes, model needs {dim}")
    g = np.linspace(-cfg.options.grid.half_width, cfg.options.grid.half_width, cfg.options.grid.points)
    mesh = np.meshgrid(*([g] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _add_coordinates(table, cfg, pts):
    if cfg.is_quantum:
        table.add("alpha_re", pts[:, 0])
        table.add("alpha_im", pts[:, 1])
    else:
        for i in range(pts.shape[1]):
            table.add(f"x{i + 1}", pts[:, i])


def _eval_points(cfg, pts):
    return pts[:, :1] + 1j * pts[:, 1:2] if cfg.is_quantum else pts


def _real_axes(cfg, n):
    return 2 * n if cfg.is_quantum else n


def cmd_spectrum(cfg: ModelConfig, order=None, command="spectrum"):
    _, nf = _normal_form(cfg)
    order = cfg.options.max_order if order is None else order
    modes = lc.q_spectrum(nf, order) if cfg.is_quantum else oc.spectrum(nf, order)
    table = ResultTable(metadata=_metadata(cfg, command))
    idx = np.array([m.index for m in modes])
    for i in range(idx.shape[1]):
        table.add(f"mu{i + 1}", idx[:, i])
    table.add("eigenvalue", np.array([m.eigenvalue for m in modes], dtype=complex))
    return table


def cmd_ness(cfg: ModelConfig, command="ness"):
    _, nf = _normal_form(cfg)
    n = nf.n_modes if cfg.is_quantum else nf.dim
    pts = _grid_points(cfg, _real_axes(cfg, n))
    x = _eval_points(cfg, pts)
    value = lc.q_ness(nf, x) if cfg.is_quantum else oc.ness_density(nf, x)
    table = ResultTable(metadata=_metadata(cfg, command))
    _add_coordinates(table, cfg, pts)
    table.add("density", value)
    return table


def _parse_mu(mu, length):
    if mu is None:
        return (1,) + (0,) * (length - 1)
    mu = tuple(int(v) for v in str(mu).split(","))
    if len(mu) != length or any(v < 0 for v in mu):
        raise ValidationError("mu", f"need {length} non-negative integers")
    return mu


def cmd_eigfun(cfg: ModelConfig, mu=None, command="eigfun"):
    _, nf = _normal_form(cfg)
    n = nf.n_modes if cfg.is_quantum else nf.dim
    mu = _parse_mu(mu, 2 * n if cfg.is_quantum else n)
    pts = _grid_points(cfg, _real_axes(cfg, n))
    x = _eval_points(cfg, pts)
    if cfg.is_quantum:
        right = lc.q_right_eigenfunction(nf, mu, x)
        left = lc.q_left_eigenfunction(nf, mu, x)
        eig = -np.dot(mu, nf.nf.delta)
    else:
        right = oc.right_eigenfunction(nf, mu, x)
        left = oc.left_eigenfunction(nf, mu, x)
        eig = -np.dot(mu, nf.delta)
    table = ResultTable(metadata={**_metadata(cfg, command), "mu": ",".join(map(str, mu)), "eigenvalue": complex(eig)})
    _add_coordinates(table, cfg, pts)
    table.add("right", np.asarray(right, dtype=complex))
    table.add("left", np.asarray(left, dtype=complex))
    return table


def cmd_covariance(cfg: ModelConfig, t=None, steps=50, command="covariance"):
    """Covariance from the point initial state (classical) or a coherent state (quantum)."""
    t = _time(cfg, t)
    model = build_model(cfg)
    times = np.linspace(0.0, t, steps + 1)
    if cfg.is_quantum:
        form = lc.build_complex_ou(model)
        sigma0 = lc.coherent_covariance(model.n_modes)
        series = [lc.covariance_evolution(form, sigma0, s) for s in times]
    else:
        sigma0 = np.zeros((model.dim, model.dim))
        series = [oc.covariance_trajectory(model, sigma0, s) for s in times]
    table = ResultTable(metadata=_metadata(cfg, command))
    table.add("t", times)
    size = series[0].shape[0]
    for i in range(size):
        for j in range(i, size):
            table.add(f"sigma_{i + 1}{j + 1}", np.array([s[i, j] for s in series]))
    return table


def _time(cfg, t):
    t = cfg.t if t is None else t
    if t is None:
        raise ValidationError("t", "give --t or initial.t")
    if t < 0:
        raise ValidationError("t", "must be non-negative")
    return float(t)


def cmd_propagate(cfg: ModelConfig, t=None, x0=None, alpha0=None, order=None, command="propagate"):
    t = _time(cfg, t)
    _, nf = _normal_form(cfg)
    order = cfg.options.max_order if order is None else order
    table = ResultTable(metadata=_metadata(cfg, command))
    if cfg.is_quantum:
        alpha0 = cfg.alpha0 if alpha0 is None else alpha0
        if alpha0 is None:
            raise ValidationError("alpha0", "propagation needs a coherent initial amplitude")
        if nf.n_modes != 1:
            raise ValidationError("n_modes", "grid output supports single-mode models only")
        pts = _grid_points(cfg, 2)
        value = lc.propagate_q_spectral(nf, np.asarray(alpha0, dtype=complex), t, _eval_points(cfg, pts), max_total_order=order)
    else:
        x0 = cfg.x0 if x0 is None else x0
        if x0 is None:
            raise ValidationError("x0", "propagation needs an initial point")
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (nf.dim,):
            raise ValidationError("x0", f"expected {nf.dim} components")
        if t == 0:
            raise ValidationError("t", "the transition density is singular at t = 0")
        pts = _grid_points(cfg, nf.dim)
        value = oc.transition_density(nf, pts, x0, t, max_total_order=order)
    table.metadata["t"] = t
    _add_coordinates(table, cfg, pts)
    table.add("density", np.real(value))
    return table


def _context(cfg: ModelConfig):
    opts = cfg.options
    kw = dict(
        fock_cutoff=opts.fock_cutoff,
        grid_half_width=opts.grid.half_width,
        grid_points=opts.grid.points,
        seed=opts.seed,
    )
    if cfg.preset == "quantum_optical":
        kw.update(kappa=cfg.param("kappa"), nbar=cfg.param("nbar"))
        if cfg.param("omega"):
            kw["omega"] = cfg.param("omega")
    if not cfg.is_quantum:
        model = build_model(cfg)
        kw["extra_classical"] = ((model.beta, model.d),)
    return CheckContext(**kw)


def cmd_verify(cfg: ModelConfig, suite="all"):
    """Run a suite; returns ``(results, exit_code)``.

    A configured model that violates a precondition is reported as a failed
    ``precondition`` check (number 0) and yields exit code 2.
    """
    if suite not in SUITES:
        raise ValidationError("suite", f"must be one of {', '.join(SUITES)}")
    try:
        _normal_form(cfg)
    except PreconditionError as exc:
        res = CheckResult(0, "model precondition", float("inf"), 1.0, False, 0.0, {}, f"{type(exc).__name__}: {exc}")
        return [res], 2
    ctx = _context(cfg)
    results = [run_check(n, ctx) for n in SUITES[suite]]
    return results, 0 if all(r.passed for r in results) else 1


def report_json(results, suite, cfg):
    """One JSON document; each check sits on its own line."""
    head = {
        "schema": REPORT_SCHEMA,
        "suite": suite,
        "tool_version": __version__,
        "model_hash": _metadata(cfg, "verify")["model_hash"],
        "passed": all(r.passed for r in results),
    }
    lines = ["{"]
    for key, val in head.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(val)},")
    lines.append('  "checks": [')
    body = [f"    {json.dumps(r.as_dict(), default=_json_default)}" for r in results]
    lines.append(",\n".join(body))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(type(obj).__name__)
