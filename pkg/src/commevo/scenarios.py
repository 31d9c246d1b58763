"""Named experiment presets for the command-line runner.

Each scenario builds its backend from numeric parameters, then produces one
row per dyadic level. Columns that do not apply to a backend are left empty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import magnus, nilpotent, schrodinger, weyl
from .coefficients import constant, linear, sine
from .commutators import commutation_pass_check
from .errors import ConfigError
from .evolution import convergence_order, dyadic_partition, product_approximant
from .fock import FockSpace


@dataclass
class Row:
    level: int
    cells: int
    error_oracle: float | None = None
    error_closed_form: float | None = None
    successive_difference: float | None = None
    norm_drift: float | None = None


@dataclass
class Outcome:
    rows: list[Row]
    order: float | None
    passed: bool
    detail: str = ""


@dataclass
class Scenario:
    name: str
    backend: str
    anchor: str
    defaults: dict[str, float]
    runner: Callable[[dict, list[int], float, np.random.Generator], Outcome]
    default_levels: tuple[int, ...] = tuple(range(3, 11))
    default_tol: float = 1e-3
    description: str = ""


def _fit(errors) -> float | None:
    e = [v for v in errors if v is not None and v > 1e-14]
    return convergence_order(e) if len(e) >= 3 else None


def _sweep(F, s, t, x, levels, exact=None, oracle=None, norm=None, oracle_distance=None) -> list[Row]:
    distance = F.distance
    if oracle is not None:
        oracle_distance = lambda y: distance(y, oracle)
    rows, prev = [], None
    for n in levels:
        part = dyadic_partition(s, t, n)
        y = product_approximant(F, part, s, t, x)
        row = Row(n, part.ncells)
        if exact is not None:
            row.error_closed_form = distance(y, exact)
        if oracle_distance is not None:
            row.error_oracle = oracle_distance(y)
        if prev is not None and prev[0] == n - 1:
            row.successive_difference = distance(y, prev[1])
        if norm is not None:
            row.norm_drift = abs(norm(y) - norm(x))
        rows.append(row)
        prev = (n, y)
    return rows


def _convergence(rows: list[Row], tol: float, column: str = "error_closed_form") -> Outcome:
    errors = [getattr(r, column) for r in rows]
    order = _fit(errors)
    final = errors[-1] if errors else None
    ok = final is not None and final <= tol and (order is None or order >= 0.9)
    return Outcome(rows, order, ok, f"final={final:.3e}" if final is not None else "")


def _residuals(rows: list[Row], tol: float) -> Outcome:
    worst = max((r.error_closed_form or 0.0) for r in rows) if rows else 0.0
    return Outcome(rows, None, worst <= tol, f"max_residual={worst:.3e}")


# matrix backends


def _heisenberg_family(p, rng):
    if p["random"]:
        return nilpotent.random_heisenberg(rng)
    return nilpotent.heisenberg_family(constant(p["a1"]), linear(p["slope"]))


def run_heisenberg_limit(p, levels, tol, rng):
    F = _heisenberg_family(p, rng)
    s, t = p["s"], p["t"]
    x = F.random_state(rng) if p["random"] else np.array([0.0, 0.0, 1.0], dtype=complex)
    exact = magnus.closed_form_propagator(F, s, t, x)
    oracle = nilpotent.ode_oracle(F, s, t).matrix @ x
    return _convergence(_sweep(F, s, t, x, levels, exact, oracle), tol)


def run_heisenberg_zassenhaus(p, levels, tol, rng):
    F = _heisenberg_family(p, rng)
    x = F.random_state(rng)
    rows = []
    for n in levels:
        part = dyadic_partition(p["s"], p["t"], n)
        res = max(magnus.zassenhaus_check(F, part, p["s"], p["t"], r, x) for r in (0.5, 1.0, 2.0))
        rows.append(Row(n, part.ncells, error_closed_form=res))
    return _residuals(rows, tol)


def run_nilpotent4_commutation(p, levels, tol, rng):
    F = nilpotent.random_nilpotent4(rng)
    field = F.commutator_field()
    x = F.random_state(rng)
    rows = []
    for n in levels:
        part = dyadic_partition(p["s"], p["t"], n)
        res = commutation_pass_check(F, field, part, p["s"], p["t"], p["r"], x)
        rows.append(Row(n, part.ncells, error_closed_form=res))
    return _residuals(rows, tol)


def run_nilpotent4_limit(p, levels, tol, rng):
    F = nilpotent.random_nilpotent4(rng)
    x = F.random_state(rng)
    oracle = nilpotent.ode_oracle(F, p["s"], p["t"]).matrix @ x
    return _convergence(_sweep(F, p["s"], p["t"], x, levels, oracle=oracle), tol, "error_oracle")


# boson field backends


def _source(p):
    return weyl.ModulatedSource([p["f0"]], p["frequency"])


def run_weyl_segal(p, levels, tol, rng):
    F = weyl.SegalFamily(_source(p))
    s, t = p["s"], p["t"]
    x = weyl.CoherentLabel([complex(p["alpha_re"], p["alpha_im"])])
    exact = magnus.closed_form_propagator(F, s, t, x)
    space = FockSpace(1, int(p["cutoff"]))
    psi = weyl.segal_fock_oracle(F.f, s, t, x, space, steps=int(p["steps"]))
    rows = _sweep(F, s, t, x, levels, exact,
                  oracle_distance=lambda y: float(np.linalg.norm(y.fock(space) - psi.amplitudes)))
    for r in rows:
        r.norm_drift = abs(psi.norm - 1.0)
    out = _convergence(rows, tol)
    out.detail += f" oracle_infidelity={1.0 - weyl.fidelity(exact, psi):.3e}"
    return out


def run_vanhove(p, levels, tol, rng):
    modes = weyl.ModeSpace([p["omega"]])
    F = weyl.VanHoveFamily(_source(p), modes)
    s, t = p["s"], p["t"]
    x = weyl.CoherentLabel([complex(p["alpha_re"], p["alpha_im"])])
    exact = F.propagate(s, t, x)
    space = FockSpace(1, int(p["cutoff"]))
    psi = weyl.vanhove_fock_oracle(F.f, modes, s, t, x, space, steps=int(p["steps"]))
    infid = 1.0 - weyl.fidelity(exact, psi)
    rows = _sweep(F, s, t, x, levels, exact,
                  oracle_distance=lambda y: float(np.linalg.norm(y.fock(space) - psi.amplitudes)))
    for r in rows:
        r.norm_drift = abs(psi.norm - 1.0)
    out = _convergence(rows, tol)
    out.detail += f" oracle_infidelity={infid:.3e}"
    return out


# Schrödinger backend

_PROFILES = {
    0: lambda a: constant(0.0),
    1: lambda a: constant(a),
    2: lambda a: linear(a),
    3: lambda a: sine(a, 2.0 * math.pi),
}


def run_schrodinger(p, levels, tol, rng):
    kind = int(p["profile"])
    if kind not in _PROFILES:
        raise ConfigError(f"profile must be one of {sorted(_PROFILES)}")
    grid = schrodinger.Grid(1, p["L"], int(p["n"]))
    prof = schrodinger.FieldProfile([_PROFILES[kind](p["amplitude"])])
    psi = schrodinger.gaussian_packet(grid, p["x0"], p["p0"], p["width"])
    s, t = p["s"], p["t"]
    exact = schrodinger.spectral_propagator(psi, prof, s, t)
    oracle = schrodinger.splitting_oracle(psi, prof, s, t, steps=int(p["steps"]))
    exact.check_interior()
    rows, prev = [], None
    for n in levels:
        y = schrodinger.product_limit(psi, prof, s, t, n)
        row = Row(n, 2**n, y.distance(oracle), y.distance(exact), None, abs(y.norm - psi.norm))
        if prev is not None and prev[0] == n - 1:
            row.successive_difference = y.distance(prev[1])
        rows.append(row)
        prev = (n, y)
    if kind in (0, 1):
        return _residuals(rows, tol)
    return _convergence(rows, tol)


_INTERVAL = {"s": 0.0, "t": 1.0}
_FIELD = {"f0": 1.0, "frequency": 1.0, "alpha_re": 0.0, "alpha_im": 0.0, "cutoff": 40, "steps": 2000}

SCENARIOS: dict[str, Scenario] = {}


def _register(sc: Scenario) -> None:
    SCENARIOS[sc.name] = sc


_register(Scenario(
    "heisenberg_limit", "heisenberg", "product limit equals the closed form (central 1-fold commutators)",
    {**_INTERVAL, "a1": 1.0, "slope": 1.0, "random": 0}, run_heisenberg_limit,
    description="a1 = const, a2 = slope * t; approximants vs closed form and RK4 oracle"))
_register(Scenario(
    "heisenberg_random", "heisenberg", "product limit equals the closed form (random polynomial family)",
    {**_INTERVAL, "a1": 1.0, "slope": 1.0, "random": 1}, run_heisenberg_limit, default_tol=1e-2,
    description="seeded random degree-4 coefficients with a central term"))
_register(Scenario(
    "heisenberg_zassenhaus", "heisenberg", "Zassenhaus-type decomposition of the averaged exponential",
    {**_INTERVAL, "a1": 1.0, "slope": 1.0, "random": 1}, run_heisenberg_zassenhaus,
    default_levels=(0, 1, 2, 3, 4), default_tol=1e-12,
    description="residual over r in {0.5, 1, 2}"))
_register(Scenario(
    "nilpotent4_commutation", "nilpotent4", "commutation pass with S^(1) and S^(2) (central 2-fold commutators)",
    {**_INTERVAL, "r": 0.37}, run_nilpotent4_commutation,
    default_levels=(0, 1, 2, 3), default_tol=1e-12,
    description="residual of A(r) U_n = U_n (A(r) + S1 + S2)"))
_register(Scenario(
    "nilpotent4_limit", "nilpotent4", "product limit for central 2-fold commutators",
    dict(_INTERVAL), run_nilpotent4_limit, default_tol=1e-2,
    description="approximants vs RK4 oracle on a random 4x4 family"))
_register(Scenario(
    "weyl_segal", "weyl", "Segal field evolution as a Weyl operator with a scalar phase",
    {**_INTERVAL, **_FIELD}, run_weyl_segal,
    description="f_t = f0 exp(i frequency t); labels vs closed form and Fock RK4"))
_register(Scenario(
    "vanhove_interaction", "vanhove", "van Hove evolution through the interaction picture",
    {"s": 0.0, "t": math.pi, **_FIELD, "omega": 1.0, "steps": 4000}, run_vanhove,
    description="frozen-source approximants vs interaction-picture formula and Fock RK4"))
_register(Scenario(
    "schrodinger_gauge", "schrodinger", "gauge equivalence for a time-dependent electric field",
    {**_INTERVAL, "profile": 2, "amplitude": 1.0, "L": 40.0, "n": 1024, "x0": 0.0, "p0": 0.0,
     "width": 1.0, "steps": 256}, run_schrodinger,
    description="profile 0: b=0, 1: b=a, 2: b=a t, 3: b=a sin(2 pi t)"))
_register(Scenario(
    "schrodinger_free", "schrodinger", "free Schrödinger group (field switched off)",
    {**_INTERVAL, "profile": 0, "amplitude": 0.0, "L": 40.0, "n": 1024, "x0": 0.0, "p0": 0.5,
     "width": 1.0, "steps": 64}, run_schrodinger,
    default_levels=(0, 1, 2), default_tol=1e-12,
    description="all errors at round-off"))


BACKENDS = ("heisenberg", "nilpotent4", "weyl", "vanhove", "schrodinger")


def list_scenarios(backend: str | None = None) -> list[Scenario]:
    return [sc for sc in SCENARIOS.values() if backend is None or sc.backend == backend]
