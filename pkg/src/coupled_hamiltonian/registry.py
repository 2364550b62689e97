"""Named models for the command line, with their parameter schemas."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import CoupledSystem, PhaseState
from .exceptions import UsageError
from . import models


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    doc: str = ""

    @property
    def kind(self):
        return type(self.default)


@dataclass(frozen=True, eq=False)
class ModelInstance:
    """A built system plus what the CSV writer needs to know about it.

    ``observables`` maps column names to functions of the flat state;
    ``energy_names`` names the columns for ``H1`` and ``H2`` (``None`` to omit).
    """

    system: CoupledSystem
    initial_state: PhaseState
    observables: dict = field(default_factory=dict)
    energy_names: tuple = (None, None)


@dataclass(frozen=True)
class ModelEntry:
    name: str
    description: str
    params: tuple
    build: Callable[[dict], ModelInstance]

    def defaults(self):
        return {p.name: p.default for p in self.params}

    def coerce(self, key, raw):
        """Convert a raw config value to the declared type of ``key``."""
        spec = {p.name: p for p in self.params}.get(key)
        if spec is None:
            raise UsageError(f"model {self.name!r} has no parameter {key!r}")
        if isinstance(spec.default, bool):
            if str(raw).lower() in ("1", "true", "yes", "on"):
                return True
            if str(raw).lower() in ("0", "false", "no", "off"):
                return False
            raise UsageError(f"parameter {key!r} expects a boolean, got {raw!r}")
        try:
            if isinstance(spec.default, int):
                value = float(raw)
                if value != int(value):
                    raise ValueError
                return int(value)
            if isinstance(spec.default, float):
                return float(raw)
        except ValueError:
            raise UsageError(f"parameter {key!r} expects {spec.kind.__name__}, got {raw!r}") from None
        return str(raw)


_REGISTRY: dict = {}


def register_model(entry):
    """Add ``entry`` to the registry, replacing any model of the same name."""
    _REGISTRY[entry.name] = entry
    return entry


def unregister_model(name):
    _REGISTRY.pop(name, None)


def get_model(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UsageError(f"unknown model {name!r}; available: {', '.join(sorted(_REGISTRY))}") from None


def list_models():
    return [_REGISTRY[name] for name in sorted(_REGISTRY)]


def build_model(name, params: Optional[dict] = None):
    entry = get_model(name)
    values = entry.defaults()
    for key, raw in (params or {}).items():
        values[key] = entry.coerce(key, raw)
    try:
        return entry.build(values)
    except ValueError as exc:
        raise UsageError(f"model {name!r}: {exc}") from exc


def _build_beam_spring(v):
    beam = models.BeamParams(v["rho"], v["area"], v["modulus"], v["inertia"], v["length"], v["n_x"])
    spring = models.SpringMassParams(v["m1"], v["m2"], v["k"])
    coupling = models.CouplingSpec(v["n_b"], v["b"])
    system = models.build_coupled_beam_spring(beam, spring, coupling)
    state = models.build_initial_state(beam, spring, coupling, q2_0=v["q2_0"])
    L = system.layout
    u_nb = L.q1.start + coupling.n_b - 1
    return ModelInstance(system, state,
                         {"u_nb": lambda z: z[u_nb],
                          "q1": lambda z: z[L.q2.start],
                          "q2": lambda z: z[L.q2.start + 1]},
                         ("H_el", "H_sp"))


def _build_spring_mass(v):
    system = models.build_spring_mass_system(models.SpringMassParams(v["m1"], v["m2"], v["k"]))
    state = system.layout.state([v["q1_0"], v["q2_0"], v["p1_0"], v["p2_0"]])
    return ModelInstance(system, state, {"q1": lambda z: z[0], "q2": lambda z: z[1]},
                         ("H_sp", None))


def _build_harmonic(v):
    system = models.build_coupled_oscillators(v["coupling"], v["gamma"])
    state = system.layout.state([v["q1_0"], v["p1_0"], v["q2_0"], v["p2_0"]])
    return ModelInstance(system, state, {"q1": lambda z: z[0], "q2": lambda z: z[2]})


register_model(ModelEntry(
    "beam_spring",
    "simply supported beam coupled at node n_b to mass m1 of a spring-mass pair",
    (
        Param("rho", 10.0, "density"),
        Param("area", 1.0, "cross-sectional area A"),
        Param("modulus", 1.0, "elastic modulus E"),
        Param("inertia", 1.0, "second moment of area I"),
        Param("length", 1.0, "beam length L"),
        Param("n_x", 50, "number of grid intervals (dx = length / n_x)"),
        Param("n_b", 10, "coupling node index, 1 <= n_b <= n_x - 1"),
        Param("b", 0.2, "coupling abscissa (consistency check only)"),
        Param("m1", 0.1, "coupled mass"),
        Param("m2", 0.1, "free mass"),
        Param("k", 0.5, "spring stiffness"),
        Param("q2_0", -1.0, "initial position of m2"),
    ),
    _build_beam_spring,
))

register_model(ModelEntry(
    "spring_mass",
    "two masses joined by a linear spring",
    (
        Param("m1", 0.1, "mass 1"),
        Param("m2", 0.1, "mass 2"),
        Param("k", 0.5, "spring stiffness"),
        Param("q1_0", 0.0, "initial q1"),
        Param("q2_0", -1.0, "initial q2"),
        Param("p1_0", 0.0, "initial p1"),
        Param("p2_0", 0.0, "initial p2"),
    ),
    _build_spring_mass,
))

register_model(ModelEntry(
    "harmonic",
    "pair of unit harmonic oscillators, optionally spring-coupled",
    (
        Param("coupling", 0.0, "spring stiffness between the oscillators (gradient interaction)"),
        Param("gamma", 0.0, "momentum feedback gamma * p1 on oscillator 1 (non-Hamiltonian)"),
        Param("q1_0", 1.0, "initial q1"),
        Param("p1_0", 0.0, "initial p1"),
        Param("q2_0", 0.0, "initial q2"),
        Param("p2_0", 0.0, "initial p2"),
    ),
    _build_harmonic,
))
