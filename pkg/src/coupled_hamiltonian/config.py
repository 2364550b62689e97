"""Flat ``section.key = value`` run configuration.

Example::

    # beam coupled to a spring-mass pair
    model.name = beam_spring
    model.q2_0 = -1.0
    integrator.kind = stormer_verlet
    run.T = 50
    run.n_steps = 100000
    run.stride = 100

Lines are order-insensitive, ``#`` starts a comment, and every key may appear
at most once. ``run.dt`` may replace ``run.n_steps`` if ``T / dt`` is an
integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import UsageError
from .integrators import IntegratorKind, IntegratorSpec
from .registry import get_model
from .symplectic import DEFAULT_HALF_WIDTH, DEFAULT_SAMPLES, DEFAULT_TOL


class ConfigError(UsageError):
    def __init__(self, message, line=None, source="<config>"):
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")
        self.line = line


_KNOWN = {
    "integrator": {"kind", "fixed_point_tol", "max_iterations"},
    "run": {"T", "n_steps", "dt", "stride", "output"},
    "check": {"seed", "samples", "tol", "half_width"},
}


@dataclass
class SimulationConfig:
    model: str
    params: dict
    integrator: IntegratorSpec
    total_time: float
    n_steps: int
    record_stride: int = 1
    output_path: str = "trajectory.csv"
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    tol: float = DEFAULT_TOL
    half_width: float = DEFAULT_HALF_WIDTH
    source: str = field(default="<config>", compare=False)

    @property
    def dt(self):
        return self.integrator.dt

    def with_dt(self, dt):
        """Same run over the same ``T`` with step ``dt``."""
        n_steps = _steps_for(self.total_time, dt, self.source, None)
        spec = IntegratorSpec(self.integrator.kind, self.total_time / n_steps,
                              self.integrator.fixed_point_tol, self.integrator.max_iterations)
        copy = SimulationConfig(**{**self.__dict__, "integrator": spec, "n_steps": n_steps})
        return copy


def _steps_for(T, dt, source, line):
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt!r}", line, source)
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ConfigError(f"T={T!r} is not an integer multiple of dt={dt!r}", line, source)
    return int(n)


def parse_config(text, source="<config>"):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", lineno, source)
        section, dot, name = key.partition(".")
        if not dot or not name:
            raise ConfigError(f"key {key!r} must have the form section.key", lineno, source)
        if section != "model" and name not in _KNOWN.get(section, ()):
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first on line {entries[key][1]})", lineno, source)
        entries[key] = (value, lineno)
    return _build(entries, source)


def _get(entries, key, convert, default, source):
    if key not in entries:
        return default
    value, line = entries[key]
    try:
        return convert(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot interpret {value!r} as {convert.__name__}", line, source) from None


def integer(value):
    number = float(value)
    if number != int(number):
        raise ValueError(value)
    return int(number)


def _build(entries, source):
    if "model.name" not in entries:
        raise ConfigError("missing required key model.name", None, source)
    name, name_line = entries["model.name"]
    try:
        entry = get_model(name)
    except UsageError as exc:
        raise ConfigError(str(exc), name_line, source) from None
    params = {}
    for key, (value, line) in entries.items():
        if key.startswith("model.") and key != "model.name":
            pname = key[len("model."):]
            try:
                params[pname] = entry.coerce(pname, value)
            except UsageError as exc:
                raise ConfigError(str(exc), line, source) from None

    if "run.T" not in entries:
        raise ConfigError("missing required key run.T", None, source)
    T = _get(entries, "run.T", float, None, source)
    if not T > 0:
        raise ConfigError(f"run.T must be positive, got {T!r}", entries["run.T"][1], source)
    if "run.n_steps" in entries:
        if "run.dt" in entries:
            raise ConfigError("give run.n_steps or run.dt, not both", entries["run.dt"][1], source)
        n_steps = _get(entries, "run.n_steps", integer, None, source)
        if n_steps < 1:
            raise ConfigError("run.n_steps must be >= 1", entries["run.n_steps"][1], source)
    elif "run.dt" in entries:
        n_steps = _steps_for(T, _get(entries, "run.dt", float, None, source), source,
                             entries["run.dt"][1])
    else:
        raise ConfigError("missing run.n_steps (or run.dt)", None, source)
    stride = _get(entries, "run.stride", integer, 1, source)
    if stride < 1:
        raise ConfigError("run.stride must be >= 1", entries["run.stride"][1], source)

    kind = _get(entries, "integrator.kind", str, IntegratorKind.STORMER_VERLET.value, source)
    try:
        spec = IntegratorSpec(IntegratorKind(kind), T / n_steps,
                              _get(entries, "integrator.fixed_point_tol", float, 1e-12, source),
                              _get(entries, "integrator.max_iterations", integer, 50, source))
    except ValueError as exc:
        line = entries.get("integrator.kind", (None, None))[1]
        raise ConfigError(f"integrator: {exc}", line, source) from None

    return SimulationConfig(
        model=name,
        params=params,
        integrator=spec,
        total_time=T,
        n_steps=n_steps,
        record_stride=stride,
        output_path=_get(entries, "run.output", str, "trajectory.csv", source),
        seed=_get(entries, "check.seed", integer, 0, source),
        samples=_get(entries, "check.samples", integer, DEFAULT_SAMPLES, source),
        tol=_get(entries, "check.tol", float, DEFAULT_TOL, source),
        half_width=_get(entries, "check.half_width", float, DEFAULT_HALF_WIDTH, source),
        source=source,
    )


def load_config(path):
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", None, path) from None
    return parse_config(text, path)
