"""Rotation schedules: equal-step grids, random streams, adaptive refinement.

Grids are derived from ``phi_max``, the widest vertex angle of the shape
(interior angle in 2D, full minimum-bounding-cone angle in higher
dimensions). In 2D the cloud is turned ``M`` times by ``step``; in ``N``
dimensions every combination of grid angles in the planes
``(N-2, N-1), ..., (1, 2), (0, 1)`` is used, applied in that order.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .errors import ConfigError
from .geom import PlanarRotation, Rotation

# Float slack when turning a ratio that should be integral into a count.
_CEIL_SLACK = 1e-9
_RANDOM_BLOCK = 256


class Mode(enum.Enum):
    DETERMINISTIC = "det"
    RANDOM = "rand"
    ADAPTIVE = "adapt"

    @classmethod
    def parse(cls, text: str) -> Mode:
        aliases = {
            "det": cls.DETERMINISTIC, "deterministic": cls.DETERMINISTIC,
            "rand": cls.RANDOM, "random": cls.RANDOM,
            "adapt": cls.ADAPTIVE, "adaptive": cls.ADAPTIVE,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ConfigError(f"unknown mode {text!r}") from None


class Harvest(enum.Enum):
    """Which axis extremes are collected per rotation."""

    ALL = "all"
    MINMAX_X = "minmax-x"
    MAX_X = "max-x"

    @property
    def span_2d(self) -> float:
        # Turning range after which the harvested directions repeat.
        return {Harvest.ALL: math.pi / 2, Harvest.MINMAX_X: math.pi, Harvest.MAX_X: 2 * math.pi}[self]

    def ends(self, dim: int) -> list[tuple[int, bool]]:
        """``(axis, is_max)`` pairs harvested for a cloud of ``dim`` coordinates."""
        if self is Harvest.MAX_X:
            return [(0, True)]
        if self is Harvest.MINMAX_X:
            return [(0, False), (0, True)]
        return [(a, m) for a in range(dim) for m in (False, True)]


def _ceil(x: float) -> int:
    return max(1, math.ceil(x - _CEIL_SLACK))


@dataclass(frozen=True)
class RotationSchedule:
    """A finite list or an endless, seed-reproducible stream of rotations."""

    dim: int
    step: float | None
    planned_len: int | None
    _source: Callable[[], Iterator[Rotation]] = field(repr=False)

    def __iter__(self) -> Iterator[Rotation]:
        return self._source()

    @property
    def bounded(self) -> bool:
        return self.planned_len is not None

    @property
    def planar_ops(self) -> int | None:
        """Planar rotations performed over the whole grid, ``(N-1) * len``."""
        if self.planned_len is None:
            return None
        return max(1, self.dim - 1) * self.planned_len

    @classmethod
    def from_rotations(cls, rotations, step: float | None = None) -> RotationSchedule:
        rots = tuple(rotations)
        if not rots:
            raise ConfigError("empty schedule")
        return cls(rots[0].dim, step, len(rots), lambda: iter(rots))


def _check_phi(phi_max: float | None) -> float:
    if phi_max is None or not 0.0 < phi_max < math.pi:
        raise ConfigError(f"phi_max must lie in (0, pi) radians, got {phi_max}")
    return float(phi_max)


def _check_safety(safety_factor: float) -> float:
    if not safety_factor >= 1.0:
        raise ConfigError(f"safety_factor must be >= 1, got {safety_factor}")
    return float(safety_factor)


def grid_2d(step: float, count: int) -> RotationSchedule:
    """``count`` planar rotations by ``0, step, 2*step, ...`` with no checks."""
    if count < 1 or not step > 0:
        raise ConfigError("grid needs count >= 1 and step > 0")
    return RotationSchedule.from_rotations(
        (Rotation.planar(2, 0, 1, k * step) for k in range(count)), step=step
    )


def deterministic_2d(
    phi_max: float | None,
    safety_factor: float = 1.0,
    harvest: Harvest = Harvest.ALL,
    *,
    step: float | None = None,
    count: int | None = None,
) -> RotationSchedule:
    """Equal-step 2D schedule.

    By default ``M = ceil(safety * 2 * span / (pi - phi_max))`` turns of
    ``span / M`` each, where ``span`` is pi/2 when all four extremes are
    harvested (pi for x min/max, 2 pi for x max only). The step then stays
    at or below half of ``pi - phi_max``, and ``M * step`` covers the span.

    ``step`` and ``count`` override the derived values verbatim; they are
    not validated against ``phi_max``.
    """
    safety_factor = _check_safety(safety_factor)
    span = harvest.span_2d
    if step is None:
        gap = math.pi - _check_phi(phi_max)
        m = _ceil(safety_factor * 2.0 * span / gap)
        if count is not None:
            m = count
        step = span / m
    else:
        if not step > 0:
            raise ConfigError("step must be positive")
        m = count if count is not None else _ceil(span / step)
    return grid_2d(step, m)


def nd_planes(dim: int) -> list[tuple[int, int]]:
    """Planes of the N-D grid in application order."""
    return [(a, a + 1) for a in reversed(range(dim - 1))]


def deterministic_nd(
    dim: int,
    phi_max: float | None,
    safety_factor: float = 1.0,
    harvest: Harvest = Harvest.ALL,
    *,
    step: float | None = None,
) -> RotationSchedule:
    """Equal-step grid for ``dim >= 3``.

    The step is ``pi / N_theta`` with ``N_theta`` the smallest count that puts
    it strictly below ``(pi/2 - phi_max/2) / safety``. Each plane sweeps a
    half turn; with ``Harvest.MAX_X`` the final ``(0, 1)`` plane sweeps a full
    turn because only the positive x end is collected.
    """
    if dim < 3:
        raise ConfigError("deterministic_nd needs dim >= 3; use deterministic_2d")
    safety_factor = _check_safety(safety_factor)
    if step is None:
        bound = math.pi / 2 - _check_phi(phi_max) / 2
        n_theta = math.floor(math.pi * safety_factor / bound) + 1
        step = math.pi / n_theta
    else:
        if not step > 0:
            raise ConfigError("step must be positive")
        n_theta = _ceil(math.pi / step)
    planes = nd_planes(dim)
    counts = [n_theta] * len(planes)
    if harvest is Harvest.MAX_X:
        counts[-1] = 2 * n_theta
    rotations = [
        Rotation(dim, tuple(PlanarRotation(a, b, k * step) for (a, b), k in zip(planes, ks)))
        for ks in itertools.product(*(range(c) for c in counts))
    ]
    return RotationSchedule.from_rotations(rotations, step=step)


def deterministic(
    dim: int,
    phi_max: float | None,
    safety_factor: float = 1.0,
    harvest: Harvest = Harvest.ALL,
    *,
    step: float | None = None,
    count: int | None = None,
) -> RotationSchedule:
    if dim == 2:
        return deterministic_2d(phi_max, safety_factor, harvest, step=step, count=count)
    if count is not None:
        raise ConfigError("an explicit rotation count is only meaningful in 2D")
    return deterministic_nd(dim, phi_max, safety_factor, harvest, step=step)


def _stream(dim: int, make_block: Callable[[np.random.Generator], list[Rotation]], seed: int):
    def source() -> Iterator[Rotation]:
        rng = np.random.default_rng(seed)
        while True:
            yield from make_block(rng)

    return RotationSchedule(dim, None, None, source)


def random_2d(seed: int = 0) -> RotationSchedule:
    """Planar rotations with angles i.i.d. uniform on ``[-pi, pi]``."""

    def block(rng):
        angles = rng.uniform(-math.pi, math.pi, _RANDOM_BLOCK)
        return [Rotation.planar(2, 0, 1, a) for a in angles]

    return _stream(2, block, seed)


# Plane turned by a rotation about each coordinate axis (right-handed).
_PLANE_ABOUT = {0: (1, 2), 1: (2, 0), 2: (0, 1)}
_AXIS_PAIRS = [(p, s) for p in range(3) for s in range(3) if p != s]


def random_3d(seed: int = 0) -> RotationSchedule:
    """Sphere-uniform 3D rotations.

    Each element spins by ``gamma`` about a primary axis, tilts by ``beta``
    about a secondary axis, and spins by ``alpha`` about the primary axis
    again. ``alpha`` and ``gamma`` are uniform on ``[-pi, pi]`` and the
    co-latitude ``beta`` has density ``sin(beta)/2`` on ``[0, pi]``, drawn as
    ``arccos`` of a uniform value. The (primary, secondary) pair is one of
    the six ordered coordinate-axis pairs, picked uniformly.
    """

    def block(rng):
        pairs = rng.integers(0, len(_AXIS_PAIRS), _RANDOM_BLOCK)
        alpha = rng.uniform(-math.pi, math.pi, _RANDOM_BLOCK)
        beta = np.arccos(rng.uniform(-1.0, 1.0, _RANDOM_BLOCK))
        gamma = rng.uniform(-math.pi, math.pi, _RANDOM_BLOCK)
        out = []
        for k in range(_RANDOM_BLOCK):
            p, s = _AXIS_PAIRS[pairs[k]]
            out.append(Rotation(3, (
                PlanarRotation(*_PLANE_ABOUT[p], gamma[k]),
                PlanarRotation(*_PLANE_ABOUT[s], beta[k]),
                PlanarRotation(*_PLANE_ABOUT[p], alpha[k]),
            )))
        return out

    return _stream(3, block, seed)


def random_nd(dim: int, seed: int = 0) -> RotationSchedule:
    """``dim - 1`` planar rotations in random coordinate planes per element."""
    if dim == 2:
        return random_2d(seed)
    if dim == 3:
        return random_3d(seed)
    if dim < 2:
        raise ConfigError("random rotations need dim >= 2")

    def block(rng):
        out = []
        for _ in range(_RANDOM_BLOCK):
            factors = []
            for _ in range(dim - 1):
                a, b = sorted(rng.choice(dim, size=2, replace=False))
                factors.append(PlanarRotation(int(a), int(b), rng.uniform(-math.pi, math.pi)))
            out.append(Rotation(dim, tuple(factors)))
        return out

    return _stream(dim, block, seed)


def expected_random_rotations(num_vertices: int) -> float:
    """Coupon-collector mean ``N * H_N`` for a fair N-sided die."""
    if int(num_vertices) != num_vertices or num_vertices < 1:
        raise ConfigError("num_vertices must be a positive integer")
    n = int(num_vertices)
    return n * math.fsum(1.0 / k for k in range(1, n + 1))


def deterministic_rotation_count(num_vertices: int, dim: int, omega_max: float) -> int:
    """Equal-step rotation count ``ceil((2 pi / (pi - 2 omega_max)) ** (dim - 1))``.

    For a regular polygon this equals its number of vertices.
    """
    if num_vertices < 1:
        raise ConfigError("num_vertices must be positive")
    if dim not in (2, 3, 4):
        raise ConfigError("dim must be 2, 3 or 4")
    if not 0.0 < omega_max < math.pi / 2:
        raise ConfigError("omega_max must lie in (0, pi/2)")
    return _ceil((2.0 * math.pi / (math.pi - 2.0 * omega_max)) ** (dim - 1))


@dataclass(frozen=True)
class ScheduleConfig:
    dim: int
    mode: Mode = Mode.DETERMINISTIC
    phi_max: float | None = None
    seed: int = 0
    safety_factor: float = 1.0
    shrink: float = 0.5
    step: float | None = None
    count: int | None = None

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.dim < 2:
            raise ConfigError("dim must be at least 2")
        _check_safety(self.safety_factor)
        if not 0.0 < self.shrink < 1.0:
            raise ConfigError("shrink must lie in (0, 1)")
        if self.mode is Mode.ADAPTIVE or (self.mode is Mode.DETERMINISTIC and self.step is None):
            _check_phi(self.phi_max)
        elif self.phi_max is not None:
            _check_phi(self.phi_max)
        if self.step is not None and not self.step > 0:
            raise ConfigError("step must be positive")
        if self.count is not None and self.count < 1:
            raise ConfigError("count must be >= 1")

    def build(self, harvest: Harvest = Harvest.ALL) -> RotationSchedule:
        if self.mode is Mode.RANDOM:
            return random_nd(self.dim, self.seed)
        if self.mode is Mode.ADAPTIVE:
            raise ConfigError("adaptive configs expand into rounds; see adaptive_steps")
        return deterministic(
            self.dim, self.phi_max, self.safety_factor, harvest, step=self.step, count=self.count
        )

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> ScheduleConfig:
        known = {"dim", "mode", "phi_max_deg", "seed", "safety_factor", "shrink", "step_deg", "count"}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            kwargs = {"dim": int(values["dim"])}
            if "mode" in values:
                kwargs["mode"] = Mode.parse(values["mode"])
            if "phi_max_deg" in values:
                kwargs["phi_max"] = math.radians(float(values["phi_max_deg"]))
            if "step_deg" in values:
                kwargs["step"] = math.radians(float(values["step_deg"]))
            for key, conv in (("seed", int), ("safety_factor", float), ("shrink", float), ("count", int)):
                if key in values:
                    kwargs[key] = conv(values[key])
        except KeyError:
            raise ConfigError("config needs a dim entry") from None
        except ValueError as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> ScheduleConfig:
        return cls.from_mapping(read_config_values(path))


def read_config_values(path) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def adaptive_steps(initial_phi_guess: float, shrink: float = 0.5, *, dim: int = 2,
                   safety_factor: float = 1.0) -> Iterator[ScheduleConfig]:
    """Endless sequence of deterministic configs with a shrinking angular gap.

    Round ``k`` assumes ``phi_max = pi - (pi - guess) * shrink**k``, so the gap
    ``pi - phi_max`` (the 2D step bound) runs ``g, shrink*g, shrink**2*g, ...``.
    """
    _check_phi(initial_phi_guess)
    if not 0.0 < shrink < 1.0:
        raise ConfigError("shrink must lie in (0, 1)")
    gap = math.pi - initial_phi_guess
    base = ScheduleConfig(dim, Mode.DETERMINISTIC, initial_phi_guess, safety_factor=safety_factor, shrink=shrink)
    for k in itertools.count():
        yield replace(base, phi_max=math.pi - gap * shrink**k)


def gap_of(config: ScheduleConfig) -> float:
    """Angular gap ``pi - phi_max`` of a deterministic config."""
    return math.pi - _check_phi(config.phi_max)
