"""Bistatic two-node geometry and the target-to-signal-parameter maps.

Two fixed sensor nodes, each a uniform linear array (ULA) with its elements
stacked along the +y axis, observe a moving target in the plane.  A target
state maps to three signal parameters: the Doppler scaling factor of the
reflected wideband signal, the bistatic propagation delay, and the per-sensor
intra-array delays.  This module provides those maps and their analytic
gradients with respect to the target position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

KNOTS_TO_MPS = 0.514444

#: Array steering axis: elements of every ULA are spaced along +y.
STEERING_AXIS = np.array([0.0, 1.0])

#: A target closer than this to a node origin makes bearing/delay undefined.
MIN_TARGET_RANGE_M = 1e-6


class DegenerateGeometryError(ValueError):
    """Raised when the target (numerically) coincides with a node origin."""


@dataclass(frozen=True)
class Position2D:
    """Planar position in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("position components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class SensorNode:
    """A ULA of ``num_sensors`` elements spaced ``element_spacing`` meters
    apart along the steering axis, anchored at ``origin`` (the m=1 element)."""

    origin: Position2D
    num_sensors: int = 4
    element_spacing: float = 0.125

    def __post_init__(self):
        if self.num_sensors < 1:
            raise ValueError("num_sensors must be >= 1")
        if self.element_spacing <= 0.0:
            raise ValueError("element_spacing must be positive")


@dataclass(frozen=True)
class TargetState:
    """Target position, velocity (m/s), displacement weight and, optionally,
    the power it radiates (linear variance of the emitted random signal).

    ``emitted_power`` may be left ``None`` when it is derived from a
    sonar-equation SNR instead of being prescribed directly.
    """

    position: Position2D
    velocity: tuple[float, float] = (0.0, 0.0)
    weight_tonnes: float = 1.0
    emitted_power: float | None = None

    def __post_init__(self):
        if self.weight_tonnes <= 0.0:
            raise ValueError("weight_tonnes must be positive")
        if self.emitted_power is not None and self.emitted_power < 0.0:
            raise ValueError("emitted_power must be >= 0")

    @classmethod
    def from_knots(cls, position: Position2D, speed_knots: float,
                   heading_deg: float = 90.0, **kwargs) -> "TargetState":
        """Build a target from a speed in knots and a heading measured
        counterclockwise from the +x axis (90 deg points along +y)."""
        speed = speed_knots * KNOTS_TO_MPS
        rad = math.radians(heading_deg)
        return cls(position=position,
                   velocity=(speed * math.cos(rad), speed * math.sin(rad)),
                   **kwargs)

    @property
    def speed_mps(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def speed_knots(self) -> float:
        return self.speed_mps / KNOTS_TO_MPS

    def velocity_array(self) -> np.ndarray:
        return np.array(self.velocity, dtype=float)


@dataclass(frozen=True)
class Scenario:
    """World description shared by every bound evaluation.

    ``sample_rate`` is the wideband rate used for communication waveforms and
    the bistatic observation window.  The passive observation uses its own,
    much slower grid: ``num_samples`` samples spread over ``passive_window_s``
    seconds.
    """

    node1: SensorNode
    node2: SensorNode
    target: TargetState
    sound_speed: float = 1500.0
    sample_rate: float = 24000.0
    num_samples: int = 128
    passive_window_s: float = 0.05

    def __post_init__(self):
        if self.node1.origin == self.node2.origin:
            raise ValueError("node origins must be distinct")
        if self.sound_speed <= 0.0:
            raise ValueError("sound_speed must be positive")
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be positive")
        if self.num_samples < 2:
            raise ValueError("num_samples must be >= 2")
        if self.passive_window_s <= 0.0:
            raise ValueError("passive_window_s must be positive")

    def node(self, node_index: int) -> SensorNode:
        if node_index == 1:
            return self.node1
        if node_index == 2:
            return self.node2
        raise ValueError(f"node_index must be 1 or 2, got {node_index}")

    @property
    def passive_sample_interval(self) -> float:
        """Sample spacing of the passive observation grid (seconds)."""
        return self.passive_window_s / self.num_samples

    def with_target_position(self, x: float, y: float) -> "Scenario":
        target = replace(self.target, position=Position2D(x, y))
        return replace(self, target=target)


@dataclass(frozen=True)
class ParamVector:
    """Estimation parameters: target position plus Doppler scaling factor."""

    x: float
    y: float
    eta: float

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.eta], dtype=float)


def _range_and_unit(scenario: Scenario, node_index: int) -> tuple[float, np.ndarray]:
    """Distance from node to target and the node-to-target unit vector."""
    diff = scenario.target.position.as_array() - scenario.node(node_index).origin.as_array()
    r = float(np.linalg.norm(diff))
    if r < MIN_TARGET_RANGE_M:
        raise DegenerateGeometryError(
            f"target within {MIN_TARGET_RANGE_M:g} m of node {node_index}")
    return r, diff / r


def target_range(scenario: Scenario, node_index: int) -> float:
    """Distance in meters from the given node to the target."""
    r, _ = _range_and_unit(scenario, node_index)
    return r


def doppler_scale(scenario: Scenario) -> float:
    """Doppler time-scaling factor of the target-reflected bistatic path.

    Equals 1 plus the sum of the target velocity projections onto the two
    node-to-target directions, divided by the sound speed.  A closing target
    gives a value above 1.
    """
    v = scenario.target.velocity_array()
    c = scenario.sound_speed
    total = 0.0
    for gamma in (1, 2):
        _, u = _range_and_unit(scenario, gamma)
        total += float(v @ u)
    return 1.0 + total / c


def bistatic_delay(scenario: Scenario) -> float:
    """Transmitter-target-receiver propagation delay in seconds."""
    r1, _ = _range_and_unit(scenario, 1)
    r2, _ = _range_and_unit(scenario, 2)
    return (r1 + r2) / scenario.sound_speed


def intersensor_delay(scenario: Scenario, node_index: int, m: int) -> float:
    """Plane-wave arrival delay of array element ``m`` relative to element 1.

    ``m`` is 1-based; element 1 has zero delay by definition.
    """
    node = scenario.node(node_index)
    if not 1 <= m <= node.num_sensors:
        raise ValueError(f"sensor index m={m} outside 1..{node.num_sensors}")
    _, u = _range_and_unit(scenario, node_index)
    return node.element_spacing / scenario.sound_speed * (m - 1) * float(STEERING_AXIS @ u)


def signal_param_gradients(scenario: Scenario, node_index: int, m: int
                           ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of (doppler scale, bistatic delay, intersensor delay) with
    respect to the target position.

    Returns a tuple ``(grad_eta, grad_tau0, grad_tau_m)`` of 2-vectors.  The
    first two sum contributions from both nodes; the last is specific to the
    requested node and element.  The intersensor-delay gradient is the
    tangential projector form (I - u u^T) e / r scaled by d (m-1) / c, which
    rotates u in plane and scales it by its x component.
    """
    node = scenario.node(node_index)
    if not 1 <= m <= node.num_sensors:
        raise ValueError(f"sensor index m={m} outside 1..{node.num_sensors}")
    v = scenario.target.velocity_array()
    c = scenario.sound_speed

    grad_eta = np.zeros(2)
    grad_tau0 = np.zeros(2)
    for gamma in (1, 2):
        r, u = _range_and_unit(scenario, gamma)
        proj = np.eye(2) - np.outer(u, u)
        grad_eta += proj @ v / (c * r)
        grad_tau0 += u / c

    r, u = _range_and_unit(scenario, node_index)
    proj = np.eye(2) - np.outer(u, u)
    grad_tau_m = (node.element_spacing / c) * (m - 1) * (proj @ STEERING_AXIS) / r
    return grad_eta, grad_tau0, grad_tau_m


def k_derivatives(scenario: Scenario, node_index: int, m: int,
                  t_n) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of the scaled-delayed signal argument
    k(t) = eta (t - tau0 - tau_m) with respect to (eta) and (x, y).

    ``t_n`` may be a scalar or an array of sample times.  Returns
    ``(dk_deta, dk_dp)`` where ``dk_deta`` matches the shape of ``t_n`` and
    ``dk_dp`` has a leading axis of length 2 for the x and y components.
    """
    t = np.asarray(t_n, dtype=float)
    eta = doppler_scale(scenario)
    tau0 = bistatic_delay(scenario)
    tau_m = intersensor_delay(scenario, node_index, m)
    grad_eta, grad_tau0, grad_tau_m = signal_param_gradients(scenario, node_index, m)

    lag = t - tau0 - tau_m
    dk_deta = lag
    dk_dp = (np.multiply.outer(grad_eta, lag)
             - eta * (grad_tau0 + grad_tau_m)[(...,) + (np.newaxis,) * t.ndim])
    return dk_deta, dk_dp
