"""1-DOF vertical quadrotor dynamics with a centimeter-quantized
altitude sensor.

The plant is the desk-scale stand-in for a full simulator: a point mass
on the vertical axis driven by total thrust, with optional linear drag,
a first-order motor lag and a ground plane.  The sensor floors the
altitude to 1 cm and differentiates the quantized signal, which is what
makes the derivative channel jumpy at high loop rates.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

__all__ = [
    "PlantParams",
    "PlantState",
    "SensorModel",
    "hover_thrust",
    "plant_step",
    "sense",
    "battery_sag",
]

G = 9.81


@dataclass(frozen=True)
class PlantParams:
    mass: float = 0.68            # kg
    g: float = G                  # m/s^2
    drag: float = 0.25            # N*s/m, linear in vz
    motor_tau: float = 0.02       # s; 0 = instantaneous thrust
    thrust_min: float = 0.0       # N; rotors cannot pull down
    thrust_max: float | None = None  # N; default 4x hover
    hover_adjust: float = 0.0     # N, hand-trim on top of mass*g

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.drag < 0:
            raise ValueError("drag must be >= 0")
        if self.motor_tau < 0:
            raise ValueError("motor time constant must be >= 0")
        if self.thrust_max is None:
            object.__setattr__(self, "thrust_max", 4.0 * self.mass * self.g)
        hover = self.mass * self.g + self.hover_adjust
        if not self.thrust_min <= hover <= self.thrust_max:
            raise ValueError("hover thrust must lie within the thrust limits")


@dataclass
class PlantState:
    z: float = 0.0         # m, altitude
    vz: float = 0.0        # m/s
    thrust: float = 0.0    # N, actual thrust after motor lag
    t: float = 0.0         # s


def hover_thrust(params: PlantParams) -> float:
    """Weight-compensating thrust: mass * g plus the hand adjustment."""
    return params.mass * params.g + params.hover_adjust


def plant_step(state: PlantState, command: float, dt: float,
               params: PlantParams) -> PlantState:
    """Advance the plant by dt seconds under the commanded thrust.

    The command clamps to the thrust limits, the actual thrust relaxes
    toward it with the motor time constant, and the mass integrates with
    semi-implicit Euler.  Touching the ground clamps z to 0 and kills any
    downward velocity.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    cmd = min(max(command, params.thrust_min), params.thrust_max)
    if params.motor_tau > 0:
        alpha = 1.0 - math.exp(-dt / params.motor_tau)
        thrust = state.thrust + alpha * (cmd - state.thrust)
    else:
        thrust = cmd
    accel = (thrust - params.mass * params.g - params.drag * state.vz) / params.mass
    vz = state.vz + accel * dt
    z = state.z + vz * dt
    if z <= 0.0:
        z = 0.0
        vz = max(vz, 0.0)
    return PlantState(z=z, vz=vz, thrust=thrust, t=state.t + dt)


@dataclass
class SensorModel:
    """Floor-quantized altimeter plus finite-difference climb rate.

    The derivative spans window control ticks (window 1 is the plain
    backward difference) and reads 0 until enough samples exist.
    """

    quantum: float = 0.01   # m
    window: int = 1         # ticks
    _history: deque = field(default_factory=deque, repr=False)

    def __post_init__(self):
        if self.quantum <= 0:
            raise ValueError("sensor quantum must be positive")
        if self.window < 1:
            raise ValueError("derivative window must be >= 1")

    def reset(self) -> None:
        self._history.clear()


def sense(model: SensorModel, state: PlantState, dt_ctrl: float) -> tuple[float, float]:
    """Quantized altitude and its finite-difference rate.

    Returns (z_hat, d_hat) where z_hat = quantum * floor(z / quantum)
    and d_hat spans the configured window of control ticks.
    """
    if dt_ctrl <= 0:
        raise ValueError("control period must be positive")
    # Tiny epsilon so exact quantum multiples (1.50 / 0.01) don't floor
    # into the bin below through float division error.
    z_hat = math.floor(state.z / model.quantum + 1e-9) * model.quantum
    hist = model._history
    hist.append(z_hat)
    while len(hist) > model.window + 1:
        hist.popleft()
    if len(hist) <= model.window:
        d_hat = 0.0
    else:
        d_hat = (hist[-1] - hist[0]) / (model.window * dt_ctrl)
    return z_hat, d_hat


def battery_sag(t: float, beta: float = 0.0) -> float:
    """Thrust bias -beta * t modelling a linearly sagging supply; added
    to the command before clamping."""
    if beta < 0:
        raise ValueError("sag rate must be >= 0")
    return -beta * t
