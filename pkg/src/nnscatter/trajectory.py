"""Classical relative-coordinate dynamics via velocity-Verlet integration.

The two-neutron spatial problem reduces to one body of reduced mass
m_n/2 moving in the spin-independent central potential; the resulting
trajectory r(t) is computed once, up front, and later feeds the
spin-dependent Hamiltonian (the spin evolution never feeds back).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import PotentialModel

NEUTRON_MASS_MEV = 939.565
DEFAULT_CORE_CUTOFF = 1e-3  # MeV^-1; guards 1/r factors in Yukawa tails


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus relative coordinate/velocity arrays, shapes (N+1,) / (N+1, 3)."""

    dt: float
    reduced_mass: float
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]


def force(model: PotentialModel, r: np.ndarray,
          core_cutoff: float = DEFAULT_CORE_CUTOFF) -> np.ndarray:
    """Central force -dV_SI/dr * rhat at relative coordinate r (MeV^2)."""
    r = np.asarray(r, dtype=float)
    rnorm = float(np.linalg.norm(r))
    if rnorm < core_cutoff:
        raise ValueError(f"|r| = {rnorm:.3e} below core cutoff {core_cutoff:.3e}")
    return -model.si.derivative(rnorm) * (r / rnorm)


def verlet_integrate(model: PotentialModel, r0, v0, dt: float, n_steps: int,
                     reduced_mass: float = NEUTRON_MASS_MEV / 2.0,
                     core_cutoff: float = DEFAULT_CORE_CUTOFF) -> Trajectory:
    """Velocity-Verlet integration of the Newton equation in the relative frame.

    Returns n_steps+1 points including the initial condition.  Times are
    computed as i*dt (not a running sum) so the grid is bitwise reproducible.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if reduced_mass <= 0.0:
        raise ValueError("reduced_mass must be positive")

    r = np.empty((n_steps + 1, 3), dtype=float)
    v = np.empty((n_steps + 1, 3), dtype=float)
    r[0] = np.asarray(r0, dtype=float)
    v[0] = np.asarray(v0, dtype=float)

    def accel(x, step):
        try:
            return force(model, x, core_cutoff=core_cutoff) / reduced_mass
        except ValueError as exc:
            raise ValueError(f"core cutoff violated at step {step}: {exc}") from exc

    a = accel(r[0], 0)
    for i in range(n_steps):
        r[i + 1] = r[i] + v[i] * dt + 0.5 * a * dt * dt
        a_next = accel(r[i + 1], i + 1)
        v[i + 1] = v[i] + 0.5 * (a + a_next) * dt
        a = a_next

    t = np.arange(n_steps + 1, dtype=float) * dt
    return Trajectory(dt=dt, reduced_mass=reduced_mass, t=t, r=r, v=v)


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write `t,rx,ry,rz,vx,vy,vz` rows at 17 significant digits."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,rx,ry,rz,vx,vy,vz\n")
        for i in range(len(traj)):
            row = [traj.t[i], *traj.r[i], *traj.v[i]]
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
