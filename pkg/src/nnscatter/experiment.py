"""End-to-end experiment pipeline.

trajectory -> coarse spin propagators -> per-mode circuits -> noisy backend
execution (with optional randomized-compiling fan-out) -> mitigation chain in
the fixed order RCAL -> RC averaging -> purification -> metrics against the
exact Trotter reference.  Everything is deterministic given the master seed;
independent per-step executions may fan out over threads without changing
any number.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .backend import (Distribution, NoiseModel, basis_density, evolve, measure,
                      symmetric_confusion)
from .circuits import Circuit, Gate, compressed_circuits, sequence_circuits, synthesize
from .mitigation import (average_distributions, clip_and_renormalize,
                         invert_confusion, purify, randomized_compile,
                         rcal_calibrate, rcal_correct)
from .potentials import PotentialModel, RadialTerm
from .rng import PURPOSE_MEASURE, PURPOSE_RC, PURPOSE_TOMOGRAPHY, stream
from .spin import coarse_propagators, exact_spin_evolution
from .tomography import TomographyRecord, reconstruct, reinit_circuit, tomography_settings
from .trajectory import NEUTRON_MASS_MEV, verlet_integrate

MODES = ("exact", "sequence", "compressed", "reinitialized")

# Noise preset used by the mitigation-ordering studies: 3% two-qubit
# depolarizing, 2% symmetric readout flips, small coherent ZZ over-rotation.
DEFAULT_NOISE = NoiseModel(
    lambda2q=0.97,
    lambda1q=1.0,
    confusion=(symmetric_confusion(0.02), symmetric_confusion(0.02)),
    coherent_zz=0.08,
)


def default_potential() -> PotentialModel:
    """Illustrative Gaussian channels; ranges chosen so the pair is far
    outside the interaction region well before the end of the run."""
    return PotentialModel(
        name="gaussian-demo",
        si=RadialTerm("gaussian", {"C": -2.0, "R": 0.18}),
        s=RadialTerm("gaussian", {"C": 2.0, "R": 0.18}),
        t=RadialTerm("gaussian", {"C": 3.0, "R": 0.18}),
    )


@dataclass
class ExperimentConfig:
    potential: PotentialModel = field(default_factory=default_potential)
    neutron_mass: float = NEUTRON_MASS_MEV
    r0: tuple = (0.12, 0.0, -1.2)
    v0: tuple = (0.0, 0.0, 0.5)
    dt: float = 0.005
    n_steps: int = 1000
    steps_per_coarse: int = 50
    initial_spin_index: int = 0
    mode: str = "sequence"
    t_reini: int = 1
    noise: NoiseModel = field(default_factory=NoiseModel)
    shots: int = 10000
    exact_measure: bool = False
    rc_randomizations: int = 20
    mitigate_rcal: bool = False
    mitigate_rc: bool = False
    mitigate_purify: bool = False
    purify_lambda: float | None = None
    master_seed: int = 2024
    out_dir: str | None = None

    @property
    def reduced_mass(self) -> float:
        return self.neutron_mass / 2.0

    @property
    def n_coarse(self) -> int:
        return self.n_steps // self.steps_per_coarse

    def validate(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1 or self.steps_per_coarse < 1:
            raise ValueError("n_steps and steps_per_coarse must be >= 1")
        if self.n_steps % self.steps_per_coarse != 0:
            raise ValueError(
                f"n_steps={self.n_steps} not divisible by steps_per_coarse={self.steps_per_coarse}")
        if self.mode not in MODES:
            raise ValueError(f"mode {self.mode!r} not in {MODES}")
        if self.mode == "reinitialized" and self.t_reini < 1:
            raise ValueError("reinitialized mode requires t_reini >= 1")
        if self.initial_spin_index not in (0, 1, 2, 3):
            raise ValueError("initial_spin_index must be one of 0..3")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.rc_randomizations < 1:
            raise ValueError("rc_randomizations must be >= 1")
        if self.purify_lambda is not None and not 0.0 < self.purify_lambda <= 1.0:
            raise ValueError("purify_lambda must lie in (0, 1]")
        self.potential.check_decay(r_max=5.0)

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_config(),
            "neutron_mass": self.neutron_mass,
            "r0": list(self.r0),
            "v0": list(self.v0),
            "dt": self.dt,
            "n_steps": self.n_steps,
            "steps_per_coarse": self.steps_per_coarse,
            "initial_spin_index": self.initial_spin_index,
            "mode": self.mode,
            "t_reini": self.t_reini,
            "noise": {
                "lambda2q": self.noise.lambda2q,
                "lambda1q": self.noise.lambda1q,
                "confusion": [np.asarray(c, dtype=float).tolist() for c in self.noise.confusion],
                "coherent_zz": self.noise.coherent_zz,
            },
            "shots": self.shots,
            "exact_measure": self.exact_measure,
            "rc_randomizations": self.rc_randomizations,
            "mitigate": {"rcal": self.mitigate_rcal, "rc": self.mitigate_rc,
                         "purify": self.mitigate_purify},
            "purify_lambda": self.purify_lambda,
            "master_seed": self.master_seed,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = {}
        if "potential" in d:
            kwargs["potential"] = PotentialModel.from_config(d["potential"])
        if "noise" in d:
            nd = d["noise"]
            kwargs["noise"] = NoiseModel(
                lambda2q=float(nd.get("lambda2q", 1.0)),
                lambda1q=float(nd.get("lambda1q", 1.0)),
                confusion=tuple(np.asarray(c, dtype=float)
                                for c in nd.get("confusion",
                                                [np.eye(2), np.eye(2)])),
                coherent_zz=float(nd.get("coherent_zz", 0.0)),
            )
        if "mitigate" in d:
            md = d["mitigate"]
            kwargs["mitigate_rcal"] = bool(md.get("rcal", False))
            kwargs["mitigate_rc"] = bool(md.get("rc", False))
            kwargs["mitigate_purify"] = bool(md.get("purify", False))
        for key in ("neutron_mass", "dt", "purify_lambda"):
            if key in d and d[key] is not None:
                kwargs[key] = float(d[key])
        for key in ("n_steps", "steps_per_coarse", "initial_spin_index", "t_reini",
                    "shots", "rc_randomizations", "master_seed"):
            if key in d:
                kwargs[key] = int(d[key])
        for key in ("r0", "v0"):
            if key in d:
                kwargs[key] = tuple(float(x) for x in d[key])
        if "mode" in d:
            kwargs["mode"] = str(d["mode"])
        if "exact_measure" in d:
            kwargs["exact_measure"] = bool(d["exact_measure"])
        if d.get("out_dir") is not None:
            kwargs["out_dir"] = str(d["out_dir"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class StepResult:
    step: int
    t: float
    exact: np.ndarray
    raw: np.ndarray
    mitigated: np.ndarray
    tvd_raw: float
    tvd_mitigated: float
    infidelity: float = math.nan
    n_entangling: int = 0
    reinit_event: bool = False
    stages: dict = field(default_factory=dict)


def tvd(p, q) -> float:
    """Total variation distance (1/2) sum |p_i - q_i|."""
    p = np.asarray(p.probs if isinstance(p, Distribution) else p, dtype=float)
    q = np.asarray(q.probs if isinstance(q, Distribution) else q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support mismatch: {p.shape} vs {q.shape}")
    return float(0.5 * np.sum(np.abs(p - q)))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized states (global-phase invariant)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for v, label in ((a, "a"), (b, "b")):
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state {label} not normalized: |{label}| = {norm}")
    return float(abs(np.vdot(a, b)) ** 2)


def _prep_gates(index: int) -> list[Gate]:
    gates = []
    if index & 2:
        gates.append(Gate("RX", (0,), (np.pi,)))
    if index & 1:
        gates.append(Gate("RX", (1,), (np.pi,)))
    return gates


def _shots_arg(config: ExperimentConfig, shots: int | None = None):
    if config.exact_measure:
        return None
    return config.shots if shots is None else shots


def _execute_step(config: ExperimentConfig, circuit: Circuit, step: int,
                  est, lam: float):
    """Raw execution plus the enabled mitigation stages for one step."""
    noise = config.noise
    rho = evolve(circuit, noise)
    raw = measure(rho, noise, _shots_arg(config),
                  stream(config.master_seed, PURPOSE_MEASURE, step))
    stages = {"raw": raw}
    diagnostics = {}
    current = raw

    if config.mitigate_rcal:
        diagnostics["preclip_rcal"] = invert_confusion(raw.probs, est).tolist()
        current = rcal_correct(raw, est)
        stages["rcal"] = current

    if config.mitigate_rc:
        member_shots = None if config.exact_measure else max(1, config.shots // config.rc_randomizations)
        twirl = randomized_compile(circuit, config.rc_randomizations,
                                   master_seed=config.master_seed * 1000003 + step)
        member_dists = []
        for idx, member in enumerate(twirl.members):
            rho_m = evolve(member, noise)
            d = measure(rho_m, noise, member_shots,
                        stream(config.master_seed, PURPOSE_RC, step, idx))
            if config.mitigate_rcal:
                d = rcal_correct(d, est)
            member_dists.append(d)
        current = average_distributions(member_dists)
        stages["rc"] = current

    if config.mitigate_purify:
        n_ent = circuit.n_entangling()
        purified = purify(current, lam, n_ent)
        stages["purified"] = purified
        diagnostics["lambda"] = lam
        diagnostics["n_2q_gates"] = n_ent
        current = purified

    return raw, current, stages, diagnostics


def _build_circuits(config: ExperimentConfig, propagators) -> list[Circuit]:
    prep = _prep_gates(config.initial_spin_index)
    if config.mode == "sequence":
        circuits = sequence_circuits(propagators)
        return [Circuit(gates=prep + c.gates, global_phase=c.global_phase,
                        metadata=c.metadata) for c in circuits]
    if config.mode == "compressed":
        prep_unitary = np.eye(4, dtype=complex)
        for g in prep:
            from .circuits import gate_unitary

            prep_unitary = gate_unitary(g) @ prep_unitary
        acc = prep_unitary
        out = []
        for k, prop in enumerate(propagators):
            acc = prop.matrix @ acc
            out.append(synthesize(acc, metadata={"span": (0, k)}))
        return out
    raise ValueError(f"no circuit construction for mode {config.mode!r}")


def _exact_reference(config: ExperimentConfig):
    traj = verlet_integrate(config.potential, config.r0, config.v0, config.dt,
                            config.n_steps, reduced_mass=config.reduced_mass)
    props = coarse_propagators(config.potential, traj, config.steps_per_coarse)
    initial = np.zeros(4, dtype=complex)
    initial[config.initial_spin_index] = 1.0
    states = exact_spin_evolution(props, initial)
    return traj, props, states


def run(config: ExperimentConfig, max_workers: int = 1) -> list[StepResult]:
    """Run the configured experiment; one StepResult per coarse step incl. t=0."""
    config.validate()
    if config.mode == "reinitialized":
        return run_reinitialized(config)

    traj, props, states = _exact_reference(config)
    times = [traj.t[k * config.steps_per_coarse] for k in range(config.n_coarse + 1)]
    exact_probs = [np.abs(s) ** 2 for s in states]

    if config.mode == "exact":
        return [StepResult(step=k, t=times[k], exact=exact_probs[k],
                           raw=exact_probs[k], mitigated=exact_probs[k],
                           tvd_raw=0.0, tvd_mitigated=0.0)
                for k in range(config.n_coarse + 1)]

    prep_only = Circuit(gates=_prep_gates(config.initial_spin_index))
    step_circuits = [prep_only] + _build_circuits(config, props)

    est = None
    if config.mitigate_rcal:
        est = rcal_calibrate(config.noise, _shots_arg(config), seed=config.master_seed)
    lam = config.purify_lambda if config.purify_lambda is not None else config.noise.lambda2q

    def job(k: int) -> StepResult:
        circuit = step_circuits[k]
        raw, mitigated, stages, diag = _execute_step(config, circuit, k, est, lam)
        return StepResult(
            step=k, t=times[k], exact=exact_probs[k],
            raw=raw.probs, mitigated=mitigated.probs,
            tvd_raw=tvd(raw.probs, exact_probs[k]),
            tvd_mitigated=tvd(mitigated.probs, exact_probs[k]),
            n_entangling=circuit.n_entangling(),
            stages={name: d.probs.tolist() for name, d in stages.items()} | diag,
        )

    steps = range(config.n_coarse + 1)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(job, steps))
    return [job(k) for k in steps]


def run_reinitialized(config: ExperimentConfig) -> list[StepResult]:
    """Sequence-style evolution with periodic tomography + reinitialization.

    Every t_reini coarse steps the current state is reconstructed by the
    2n+1-setting tomography and the circuit is replaced by a fresh
    preparation gate, resetting accumulated depth (reinit events land on
    steps t_reini, 2*t_reini, ...).
    """
    config.validate()
    if config.mode != "reinitialized":
        raise ValueError("run_reinitialized requires mode='reinitialized'")

    traj, props, states = _exact_reference(config)
    times = [traj.t[k * config.steps_per_coarse] for k in range(config.n_coarse + 1)]
    exact_probs = [np.abs(s) ** 2 for s in states]
    blocks = [synthesize(p.matrix, metadata={"span": (p.index, p.index)}) for p in props]

    est = None
    if config.mitigate_rcal:
        est = rcal_calibrate(config.noise, _shots_arg(config), seed=config.master_seed)
    lam = config.purify_lambda if config.purify_lambda is not None else config.noise.lambda2q

    current = Circuit(gates=_prep_gates(config.initial_spin_index))
    results = []
    for k in range(config.n_coarse + 1):
        if k > 0:
            current = current.extended(blocks[k - 1], metadata={"depth_blocks": k})
        raw, mitigated, stages, diag = _execute_step(config, current, k, est, lam)

        record = _tomography_record(config, current, k)
        rec_state = reconstruct(record)
        fid = state_fidelity(states[k] / np.linalg.norm(states[k]), rec_state.statevector())

        reinit_event = k > 0 and k % config.t_reini == 0 and k < config.n_coarse
        if reinit_event:
            current = reinit_circuit(rec_state)

        results.append(StepResult(
            step=k, t=times[k], exact=exact_probs[k],
            raw=raw.probs, mitigated=mitigated.probs,
            tvd_raw=tvd(raw.probs, exact_probs[k]),
            tvd_mitigated=tvd(mitigated.probs, exact_probs[k]),
            infidelity=1.0 - fid,
            n_entangling=current.n_entangling() if not reinit_event else results[-1].n_entangling if results else 0,
            reinit_event=reinit_event,
            stages={name: d.probs.tolist() for name, d in stages.items()} | diag,
        ))
    return results


def _tomography_record(config: ExperimentConfig, circuit: Circuit, step: int) -> TomographyRecord:
    settings = tomography_settings(circuit, n=2)
    tables = []
    for idx, setting in enumerate(settings):
        rho = evolve(setting, config.noise)
        dist = measure(rho, config.noise, _shots_arg(config),
                       stream(config.master_seed, PURPOSE_TOMOGRAPHY, step, idx))
        tables.append(dist.probs)
    return TomographyRecord(n=2, bare=tables[0],
                            px=(tables[1], tables[3]), py=(tables[2], tables[4]))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit(results: list[StepResult], config: ExperimentConfig, out_dir) -> None:
    """Write occupations.csv, metrics.csv, and the config echo."""
    os.makedirs(out_dir, exist_ok=True)
    labels = ("00", "01", "10", "11")

    with open(os.path.join(out_dir, "occupations.csv"), "w", encoding="ascii",
              newline="\n") as fh:
        header = ["step", "t"]
        for group in ("exact", "raw", "mit"):
            header.extend(f"P{label}_{group}" for label in labels)
        fh.write(",".join(header) + "\n")
        for r in results:
            row = [str(r.step), _fmt(r.t)]
            for probs in (r.exact, r.raw, r.mitigated):
                row.extend(_fmt(p) for p in probs)
            fh.write(",".join(row) + "\n")

    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write("step,tvd_raw,tvd_mit,infidelity\n")
        for r in results:
            fh.write(",".join([str(r.step), _fmt(r.tvd_raw), _fmt(r.tvd_mitigated),
                               _fmt(r.infidelity)]) + "\n")

    with open(os.path.join(out_dir, "config.json"), "w", encoding="ascii") as fh:
        json.dump(config.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def mitigation_report(results: list[StepResult], config: ExperimentConfig) -> dict:
    """Per-step raw/rcal/rc/purified distributions plus the (lambda, N) used."""
    report = []
    for r in results:
        entry = {"step": r.step, "t": r.t}
        entry.update({k: v for k, v in r.stages.items()})
        report.append(entry)
    return {"mitigation_order": ["rcal", "rc", "purify"], "steps": report}


def write_mitigation_report(results, config, out_dir) -> None:
    with open(os.path.join(out_dir, "mitigation_report.json"), "w", encoding="ascii") as fh:
        json.dump(mitigation_report(results, config), fh, indent=1, sort_keys=True)
        fh.write("\n")
