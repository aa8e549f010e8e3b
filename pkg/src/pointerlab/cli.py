"""Experiment runner: configuration parsing, forward computation, simulation,
reconstruction, sweeps, tomography, and CSV/JSON export.

Config files are flat ``key = value`` text; complex numbers are written
``a+bi``, vectors are comma-separated, matrices use ``;`` between rows.
All randomness flows from the single config seed (overridable with
``--seed``); identical config + seed produces byte-identical outputs.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import inverse, pointer, sampler
from .paths import PathAmplitudeSet, PostselectionError, two_step_amplitudes
from .qcore import Observable, QuantumState, Unitary, unitary_from_hamiltonian

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

MODES = ("forward", "simulate", "reconstruct", "sweep", "tomography")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _parse_complex(token: str, field: str) -> complex:
    try:
        return complex(token.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(field, f"cannot parse complex number {token!r}") from exc


def _parse_vector(text: str, field: str) -> np.ndarray:
    return np.array([_parse_complex(t, field) for t in text.split(",")])


def _parse_matrix(text: str, field: str) -> np.ndarray:
    rows = [_parse_vector(row, field) for row in text.split(";")]
    if len({r.shape[0] for r in rows}) != 1:
        raise ConfigError(field, "matrix rows have unequal lengths")
    return np.array(rows)


def _parse_floats(text: str, field: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(field, f"cannot parse number list {text!r}") from exc


def _fmt_complex(z: complex) -> str:
    sign = "+" if z.imag >= 0 else "-"
    return f"{float(z.real)!r}{sign}{float(abs(z.imag))!r}i"


def _fmt_vector(v: np.ndarray) -> str:
    return ", ".join(_fmt_complex(z) for z in v)


@dataclass(eq=False)
class ExperimentConfig:
    """Parsed, validated experiment description."""

    mode: str
    dimension: int
    preparation: np.ndarray
    final: np.ndarray
    hamiltonian: np.ndarray | None
    t_prime: float | None
    t_second: float | None
    unitary1: np.ndarray | None
    unitary2: np.ndarray | None
    observable_eigenvalues: np.ndarray
    observable_basis: np.ndarray | None   # None means reference basis
    delta_f: float
    grid: tuple[float, float, int] | None
    partition: list[float]
    trials: int
    seed: int
    trace_every: int
    sweep_min: float | None
    sweep_max: float | None
    sweep_points: int
    predict_delta_fs: list[float]

    raw: dict[str, str] | None = None


def parse_config_text(text: str, path: str = "<string>") -> ExperimentConfig:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}", f"expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        pairs[key.strip()] = value.strip()

    def need(key: str) -> str:
        if key not in pairs:
            raise ConfigError(key, "missing required key")
        return pairs[key]

    mode = pairs.get("mode", "forward")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {mode!r}")
    try:
        dim = int(need("dimension"))
    except ValueError as exc:
        raise ConfigError("dimension", "must be an integer") from exc

    prep = _parse_vector(need("preparation"), "preparation")
    final = _parse_vector(need("final"), "final")
    for name, vec in (("preparation", prep), ("final", final)):
        if vec.shape[0] != dim:
            raise ConfigError(name, f"expected {dim} components, got {vec.shape[0]}")

    hamiltonian = t_prime = t_second = unitary1 = unitary2 = None
    if "hamiltonian" in pairs:
        hamiltonian = _parse_matrix(pairs["hamiltonian"], "hamiltonian")
        if hamiltonian.shape != (dim, dim):
            raise ConfigError("hamiltonian", f"expected a {dim}x{dim} matrix")
        t_prime = float(need("t_prime"))
        t_second = float(need("t_second"))
        if t_second <= t_prime:
            raise ConfigError(
                "t_second", f"second measurement time {t_second} must exceed t_prime {t_prime}"
            )
    elif "unitary1" in pairs and "unitary2" in pairs:
        unitary1 = _parse_matrix(pairs["unitary1"], "unitary1")
        unitary2 = _parse_matrix(pairs["unitary2"], "unitary2")
    else:
        raise ConfigError("hamiltonian", "provide a hamiltonian (with t_prime/t_second) "
                                         "or explicit unitary1/unitary2")

    eigs = np.real(_parse_vector(need("observable_eigenvalues"), "observable_eigenvalues"))
    if eigs.shape[0] != dim:
        raise ConfigError("observable_eigenvalues", f"expected {dim} values")
    basis_text = pairs.get("observable_basis", "identity")
    basis = None if basis_text.strip() == "identity" else _parse_matrix(
        basis_text, "observable_basis"
    )

    delta_f = float(need("delta_f"))
    if delta_f <= 0:
        raise ConfigError("delta_f", "must be positive")
    grid = None
    if "grid" in pairs:
        vals = _parse_floats(pairs["grid"], "grid")
        if len(vals) != 3:
            raise ConfigError("grid", "expected f_min, f_max, n_points")
        grid = (vals[0], vals[1], int(vals[2]))
    partition = _parse_floats(pairs["partition"], "partition") if "partition" in pairs else []
    if partition and np.any(np.diff(partition) <= 0):
        raise ConfigError("partition", "boundaries must be strictly increasing")

    trials = int(pairs.get("K", "0"))
    seed = int(pairs.get("seed", "0"))
    trace_every = int(pairs.get("trace_every", "100"))
    sweep_min = float(pairs["sweep_min"]) if "sweep_min" in pairs else None
    sweep_max = float(pairs["sweep_max"]) if "sweep_max" in pairs else None
    sweep_points = int(pairs.get("sweep_points", "25"))
    predict = _parse_floats(pairs["predict_delta_fs"], "predict_delta_fs") \
        if "predict_delta_fs" in pairs else []

    return ExperimentConfig(
        mode=mode, dimension=dim, preparation=prep, final=final,
        hamiltonian=hamiltonian, t_prime=t_prime, t_second=t_second,
        unitary1=unitary1, unitary2=unitary2,
        observable_eigenvalues=eigs, observable_basis=basis,
        delta_f=delta_f, grid=grid, partition=partition,
        trials=trials, seed=seed, trace_every=trace_every,
        sweep_min=sweep_min, sweep_max=sweep_max, sweep_points=sweep_points,
        predict_delta_fs=predict, raw=pairs,
    )


def parse_config(path: str | Path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(), str(path))


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"mode = {cfg.mode}", f"dimension = {cfg.dimension}",
             f"preparation = {_fmt_vector(cfg.preparation)}",
             f"final = {_fmt_vector(cfg.final)}"]
    if cfg.hamiltonian is not None:
        lines.append("hamiltonian = " + "; ".join(_fmt_vector(r) for r in cfg.hamiltonian))
        lines.append(f"t_prime = {cfg.t_prime!r}")
        lines.append(f"t_second = {cfg.t_second!r}")
    else:
        lines.append("unitary1 = " + "; ".join(_fmt_vector(r) for r in cfg.unitary1))
        lines.append("unitary2 = " + "; ".join(_fmt_vector(r) for r in cfg.unitary2))
    lines.append(
        "observable_eigenvalues = "
        + ", ".join(repr(float(v)) for v in cfg.observable_eigenvalues)
    )
    if cfg.observable_basis is not None:
        lines.append("observable_basis = " + "; ".join(_fmt_vector(r) for r in cfg.observable_basis))
    lines.append(f"delta_f = {cfg.delta_f!r}")
    if cfg.grid is not None:
        lines.append(f"grid = {cfg.grid[0]!r}, {cfg.grid[1]!r}, {cfg.grid[2]}")
    if cfg.partition:
        lines.append("partition = " + ", ".join(repr(v) for v in cfg.partition))
    lines.append(f"K = {cfg.trials}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"trace_every = {cfg.trace_every}")
    if cfg.sweep_min is not None:
        lines.append(f"sweep_min = {cfg.sweep_min!r}")
        lines.append(f"sweep_max = {cfg.sweep_max!r}")
        lines.append(f"sweep_points = {cfg.sweep_points}")
    if cfg.predict_delta_fs:
        lines.append("predict_delta_fs = " + ", ".join(repr(v) for v in cfg.predict_delta_fs))
    return "\n".join(lines) + "\n"


@dataclass(eq=False)
class _Setup:
    """Module objects assembled from a parsed config."""

    observable: Observable
    u1: Unitary
    u2: Unitary
    preparation: QuantumState
    final: QuantumState
    amps: PathAmplitudeSet
    config: pointer.PointerConfig
    partition: sampler.IntervalPartition | None


def build_setup(cfg: ExperimentConfig) -> _Setup:
    prep = QuantumState(cfg.preparation)
    final = QuantumState(cfg.final)
    basis = np.eye(cfg.dimension) if cfg.observable_basis is None else cfg.observable_basis
    try:
        obs = Observable(basis, cfg.observable_eigenvalues)
    except ValueError as exc:
        raise ConfigError("observable_basis", str(exc)) from exc
    if cfg.hamiltonian is not None:
        try:
            u1 = unitary_from_hamiltonian(cfg.hamiltonian, cfg.t_prime)
            u2 = unitary_from_hamiltonian(cfg.hamiltonian, cfg.t_second - cfg.t_prime)
        except ValueError as exc:
            raise ConfigError("hamiltonian", str(exc)) from exc
    else:
        try:
            u1 = Unitary(cfg.unitary1)
            u2 = Unitary(cfg.unitary2)
        except ValueError as exc:
            raise ConfigError("unitary1/unitary2", str(exc)) from exc
    amps = two_step_amplitudes(prep, u1, obs, u2, final)
    pconfig = pointer.PointerConfig(cfg.delta_f, cfg.observable_eigenvalues, cfg.grid)
    if cfg.partition:
        partition = sampler.IntervalPartition(cfg.partition)
    else:
        # over-determined default: 4P cells spanning the eigenvalue range
        p = inverse.unknown_count(cfg.dimension)
        eig = cfg.observable_eigenvalues
        partition = sampler.IntervalPartition(
            np.linspace(eig.min() - cfg.delta_f, eig.max() + cfg.delta_f, 4 * p - 1)
        )
    return _Setup(obs, u1, u2, prep, final, amps, pconfig, partition)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                    for v in row
                )
                + "\n"
            )


def _amplitude_report(setup: _Setup) -> dict:
    amps = setup.amps.amplitudes
    a_tilde = pointer.normalized_amplitudes(setup.amps, setup.config)
    truth = inverse.amplitudes_from_gram(pointer.GramMatrix.from_amplitudes(a_tilde))
    return {
        "raw_amplitudes": [[z.real, z.imag] for z in amps],
        "normalized_amplitudes": [[z.real, z.imag] for z in a_tilde],
        "arrival_probability": pointer.arrival_probability(setup.amps, setup.config),
        "moduli": truth.moduli.tolist(),
        "phases": truth.phases.tolist(),
    }


def _run_forward(setup: _Setup, out: Path) -> None:
    density = pointer.reading_density(setup.amps, setup.config)
    _write_csv(out / "density.csv", ["f", "rho"], zip(density.f, density.values))
    (out / "amplitudes.json").write_text(json.dumps(_amplitude_report(setup), indent=2) + "\n")


def _simulate(setup: _Setup, cfg: ExperimentConfig) -> sampler.TrialRecord:
    if cfg.trials < 1:
        raise ConfigError("K", "simulation requires K >= 1 trials")
    density = pointer.reading_density(setup.amps, setup.config)
    return sampler.sample(density, cfg.trials, cfg.seed)


def _run_simulate(setup: _Setup, cfg: ExperimentConfig, out: Path) -> None:
    record = _simulate(setup, cfg)
    record.to_csv(out / "readings.csv")
    if setup.partition is None:
        raise ConfigError("partition", "simulate mode requires a partition")
    counts = sampler.count(record, setup.partition)
    freqs = sampler.frequencies(counts)
    rows = []
    for nu in range(setup.partition.n_cells):
        lo, hi = setup.partition.cell_bounds(nu)
        rows.append((nu, lo, hi, int(counts.counts[nu]), float(freqs[nu])))
    _write_csv(out / "counts.csv", ["cell", "lower", "upper", "count", "frequency"], rows)


def _trace_header(n: int) -> list[str]:
    cols = ["K"] + [f"mod_A{j + 1}" for j in range(n)]
    cols += ["phi"] if n == 2 else [f"phi_{j + 1}" for j in range(1, n)]
    cols += [f"se_mod_A{j + 1}" for j in range(n)]
    cols += ["se_phi"] if n == 2 else [f"se_phi_{j + 1}" for j in range(1, n)]
    return cols


def _trace_row(k: int, result: inverse.ReconstructionResult) -> list[float]:
    n = result.moduli.shape[0]
    row: list[float] = [k]
    row += [float(m) for m in result.moduli]
    row += [abs(float(p)) for p in result.phases[1:]]
    se_m = result.se_moduli if result.se_moduli is not None else np.full(n, np.nan)
    se_p = result.se_phases if result.se_phases is not None else np.full(n, np.nan)
    row += [float(s) for s in se_m]
    row += [float(s) for s in se_p[1:]]
    return row


def _run_reconstruct(setup: _Setup, cfg: ExperimentConfig, out: Path) -> None:
    if setup.partition is None:
        raise ConfigError("partition", "reconstruct mode requires a partition")
    record = _simulate(setup, cfg)
    record.to_csv(out / "readings.csv")
    n_cells = setup.partition.n_cells
    cumulative = np.zeros(n_cells, dtype=np.int64)
    trace_rows = []
    step = max(cfg.trace_every, 1)
    checkpoints = list(range(step, cfg.trials + 1, step))
    if not checkpoints or checkpoints[-1] != cfg.trials:
        checkpoints.append(cfg.trials)
    prev = 0
    result = None
    for k in checkpoints:
        chunk = sampler.TrialRecord(record.readings[prev:k], cfg.seed)
        cumulative = cumulative + sampler.count(chunk, setup.partition).counts
        prev = k
        w = cumulative / k
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                result = inverse.reconstruct_from_frequencies(
                    w, setup.partition, setup.config, k=k
                )
            trace_rows.append(_trace_row(k, result))
        except (inverse.RankDeficientError, ValueError):
            trace_rows.append([k] + [float("nan")] * (len(_trace_header(setup.config.dim)) - 1))
            result = None
    if result is None:
        raise inverse.RankDeficientError("reconstruction failed at final trial count", 0.0)
    _write_csv(out / "trace.csv", _trace_header(setup.config.dim), trace_rows)
    payload = json.loads(result.to_json())
    payload["ground_truth"] = _amplitude_report(setup)
    (out / "result.json").write_text(json.dumps(payload, indent=2) + "\n")

    if cfg.predict_delta_fs:
        rows = []
        for dfp in cfg.predict_delta_fs:
            predicted = inverse.predict_commuting(
                result.gram, setup.config.eigenvalues, dfp
            )
            exact = pointer.reading_density(
                setup.amps, setup.config.with_delta_f(dfp)
            )
            exact_interp = np.interp(predicted.f, exact.f, exact.values)
            for f, rp, re_ in zip(predicted.f, predicted.values, exact_interp):
                rows.append((float(dfp), float(f), float(re_), float(rp)))
        _write_csv(out / "predicted.csv", ["delta_f", "f", "rho_exact", "rho_predicted"], rows)


def _run_sweep(setup: _Setup, cfg: ExperimentConfig, out: Path) -> None:
    if setup.partition is None:
        raise ConfigError("partition", "sweep mode requires a partition")
    if cfg.sweep_min is None or cfg.sweep_max is None:
        raise ConfigError("sweep_min", "sweep mode requires sweep_min and sweep_max")
    delta_fs = np.geomspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_points)
    rows = inverse.conditioning_sweep(
        setup.amps, setup.config.eigenvalues, setup.partition, delta_fs,
        k=cfg.trials if cfg.trials > 0 else None, seed=cfg.seed,
    )
    _write_csv(
        out / "sweep.csv",
        ["delta_f", "abs_det", "sigma_min", "recon_error", "arrival_prob"],
        ((r.delta_f, r.abs_determinant, r.sigma_min, r.recon_error, r.arrival_prob)
         for r in rows),
    )


def _run_tomography(setup: _Setup, cfg: ExperimentConfig, out: Path) -> None:
    if setup.partition is None:
        raise ConfigError("partition", "tomography mode requires a partition")
    record = _simulate(setup, cfg)
    w = sampler.frequencies(sampler.count(record, setup.partition))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = inverse.reconstruct_from_frequencies(
            w, setup.partition, setup.config, k=cfg.trials
        )
    basis = setup.observable.eigenvectors
    d_at_tprime = QuantumState(
        basis.conj().T @ (setup.u2.matrix.conj().T @ setup.final.coefficients)
    )
    truth = QuantumState(basis.conj().T @ (setup.u1.matrix @ setup.preparation.coefficients))
    branches = []
    for branch in (0, 1):
        rec = inverse.reconstruct_initial_state(result.amplitudes(branch), d_at_tprime)
        fidelity = abs(np.vdot(rec.coefficients, truth.coefficients)) ** 2
        branches.append({
            "branch": branch,
            "coefficients": [[z.real, z.imag] for z in rec.coefficients],
            "fidelity": float(fidelity),
        })
    best = max(branches, key=lambda b: b["fidelity"])
    payload = {
        "basis_note": "coefficients are in the measured observable's eigenbasis at t'",
        "branches": branches,
        "best_branch": best["branch"],
        "best_fidelity": best["fidelity"],
    }
    (out / "state.json").write_text(json.dumps(payload, indent=2) + "\n")


def run(cfg: ExperimentConfig, out_dir: str | Path) -> None:
    """Dispatch one experiment; raises on error (wrapped by main)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    setup = build_setup(cfg)
    dispatch = {
        "forward": lambda: _run_forward(setup, out),
        "simulate": lambda: _run_simulate(setup, cfg, out),
        "reconstruct": lambda: _run_reconstruct(setup, cfg, out),
        "sweep": lambda: _run_sweep(setup, cfg, out),
        "tomography": lambda: _run_tomography(setup, cfg, out),
    }
    dispatch[cfg.mode]()


def _error_json(code: int, exc: BaseException) -> str:
    return json.dumps(
        {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pointerlab",
        description="sequential-measurement simulator and amplitude reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trace-every", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
    except FileNotFoundError as exc:
        print(_error_json(EXIT_IO, exc), file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(_error_json(EXIT_CONFIG, exc), file=sys.stderr)
        return EXIT_CONFIG

    cfg.mode = args.command
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trace_every is not None:
        cfg.trace_every = args.trace_every

    try:
        run(cfg, args.out)
    except ConfigError as exc:
        print(_error_json(EXIT_CONFIG, exc), file=sys.stderr)
        return EXIT_CONFIG
    except (inverse.RankDeficientError, inverse.NonCommutingError, PostselectionError) as exc:
        print(_error_json(EXIT_NUMERICAL, exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(_error_json(EXIT_IO, exc), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
