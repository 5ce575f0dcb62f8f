"""Batch experiment runner.

Every subcommand resolves its parameters from an optional config file
(TOML or JSON) overridden by command-line flags, validates them
strictly (unknown keys are rejected), and writes CSV/JSON artifacts
plus a JSON run manifest.  Outputs are deterministic for a fixed
configuration and seed; grid sweeps preserve grid order regardless of
the worker pool size.

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .meanfield import AlgebraElement, ConvergenceError, diagonalize

__all__ = ["main", "run", "validate_config"]

FMT = "%.12e"


def _fmt(x: float) -> str:
    return FMT % x


@dataclass
class Param:
    name: str
    type: type
    required: bool = False
    default: object = None
    help: str = ""
    check: object = None  # callable -> error string or None


@dataclass
class Sub:
    name: str
    params: list[Param]
    runner: object
    description: str
    needs_seed_with: str | None = None  # param that unlocks sampling


def _positive(name):
    return lambda v: None if v > 0 else f"{name} must be positive"


def _pos_int(name):
    return lambda v: None if v >= 1 else f"{name} must be >= 1"


# ---------------------------------------------------------------------------
# Runners (return {filename: text}; caller writes files + manifest)
# ---------------------------------------------------------------------------

def _run_xy_purity(p: dict, workers: int) -> dict[str, str]:
    from .models import XYChain

    chain = XYChain(p["n"], p["gamma"])
    gs = np.linspace(p["g_min"], p["g_max"], p["steps"])

    def point(g):
        return (g, chain.purity_finite(g), chain.purity_thermodynamic(g),
                chain.shifted_purity(g), chain.number_fluctuation(g))

    rows = _pool_map(point, gs, workers)
    lines = ["g,purity_finite,purity_thermo,shifted_purity,number_fluctuation"]
    for r in rows:
        lines.append(",".join(_fmt(x) for x in r))
    return {p["out"]: "\n".join(lines) + "\n"}


def _run_lmg_purity(p: dict, workers: int) -> dict[str, str]:
    from .models import LMG

    vs = np.linspace(p["v_min"], p["v_max"], p["steps"])

    def point(v):
        model = LMG(p["n"], v, p["w"])
        e0, vec = model.ground()
        jz = model.jz_expectation(vec)
        return (v, model.delta, 4 * jz ** 2 / p["n"] ** 2,
                model.classical_purity(), e0 / p["n"],
                model.classical_ground_energy())

    rows = _pool_map(point, vs, workers)
    lines = ["V,delta,purity_quantum,purity_classical,E0_per_N,E0_classical"]
    for r in rows:
        lines.append(",".join(_fmt(x) for x in r))
    return {p["out"]: "\n".join(lines) + "\n"}


def _run_fano_spectrum(p: dict, workers: int) -> dict[str, str]:
    from .models import FanoAnderson
    from .qprotocol import spectrum_series
    from .spectral import dft, find_peaks, series_to_csv, spectrum_to_csv

    model = FanoAnderson(p["n"], p["eps"], p["v"], tau=-p["ek0"] / 2.0)
    h = model.hamiltonian()
    series = spectrum_series(h, model.initial_state_circuit(),
                             model.n_modes, p["m"], p["dt"])
    if p["shots"]:
        rng = np.random.default_rng(p["seed"])
        noisy = np.empty_like(series.values)
        for j, v in enumerate(series.values):
            noisy[j] = _sampled_expectation(v, p["shots"], rng)
        series.values = noisy
        series.sigma = 2.0 / np.sqrt(p["shots"])
    spec = dft(series)
    peaks = find_peaks(spec, rel_threshold=p["peak_threshold"])
    stem = p["out"]
    lines = ["lambda,weight,refined"]
    for pk in peaks:
        lines.append(f"{_fmt(pk.frequency)},{_fmt(pk.weight)},{int(pk.refined)}")
    return {
        f"{stem}_series.csv": series_to_csv(series),
        f"{stem}_spectrum.csv": spectrum_to_csv(spec),
        f"{stem}_peaks.csv": "\n".join(lines) + "\n",
    }


def _sampled_expectation(value: complex, shots: int, rng) -> complex:
    """Bohm's-rule estimate of <X> + i <Y> from two measured settings."""
    out = []
    for mean in (value.real, value.imag):
        pr = np.clip((1.0 + mean) / 2.0, 0.0, 1.0)
        ups = rng.binomial(shots, pr)
        out.append(2.0 * ups / shots - 1.0)
    return complex(out[0], out[1])


def _run_fano_correlation(p: dict, workers: int) -> dict[str, str]:
    from .models import FanoAnderson
    from .opalgebra import PauliTerm
    from .qprotocol import PauliGate, time_correlation

    model = FanoAnderson(1, p["eps"], p["v"], tau=-p["ek0"] / 2.0)
    h = model.hamiltonian()
    prep = model.initial_state_circuit()
    x1 = PauliGate(PauliTerm.from_map(1.0, {1: "X"}))
    ts = np.linspace(0.0, p["t_max"], p["steps"])
    dt = p["trotter_dt"] if p["trotter_dt"] > 0 else None
    spec = model.layers() if dt else None

    def point(t):
        g = time_correlation(x1, x1, h, t, prep, n_sys=2,
                             trotter_dt=dt, spec=spec)
        ge = model.correlation_exact(t)
        return (t, g.real, g.imag, complex(ge).real, complex(ge).imag)

    rows = _pool_map(point, ts, workers)
    lines = ["t,re_G,im_G,re_G_exact,im_G_exact"]
    for r in rows:
        lines.append(",".join(_fmt(x) for x in r))
    return {p["out"]: "\n".join(lines) + "\n"}


def _run_hubbard_spectrum(p: dict, workers: int) -> dict[str, str]:
    from .models import Hubbard2D
    from .qprotocol import (apply_circuit, evolve_exact, prepare_slater,
                            thouless_rotate)
    from .spectral import (TimeSeries, dft, find_peaks, series_to_csv,
                           spectrum_to_csv)
    from .statevector import new_register

    model = Hubbard2D(p["nx"], p["ny"], p["tx"], p["ty"], p["u"])
    n_up, n_dn = p["n_up"], p["n_dn"]
    state = new_register(model.n_modes, 0)
    site_modes = (list(range(1, n_up + 1))
                  + list(range(model.n_sites + 1, model.n_sites + n_dn + 1)))
    apply_circuit(state, prepare_slater(site_modes, model.n_modes))
    apply_circuit(state, thouless_rotate(model.mean_field_rotation(),
                                         model.n_modes))
    h = model.hamiltonian()
    phi = state.copy()
    values = np.empty(p["m"], dtype=complex)
    psi = phi.copy()
    for j in range(p["m"]):
        evolve_exact(psi, h, p["dt"])
        values[j] = phi.overlap(psi)
    series = TimeSeries(p["dt"], values)
    spec = dft(series)
    peaks = find_peaks(spec, rel_threshold=p["peak_threshold"])
    evals, vecs = model.sector_spectrum(n_up, n_dn)
    _, orbitals = model.mean_field_orbitals()
    amps = model.slater_sector_amplitudes(orbitals, n_up, n_dn)
    overlaps = np.abs(vecs.conj().T @ amps) ** 2
    stem = p["out"]
    pk_lines = ["lambda,weight,refined"]
    for pk in peaks:
        pk_lines.append(f"{_fmt(pk.frequency)},{_fmt(pk.weight)},{int(pk.refined)}")
    or_lines = ["eigenvalue,overlap"]
    for e, o in zip(evals, overlaps):
        or_lines.append(f"{_fmt(e)},{_fmt(o)}")
    return {
        f"{stem}_series.csv": series_to_csv(series),
        f"{stem}_spectrum.csv": spectrum_to_csv(spec),
        f"{stem}_peaks.csv": "\n".join(pk_lines) + "\n",
        f"{stem}_oracle.csv": "\n".join(or_lines) + "\n",
    }


def _run_spectrum(p: dict, workers: int) -> dict[str, str]:
    """Spectrum protocol for a Hamiltonian given in Pauli-sum text form."""
    from .opalgebra import PauliSum
    from .qprotocol import spectrum_series
    from .spectral import dft, find_peaks, series_to_csv, spectrum_to_csv
    from .statevector import new_register

    h = PauliSum.from_text(Path(p["hamiltonian"]).read_text())
    n_sys = max(h.max_qubit(), 1)
    if not 0 <= p["basis_state"] < 2 ** n_sys:
        raise ValueError("basis_state outside the register")
    prep = None
    if p["basis_state"]:
        from .qprotocol import Circuit
        prep = Circuit(n_sys)
        for q in range(1, n_sys + 1):
            if (p["basis_state"] >> (n_sys - q)) & 1:
                prep.rx(q, np.pi)
    mode = "ancilla" if n_sys <= 12 else "overlap"
    series = spectrum_series(h, prep, n_sys, p["m"], p["dt"], mode=mode)
    spec = dft(series)
    peaks = find_peaks(spec, rel_threshold=p["peak_threshold"])
    stem = p["out"]
    lines = ["lambda,weight,refined"]
    for pk in peaks:
        lines.append(f"{_fmt(pk.frequency)},{_fmt(pk.weight)},{int(pk.refined)}")
    return {
        f"{stem}_series.csv": series_to_csv(series),
        f"{stem}_spectrum.csv": spectrum_to_csv(spec),
        f"{stem}_peaks.csv": "\n".join(lines) + "\n",
    }


def _run_meanfield_diag(p: dict, workers: int) -> dict[str, str]:
    from .liecore import spec_from_json

    spec = spec_from_json(Path(p["algebra"]).read_text())
    coeffs = np.asarray(json.loads(Path(p["coeffs"]).read_text()), dtype=float)
    res = diagonalize(spec, AlgebraElement(spec, coeffs), eps=p["eps"])
    payload = {
        "epsilon_k": res.epsilon.tolist(),
        "iterations": res.iterations,
        "residual": res.residual,
    }
    return {p["out"]: json.dumps(payload, indent=1) + "\n"}


def _run_gcs_expect(p: dict, workers: int) -> dict[str, str]:
    from .gcs import GcsState, expectation_product
    from .liecore import spec_from_json

    spec = spec_from_json(Path(p["algebra"]).read_text())
    zeta = np.asarray(json.loads(Path(p["zeta"]).read_text()), dtype=float)
    ops = json.loads(Path(p["ops"]).read_text())
    state = GcsState.from_zeta(spec, zeta)
    ws = [AlgebraElement(spec, np.asarray(c, dtype=float)) for c in ops]
    val = expectation_product(state, ws)
    payload = {"value_re": val.real, "value_im": val.imag, "order": len(ws)}
    return {p["out"]: json.dumps(payload, indent=1) + "\n"}


def _run_entangle(p: dict, workers: int) -> dict[str, str]:
    from .entanglement import (concurrence, local_purity, schmidt_entropy,
                               uN_purity)

    amps = _read_amplitudes(Path(p["state"]))
    dims = [int(x) for x in p["dims"].split(",")]
    out: dict = {"dims": dims}
    out["schmidt_entropy"] = schmidt_entropy(
        amps, dims[0], int(np.prod(dims[1:])))
    out["local_purity"] = local_purity(amps, dims)
    if dims == [2, 2]:
        rho = np.outer(amps, amps.conj())
        out["concurrence"] = concurrence(rho)
    if p["fermionic_modes"]:
        out["uN_purity"] = uN_purity(amps, p["fermionic_modes"])
    return {p["out"]: json.dumps(out, indent=1) + "\n"}


def _read_amplitudes(path: Path) -> np.ndarray:
    rows = [r for r in path.read_text().strip().splitlines()
            if r and not r.lower().startswith("re")]
    vals = []
    for r in rows:
        re_s, im_s = r.split(",")
        vals.append(complex(float(re_s), float(im_s)))
    amps = np.array(vals)
    return amps / np.linalg.norm(amps)


def _pool_map(fn, grid, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, grid))  # preserves grid order


# ---------------------------------------------------------------------------
# Subcommand table
# ---------------------------------------------------------------------------

_COMMON = [
    Param("out", str, required=True, help="output path (or stem)"),
]

SUBCOMMANDS: dict[str, Sub] = {}


def _register(name, description, params, runner, needs_seed_with=None):
    SUBCOMMANDS[name] = Sub(name, params + _COMMON, runner, description,
                            needs_seed_with)


_register(
    "xy-purity",
    "sweep of the XY-chain purity over the transverse coupling",
    [
        Param("n", int, default=400, check=_pos_int("n")),
        Param("gamma", float, default=1.0,
              check=lambda v: None if 0 < v <= 1 else "gamma must be in (0, 1]"),
        Param("g_min", float, default=0.0,
              check=lambda v: None if v >= 0 else "g_min must be >= 0"),
        Param("g_max", float, default=1.0),
        Param("steps", int, default=101, check=_pos_int("steps")),
    ],
    _run_xy_purity,
)

_register(
    "lmg-purity",
    "collective-model purity across a pairing-strength scan",
    [
        Param("n", int, default=500, check=_pos_int("n")),
        Param("w", float, default=0.0),
        Param("v_min", float, default=-3.0),
        Param("v_max", float, default=3.0),
        Param("steps", int, default=61, check=_pos_int("steps")),
    ],
    _run_lmg_purity,
)

_register(
    "fano-spectrum",
    "ancilla spectrum protocol for the impurity ring, with DFT peaks",
    [
        Param("n", int, default=1, check=_pos_int("n")),
        Param("eps", float, required=True, help="impurity energy"),
        Param("ek0", float, required=True, help="k_0 mode energy (-2 tau)"),
        Param("v", float, required=True, help="impurity coupling"),
        Param("m", int, default=128, check=_pos_int("m")),
        Param("dt", float, default=0.1, check=_positive("dt")),
        Param("peak_threshold", float, default=0.1),
        Param("shots", int, default=0,
              check=lambda v: None if v >= 0 else "shots must be >= 0"),
        Param("seed", int, default=None),
    ],
    _run_fano_spectrum,
    needs_seed_with="shots",
)

_register(
    "fano-correlation",
    "impurity correlation G(t) from the one-ancilla protocol",
    [
        Param("eps", float, required=True),
        Param("ek0", float, required=True),
        Param("v", float, required=True),
        Param("t_max", float, default=10.0, check=_positive("t_max")),
        Param("steps", int, default=201, check=_pos_int("steps")),
        Param("trotter_dt", float, default=0.0,
              help="0 = exact evolution; > 0 = first-order split step"),
    ],
    _run_fano_correlation,
)

_register(
    "hubbard-spectrum",
    "lattice-model spectrum protocol against the sector oracle",
    [
        Param("nx", int, required=True, check=_pos_int("nx")),
        Param("ny", int, required=True, check=_pos_int("ny")),
        Param("tx", float, default=1.0),
        Param("ty", float, default=1.0),
        Param("u", float, default=0.0),
        Param("n_up", int, required=True, check=_pos_int("n_up")),
        Param("n_dn", int, required=True, check=_pos_int("n_dn")),
        Param("m", int, default=512, check=_pos_int("m")),
        Param("dt", float, default=0.1, check=_positive("dt")),
        Param("peak_threshold", float, default=0.05),
    ],
    _run_hubbard_spectrum,
)

_register(
    "spectrum",
    "spectrum protocol for a Pauli-sum Hamiltonian file",
    [
        Param("hamiltonian", str, required=True,
              help="Pauli-sum text file (one term per line)"),
        Param("basis_state", int, default=0,
              help="initial computational basis label"),
        Param("m", int, default=256, check=_pos_int("m")),
        Param("dt", float, default=0.1, check=_positive("dt")),
        Param("peak_threshold", float, default=0.1),
    ],
    _run_spectrum,
)

_register(
    "meanfield-diag",
    "generalized Jacobi diagonalization of an algebra element",
    [
        Param("algebra", str, required=True, help="algebra JSON file"),
        Param("coeffs", str, required=True, help="JSON coefficient vector"),
        Param("eps", float, default=1e-10, check=_positive("eps")),
    ],
    _run_meanfield_diag,
)

_register(
    "gcs-expect",
    "coherent-state expectation of an operator product",
    [
        Param("algebra", str, required=True),
        Param("zeta", str, required=True, help="JSON rotation coefficients"),
        Param("ops", str, required=True,
              help="JSON list of operator coefficient vectors"),
    ],
    _run_gcs_expect,
)

_register(
    "entangle",
    "entanglement measures of an amplitude-list state",
    [
        Param("state", str, required=True, help="CSV of re,im amplitudes"),
        Param("dims", str, required=True, help="comma list of subsystem dims"),
        Param("fermionic_modes", int, default=0),
    ],
    _run_entangle,
)


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def _load_config(path: Path) -> dict:
    text = path.read_text()
    if path.suffix == ".json":
        return json.loads(text)
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text)


def _resolve(sub: Sub, cli_values: dict, config: dict) -> tuple[dict, list[str]]:
    """Merge config + flags (flags win) and validate; returns (params, violations)."""
    violations = []
    known = {p.name for p in sub.params}
    for key in config:
        if key not in known:
            violations.append(f"unknown config key {key!r}")
    merged = {}
    for p in sub.params:
        val = cli_values.get(p.name)
        if val is None:
            val = config.get(p.name, p.default)
        if val is None and p.required:
            violations.append(f"missing required parameter {p.name!r}")
            continue
        if val is not None and not isinstance(val, p.type):
            try:
                val = p.type(val)
            except (TypeError, ValueError):
                violations.append(f"parameter {p.name!r} is not a {p.type.__name__}")
                continue
        if val is not None and p.check is not None:
            err = p.check(val)
            if err:
                violations.append(err)
        merged[p.name] = val
    if sub.needs_seed_with and merged.get(sub.needs_seed_with):
        if merged.get("seed") is None:
            violations.append("sampling requires an explicit --seed")
    return merged, violations


def validate_config(path: str, subcommand: str) -> list[str]:
    """Violation report for a config file against one subcommand's schema."""
    if subcommand not in SUBCOMMANDS:
        return [f"unknown subcommand {subcommand!r}"]
    try:
        config = _load_config(Path(path))
    except OSError as exc:
        raise OSError(f"cannot read config file: {exc}") from exc
    _, violations = _resolve(SUBCOMMANDS[subcommand], {}, config)
    return violations


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="liesim", description=__doc__)
    subs = top.add_subparsers(dest="subcommand", required=True)
    for sub in SUBCOMMANDS.values():
        sp = subs.add_parser(sub.name, help=sub.description)
        for p in sub.params:
            flag = "--" + p.name.replace("_", "-")
            sp.add_argument(flag, dest=p.name, default=None, help=p.help)
        sp.add_argument("--config", default=None, help="TOML or JSON config file")
        sp.add_argument("--workers", type=int, default=1,
                        help="worker pool size for grid sweeps")
        sp.add_argument("--dry-run", action="store_true",
                        help="print the resolved plan without computing")
    vp = subs.add_parser("validate-config", help="check a config file")
    vp.add_argument("file")
    vp.add_argument("--for", dest="target", required=True,
                    help="subcommand the config is meant for")
    return top


def run(argv: list[str]) -> int:
    args = _build_parser().parse_args(argv)
    if args.subcommand == "validate-config":
        try:
            violations = validate_config(args.file, args.target)
        except OSError as exc:
            print(exc, file=sys.stderr)
            return 2
        for v in violations:
            print(f"violation: {v}")
        if not violations:
            print("ok")
        return 0 if not violations else 2

    sub = SUBCOMMANDS[args.subcommand]
    config = {}
    if args.config:
        try:
            config = _load_config(Path(args.config))
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    cli_values = {p.name: getattr(args, p.name) for p in sub.params}
    params, violations = _resolve(sub, cli_values, config)
    if violations:
        for v in violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2

    if args.dry_run:
        plan = {"subcommand": sub.name, "parameters": _plain(params),
                "workers": args.workers}
        print(json.dumps(plan, indent=1))
        return 0

    t0 = time.perf_counter()
    try:
        outputs = sub.runner(params, args.workers)
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - t0

    for name, text in outputs.items():
        Path(name).parent.mkdir(parents=True, exist_ok=True)
        Path(name).write_text(text)
    manifest = {
        "subcommand": sub.name,
        "parameters": _plain(params),
        "versions": {
            "liesim": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": wall,
        "outputs": sorted(outputs),
    }
    mpath = Path(params["out"]).with_suffix("").as_posix() + ".manifest.json"
    Path(mpath).write_text(json.dumps(manifest, indent=1) + "\n")
    return 0


def _plain(params: dict) -> dict:
    return {k: (v if not isinstance(v, np.generic) else v.item())
            for k, v in params.items()}


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
