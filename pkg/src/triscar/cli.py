"""Command line interface.

Subcommands: solve1d, solve3d, analyze, orbit, estimate, report.  Every run
writes its outputs plus a manifest.json into --out.  Numeric CSV cells use
17 significant digits, so identical configurations reproduce byte-identical
files.  Exit codes: 0 success, 2 configuration or input error, 3 resource
limit, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .basis import (ResourceLimitError, Sector1D, Sector3D, SymmetrizedSector,
                    basis_size_3d, enumerate_basis_1d, estimate_basis_bytes,
                    sector_3d, symmetrize_sector)
from .classical import (find_critical_points, hessian_analysis,
                        integrate_orbit, pair_distances_3d, suggest_timestep)
from .config import ConfigError, load_config, model_params, section
from .eigensolve import (DenseSizeError, IterationError, assemble_bands,
                         band_id_per_state, solve_dense, solve_iterative)
from .hamiltonian1d import HamiltonianOperator1D, MatrixElementRule1D
from .hamiltonian3d import (HamiltonianOperator3D, MatrixElementRule3D,
                            SymmetrizedOperator3D)
from .manifest import RunManifest, read_manifest
from .params import ModelParams, Scaling
from .scars import compare_with_spectrum, predicted_gap, scar_intensity, \
    stable_frequency
from .wavefunction import (autocorrelation, concentration_ratio, heavy_overlap,
                           integrated_probability_3d, pair_projection_3d,
                           position_wavefunction_1d)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _quote(field: str) -> str:
    if "," in field or '"' in field or "\n" in field:
        return '"' + field.replace('"', '""') + '"'
    return field


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_quote(f) for f in row) + "\n")


def _params_dict(params: ModelParams) -> dict:
    return {
        "gamma": params.gamma,
        "box_length": params.box_length,
        "coupling": params.coupling,
        "heavy_cutoff": params.heavy_cutoff,
        "cutoff_sq": params.cutoff_sq,
        "scaling": params.scaling.value,
        "light_cutoff_mode": params.light_cutoff_mode.value,
    }


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_out(out: str) -> str:
    os.makedirs(out, exist_ok=True)
    return out


def _saddle_analysis(params: ModelParams):
    """Locate the collision saddle and return its mode analysis in the
    reporting convention of params (None when no saddle is found)."""
    result = find_critical_points(params)
    saddle = next((p for p in result.points if p.kind == "saddle"), None)
    if saddle is None:
        return None
    ana = hessian_analysis(saddle, params)
    if params.scaling is Scaling.TIMES_L:
        ana = ana.scaled(params.box_length)
    return ana


# ---------------------------------------------------------------------------
# solve1d


def cmd_solve1d(args) -> int:
    cfg = load_config(args.config)
    params = model_params(cfg)
    s = section(cfg, "solve1d", {
        "total_momentum": 0, "gap_threshold": 2.0, "method": "auto", "k": 8,
        "dense_threshold": 4096, "tol": 1e-10, "seed": 0,
        "dump_matrix": False, "scar_levels": 3,
    })
    out = _ensure_out(args.out)
    man = RunManifest("solve1d", parameters={**_params_dict(params),
                                             "solve1d": {k: v for k, v in s.items()}})

    t0 = time.perf_counter()
    sector = enumerate_basis_1d(params, s["total_momentum"])
    rule = MatrixElementRule1D(params)
    op = HamiltonianOperator1D(sector, rule)
    man.add_timing("build", time.perf_counter() - t0)

    t0 = time.perf_counter()
    method = s["method"]
    if method == "auto":
        method = "dense" if sector.dim <= s["dense_threshold"] else "iterative"
    if method == "dense":
        spectrum = solve_dense(op, dense_threshold=s["dense_threshold"])
    elif method == "iterative":
        spectrum = solve_iterative(op, s["k"], tol=s["tol"], seed=s["seed"])
    else:
        raise ConfigError(f"bad value for [solve1d] method: {method!r}")
    man.add_timing("solve", time.perf_counter() - t0)

    bands = assemble_bands(spectrum.eigenvalues, s["gap_threshold"])
    bids = band_id_per_state(spectrum.k, bands)

    path = os.path.join(out, "spectrum.csv")
    _write_csv(path, ["index", "eigenvalue", "residual", "band"],
               ([str(i), _fmt(spectrum.eigenvalues[i]), _fmt(spectrum.residuals[i]),
                 str(int(bids[i]))] for i in range(spectrum.k)))
    man.add_artifact(path)

    path = os.path.join(out, "bands.json")
    _write_json(path, {
        "gap_threshold": s["gap_threshold"],
        "bands": [{"band": b.band_id, "start": b.start, "stop": b.stop,
                   "size": b.size, "head": b.head, "top": b.top}
                  for b in bands],
    })
    man.add_artifact(path)

    saddle = _saddle_analysis(params)
    if saddle is not None and spectrum.k:
        comp = compare_with_spectrum(saddle, spectrum.eigenvalues, bands,
                                     n_levels=s["scar_levels"])
        path = os.path.join(out, "scar_comparison.json")
        payload = comp.as_dict()
        payload["scaling"] = params.scaling.value
        _write_json(path, payload)
        man.add_artifact(path)

    path = os.path.join(out, "eigenvectors.npz")
    np.savez(path,
             eigenvalues=spectrum.eigenvalues, eigenvectors=spectrum.eigenvectors,
             residuals=spectrum.residuals, band_ids=bids,
             n1=sector.n1, n2=sector.n2, p=sector.p,
             total_momentum=np.array([s["total_momentum"]]),
             dimension=np.array("1d"),
             params=np.array(json.dumps(_params_dict(params))))
    man.add_artifact(path)

    if s["dump_matrix"]:
        path = os.path.join(out, "hamiltonian_nonzeros.csv")
        _write_csv(path, ["row", "col", "value"],
                   ([str(i), str(j), _fmt(v)] for i, j, v in op.nonzero_triplets()))
        man.add_artifact(path)

    man.statistics = {
        "dimension": sector.dim,
        "method": spectrum.method,
        "ground_energy": float(spectrum.eigenvalues[0]) if spectrum.k else None,
        "n_bands": len(bands),
        "max_residual_ratio": spectrum.max_residual_ratio(),
    }
    man.write(out)
    print(f"sector {sector.key}: {sector.dim} states, method {spectrum.method}")
    if spectrum.k:
        print(f"ground energy {_fmt(spectrum.eigenvalues[0])} "
              f"({params.scaling.value})")
    print(f"bands: {len(bands)}  ->  {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve3d


def _solve_block(op, label: str, s: dict):
    if op.dim == 0:
        return None
    method = s["method"]
    if method == "auto":
        method = "dense" if op.dim <= s["dense_threshold"] else "iterative"
    if method == "dense":
        return solve_dense(op, sector_key=label,
                           dense_threshold=s["dense_threshold"])
    if method == "iterative":
        return solve_iterative(op, min(s["k"], op.dim), tol=s["tol"],
                               seed=s["seed"], sector_key=label)
    raise ConfigError(f"bad value for [solve3d] method: {method!r}")


def cmd_solve3d(args) -> int:
    cfg = load_config(args.config)
    params = model_params(cfg)
    s = section(cfg, "solve3d", {
        "total_momentum": [0, 0, 0], "method": "auto", "k": 8,
        "dense_threshold": 4096, "tol": 1e-10, "seed": 0,
        "max_states": 1_000_000,
    })
    total = tuple(s["total_momentum"])
    if len(total) != 3:
        raise ConfigError("[solve3d] total_momentum needs three integers")
    out = _ensure_out(args.out)

    n_vec, n_states = basis_size_3d(params.cutoff_sq)
    budget = sys.maxsize if args.allow_large else s["max_states"]
    if n_states > budget:
        mb = estimate_basis_bytes(n_states) / 2 ** 20
        raise ResourceLimitError(
            f"cutoff_sq={params.cutoff_sq} implies {n_vec} vectors and "
            f"{n_states} product states (~{mb:.0f} MB of labels), over the "
            f"budget of {budget}; rerun with --allow-large to proceed")

    man = RunManifest("solve3d", parameters={**_params_dict(params),
                                             "solve3d": {k: v for k, v in s.items()}})
    t0 = time.perf_counter()
    sector = sector_3d(params, total)
    sym, anti = symmetrize_sector(sector)
    rule = MatrixElementRule3D(params)
    plain_op = HamiltonianOperator3D(sector, rule, cutoff_sq=params.cutoff_sq)
    man.add_timing("build", time.perf_counter() - t0)

    t0 = time.perf_counter()
    blocks = {}
    for tag, block in (("sym", sym), ("anti", anti)):
        op = SymmetrizedOperator3D(block, plain_op)
        spec = _solve_block(op, f"{sector.key} {tag}", s)
        if spec is not None:
            blocks[tag] = (block, spec)
    man.add_timing("solve", time.perf_counter() - t0)

    rows = []
    for tag in ("sym", "anti"):
        if tag not in blocks:
            continue
        _, spec = blocks[tag]
        for i in range(spec.k):
            rows.append([sector.key, tag, str(i), _fmt(spec.eigenvalues[i]),
                         _fmt(spec.residuals[i])])
    path = os.path.join(out, "spectrum.csv")
    _write_csv(path, ["sector", "parity", "index", "eigenvalue", "residual"], rows)
    man.add_artifact(path)

    path = os.path.join(out, "sectors.json")
    _write_json(path, {
        "total_momentum": list(total),
        "cutoff_sq": params.cutoff_sq,
        "vectors": n_vec,
        "full_basis_states": n_states,
        "sector_dimension": sector.dim,
        "symmetric_dimension": sym.dim,
        "antisymmetric_dimension": anti.dim,
        "nonzeros_per_row": plain_op.nonzeros_per_row(),
    })
    man.add_artifact(path)

    for tag in blocks:
        block, spec = blocks[tag]
        path = os.path.join(out, f"eigenvectors_{tag}.npz")
        np.savez(path,
                 eigenvalues=spec.eigenvalues, eigenvectors=spec.eigenvectors,
                 residuals=spec.residuals,
                 idx_a=block.idx_a, idx_b=block.idx_b,
                 parity=np.array([block.parity]),
                 n1=sector.n1, n2=sector.n2, p=sector.p,
                 total_momentum=np.array(total),
                 dimension=np.array("3d"),
                 params=np.array(json.dumps(_params_dict(params))))
        man.add_artifact(path)

    e_sym = float(blocks["sym"][1].eigenvalues[0]) if "sym" in blocks else None
    e_anti = float(blocks["anti"][1].eigenvalues[0]) if "anti" in blocks else None
    ordered = None
    if e_sym is not None and e_anti is not None:
        ordered = bool(e_sym < e_anti)
    man.statistics = {
        "sector_dimension": sector.dim,
        "symmetric_dimension": sym.dim,
        "antisymmetric_dimension": anti.dim,
        "nonzeros_per_row": plain_op.nonzeros_per_row(),
        "ground_energy_symmetric": e_sym,
        "ground_energy_antisymmetric": e_anti,
        "symmetric_ground_below_antisymmetric": ordered,
    }
    man.write(out)
    print(f"sector {sector.key}: dim {sector.dim} = {sym.dim} sym + {anti.dim} anti")
    if e_sym is not None:
        print(f"ground energy (sym)  {_fmt(e_sym)}")
    if e_anti is not None:
        print(f"ground energy (anti) {_fmt(e_anti)}")
    if ordered is not None and not ordered:
        print("note: antisymmetric ground state lies below the symmetric one")
    print(f"->  {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _parse_selector(text: str, eigenvalues: np.ndarray,
                    band_ids: np.ndarray) -> list[int]:
    chosen: list[int] = []

    def add(i: int):
        if i not in chosen:
            chosen.append(i)

    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        tokens = part.split(":")
        if tokens[0] == "ground" and len(tokens) == 1:
            add(int(np.argmin(eigenvalues)))
        elif tokens[0] == "index" and len(tokens) == 2:
            i = int(tokens[1])
            if not 0 <= i < len(eigenvalues):
                raise ConfigError(f"selector index {i} out of range "
                                  f"0..{len(eigenvalues) - 1}")
            add(i)
        elif tokens[0] == "energy" and len(tokens) == 2:
            add(int(np.argmin(np.abs(eigenvalues - float(tokens[1])))))
        elif tokens[0] == "band" and len(tokens) == 3:
            bid = int(tokens[1])
            members = np.nonzero(band_ids == bid)[0]
            if len(members) == 0:
                raise ConfigError(f"selector band {bid} not present")
            if tokens[2] == "top":
                add(int(members[-1]))
            elif tokens[2] == "head":
                add(int(members[0]))
            elif tokens[2] == "all":
                for i in members:
                    add(int(i))
            else:
                raise ConfigError(f"bad band selector {part!r} "
                                  f"(use head, top or all)")
        else:
            raise ConfigError(f"bad selector {part!r}")
    if not chosen:
        raise ConfigError(f"selector {text!r} selected nothing")
    return chosen


def _params_from_npz(data) -> ModelParams:
    from .params import LightCutoffMode

    raw = json.loads(str(data["params"]))
    return ModelParams(gamma=raw["gamma"], box_length=raw["box_length"],
                       coupling=raw["coupling"], heavy_cutoff=raw["heavy_cutoff"],
                       cutoff_sq=raw["cutoff_sq"],
                       light_cutoff_mode=LightCutoffMode(raw["light_cutoff_mode"]),
                       scaling=Scaling(raw["scaling"]))


def _analyze_1d(args, cfg, s, out, man) -> None:
    path = os.path.join(args.from_dir, "eigenvectors.npz")
    data = np.load(path)
    params = _params_from_npz(data)
    sector = Sector1D(int(data["total_momentum"][0]),
                      data["n1"], data["n2"], data["p"])
    evals = data["eigenvalues"]
    evecs = data["eigenvectors"]
    bids = data["band_ids"]
    L = params.box_length

    select = args.select or s["select"]
    chosen = _parse_selector(select, evals, bids)

    # heavy overlap for every state: group coefficient mass by light momentum
    p_vals = np.unique(sector.p)
    scatter = np.zeros((len(p_vals), sector.dim))
    scatter[np.searchsorted(p_vals, sector.p), np.arange(sector.dim)] = 1.0
    amp = scatter @ evecs
    overlaps = np.sum(np.abs(amp) ** 2, axis=0) / L

    path = os.path.join(out, "overlaps.csv")
    _write_csv(path, ["index", "eigenvalue", "band", "heavy_overlap"],
               ([str(i), _fmt(evals[i]), str(int(bids[i])), _fmt(overlaps[i])]
                for i in range(len(evals))))
    man.add_artifact(path)

    strip = s["strip_fraction"] * L
    for i in chosen:
        grid = position_wavefunction_1d(evecs[:, i], sector, params,
                                        n_r=s["n_r"], n_eta=s["n_eta"])
        dens = grid.density()
        path = os.path.join(out, f"grid_state{i:04d}.csv")
        _write_csv(path, [_fmt(eta) for eta in grid.eta_axis],
                   ([_fmt(v) for v in row] for row in dens))
        man.add_artifact(path)
        path = os.path.join(out, f"grid_state{i:04d}.json")
        _write_json(path, {
            "index": int(i),
            "eigenvalue": float(evals[i]),
            "band": int(bids[i]),
            "heavy_overlap": float(heavy_overlap(grid)),
            "concentration_ratio": float(concentration_ratio(grid, strip)),
            "strip_half_width": strip,
            "norm": grid.norm(),
            "r_axis": [float(v) for v in grid.r_axis],
            "eta_axis": [float(v) for v in grid.eta_axis],
        })
        man.add_artifact(path)

    if args.weights:
        coeffs = _read_weights(args.weights, len(evals))
        broad = s["broadening"]
        omega = None
        if broad <= 0 or s["times_max"] <= 0:
            saddle = _saddle_analysis(params)
            if saddle is None:
                raise ConfigError("no saddle found to derive broadening; set "
                                  "[analyze] broadening and times_max")
            omega = stable_frequency(saddle)
        if broad <= 0:
            broad = omega / 2.0
        t_max = s["times_max"]
        if t_max <= 0:
            t_max = 3.0 * 2.0 * np.pi / omega
        times = np.linspace(0.0, t_max, s["n_times"])
        series = autocorrelation(coeffs, evals, times, broad)
        path = os.path.join(out, "autocorr.csv")
        _write_csv(path, ["t", "re", "im", "abs"],
                   ([_fmt(t), _fmt(v.real), _fmt(v.imag), _fmt(abs(v))]
                    for t, v in zip(series.times, series.values)))
        man.add_artifact(path)
        path = os.path.join(out, "spectral_density.csv")
        _write_csv(path, ["energy", "density"],
                   ([_fmt(e), _fmt(d)] for e, d in
                    zip(series.energy_grid, series.spectral_density)))
        man.add_artifact(path)
        man.statistics["spectral_mass"] = series.spectral_mass()
        man.statistics["broadening"] = broad

    man.statistics.update({
        "selected": [int(i) for i in chosen],
        "strip_half_width": strip,
        "dimension": sector.dim,
    })


def _read_weights(path: str, n: int) -> np.ndarray:
    if not os.path.exists(path):
        raise ConfigError(f"weights file not found: {path}")
    coeffs = np.zeros(n)
    with open(path) as fh:
        header = fh.readline()
        if header.strip() and not header.lower().startswith("index"):
            fh.seek(0)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            idx_s, val_s = line.split(",")[:2]
            i = int(idx_s)
            if not 0 <= i < n:
                raise ConfigError(f"weights index {i} out of range 0..{n - 1}")
            coeffs[i] = float(val_s)
    return coeffs


def _analyze_3d(args, cfg, s, out, man) -> None:
    tag = args.parity or "sym"
    if tag not in ("sym", "anti"):
        raise ConfigError(f"--parity must be sym or anti, got {tag!r}")
    path = os.path.join(args.from_dir, f"eigenvectors_{tag}.npz")
    if not os.path.exists(path):
        raise ConfigError(f"no {os.path.basename(path)} under {args.from_dir}")
    data = np.load(path)
    params = _params_from_npz(data)
    sector = Sector3D(tuple(int(v) for v in data["total_momentum"]),
                      data["n1"], data["n2"], data["p"])
    block = SymmetrizedSector(sector, int(data["parity"][0]),
                              data["idx_a"], data["idx_b"],
                              np.where(data["idx_a"] == data["idx_b"], 2.0,
                                       np.sqrt(2.0)))
    evals = data["eigenvalues"]
    evecs = data["eigenvectors"]
    idx = args.index if args.index is not None else 0
    if not 0 <= idx < len(evals):
        raise ConfigError(f"--index {idx} out of range 0..{len(evals) - 1}")
    coeffs = block.embed(evecs[:, idx])

    radial = integrated_probability_3d(coeffs, sector, params,
                                       n_r=s["n_radial"], n_eta=s["n_radial"])
    path = os.path.join(out, f"radial_{tag}_state{idx:04d}.csv")
    _write_csv(path, [_fmt(e) for e in radial.eta_axis],
               ([_fmt(v) for v in row] for row in radial.values))
    man.add_artifact(path)
    path = os.path.join(out, f"radial_{tag}_state{idx:04d}.json")
    _write_json(path, {
        "parity": tag, "index": int(idx), "eigenvalue": float(evals[idx]),
        "r_axis": [float(v) for v in radial.r_axis],
        "eta_axis": [float(v) for v in radial.eta_axis],
        "mass": radial.mass(),
        "mass_small_r": radial.mass_small_r(0.1 * params.box_length),
    })
    man.add_artifact(path)

    for comp_r, comp_eta, label in ((0, 0, "like"), (0, 1, "unlike")):
        grid = pair_projection_3d(coeffs, sector, params, comp_r, comp_eta,
                                  n_r=s["n_r"], n_eta=s["n_eta"])
        path = os.path.join(out, f"projection_{label}_{tag}_state{idx:04d}.csv")
        _write_csv(path, [_fmt(v) for v in grid.eta_axis],
                   ([_fmt(v) for v in row] for row in grid.density()))
        man.add_artifact(path)
    man.statistics.update({"parity": tag, "index": int(idx),
                           "eigenvalue": float(evals[idx])})


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    s = section(cfg, "analyze", {
        "select": "band:1:top", "n_r": 128, "n_eta": 128,
        "strip_fraction": 0.0625, "times_max": 0.0, "n_times": 512,
        "broadening": 0.0, "n_radial": 48, "components": [0, 1],
    })
    if not args.from_dir:
        raise ConfigError("analyze requires --from RUN_DIR")
    out = _ensure_out(args.out)
    man = RunManifest("analyze", parameters={"from": args.from_dir,
                                             "analyze": {k: v for k, v in s.items()}})
    if os.path.exists(os.path.join(args.from_dir, "eigenvectors.npz")):
        _analyze_1d(args, cfg, s, out, man)
    elif (os.path.exists(os.path.join(args.from_dir, "eigenvectors_sym.npz"))
          or os.path.exists(os.path.join(args.from_dir, "eigenvectors_anti.npz"))):
        _analyze_3d(args, cfg, s, out, man)
    else:
        raise ConfigError(f"no eigenvector archives under {args.from_dir}")
    man.write(out)
    print(f"analyze ->  {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# orbit


def cmd_orbit(args) -> int:
    cfg = load_config(args.config)
    params = model_params(cfg)
    L = params.box_length
    s = section(cfg, "orbit", {
        "dimension": 1, "initial": None, "dt": 0.0, "steps": 10000,
        "wrap": True, "singularity_tol": 0.0, "ensemble": "none",
        "n_orbits": 8, "spread": 0.15, "store_every": 1,
    })
    dim = s["dimension"]
    if dim not in (1, 3):
        raise ConfigError(f"[orbit] dimension must be 1 or 3, got {dim}")
    initial = s["initial"]
    if initial is None:
        initial = [L / 3.0, 0.0, 0.02 * L, 0.0] if dim == 1 else \
            [0.2 * L, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1 * L, 0.0, 0.0, 0.0, 0.0]
    if len(initial) != (4 if dim == 1 else 12):
        raise ConfigError(f"[orbit] initial needs {4 if dim == 1 else 12} "
                          f"numbers for dimension {dim}, got {len(initial)}")
    dt = s["dt"]
    if dt <= 0:
        if dim != 1:
            raise ConfigError("[orbit] dt must be set explicitly for 3D runs")
        dt = suggest_timestep(params)
    sing = s["singularity_tol"] if s["singularity_tol"] > 0 else None
    out = _ensure_out(args.out)
    man = RunManifest("orbit", parameters={**_params_dict(params),
                                           "orbit": {k: (v if k != "initial" else list(initial))
                                                     for k, v in s.items()},
                                           "dt_used": dt})

    t0 = time.perf_counter()
    orbits = []
    if s["ensemble"] == "none":
        orbits.append((0, np.array(initial, dtype=np.float64)))
    elif s["ensemble"] == "straddle":
        base = np.array(initial, dtype=np.float64)
        if dim == 3 and base[0] == 0:
            raise ConfigError("[orbit] straddle ensemble needs a nonzero "
                              "first component in initial")
        n_pairs = max(1, s["n_orbits"] // 2)
        for k in range(n_pairs):
            scale = 1.0 + s["spread"] * k
            for sign in (1.0, -1.0):
                st = base.copy()
                st[0] = sign * abs(base[0]) * scale
                orbits.append((len(orbits), st))
    else:
        raise ConfigError(f"bad value for [orbit] ensemble: {s['ensemble']!r}")

    trajectories = []
    for oid, init in orbits:
        traj = integrate_orbit(init, dt, s["steps"], params, dimension=dim,
                               wrap=s["wrap"], singularity_tol=sing)
        trajectories.append((oid, traj))
    man.add_timing("integrate", time.perf_counter() - t0)

    every = max(1, s["store_every"])
    oid, main_traj = trajectories[0]
    if dim == 1:
        header = ["step", "t", "r", "p_r", "eta", "p_eta", "energy"]

        def rows(traj):
            for i in range(0, len(traj.times), every):
                st = traj.states[i]
                yield [str(i), _fmt(traj.times[i]), _fmt(st[0]), _fmt(st[1]),
                       _fmt(st[2]), _fmt(st[3]), _fmt(traj.energies[i])]
    else:
        header = (["step", "t"] + [f"r{c}" for c in "xyz"]
                  + [f"p_r{c}" for c in "xyz"] + [f"eta{c}" for c in "xyz"]
                  + [f"p_eta{c}" for c in "xyz"] + ["energy", "min_distance"])

        def rows(traj):
            for i in range(0, len(traj.times), every):
                st = traj.states[i]
                dmin = min(pair_distances_3d(st[0:3], st[6:9]))
                yield ([str(i), _fmt(traj.times[i])] + [_fmt(v) for v in st]
                       + [_fmt(traj.energies[i]), _fmt(dmin)])

    path = os.path.join(out, "trajectory.csv")
    _write_csv(path, header, rows(main_traj))
    man.add_artifact(path)

    all_events = []
    for oid2, traj in trajectories:
        for ev in traj.events:
            all_events.append([str(oid2), str(ev.step), _fmt(ev.time), ev.kind,
                               ev.detail.replace(",", ";")])
    if all_events:
        path = os.path.join(out, "events.csv")
        _write_csv(path, ["orbit", "step", "t", "kind", "detail"], all_events)
        man.add_artifact(path)

    if len(trajectories) > 1 or s["ensemble"] != "none":
        path = os.path.join(out, "portrait.csv")
        prows = []
        for oid2, traj in trajectories:
            side = "+" if traj.states[-1][0] >= 0 else "-"
            outcome = "stopped" if traj.stopped else "ran"
            label = f"{side}{outcome}"
            ir = 0
            ieta = 2 if dim == 1 else 7
            for i in range(0, len(traj.times), every):
                prows.append([str(oid2), label, _fmt(traj.times[i]),
                              _fmt(traj.states[i][ir]), _fmt(traj.states[i][ieta])])
        _write_csv(path, ["orbit", "label", "t", "r1", "eta2"], prows)
        man.add_artifact(path)

    drift = main_traj.energy_drift()
    man.statistics = {
        "orbits": len(trajectories),
        "steps_requested": s["steps"],
        "steps_done": main_traj.n_steps,
        "dt": dt,
        "energy_drift": drift,
        "wrap_events": sum(1 for _, t in trajectories for e in t.events
                           if e.kind == "wrap"),
        "stopped": main_traj.stopped,
        "stop_reason": main_traj.stop_reason,
    }
    man.write(out)
    print(f"orbit: {len(trajectories)} trajector"
          f"{'y' if len(trajectories) == 1 else 'ies'}, dt {_fmt(dt)}, "
          f"relative energy drift {drift:.3e}")
    if main_traj.stopped:
        print(f"stopped: {main_traj.stop_reason}")
    print(f"->  {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    params = model_params(cfg)
    s = section(cfg, "estimate", {"n_levels": 3, "convention": "both"})
    if s["convention"] not in ("sigma", "rate", "both"):
        raise ConfigError(f"bad value for [estimate] convention: "
                          f"{s['convention']!r}")
    out = _ensure_out(args.out)
    man = RunManifest("estimate", parameters={**_params_dict(params),
                                              "estimate": {k: v for k, v in s.items()}})
    L = params.box_length
    result = find_critical_points(params)
    points = []
    saddle_raw = None
    for pt in result.points:
        ana = hessian_analysis(pt, params)
        points.append({
            "r": pt.r, "eta": pt.eta, "r_over_L": pt.r / L,
            "eta_over_L": pt.eta / L, "kind": pt.kind,
            "value_raw": ana.value, "value_scaled": ana.value * L,
            "sigmas_raw": list(ana.sigmas), "masses_raw": list(ana.masses),
            "grad_norm": pt.grad_norm,
        })
        if pt.kind == "saddle" and saddle_raw is None:
            saddle_raw = ana
    payload = {
        "parameters": _params_dict(params),
        "critical_points": points,
        "failed_seeds": [list(t) for t in result.failed_seeds],
    }
    if saddle_raw is not None:
        scaled = saddle_raw.scaled(L)
        omega_raw = stable_frequency(saddle_raw)
        omega_scaled = stable_frequency(scaled)
        levels = []
        for n in range(s["n_levels"]):
            levels.append({"n": n,
                           "gap_raw": predicted_gap(n, saddle_raw),
                           "gap_scaled": predicted_gap(n, scaled)})
        saddle_info = {
            "omega_raw": omega_raw,
            "omega_scaled": omega_scaled,
            "stable_period_raw": 2.0 * np.pi / omega_raw,
            "lambda_sigma_raw": saddle_raw.lambda_sigma,
            "lambda_sigma_scaled": scaled.lambda_sigma,
            "lambda_rate_raw": saddle_raw.lambda_rate,
            "lambda_rate_scaled": scaled.lambda_rate,
            "levels": levels,
        }
        if s["convention"] in ("sigma", "both"):
            saddle_info["intensity_sigma_convention"] = \
                scar_intensity(saddle_raw, "sigma")
        if s["convention"] in ("rate", "both"):
            saddle_info["intensity_rate_convention"] = \
                scar_intensity(saddle_raw, "rate")
        payload["saddle"] = saddle_info

        if args.from_dir:
            spath = os.path.join(args.from_dir, "eigenvectors.npz")
            if not os.path.exists(spath):
                raise ConfigError(f"no eigenvectors.npz under {args.from_dir}")
            data = np.load(spath)
            run_params = _params_from_npz(data)
            ana = saddle_raw
            if run_params.scaling is Scaling.TIMES_L:
                ana = saddle_raw.scaled(run_params.box_length)
            bands = assemble_bands(data["eigenvalues"],
                                   _band_gap_threshold(args.from_dir))
            comp = compare_with_spectrum(ana, data["eigenvalues"], bands,
                                         n_levels=s["n_levels"])
            payload["comparison"] = comp.as_dict()
            payload["comparison"]["scaling"] = run_params.scaling.value

    path = os.path.join(out, "scar_estimates.json")
    _write_json(path, payload)
    man.add_artifact(path)
    man.statistics = {
        "n_critical_points": len(points),
        "kinds": sorted(p["kind"] for p in points),
    }
    if saddle_raw is not None:
        man.statistics["delta_s_scaled"] = predicted_gap(0, saddle_raw.scaled(L))
    man.write(out)
    for p in points:
        print(f"{p['kind']:>10s} at r/L = {p['r_over_L']:+.6f}, "
              f"eta/L = {p['eta_over_L']:+.6f}, U*L = {p['value_scaled']:.6f}")
    if saddle_raw is not None:
        print(f"stable frequency (scaled) {_fmt(stable_frequency(saddle_raw.scaled(L)))}; "
              f"lowest predicted gap {_fmt(man.statistics['delta_s_scaled'])}")
    print(f"->  {out}")
    return EXIT_OK


def _band_gap_threshold(run_dir: str) -> float:
    path = os.path.join(run_dir, "bands.json")
    if os.path.exists(path):
        with open(path) as fh:
            return float(json.load(fh)["gap_threshold"])
    return 2.0


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    if not args.from_dir:
        raise ConfigError("report requires --from RUN_DIR")
    man = read_manifest(args.from_dir)
    lines = [
        f"run      : {man.get('command')} (version {man.get('version')})",
        f"directory: {args.from_dir}",
        "",
        "statistics:",
    ]
    for key in sorted(man.get("statistics", {})):
        lines.append(f"  {key} = {man['statistics'][key]}")
    lines.append("")
    lines.append("artifacts:")
    for name in man.get("artifacts", []):
        lines.append(f"  {name}")
    comp_path = os.path.join(args.from_dir, "scar_comparison.json")
    if os.path.exists(comp_path):
        with open(comp_path) as fh:
            comp = json.load(fh)
        lines.append("")
        lines.append("scar comparison (gaps above the ground state):")
        lines.append("  band  level  predicted      measured")
        for e in comp.get("entries", []):
            measured = "-" if e["measured_gap"] is None else f"{e['measured_gap']:.4f}"
            lines.append(f"  {e['band']:>4d}  {e['level']:>5d}  "
                         f"{e['predicted_gap']:>9.4f}  {measured:>12s}")
    lines.append("")
    lines.append(f"timings: {man.get('timings', {})}")
    text = "\n".join(lines) + "\n"
    out = _ensure_out(args.out)
    path = os.path.join(out, "report.txt")
    with open(path, "w") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triscar",
        description="Collision states and scars in periodic charged "
                    "three-body systems")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--out", default=default_out, help="output directory")

    p = sub.add_parser("solve1d", help="diagonalize a 1D momentum sector")
    common(p, "triscar-runs/solve1d")
    p.set_defaults(func=cmd_solve1d)

    p = sub.add_parser("solve3d", help="diagonalize a 3D momentum sector by "
                                       "exchange parity")
    common(p, "triscar-runs/solve3d")
    p.add_argument("--allow-large", action="store_true",
                   help="override the state-count budget")
    p.set_defaults(func=cmd_solve3d)

    p = sub.add_parser("analyze", help="wavefunctions and collision "
                                       "diagnostics from a solve run")
    common(p, "triscar-runs/analyze")
    p.add_argument("--from", dest="from_dir", required=True,
                   help="directory of a previous solve run")
    p.add_argument("--select", default=None,
                   help="state selector, e.g. ground | index:3 | band:1:top")
    p.add_argument("--weights", default=None,
                   help="CSV of (index, coefficient) defining an initial "
                        "vector for autocorrelation")
    p.add_argument("--parity", default=None, help="3D runs: sym or anti")
    p.add_argument("--index", type=int, default=None,
                   help="3D runs: state index inside the parity block")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("orbit", help="integrate classical center-of-mass "
                                     "orbits")
    common(p, "triscar-runs/orbit")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("estimate", help="critical points and scar estimates")
    common(p, "triscar-runs/estimate")
    p.add_argument("--from", dest="from_dir", default=None,
                   help="solve1d run directory for a measured-gap comparison")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("report", help="summarize a run directory")
    common(p, "triscar-runs/report")
    p.add_argument("--from", dest="from_dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (IterationError, DenseSizeError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
