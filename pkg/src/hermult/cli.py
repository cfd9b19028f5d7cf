"""Command-line front end: named experiment suites with file reports.

Five commands share one option set.  ``verify`` drives the exact
identity suite, ``decay`` the kernel moment and projection sweeps,
``cks`` the almost-orthogonality ledger, ``normsweep`` the band-limit
norm survey, and ``transfer`` the Hermite/Gaussian basis comparison.
Each run writes ``report.json``, one or two CSV tables stamped with the
configuration hash, and a PNG figure into the output directory, then
exits 0 on pass, 1 on a quantitative failure, 2 on a configuration or
budget error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from hermult.byparts import (
    LADDER_IDENTITY_KEYS,
    freq_expansion,
    verify_freq_identity,
    verify_ladder_identity,
    verify_lagrange,
    verify_spatial_identity,
)
from hermult.config import (
    BudgetError,
    ConfigError,
    ExperimentConfig,
    config_from_sources,
    parse_config_file,
    parse_param_list,
)
from hermult.estimates import (
    boundedness_sweep,
    cks_ledger,
    kernel_moment_sweep,
    projection_bound_sweep,
    projection_tail_exponent,
    sobolev_criterion_check,
)
from hermult.hermite import BasisSpec
from hermult.pseudomult import (
    assemble_matrix,
    gaussian_transfer_matrix,
    operator_norm,
)
from hermult.quadrature import tensor_rule
from hermult.reporting import figure, write_csv, write_json
from hermult.symbols import (
    REGISTRY_KEYS,
    builtin_symbol,
    gaussian_window,
    monomial_gaussian,
)

TRANSFER_TOL = 1e-10
FAR_BLOCK_TOL = 1e-12
SLOPE_TOL = 0.4
RMS_TOL = 0.5

# Parameters used when a command sweeps the whole registry and for
# symbols the user selected without explicit --param values.
DEFAULT_PARAMS = {
    "power": {"m": -2.0},
    "oscillatory": {"delta": 0.5},
    "rough_x": {"m": 0.0},
}


def _symbol_from_config(config: ExperimentConfig, key: str | None = None):
    key = key or config.symbol
    params = dict(DEFAULT_PARAMS.get(key, {}))
    if key == config.symbol:
        params.update(config.params)
    return builtin_symbol(key, **params)


def _xi_sample(dim: int, rng: np.random.Generator, cap: int = 10):
    """Deterministic multi-index sample with |xi| <= cap."""
    out = {(0,) * dim, (1,) + (0,) * (dim - 1), (cap,) + (0,) * (dim - 1)}
    if dim >= 2:
        out.add((3, 2) + (0,) * (dim - 2))
        out.add((0, cap) + (0,) * (dim - 2))
    for _ in range(4):
        draw = rng.integers(0, cap + 1, size=dim)
        while int(np.sum(draw)) > cap:
            draw = rng.integers(0, cap + 1, size=dim)
        out.add(tuple(int(v) for v in draw))
    return sorted(out)


def _point_clouds(dim: int, rng: np.random.Generator, count: int = 7):
    x = rng.normal(scale=1.2, size=(count, dim))
    y = rng.normal(scale=1.2, size=(count, dim))
    return x, y


def cmd_verify(config: ExperimentConfig, out: Path):
    rng = np.random.default_rng(config.seed)
    dim = config.dim
    xi_list = _xi_sample(dim, rng)
    x_pts, y_pts = _point_clouds(dim, rng)
    rows = []

    def record(identity, case, error, tol):
        rows.append((identity, case, error, tol, error <= tol))

    box = rng.normal(size=3) + 1j * rng.normal(size=3)
    shift_weights = {}
    for pos, xi in enumerate(_xi_sample(dim, rng, cap=4)[:3]):
        shift_weights[xi] = complex(box[pos])

    for key in LADDER_IDENTITY_KEYS:
        for xi in xi_list:
            for axis in range(min(dim, 2)):
                if key == "difference-commutator":
                    for r in (1, 2):
                        err = verify_ladder_identity(
                            key, xi, axis, x_pts, y_pts, r=r
                        )
                        record(key, f"xi={xi} i={axis} r={r}", err,
                               config.tol_id)
                elif key == "summation-shift":
                    for power in (0, 1):
                        err = verify_ladder_identity(
                            key, xi, axis, x_pts, y_pts,
                            weights=shift_weights, power=power,
                        )
                        record(key, f"i={axis} power={power}", err,
                               config.tol_id)
                else:
                    err = verify_ladder_identity(key, xi, axis, x_pts, y_pts)
                    record(key, f"xi={xi} i={axis}", err, config.tol_id)

    side = 9 if dim == 1 else 4
    coeffs = {}
    for xi in BasisSpec(dim, side - 1).indices:
        coeffs[xi] = 1.0 / (1.0 + sum(xi)) ** 2
    for order in (1, 2, 3, 4):
        terms = None
        if config.corrupt:
            # Negative control: nudge one expansion coefficient so the
            # two sides must disagree at the perturbation scale.
            terms = list(freq_expansion(order))
            terms[0] = replace(terms[0],
                               coefficient=terms[0].coefficient * (1 + 1e-3))
        check = verify_freq_identity(coeffs, 0, order, x_pts, y_pts,
                                     terms=terms)
        record("frequency-gap", f"order={order}", check.relative_error,
               config.tol_id)

    rule = tensor_rule(dim, min(config.resolved_quad, 64))
    window = gaussian_window(dim)
    bumpy = monomial_gaussian((2,) + (0,) * (dim - 1))
    pairs = [((6,) + (0,) * (dim - 1), (3,) + (0,) * (dim - 1))]
    if dim >= 2:
        pairs.append(((3, 2) + (0,) * (dim - 2), (0, 2) + (0,) * (dim - 2)))
    for order in (1, 2, 3):
        for xi, eta in pairs:
            err = verify_spatial_identity(bumpy, xi, eta, 0, order, rule)
            record("spatial-gap", f"xi={xi} eta={eta} order={order}", err,
                   config.tol_quad)

    for xi, eta in pairs:
        pointwise, integrated = verify_lagrange(xi, eta, 0, window, rule)
        record("oscillator-wronskian", f"xi={xi} eta={eta} core",
               pointwise, config.tol_id)
        record("oscillator-wronskian", f"xi={xi} eta={eta} integrated",
               integrated, config.tol_quad)

    write_csv(out / "identities.csv",
              ("identity", "case", "error", "tolerance", "passed"),
              rows, config.config_hash)

    families: dict[str, dict] = {}
    first_failure = ""
    for identity, case, error, tol, passed in rows:
        entry = families.setdefault(
            identity, {"max_error": 0.0, "tolerance": tol, "passed": True}
        )
        entry["max_error"] = max(entry["max_error"], error)
        entry["tolerance"] = min(entry["tolerance"], tol)
        entry["passed"] = entry["passed"] and bool(passed)
        if not passed and not first_failure:
            first_failure = f"{identity} [{case}]"

    overall = all(entry["passed"] for entry in families.values())
    summary = {
        "command": "verify",
        "config_hash": config.config_hash,
        "dim": dim,
        "cases": len(rows),
        "identities": families,
        "first_failure": first_failure,
        "passed": overall,
    }

    with figure(out / "verify.png", width=7.5) as ax:
        names = sorted(families)
        errors = [max(families[n]["max_error"], 1e-18) for n in names]
        tols = [families[n]["tolerance"] for n in names]
        pos = np.arange(len(names))
        ax.barh(pos, errors, color="#4878a8", label="max error")
        ax.scatter(tols, pos, color="#b04030", zorder=3, label="tolerance")
        ax.set_yticks(pos, names)
        ax.set_xscale("log")
        ax.set_xlabel("worst relative error")
        ax.set_title(f"identity suite, n={dim}")
        ax.legend(loc="lower right")

    return (0 if overall else 1), summary


def cmd_decay(config: ExperimentConfig, out: Path):
    if config.dim > 2:
        raise ConfigError("decay sweeps are implemented for n in {1, 2}")
    j_values = tuple(range(config.jmin, config.jmax + 1))
    if len(j_values) < 4:
        raise ConfigError("decay needs at least four blocks; widen jmin..jmax")
    sigma = _symbol_from_config(config)

    sweeps = [kernel_moment_sweep(sigma, config.dim, m, j_values)
              for m in config.orders]
    moment_rows = []
    for sweep in sweeps:
        for j, norm in zip(sweep.j_values, sweep.sup_norms):
            moment_rows.append((j, sweep.moment, norm))
    write_csv(out / "moments.csv", ("j", "moment", "sup_norm"),
              moment_rows, config.config_hash)

    projection = projection_bound_sweep(config.dim)
    proj_rows = list(zip(projection.degrees, projection.sup_values,
                         projection.ratios, projection.thetas))
    write_csv(out / "projection.csv",
              ("degree", "sup_diagonal", "ratio", "tail_exponent"),
              proj_rows, config.config_hash)

    fits = {}
    ok = True
    for sweep in sweeps:
        passed = (sweep.slope_error <= SLOPE_TOL
                  and sweep.rms_residual <= RMS_TOL)
        ok = ok and passed
        fits[f"moment_{sweep.moment}"] = {
            "slope": sweep.slope,
            "expected_slope": sweep.expected_slope,
            "intercept": sweep.intercept,
            "rms_residual": sweep.rms_residual,
            "passed": passed,
        }
    proj_ok = (projection.ratio_spread() <= 3.0
               and all(t > 0 for t in projection.thetas))
    theta_zero = None
    if config.dim == 1:
        theta_zero = projection_tail_exponent(0, 1)
        proj_ok = proj_ok and abs(theta_zero - 0.5) <= 0.05
    ok = ok and proj_ok

    summary = {
        "command": "decay",
        "config_hash": config.config_hash,
        "symbol": sigma.name,
        "dim": config.dim,
        "j_values": list(j_values),
        "fits": fits,
        "projection": {
            "ratio_spread": projection.ratio_spread(),
            "theta_min": min(projection.thetas),
            "theta_zero": theta_zero,
            "passed": proj_ok,
        },
        "passed": ok,
    }

    with figure(out / "decay.png", cols=2) as axes:
        for sweep in sweeps:
            logs = np.log2(sweep.sup_norms)
            axes[0].plot(sweep.j_values, logs, "o",
                         label=f"M={sweep.moment}")
            line = sweep.slope * np.asarray(sweep.j_values) + sweep.intercept
            axes[0].plot(sweep.j_values, line, "-", alpha=0.6)
        axes[0].set_xlabel("block j")
        axes[0].set_ylabel("log2 sup norm")
        axes[0].set_title(f"{sigma.name}: kernel moments, n={config.dim}")
        axes[0].legend()
        axes[1].plot(projection.degrees, projection.ratios, "s-",
                     label="sup ratio")
        axes[1].plot(projection.degrees, projection.thetas, "d-",
                     label="tail exponent")
        axes[1].set_xscale("log", base=2)
        axes[1].set_xlabel("degree N")
        axes[1].set_title("projection diagonal")
        axes[1].legend()

    return (0 if ok else 1), summary


def cmd_cks(config: ExperimentConfig, out: Path):
    if config.dim != 1:
        raise ConfigError("the composition ledger runs with n=1")
    if config.jmax > 6:
        raise BudgetError(
            "jmax beyond the quadrature budget for the ledger; use jmax <= 6"
        )
    sigma = _symbol_from_config(config)
    ledger = cks_ledger(sigma, config.jmax)

    rows = []
    far_worst = 0.0
    for j in range(config.jmax + 1):
        for k in range(config.jmax + 1):
            rows.append((j, k, abs(j - k), ledger.star_norms[j, k],
                         ledger.co_norms[j, k]))
            if abs(j - k) >= 2:
                far_worst = max(far_worst, ledger.co_norms[j, k])
    write_csv(out / "ledger.csv",
              ("j", "k", "separation", "star_norm", "co_norm"),
              rows, config.config_hash)

    lo = max(config.jmin, 1)
    spread = ledger.c0_spread(lo, config.jmax)
    eps_ok = np.isnan(ledger.epsilon) or ledger.epsilon > 0.0
    ok = far_worst <= FAR_BLOCK_TOL and eps_ok and spread < 0.25

    summary = {
        "command": "cks",
        "config_hash": config.config_hash,
        "symbol": sigma.name,
        "jmax": config.jmax,
        "epsilon": None if np.isnan(ledger.epsilon) else ledger.epsilon,
        "c0": ledger.c0,
        "c0_values": list(ledger.c0_values),
        "c0_window": [lo, config.jmax],
        "c0_spread": spread,
        "max_far_co_norm": far_worst,
        "passed": ok,
    }

    with figure(out / "cks.png", cols=2) as axes:
        for ax, matrix, label in (
            (axes[0], ledger.star_norms, "star compositions"),
            (axes[1], ledger.co_norms, "co compositions"),
        ):
            shown = np.log10(np.maximum(matrix, 1e-16))
            image = ax.imshow(shown, cmap="viridis", origin="lower")
            ax.set_xlabel("k")
            ax.set_ylabel("j")
            ax.set_title(f"{sigma.name}: {label} (log10)")
            ax.figure.colorbar(image, ax=ax, shrink=0.8)

    return (0 if ok else 1), summary


def _lambda_ladder(limit: int):
    lams = []
    lam = 8
    while lam <= limit:
        lams.append(lam)
        lam *= 2
    if not lams or lams[-1] != limit:
        lams.append(limit)
    return tuple(lams)


def cmd_normsweep(config: ExperimentConfig, out: Path):
    sigma = _symbol_from_config(config)
    lambdas = _lambda_ladder(config.band_limit)
    sweep = boundedness_sweep(sigma, config.dim, lambdas)

    rows = list(zip(sweep.lambdas, sweep.norms, sweep.converged))
    write_csv(out / "norms.csv", ("band_limit", "operator_norm", "converged"),
              rows, config.config_hash)

    growth = None
    if len(sweep.norms) >= 2:
        growth = sweep.growth(sweep.lambdas[-2], sweep.lambdas[-1])
    ok = all(sweep.converged) and (growth is None or growth < 0.10)

    sobolev = None
    if config.symbol in ("sobolev_x", "gaussian_x"):
        probes = tuple((k,) + (0,) * (config.dim - 1) for k in (0, 4, 16))
        report = sobolev_criterion_check(sigma, config.dim, xi_probe=probes)
        sobolev = {
            "criterion": report.criterion,
            "ratios": list(report.ratios),
            "ratio_spread": report.ratio_spread(),
            "passed": report.ratio_spread() < 0.10,
        }
        ok = ok and sobolev["passed"]

    summary = {
        "command": "normsweep",
        "config_hash": config.config_hash,
        "symbol": sigma.name,
        "dim": config.dim,
        "lambdas": list(sweep.lambdas),
        "norms": list(sweep.norms),
        "growth_last_step": growth,
        "sobolev": sobolev,
        "passed": ok,
    }

    with figure(out / "normsweep.png") as ax:
        ax.plot(sweep.lambdas, sweep.norms, "o-")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("band limit")
        ax.set_ylabel("operator norm")
        ax.set_title(f"{sigma.name}: norm growth, n={config.dim}")

    return (0 if ok else 1), summary


def cmd_transfer(config: ExperimentConfig, out: Path):
    if config.dim != 1:
        raise ConfigError("the transfer comparison runs with n=1")
    spec = BasisSpec(1, config.band_limit)
    rule = tensor_rule(1, config.resolved_quad)

    rows = []
    details = {}
    ok = True
    for key in REGISTRY_KEYS:
        sigma = _symbol_from_config(config, key)
        direct = assemble_matrix(sigma, spec, rule)
        through = gaussian_transfer_matrix(sigma, spec, rule)
        entry_diff = float(np.max(np.abs(direct - through)))
        sv_diff = abs(operator_norm(direct).value
                      - operator_norm(through).value)
        passed = entry_diff <= TRANSFER_TOL and sv_diff <= TRANSFER_TOL
        ok = ok and passed
        rows.append((key, entry_diff, sv_diff, passed))
        details[key] = {"entry_diff": entry_diff, "sv_diff": sv_diff,
                        "passed": passed}

    write_csv(out / "transfer.csv",
              ("symbol", "entry_diff", "sv_diff", "passed"),
              rows, config.config_hash)

    summary = {
        "command": "transfer",
        "config_hash": config.config_hash,
        "band_limit": config.band_limit,
        "tolerance": TRANSFER_TOL,
        "symbols": details,
        "passed": ok,
    }

    with figure(out / "transfer.png", width=7.0) as ax:
        names = [row[0] for row in rows]
        pos = np.arange(len(names))
        ax.bar(pos - 0.2, [max(r[1], 1e-18) for r in rows], width=0.4,
               label="entry diff")
        ax.bar(pos + 0.2, [max(r[2], 1e-18) for r in rows], width=0.4,
               label="singular value diff")
        ax.axhline(TRANSFER_TOL, color="#b04030", linestyle="--",
                   label="tolerance")
        ax.set_yscale("log")
        ax.set_xticks(pos, names, rotation=20)
        ax.set_title(f"basis transfer agreement, band limit "
                     f"{config.band_limit}")
        ax.legend()

    return (0 if ok else 1), summary


COMMANDS = {
    "verify": cmd_verify,
    "decay": cmd_decay,
    "cks": cmd_cks,
    "normsweep": cmd_normsweep,
    "transfer": cmd_transfer,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermult",
        description="numerical checks for Hermite pseudo-multiplier calculus",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("verify", "run the exact identity suite"),
        ("decay", "kernel moment decay and projection sweeps"),
        ("cks", "almost-orthogonality composition ledger"),
        ("normsweep", "operator norms across band limits"),
        ("transfer", "Hermite vs Gaussian basis agreement"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", metavar="PATH",
                         help="flat key=value configuration file")
        cmd.add_argument("--out", metavar="DIR",
                         help="output directory (default hermult-out)")
        cmd.add_argument("--n", type=int, help="dimension")
        cmd.add_argument("--lambda", dest="band_limit", type=int,
                         help="band limit")
        cmd.add_argument("--quad", type=int,
                         help="nodes per axis (0 = 2*lambda + 16)")
        cmd.add_argument("--symbol", help="registry symbol key")
        cmd.add_argument("--param", action="append", metavar="K=V",
                         help="symbol parameter, repeatable")
        cmd.add_argument("--jmin", type=int, help="first block index")
        cmd.add_argument("--jmax", type=int, help="last block index")
        cmd.add_argument("--seed", type=int, help="sampling seed")
        cmd.add_argument("--tol-id", dest="tol_id", type=float,
                         help="pointwise identity tolerance")
        cmd.add_argument("--tol-quad", dest="tol_quad", type=float,
                         help="quadrature-backed tolerance")
        if name == "verify":
            cmd.add_argument("--corrupt", action="store_true",
                             help="negative control: perturb one frequency "
                                  "coefficient by a factor 1 + 1e-3")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {
            "dim": args.n,
            "band_limit": args.band_limit,
            "quad": args.quad,
            "symbol": args.symbol,
            "jmin": args.jmin,
            "jmax": args.jmax,
            "seed": args.seed,
            "tol_id": args.tol_id,
            "tol_quad": args.tol_quad,
            "out_dir": args.out,
            "corrupt": True if getattr(args, "corrupt", False) else None,
        }
        if args.param:
            overrides["symbol_params"] = parse_param_list(args.param)
        config = config_from_sources(args.command, file_values, overrides)

        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        code, summary = COMMANDS[config.command](config, out)
        write_json(out / "report.json", summary)
        status = "pass" if code == 0 else "FAIL"
        print(f"{config.command}: {status} (config {config.config_hash}) "
              f"-> {out}")
        return code
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
