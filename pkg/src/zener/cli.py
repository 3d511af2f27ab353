"""Command-line front end.

Exit codes: 0 success, 2 configuration error (bad model file or arguments),
3 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from .asymptotics import large_xi_expansion, small_xi_expansion
from .charpoly import classify_analytic, full_classification
from .evolution import AliasingWarning, energy_trace, evolve_mode, plane_wave_field
from .expm import ExpmSaturation
from .model import ModelError, ZenerModel, load_model
from .roots import cross_validate, numeric_counts, phi_eigenvalues

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH = 0, 2, 3
SMALL_SERIES_MAX, LARGE_SERIES_MIN = 0.1, 10.0
AMBIGUITY_RATIO = 2.0
TRACK_RATIO = 1.02


class ConfigError(Exception):
    pass


# -- output helpers ---------------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; empty string for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def render_table(columns: list[str], rows: list[list], fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps([dict(zip(columns, _plain(r))) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument parsing ---------------------------------------------------------------


def parse_xi_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--xi: cannot parse {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"--xi: expected finite numbers, got {text!r}")
    return vals


def xi_vector(m: ZenerModel, values: list[float]) -> np.ndarray:
    """A single value is a magnitude along the first axis; d values are a vector."""
    if len(values) == 1:
        xi = np.zeros(m.d)
        xi[0] = values[0]
        return xi
    if len(values) != m.d:
        raise ConfigError(f"--xi: expected 1 or {m.d} components, got {len(values)}")
    return np.array(values)


def xi_grid(args) -> np.ndarray:
    if args.xi_min is None or args.xi_max is None:
        raise ConfigError("--xi-min and --xi-max are required")
    if not 0 < args.xi_min <= args.xi_max:
        raise ConfigError("need 0 < --xi-min <= --xi-max")
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    if args.samples == 1:
        return np.array([args.xi_min])
    return np.geomspace(args.xi_min, args.xi_max, args.samples)


def parse_state(text: str | None, n: int) -> np.ndarray:
    if text is None:
        U0 = np.zeros(n, dtype=complex)
        U0[0] = 1.0
        return U0
    try:
        vals = [complex(v.strip().replace(" ", "")) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--state: cannot parse {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"--state: expected {n} components, got {len(vals)}")
    return np.array(vals)


def state_names(m: ZenerModel) -> list[str]:
    names = ["u"] + [f"v{j + 1}" for j in range(m.d)]
    for i in range(m.k):
        names += [f"w{i + 1}_{j + 1}" for j in range(m.d)]
    return names


# -- commands ------------------------------------------------------------------------


def _classify_one(m: ZenerModel, xi: np.ndarray) -> dict:
    xi_norm = float(np.linalg.norm(xi))
    numeric = numeric_counts(phi_eigenvalues(m, xi))
    if xi_norm == 0:
        analytic = classify_analytic(m, 0.0)
        counts = {"left": m.k * m.d, "zero": m.d + 1, "origin": m.d + 1, "imag_pair": 0, "right": 0}
        agree = all(counts[key] == numeric[key] for key in ("left", "origin", "imag_pair", "right"))
        return {"xi": xi, "xi_norm": 0.0, "case": analytic.case_label, "counts": counts,
                "relaxation_eigenvalues": [-b for b in m.b], "hurwitz": None,
                "cross_check": {"agree": agree, "numeric": numeric}}
    full = full_classification(m, xi)
    cv = cross_validate(m, xi)
    full_agree = all(full.counts()[key] == numeric[key] for key in ("left", "origin", "imag_pair", "right"))
    h = classify_analytic(m, xi_norm).hurwitz
    table = None
    if h is not None:
        table = {"deltas": list(h.deltas), "routh_sequence": None if h.sign_sequence is None else list(h.sign_sequence),
                 "variations": h.variations, "singular": h.singular}
    return {"xi": xi, "xi_norm": xi_norm, "case": full.case_label, "counts": full.counts(),
            "reduced_counts": cv.analytic, "hurwitz": table,
            "cross_check": {"agree": bool(cv.agree and full_agree), "numeric": numeric,
                            "mismatch": cv.mismatch}}


def cmd_classify(args, m: ZenerModel) -> int:
    if args.xi is not None:
        points = [xi_vector(m, parse_xi_list(args.xi))]
    else:
        points = [xi_vector(m, [x]) for x in xi_grid(args)]
    reports = [_classify_one(m, xi) for xi in points]
    ok = all(r["cross_check"]["agree"] for r in reports)
    if args.format == "csv":
        cols = ["xi_norm", "case", "left", "zero", "origin", "imag_pair", "right", "agree"]
        rows = [[r["xi_norm"], r["case"]] + [r["counts"][c] for c in cols[2:7]] + [r["cross_check"]["agree"]]
                for r in reports]
        emit(render_table(cols, rows, "csv"), args.out)
    else:
        doc = {"model": m.to_dict(), "results": reports} if len(reports) > 1 else {"model": m.to_dict(), **reports[0]}
        emit(render_json(doc), args.out)
    if not ok:
        for r in reports:
            if not r["cross_check"]["agree"]:
                print(f"cross-validation mismatch at |xi| = {r['xi_norm']}: {r['cross_check']}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_spectrum(args, m: ZenerModel) -> int:
    if args.xi is not None:
        points = [xi_vector(m, parse_xi_list(args.xi))]
    else:
        points = [xi_vector(m, [x]) for x in xi_grid(args)]
    rows = []
    for xi in points:
        rs = phi_eigenvalues(m, xi)
        for z, k, res in zip(rs.roots, rs.multiplicities, rs.residuals):
            rows.append([float(np.linalg.norm(xi)), z.real, z.imag, int(k), res])
    emit(render_table(["xi", "re_lambda", "im_lambda", "multiplicity", "residual"], rows, args.format), args.out)
    return EXIT_OK


def _greedy_match(prev: np.ndarray, cur: np.ndarray):
    """Assign each previous value the nearest unused current value.

    Returns the permutation and per-branch ambiguity flags.
    """
    D = np.abs(prev[:, None] - cur[None, :])
    order = np.full(prev.size, -1)
    ambiguous = np.zeros(prev.size, dtype=bool)
    free_p, free_c = set(range(prev.size)), set(range(cur.size))
    while free_p:
        i, j = min(((i, j) for i in free_p for j in free_c), key=lambda ij: (D[ij], ij))
        others = [D[i, jj] for jj in free_c if jj != j]
        if others and min(others) < AMBIGUITY_RATIO * D[i, j]:
            ambiguous[i] = True
        order[i] = j
        free_p.remove(i)
        free_c.remove(j)
    return order, ambiguous


def _tracking_path(grid: np.ndarray) -> list[tuple[float, bool]]:
    """The output samples with geometric substeps of ratio <= TRACK_RATIO between them."""
    path = [(float(grid[0]), True)]
    for x0, x1 in zip(grid, grid[1:]):
        steps = max(1, math.ceil(math.log(x1 / x0) / math.log(TRACK_RATIO)))
        path += [(float(v), False) for v in np.geomspace(x0, x1, steps + 1)[1:-1]]
        path.append((float(x1), True))
    return path


def dispersion_table(m: ZenerModel, grid: np.ndarray) -> list[list]:
    """Branches of the reduced polynomial tracked by continuation across the grid.

    Branches are followed over a fine geometric path through the samples;
    each new point is matched to a linear extrapolation in |xi| of the
    previous two.  A branch is flagged when another eigenvalue was nearly as
    close at some step since the last output sample.  Series values come
    from the small-|xi| expansion for |xi| <= 0.1 and from the large-|xi|
    expansion for |xi| >= 10.
    """
    m1 = m.with_dim(1)
    small, large = small_xi_expansion(m), large_xi_expansion(m)
    rows = []
    prev = None  # (x, values) of the last two path points
    pending = None
    for x, is_output in _tracking_path(np.asarray(grid, dtype=float)):
        cur = phi_eigenvalues(m1, [x]).expanded()
        if prev is None:
            vals = cur[np.lexsort((cur.imag, cur.real))]
            amb = np.zeros(vals.size, dtype=bool)
            prev = [(x, vals)]
        else:
            (x1, v1) = prev[-1]
            pred = v1
            if len(prev) == 2:
                x0, v0 = prev[0]
                pred = v1 + (v1 - v0) * (x - x1) / (x1 - x0)
            order, amb = _greedy_match(pred, cur)
            vals = cur[order]
            prev = [prev[-1], (x, vals)]
        pending = amb if pending is None else pending | amb
        if not is_output:
            continue
        series = None
        if x <= SMALL_SERIES_MAX:
            series = small.evaluate(x)
        elif x >= LARGE_SERIES_MIN:
            series = large.evaluate(x)
        s_order = _greedy_match(vals, series)[0] if series is not None else None
        for bid, z in enumerate(vals):
            s, err, status = None, None, "no-series"
            if series is not None:
                s = series[s_order[bid]]
                err, status = abs(z - s), "ok"
            if pending[bid]:
                status = "ambiguous"
            rows.append([x, bid, z.real, z.imag,
                         None if s is None else s.real, None if s is None else s.imag, err, status])
        pending = None
    return rows


DISPERSION_COLUMNS = ["xi", "branch_id", "re_lambda", "im_lambda", "series_re", "series_im", "abs_err", "status"]


def cmd_dispersion(args, m: ZenerModel) -> int:
    rows = dispersion_table(m, xi_grid(args))
    emit(render_table(DISPERSION_COLUMNS, rows, args.format), args.out)
    return EXIT_OK


def _times(args) -> np.ndarray:
    if args.t is not None:
        if args.t < 0:
            raise ConfigError("--t must be non-negative")
        return np.array([0.0]) if args.t == 0 else np.array([0.0, args.t])
    if args.t_max is None or args.dt is None:
        raise ConfigError("give --t or both --t-max and --dt")
    if args.t_max <= 0 or args.dt <= 0:
        raise ConfigError("--t-max and --dt must be positive")
    n = int(round(args.t_max / args.dt))
    return np.arange(n + 1) * args.dt


def cmd_evolve(args, m: ZenerModel) -> int:
    if args.xi is None:
        raise ConfigError("--xi is required")
    xi = xi_vector(m, parse_xi_list(args.xi))
    U0 = parse_state(args.state, m.n)
    traj = evolve_mode(m, xi, U0, _times(args))
    names = state_names(m)
    cols = ["t", "norm"] + [f"{p}_{n}" for n in names for p in ("re", "im")]
    rows = []
    for t, nrm, U in zip(traj.times, traj.norms, traj.states):
        rows.append([t, nrm] + [v for z in U for v in (z.real, z.imag)])
    emit(render_table(cols, rows, args.format), args.out)
    return EXIT_OK


def cmd_wave(args, m: ZenerModel) -> int:
    if m.d != 1:
        raise ConfigError("wave needs a one-dimensional model (dim = 1)")
    t = 0.0 if args.t is None else args.t
    if t < 0:
        raise ConfigError("--t must be non-negative")
    L, N, width = args.length, args.grid, args.width

    def pulse(x):
        U = np.zeros((m.n, x.size))
        U[0] = np.exp(-(((x - L / 2) / width) ** 2))
        return U

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AliasingWarning)
        snap = plane_wave_field(m, L, N, pulse, t)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    cols = ["x"] + state_names(m)
    rows = [[x] + list(snap.field[:, j]) for j, x in enumerate(snap.x)]
    emit(render_table(cols, rows, args.format), args.out)
    return EXIT_OK


def cmd_energy(args, m: ZenerModel) -> int:
    if args.xi is None:
        raise ConfigError("--xi is required")
    xi_norm = float(np.linalg.norm(parse_xi_list(args.xi)))
    if args.t_max is None or args.dt is None:
        raise ConfigError("--t-max and --dt are required")
    tr = energy_trace(m, xi_norm, complex(args.phi0), complex(args.phi_t0), args.t_max, args.dt,
                      stride=args.stride)
    bound = tr.bound_factor
    rows = [[t, e, el, None if bound is None else bound * el] for t, e, el in zip(tr.times, tr.E_hat, tr.E_lyap)]
    emit(render_table(["t", "E_hat", "E_lyap", "bound"], rows, args.format), args.out)
    return EXIT_OK


def cmd_verify(args, m=None) -> int:
    from .verification import run_all

    results = run_all(args.seed, progress=lambda r: print(r.line(), file=sys.stderr, flush=True))
    failed = [r.name for r in results if not r.passed]
    doc = {
        "seed": args.seed,
        "passed": not failed,
        "failed": failed,
        "checks": [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in results],
    }
    emit(render_json(doc), args.out)
    total = sum(r.seconds for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {total:.1f}s", file=sys.stderr)
    return EXIT_MISMATCH if failed else EXIT_OK


COMMANDS = {
    "classify": (cmd_classify, "json", "half-plane counts, Hurwitz table and numeric cross-check"),
    "spectrum": (cmd_spectrum, "csv", "eigenvalues of the mode generator"),
    "dispersion": (cmd_dispersion, "csv", "eigenvalue branches over a |xi| grid with series overlays"),
    "evolve": (cmd_evolve, "csv", "Fourier-mode trajectory"),
    "wave": (cmd_wave, "csv", "one-dimensional Gaussian pulse snapshot"),
    "energy": (cmd_energy, "csv", "energy functionals of a scalar mode"),
    "verify": (cmd_verify, "json", "run the property and acceptance suites"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zener", description="Spectral analysis of generalized Zener relaxation systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, default_fmt, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        if name != "verify":
            p.add_argument("--model", required=True, metavar="PATH", help="model JSON file")
        p.add_argument("--xi", help="frequency magnitude, or d comma-separated components")
        p.add_argument("--xi-min", type=float)
        p.add_argument("--xi-max", type=float)
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--t", type=float, help="single evaluation time")
        p.add_argument("--t-max", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--grid", type=int, default=512, help="number of grid points (power of 2)")
        p.add_argument("--length", type=float, default=200.0, help="periodic domain length")
        p.add_argument("--width", type=float, default=2.0, help="Gaussian pulse width")
        p.add_argument("--state", help="initial state, comma-separated (complex allowed)")
        p.add_argument("--phi0", default="1", help="initial scalar mode amplitude")
        p.add_argument("--phi-t0", default="0", help="initial scalar mode velocity")
        p.add_argument("--stride", type=int, default=1, help="keep every n-th energy sample")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=("csv", "json"), default=default_fmt)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        m = None if args.command == "verify" else load_model(args.model)
        return handler(args, m)
    except ModelError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"error: invalid model{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExpmSaturation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
