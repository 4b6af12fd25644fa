"""Command-line entry point, pencil files and reports.

A pencil file is a JSON object::

    {"d": 2, "A": [[1, 0], [0, -1]], "B": [[0, 1], [1, 0]], "label": "hyperbolic"}

Entries are integers, exact rational strings such as "3/4", or (float mode
only) JSON floats.  Every run prints a human-readable text block and can write
the same data as a single JSON object carrying ``schema_version``.

Exit codes: 0 on success, 2 when a classification is numerically ambiguous,
1 on any input or precondition error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import factorize as fz
from . import oplab, ranges, sublevel, witness
from .classify import DEFAULT_CLUSTER_TOL, WellCurved, classify, signature
from .errors import AmbiguityError, InputError, PencilError
from .pencil import EXACT, FLOAT, SymmetricPencil, det_pencil

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_AMBIGUOUS = 2

Entry = Union[Fraction, float]


# ------------------------------------------------------------------ pencil files


@dataclass(frozen=True)
class PencilFile:
    d: int
    A: Tuple[Tuple[Entry, ...], ...]
    B: Tuple[Tuple[Entry, ...], ...]
    label: Optional[str] = None

    @property
    def has_floats(self) -> bool:
        return any(isinstance(x, float) for M in (self.A, self.B) for row in M for x in row)

    def to_pencil(self, mode: str = EXACT) -> SymmetricPencil:
        if mode == EXACT and self.has_floats:
            raise InputError("file has float entries; use --mode float or write them as 'p/q'")
        if mode == EXACT:
            return SymmetricPencil(np.array(self.A, dtype=object), np.array(self.B, dtype=object), EXACT, self.label)
        A = np.array([[float(x) for x in row] for row in self.A])
        B = np.array([[float(x) for x in row] for row in self.B])
        return SymmetricPencil(A, B, FLOAT, self.label)


def _parse_entry(x: Any, where: str) -> Entry:
    if isinstance(x, bool):
        raise InputError(f"{where}: boolean is not a matrix entry")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InputError(f"{where}: entry must be finite")
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: not a rational literal: {x!r}") from None
    raise InputError(f"{where}: unsupported entry {x!r}")


def _parse_matrix(name: str, rows: Any, d: int) -> Tuple[Tuple[Entry, ...], ...]:
    if not isinstance(rows, list) or len(rows) != d:
        n = len(rows) if isinstance(rows, list) else "no"
        raise InputError(f"{name} must have {d} rows, found {n}")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            n = len(row) if isinstance(row, list) else "no"
            raise InputError(f"{name} row {i} must have {d} entries, found {n}")
        out.append(tuple(_parse_entry(x, f"{name}[{i}][{j}]") for j, x in enumerate(row)))
    for i in range(d):
        for j in range(i + 1, d):
            if out[i][j] != out[j][i]:
                raise InputError(
                    f"{name} is not symmetric: {name}[{i}][{j}] = {_render_entry(out[i][j])} "
                    f"but {name}[{j}][{i}] = {_render_entry(out[j][i])}"
                )
    return tuple(out)


def parse_pencil(text: str) -> PencilFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("a pencil file is a JSON object")
    missing = [k for k in ("A", "B") if k not in obj]
    if missing:
        raise InputError(f"missing field(s): {', '.join(missing)}")
    d = obj.get("d", len(obj["A"]) if isinstance(obj["A"], list) else None)
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise InputError(f"d must be a positive integer, got {d!r}")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise InputError("label must be a string")
    return PencilFile(d, _parse_matrix("A", obj["A"], d), _parse_matrix("B", obj["B"], d), label)


def _render_entry(x: Entry) -> Union[int, str, float]:
    if isinstance(x, float):
        return x
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def render_pencil(pf: PencilFile) -> str:
    obj: Dict[str, Any] = {"d": pf.d}
    obj["A"] = [[_render_entry(x) for x in row] for row in pf.A]
    obj["B"] = [[_render_entry(x) for x in row] for row in pf.B]
    if pf.label is not None:
        obj["label"] = pf.label
    return json.dumps(obj)


def pencil_file_from(p: SymmetricPencil, label: Optional[str] = None) -> PencilFile:
    def conv(M):
        return tuple(tuple(Fraction(x) if p.exact else float(x) for x in row) for row in M)

    return PencilFile(p.d, conv(p.A), conv(p.B), label if label is not None else p.label)


def read_pencil(path: Union[str, Path]) -> PencilFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_pencil(text)


# ------------------------------------------------------------------ serialization


def jsonable(x: Any) -> Any:
    """Convert results to JSON-safe values (Fractions become strings)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, ranges.Truth):
        return x.value
    return x


def render_text(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if _is_table(v):
                lines.append(f"{pad}{k}:")
                lines.append(_render_table(v, indent + 1))
            elif isinstance(v, (dict, list)) and v and not _is_flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _is_flat_list(v):
                lines.append(f"{pad}-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_inline(v)}")
    else:
        lines.append(f"{pad}{_inline(obj)}")
    return "\n".join(lines)


def _is_table(v: Any) -> bool:
    """A non-empty list of dicts sharing the same scalar-valued keys."""
    if not isinstance(v, list) or not v or not all(isinstance(r, dict) for r in v):
        return False
    keys = list(v[0])
    return all(
        list(r) == keys and not any(isinstance(x, dict) or (isinstance(x, list) and not _is_flat_list(x)) for x in r.values())
        for r in v
    )


def _render_table(rows: List[Dict[str, Any]], indent: int) -> str:
    pad = "  " * indent
    keys = list(rows[0])
    cells = [keys] + [[_inline(r[k]) for k in keys] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(keys))]
    return "\n".join(pad + "  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def _is_flat_list(v: Any) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _inline(v: Any) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


# ------------------------------------------------------------------ option parsing


def parse_ladder(text: str) -> List[Fraction]:
    """'2^-2..2^-12' (powers of two) or a comma list of numbers / 2^-k terms."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (part.strip() for part in text.split(".."))
            if not (lo.startswith("2^") and hi.startswith("2^")):
                raise ValueError
            a, b = int(lo[2:]), int(hi[2:])
            step = -1 if b < a else 1
            return [Fraction(2) ** k for k in range(a, b + step, step)]
        out = []
        for part in text.split(","):
            part = part.strip()
            out.append(Fraction(2) ** int(part[2:]) if part.startswith("2^") else Fraction(part))
        return out
    except ValueError:
        raise InputError(f"cannot parse ladder {text!r}; use e.g. 2^-2..2^-12 or 0.1,0.05") from None


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise InputError(f"expected a comma list of integers, got {text!r}") from None


def parse_exponent_triples(text: str) -> List[Tuple[str, ...]]:
    """'1.5,3;2,4,3' -> [('1.5','3'), ('2','4','3')]."""
    out = []
    for chunk in text.split(";"):
        parts = tuple(x.strip() for x in chunk.split(",") if x.strip())
        if len(parts) not in (2, 3):
            raise InputError(f"each exponent group is p,q or p,q,r; got {chunk!r}")
        out.append(parts)
    return out


# ------------------------------------------------------------------ sections


def _root_table(v) -> List[Dict[str, Any]]:
    roots = getattr(v, "roots", None)
    if roots is None:
        return []
    return [
        {"root": str(r), "a": r.a, "b": r.b, "multiplicity": r.multiplicity, "real": r.is_real}
        for r in roots.roots
    ]


def section_classify(p: SymmetricPencil, cluster_tol: float, unsafe_numerics: bool, seed: int):
    v = classify(p, cluster_tol=cluster_tol, unsafe_numerics=unsafe_numerics, seed=seed)
    form = det_pencil(p)
    out = {
        "mode": p.mode,
        "verdict": v.summary(),
        "signature": list(signature(v)),
        "determinant_coefficients": list(form.coeffs),
        "roots": _root_table(v),
        "cluster_tol": cluster_tol,
        "seed": seed,
    }
    return v, out


def section_factorize(multiplicities: Sequence[int]) -> Dict[str, Any]:
    ms = [int(m) for m in multiplicities]
    d = sum(ms)
    res = fz.pair_factorization(ms, d)
    out: Dict[str, Any] = {"multiplicities": ms, "d": d}
    if isinstance(res, fz.PairFactorization):
        out["result"] = "factorization"
        out["mu"] = {f"({j + 1},{k + 1})": v for (j, k), v in sorted(res.mu.items())}
    else:
        out["result"] = "certificate"
        out["y"] = list(res.y)
        out["weighted_sum"] = res.weighted_sum()
        m_star = max(ms)
        others = list(ms)
        others.remove(m_star)
        if others:
            out["flat_exponents"] = list(fz.flat_factorization(m_star, others))
    return out


def section_witness(p: SymmetricPencil, verdict, ladder) -> Dict[str, Any]:
    curve = witness.destabilizing_curve(p, verdict)
    decay = witness.verify_decay(curve, p, ladder)
    return {
        "curve_kind": curve.kind,
        "M0": curve.M0,
        "N0": curve.N0,
        "exponents": list(curve.total_exponents),
        "n_exponent": curve.n_exponent,
        "decay": decay.summary(),
    }


def section_sublevel(p: SymmetricPencil, verdict, ladder, samples: int, seed: int, grid: Optional[int]):
    form = det_pencil(p)
    method = sublevel.Grid(grid) if grid else sublevel.MonteCarlo(samples, seed)
    ms = getattr(verdict, "roots", None)
    log_flag = False
    predicted = None
    if ms is not None:
        predicted, log_flag = sublevel.predicted_exponent(ms.multiplicities, [r.is_real for r in ms.roots])
    fit = sublevel.fit_exponent(form, [float(x) for x in ladder], method, hypothesize_log=log_flag)
    return {
        "method": "grid" if grid else "monte_carlo",
        "samples": None if grid else samples,
        "grid": grid,
        "seeds": list(fit.seeds),
        "table": [
            {"delta": d, "measure": m, "stderr": s}
            for d, m, s in zip(fit.ladder, fit.measures, fit.stderrs)
        ],
        "exponent": fit.exponent,
        "log_corrected_exponent": fit.log_corrected_exponent,
        "residual": fit.residual,
        "predicted_exponent": predicted,
        "predicted_log_factor": log_flag,
    }


def section_scaling(p, family: str, p_exp, q_exp, ladder, budget: int, seed: int) -> Dict[str, Any]:
    if family not in oplab.FAMILIES:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(oplab.FAMILIES)}")
    make = oplab.FAMILIES[family]
    res = oplab.scaling_experiment(lambda delta: make(p, delta), p_exp, q_exp, [float(x) for x in ladder], budget, seed)
    return {
        "family": family,
        "p": p_exp,
        "q": q_exp,
        "budget": budget,
        "seeds": list(res.seeds),
        "table": [
            {"delta": d, "pairing": e.value, "pairing_stderr": e.stderr, "test": t, "dual": u, "ratio": r}
            for d, e, t, u, r in zip(res.ladder, res.pairings, res.test_measures, res.dual_measures, res.ratios)
        ],
        "slope": res.slope,
        "residual": res.residual,
        "measure_slopes": res.measure_slopes(),
    }


def section_kakeya(p, delta: float, r: float, seed: int, st_samples: int, y_samples: int) -> Dict[str, Any]:
    res = oplab.kakeya_slab_norm(p, delta, r, seed=seed, st_samples=st_samples, y_samples=y_samples)
    out = {
        "delta": delta,
        "r": r,
        "seed": seed,
        "st_samples": st_samples,
        "y_samples": y_samples,
        "n_slabs": res.n_slabs,
        "norm": res.norm,
        "norm_stderr": res.stderr,
        "union_measure": res.union_measure,
        "union_stderr": res.union_stderr,
        "single_slab_measure": oplab.single_slab_measure(p.d, delta),
        "exponent_with_unit_weights": ranges.kakeya_exponent(p.d, r, unit_weights=True),
    }
    return out


def section_ranges(verdict, d: int, triples) -> List[Dict[str, Any]]:
    out = []
    for t in triples:
        r = t[2] if len(t) == 3 else None
        ans = ranges.predicted_true_region(verdict, d, t[0], t[1], r)
        out.append({"p": t[0], "q": t[1], "r": r, "answer": ans.value})
    return out


DEFAULT_FAMILY = {
    "well_curved": "ball",
    "flat_nonvanishing": "flat_boxes",
    "degenerate_kernel_split": "degenerate",
    "degenerate_common_kernel": "common_kernel",
}


# ------------------------------------------------------------------ commands


def _load(args) -> Tuple[PencilFile, SymmetricPencil]:
    pf = read_pencil(args.file)
    return pf, pf.to_pencil(args.mode)


def _echo(pf: PencilFile) -> Dict[str, Any]:
    return json.loads(render_pencil(pf))


def cmd_classify(args) -> Dict[str, Any]:
    pf, p = _load(args)
    _, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    return {"input": _echo(pf), "classify": sec}


def cmd_witness(args) -> Dict[str, Any]:
    pf, p = _load(args)
    v, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    return {"input": _echo(pf), "classify": sec, "witness": section_witness(p, v, parse_ladder(args.ladder))}


def cmd_factorize(args) -> Dict[str, Any]:
    if args.multiplicities:
        return {"factorize": section_factorize(parse_int_list(args.multiplicities))}
    if not args.file:
        raise InputError("give a pencil file or --multiplicities")
    pf, p = _load(args)
    v, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    roots = getattr(v, "roots", None)
    if roots is None:
        raise InputError("the determinant form vanishes identically; nothing to factor")
    return {"input": _echo(pf), "classify": sec, "factorize": section_factorize(roots.multiplicities)}


def cmd_sublevel(args) -> Dict[str, Any]:
    pf, p = _load(args)
    v, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    if getattr(v, "roots", None) is None:
        raise InputError("the determinant form vanishes identically; every sublevel set is full")
    sub = section_sublevel(p, v, parse_ladder(args.ladder), args.samples, args.seed, args.grid)
    return {"input": _echo(pf), "classify": sec, "sublevel": sub}


def cmd_scaling(args) -> Dict[str, Any]:
    pf, p = _load(args)
    v, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    family = args.family or DEFAULT_FAMILY[v.kind]
    sc = section_scaling(p, family, args.p, args.q, parse_ladder(args.ladder), args.budget, args.seed)
    return {"input": _echo(pf), "classify": sec, "scaling": sc}


def cmd_kakeya(args) -> Dict[str, Any]:
    pf, p = _load(args)
    k = section_kakeya(p, args.delta, args.r, args.seed, args.st_samples, args.y_samples)
    return {"input": _echo(pf), "kakeya": k}


def cmd_report(args) -> Dict[str, Any]:
    pf, p = _load(args)
    v, sec = section_classify(p, args.cluster_tol, args.unsafe_numerics, args.seed)
    out: Dict[str, Any] = {"input": _echo(pf), "classify": sec}
    roots = getattr(v, "roots", None)
    if roots is not None:
        out["factorize"] = section_factorize(roots.multiplicities)
    if args.exponents:
        out["ranges"] = section_ranges(v, p.d, parse_exponent_triples(args.exponents))
    if not isinstance(v, WellCurved):
        out["witness"] = section_witness(p, v, parse_ladder(args.witness_ladder))
    if args.full:
        if roots is not None:
            out["sublevel"] = section_sublevel(
                p, v, parse_ladder(args.sublevel_ladder), args.samples, args.seed, None
            )
        out["scaling"] = section_scaling(
            p, DEFAULT_FAMILY[v.kind], args.p, args.q, parse_ladder(args.scaling_ladder), args.budget, args.seed
        )
    return out


# ------------------------------------------------------------------ driver


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencil-curvature", description="Curvature analysis of symmetric matrix pencils.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, file_required=True):
        if file_required:
            sp.add_argument("file", help="pencil JSON file, or a directory of them")
        else:
            sp.add_argument("file", nargs="?", help="pencil JSON file, or a directory of them")
        sp.add_argument("--mode", choices=[EXACT, FLOAT], default=EXACT)
        sp.add_argument("--cluster-tol", type=float, default=DEFAULT_CLUSTER_TOL)
        sp.add_argument("--unsafe-numerics", action="store_true", help="allow float-mode Jordan data")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write OUT.txt and OUT.json instead of printing")
        sp.add_argument("--json", action="store_true", help="print the JSON object instead of text")

    sp = sub.add_parser("classify", help="verdict, root table and structural data")
    common(sp)
    sp.set_defaults(run=cmd_classify)

    sp = sub.add_parser("witness", help="destabilizing curve and its decay")
    common(sp)
    sp.add_argument("--ladder", default="2^-2..2^-12")
    sp.set_defaults(run=cmd_witness)

    sp = sub.add_parser("factorize", help="pair factorization or infeasibility certificate")
    common(sp, file_required=False)
    sp.add_argument("--multiplicities", help="comma list, e.g. 3,1")
    sp.set_defaults(run=cmd_factorize)

    sp = sub.add_parser("sublevel", help="sublevel-set measures and exponent fit")
    common(sp)
    sp.add_argument("--ladder", default="2^-4..2^-14")
    sp.add_argument("--samples", type=int, default=sublevel.DEFAULT_SAMPLES)
    sp.add_argument("--grid", type=int, default=None, help="use an n x n grid instead of Monte Carlo")
    sp.set_defaults(run=cmd_sublevel)

    sp = sub.add_parser("scaling", help="pairing-ratio slope along a set family")
    common(sp)
    sp.add_argument("--family", choices=sorted(oplab.FAMILIES), default=None)
    sp.add_argument("--p", default="1.5")
    sp.add_argument("--q", default="3")
    sp.add_argument("--ladder", default="2^-2..2^-6")
    sp.add_argument("--budget", type=int, default=oplab.DEFAULT_BUDGET)
    sp.set_defaults(run=cmd_scaling)

    sp = sub.add_parser("kakeya", help="L^r norm of a sum of slab indicators")
    common(sp)
    sp.add_argument("--delta", type=float, default=0.125)
    sp.add_argument("--r", type=float, default=3.0)
    sp.add_argument("--st-samples", type=int, default=256)
    sp.add_argument("--y-samples", type=int, default=4096)
    sp.set_defaults(run=cmd_kakeya)

    sp = sub.add_parser("report", help="all sections for one pencil")
    common(sp)
    sp.add_argument("--full", action="store_true", help="add Monte Carlo sections")
    sp.add_argument("--exponents", default=None, help="p,q[,r] groups separated by ';'")
    sp.add_argument("--witness-ladder", default="2^-2..2^-12")
    sp.add_argument("--sublevel-ladder", default="2^-4..2^-12")
    sp.add_argument("--scaling-ladder", default="2^-2..2^-6")
    sp.add_argument("--samples", type=int, default=10**5)
    sp.add_argument("--budget", type=int, default=10**5)
    sp.add_argument("--p", default="1.5")
    sp.add_argument("--q", default="3")
    sp.set_defaults(run=cmd_report)
    return ap


def _run_one(args) -> Tuple[int, Dict[str, Any]]:
    try:
        return EXIT_OK, {"status": "ok", **args.run(args)}
    except AmbiguityError as exc:
        return EXIT_AMBIGUOUS, {"status": "ambiguous", "error": str(exc)}
    except (InputError, PencilError) as exc:
        return EXIT_INPUT, {"status": "error", "error": f"{type(exc).__name__}: {exc}"}


def run(argv: Optional[Sequence[str]] = None) -> Tuple[int, Dict[str, Any], str]:
    """Parse ``argv`` and execute; returns (exit code, JSON object, text)."""
    return execute(build_parser().parse_args(argv))


def execute(args: argparse.Namespace) -> Tuple[int, Dict[str, Any], str]:
    header = {"schema_version": SCHEMA_VERSION, "command": args.command}
    target = Path(args.file) if args.file else None
    if target is not None and target.is_dir():
        files = sorted(target.glob("*.json"))
        results = []
        code = EXIT_OK
        for f in files:
            sub = argparse.Namespace(**{**vars(args), "file": str(f)})
            c, res = _run_one(sub)
            results.append({"file": f.name, **res})
            code = EXIT_INPUT if EXIT_INPUT in (code, c) else max(code, c)
        obj = jsonable({**header, "batch": str(target), "results": results})
    else:
        code, res = _run_one(args)
        obj = jsonable({**header, **res})
    return code, obj, render_text(obj)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    code, obj, text = execute(args)
    if args.out:
        base = Path(args.out)
        if base.suffix in (".txt", ".json"):
            base = base.with_suffix("")
        base.with_suffix(".txt").write_text(text + "\n", encoding="utf-8")
        base.with_suffix(".json").write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    elif args.json:
        print(json.dumps(obj, indent=2))
    else:
        print(text)
    if code != EXIT_OK and "error" in obj:
        print(obj["error"], file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
