"""Command line interface: ``lgframe analyze | reconstruct | verify | generate``.

Exit codes: 0 on success, 1 for malformed input, 2 when the curve does not
meet a mathematical precondition of the analysis.
"""

from __future__ import annotations

import json
import math
import sys
from typing import Optional

import click
import numpy as np

from .curvature_quiver import compare_invariants, extract_quiver
from .diagram import YoungDiagram, reduce_diagram
from .errors import AnalyzabilityError, InputError
from .flag import CurveJet, duality_residual, reduce_ambient, young_diagram
from .generators import flat_curve, linear_hamiltonian_jacobi, random_curve
from .normal_frame import normal_frame, required_order, verify_normal
from .reconstruction import CurvatureSpec, reconstruct, roundtrip
from .symplectic import random_symplectic

SCHEMA_VERSION = 1


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with floats written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(x)
        text = format(x, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _emit(obj, output: Optional[str]) -> None:
    text = dumps(obj) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _run(fn):
    """Map library errors onto the exit-code contract."""
    try:
        fn()
    except AnalyzabilityError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (InputError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _load_curve(path: str, order: Optional[int]) -> CurveJet:
    curve = CurveJet.from_json(_load_json(path))
    if order is not None:
        if order > curve.order:
            raise InputError(f"file has order {curve.order}, cannot raise it to {order}")
        curve = CurveJet(curve.frame.truncate(order))
    return curve


def analysis_json(curve: CurveJet, tol: float, reduce: bool = False) -> dict:
    if reduce:
        curve, _ = reduce_ambient(curve)
    report = young_diagram(curve)
    res = normal_frame(curve, report)
    ver = verify_normal(res, curve, tol)
    quiver = extract_quiver(res)
    out = {"schema_version": SCHEMA_VERSION}
    out.update(report.to_json())
    out["curvatures"] = quiver.to_json()
    out["residuals"] = ver.to_json()
    out["residuals"]["W_dims"] = res.complements.W_dims
    return out


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Normal moving frames and curvature invariants of Lagrangian curves."""


@main.command("analyze")
@click.argument("curve_file", type=click.Path())
@click.option("--tol", default=1e-7, show_default=True, help="Verification tolerance.")
@click.option("--order", type=int, default=None, help="Truncate the input jet to this order.")
@click.option("--reduce", "reduce_", is_flag=True, help="Pass to the quotient when extensions stabilize early.")
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_analyze(curve_file, tol, order, reduce_, output):
    """Young diagram, normal frame checks and curvatures of a curve file."""

    def go():
        curve = _load_curve(curve_file, order)
        _emit(analysis_json(curve, tol, reduce_), output)

    _run(go)


@main.command("reconstruct")
@click.argument("spec_file", type=click.Path())
@click.option("--order", type=int, default=None, help="Jet order of the output (default: the analysis minimum).")
@click.option("--center", type=float, default=0.0, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_reconstruct(spec_file, order, center, output):
    """Curve file realizing a curvature spec."""

    def go():
        spec = CurvatureSpec.from_json(_load_json(spec_file))
        N = order if order is not None else required_order(spec.reduced)
        rep = spec.validate(0, 0.0)
        if not rep.ok:
            for v in rep.violations:
                click.echo(f"violation: {v.kind} at {v.pair} (order {v.order})", err=True)
        curve, _ = reconstruct(spec, center, N)
        _emit(curve.to_json(), output)

    _run(go)


def _suite_duality(curve: CurveJet, tol: float) -> dict:
    scale = max(1.0, curve.frame.max_abs())
    report = young_diagram(curve)
    rows = []
    for i in range(len(report.ext_dims)):
        r = duality_residual(curve, i)
        rows.append({"i": i, "residual": r, "pass": r < 1e-8 * scale})
    return {"suite": "duality", "pass": all(r["pass"] for r in rows), "cases": rows}


def _suite_invariance(curve: CurveJet, tol: float, seed: int, count: int = 10) -> dict:
    q = extract_quiver(normal_frame(curve))
    rows = []
    for k in range(count):
        S = random_symplectic(curve.n, seed=seed + k)
        q2 = extract_quiver(normal_frame(curve.transformed(S)))
        cmp = compare_invariants(q, q2, tol)
        rows.append({"seed": seed + k, "max_diff": cmp.max_diff, "pass": cmp.isomorphic})
    return {"suite": "invariance", "pass": all(r["pass"] for r in rows), "cases": rows}


def _suite_roundtrip(curve: CurveJet, tol: float) -> dict:
    rep = roundtrip(curve, tol)
    return {"suite": "roundtrip", "pass": bool(rep.ok), "cases": [rep.to_json()]}


@main.command("verify")
@click.argument("curve_file", type=click.Path())
@click.option("--suite", type=click.Choice(["roundtrip", "invariance", "duality"]), default="roundtrip", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--order", type=int, default=None)
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_verify(curve_file, suite, seed, tol, order, output):
    """Run a property suite on a curve file and report residuals."""

    def go():
        curve = _load_curve(curve_file, order)
        if suite == "duality":
            out = _suite_duality(curve, tol)
        elif suite == "invariance":
            out = _suite_invariance(curve, tol, seed)
        else:
            out = _suite_roundtrip(curve, tol)
        _emit(out, output)
        if not out["pass"]:
            sys.exit(2)

    _run(go)


@main.command("generate")
@click.option("--kind", type=click.Choice(["flat", "random", "hamiltonian", "rotating"]), default="flat", show_default=True)
@click.option("--rows", default="1", show_default=True, help="Row lengths, comma separated.")
@click.option("--inertia", default=None, help="Per-level inertia as 'p:m,p:m'.")
@click.option("--order", type=int, default=None)
@click.option("--center", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--amplitude", type=float, default=0.5, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_generate(kind, rows, inertia, order, center, seed, amplitude, output):
    """Write a test curve file."""

    def go():
        try:
            D = YoungDiagram(tuple(int(x) for x in rows.split(",")))
        except ValueError as exc:
            raise InputError(f"bad --rows {rows!r}") from exc
        N = order if order is not None else required_order(reduce_diagram(D))
        if kind == "flat":
            curve = flat_curve(D, center, N)
        elif kind == "random":
            inert = None
            if inertia:
                inert = [tuple(int(v) for v in part.split(":")) for part in inertia.split(",")]
            curve = random_curve(D, inert, seed, amplitude, center, N)
        elif kind == "rotating":
            curve = linear_hamiltonian_jacobi(np.eye(2), center, N)
        else:
            n = D.size
            rng = np.random.default_rng(seed)
            A = rng.standard_normal((2 * n, 2 * n))
            curve = linear_hamiltonian_jacobi(A @ A.T / (2 * n) + np.eye(2 * n), center, N)
        _emit(curve.to_json(), output)

    _run(go)


if __name__ == "__main__":  # pragma: no cover
    main()
