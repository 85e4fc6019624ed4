"""Command-line interface.

Spec files are JSON objects with a ``"kind"`` field.  Complex scalars are
``[re, im]`` pairs (plain numbers are accepted on input as real scalars) and
matrices are row-major nested lists of scalars.

Exit codes: 0 success, 1 a verification check failed, 2 malformed input,
3 a mathematical precondition does not hold, 4 an iterative reconstruction
did not converge.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any

import jsonschema
import numpy as np

from . import hankel_canonical as hc
from . import moment_lft as ml
from . import toeplitz_dirac as td
from .errors import DimensionError, PositivityError, PreconditionError, ReconstructionError
from .matcore import flip_J, is_positive_definite, signature_j
from .measure import DiscreteMeasure

EXIT_OK, EXIT_CHECK_FAILED, EXIT_SCHEMA, EXIT_PRECONDITION, EXIT_RECONSTRUCTION = 0, 1, 2, 3, 4
DEFAULT_TOL = 1e-8

# -- schemas ------------------------------------------------------------------------

_SCALAR = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _SCALAR}}
# a bare scalar stands for that multiple of the identity
_BLOCK = {"anyOf": [_MATRIX, _SCALAR]}
_MATRIX_LIST = {"type": "array", "minItems": 1, "items": _BLOCK}


def _kind_schema(kind: str, props: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "properties": {"kind": {"const": kind}, "p": {"type": "integer", "minimum": 1}, **props},
        "required": ["kind", *required],
    }


SCHEMAS = {
    "toeplitz": _kind_schema("toeplitz", {"s": _MATRIX_LIST, "nu": _BLOCK}, ["s"]),
    "hankel": _kind_schema("hankel", {"H": _MATRIX_LIST}, ["H"]),
    "dirac": _kind_schema("dirac", {"C": _MATRIX_LIST}, ["C"]),
    "verblunsky_rho": _kind_schema("verblunsky_rho", {"rho": _MATRIX_LIST}, ["rho"]),
    "omega": _kind_schema("omega", {"omega": _MATRIX_LIST}, ["omega"]),
    "measure": _kind_schema(
        "measure",
        {"atoms": {"type": "array", "items": {
            "type": "object",
            "properties": {"t": {"type": "number"}, "w": _BLOCK},
            "required": ["t", "w"],
        }}},
        ["atoms"],
    ),
}
_ENVELOPE = {"type": "object", "properties": {"kind": {"enum": sorted(SCHEMAS)}}, "required": ["kind"]}


class InputError(Exception):
    """Malformed input file (exit code 2)."""


# -- JSON <-> numpy ---------------------------------------------------------------------

def _scalar_from_json(x) -> complex:
    if isinstance(x, list):
        return complex(x[0], x[1])
    return complex(x)


def _is_matrix(M) -> bool:
    return isinstance(M, list) and bool(M) and isinstance(M[0], list)


def matrix_from_json(M, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not _is_matrix(M):
        if shape is None or shape[0] != shape[1]:
            raise InputError("a scalar block is only allowed for square blocks")
        return _scalar_from_json(M) * np.eye(shape[0])
    rows = [[_scalar_from_json(x) for x in row] for row in M]
    if len({len(r) for r in rows}) != 1:
        raise InputError("ragged matrix")
    A = np.array(rows, dtype=complex)
    if shape is not None and A.shape != shape:
        raise InputError(f"matrix has shape {A.shape}, expected {shape}")
    return A


def _clean(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError("non-finite value in output")
    return 0.0 if x == 0 else x


def matrix_to_json(M) -> list:
    A = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in A]


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""

    def enc(o) -> str:
        if isinstance(o, dict):
            return "{" + ", ".join(json.dumps(str(k)) + ": " + enc(o[k]) for k in sorted(o)) + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ", ".join(enc(v) for v in o) + "]"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if o is None:
            return "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return format(_clean(float(o)), ".17g")
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj) + "\n"


def load_spec(path: str, expect: tuple[str, ...] | None = None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, _ENVELOPE)
        jsonschema.validate(doc, SCHEMAS[doc["kind"]])
    except jsonschema.ValidationError as exc:
        raise InputError(f"{path}: {exc.message}") from exc
    if expect is not None and doc["kind"] not in expect:
        raise InputError(f"{path} has kind {doc['kind']!r}, expected one of {', '.join(expect)}")
    if "p" not in doc:
        doc["p"] = _infer_p(doc)
    return doc


_PAYLOAD = {"toeplitz": "s", "hankel": "H", "dirac": "C", "verblunsky_rho": "rho", "omega": "omega"}


def _infer_p(doc: dict) -> int:
    """Block size from the first payload matrix when ``p`` is omitted."""
    kind = doc["kind"]
    if kind == "measure":
        if not doc["atoms"]:
            raise InputError("an empty measure needs an explicit p")
        first = doc["atoms"][0]["w"]
    else:
        first = doc[_PAYLOAD[kind]][0]
    if not _is_matrix(first):
        return 1
    return len(first) // 2 if kind == "dirac" else len(first)


def _blocks(doc: dict, key: str, shape) -> tuple:
    return tuple(matrix_from_json(M, shape) for M in doc[key])


def toeplitz_from_doc(doc: dict) -> td.ToeplitzSpec:
    p = doc["p"]
    nu = matrix_from_json(doc["nu"], (p, p)) if "nu" in doc else None
    return td.ToeplitzSpec(_blocks(doc, "s", (p, p)), nu)


def hankel_from_doc(doc: dict) -> hc.HankelSpec:
    return hc.HankelSpec(_blocks(doc, "H", (doc["p"], doc["p"])))


def rho_from_doc(doc: dict) -> td.VerblunskySeqT:
    return td.VerblunskySeqT(_blocks(doc, "rho", (doc["p"], doc["p"])))


def omega_from_doc(doc: dict) -> hc.OmegaSeq:
    return hc.OmegaSeq(_blocks(doc, "omega", (doc["p"], 2 * doc["p"])))


def dirac_from_doc(doc: dict) -> td.DiracSystem:
    return td.DiracSystem(_blocks(doc, "C", (2 * doc["p"], 2 * doc["p"])))


def measure_from_doc(doc: dict) -> DiscreteMeasure:
    p = doc["p"]
    atoms = [(a["t"], matrix_from_json(a["w"], (p, p))) for a in doc["atoms"]]
    return DiscreteMeasure.from_atoms(atoms, p=p)


def toeplitz_to_doc(spec: td.ToeplitzSpec) -> dict:
    return {"kind": "toeplitz", "p": spec.p, "s": [matrix_to_json(b) for b in spec.s], "nu": matrix_to_json(spec.nu)}


def hankel_to_doc(spec: hc.HankelSpec) -> dict:
    return {"kind": "hankel", "p": spec.p, "H": [matrix_to_json(b) for b in spec.H]}


def rho_to_doc(seq: td.VerblunskySeqT) -> dict:
    return {"kind": "verblunsky_rho", "p": seq.p, "rho": [matrix_to_json(r) for r in seq.rho]}


def omega_to_doc(os_: hc.OmegaSeq) -> dict:
    return {"kind": "omega", "p": os_.p, "omega": [matrix_to_json(w) for w in os_.omega]}


# -- output helpers -------------------------------------------------------------------------

def _same_file(a: str, b: str) -> bool:
    return os.path.exists(b) and os.path.samefile(a, b)


def _emit(doc: dict, out: str | None, src: str | None = None) -> None:
    text = dumps(doc)
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    if src is not None and _same_file(src, out):
        raise InputError("refusing to overwrite the input file")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


def _diag(**fields) -> None:
    sys.stderr.write(dumps(fields))


def _max_block_error(a, b) -> float:
    return max(float(np.abs(x - y).max()) for x, y in zip(a, b))


# -- commands -----------------------------------------------------------------------------

def cmd_toeplitz_to_rho(args) -> int:
    spec = toeplitz_from_doc(load_spec(args.input, ("toeplitz",)))
    residual = td.verify_identity(spec)
    seq = td.verblunsky_from_toeplitz(spec)
    _emit(rho_to_doc(seq), args.output, args.input)
    _diag(identity_residual=residual)
    return EXIT_OK


def cmd_rho_to_toeplitz(args) -> int:
    seq = rho_from_doc(load_spec(args.input, ("verblunsky_rho",)))
    rec = td.reconstruct_toeplitz(seq, method=args.method, tol=args.tol, max_iter=args.max_iter)
    _emit(toeplitz_to_doc(rec.spec), args.output, args.input)
    _diag(iterations=list(rec.iterations), residuals=list(rec.residuals))
    return EXIT_OK


def cmd_hankel_to_omega(args) -> int:
    spec = hankel_from_doc(load_spec(args.input, ("hankel",)))
    residual = hc.verify_hankel_identity(spec)
    os_ = hc.omega_from_hankel(spec)
    _emit(omega_to_doc(os_), args.output, args.input)
    _diag(identity_residual=residual)
    return EXIT_OK


def cmd_omega_to_hankel(args) -> int:
    os_ = omega_from_doc(load_spec(args.input, ("omega",)))
    spec = hc.reconstruct_hankel(os_, method=args.method).spec
    back = hc.omega_from_hankel(spec)
    _emit(hankel_to_doc(spec), args.output, args.input)
    _diag(omega_roundtrip_error=_max_block_error(os_.omega, back.omega))
    return EXIT_OK


def _check(name: str, residual: float, tol: float) -> dict:
    return {"check": name, "residual": float(residual), "tolerance": float(tol), "pass": bool(residual <= tol)}


def _suite_toeplitz(spec: td.ToeplitzSpec, suite: str, tol: float) -> list[dict]:
    out = []
    S = td.assemble_toeplitz(spec)
    if suite in ("identity", "all"):
        scale = 1 + np.linalg.norm(S)
        out.append(_check("toeplitz_identity", td.verify_identity(spec) / scale, tol))
        D = td.dirac_from_toeplitz(spec)
        j = signature_j(spec.p)
        out.append(_check("dirac_j_unitary", max(np.linalg.norm(C @ j @ C - j) for C in D.C), tol))
        rho = td.verblunsky_from_dirac(D)
        out.append(_check("rho_contraction_margin",
                          max(0.0, max(np.linalg.norm(r, 2) for r in rho.rho) - 1 + 1e-15), tol))
    if suite in ("roundtrip", "all"):
        rho = td.verblunsky_from_toeplitz(spec)
        back = td.toeplitz_from_verblunsky(rho)
        out.append(_check("toeplitz_roundtrip_blocks", _max_block_error(spec.s, back.s), tol))
        out.append(_check("toeplitz_roundtrip_nu", float(np.abs(spec.nu - back.nu).max()), tol))
    return out


def _suite_hankel(spec: hc.HankelSpec, suite: str, tol: float) -> list[dict]:
    out = []
    H = hc.assemble_hankel(spec)
    ok, pivot = is_positive_definite(H)
    if not ok:
        raise PositivityError(f"H({spec.n}) is not positive definite (min pivot {pivot:.3g})")
    os_ = hc.omega_from_hankel(spec)
    J = flip_J(spec.p)
    if suite in ("identity", "all"):
        out.append(_check("hankel_identity", hc.verify_hankel_identity(spec) / (1 + np.linalg.norm(H)), tol))
        neutral = max([0.0] + [np.linalg.norm(w @ J @ w.conj().T) for w in os_.omega[1:]])
        out.append(_check("omega_j_neutral", neutral, tol))
        pairing = max(np.linalg.norm(os_.pairing(k) - hc.schur_t_hankel(spec, k + 1)) for k in range(spec.n))
        out.append(_check("omega_pairing_equals_t", pairing, tol))
    if suite in ("roundtrip", "all"):
        back = hc.hankel_from_omega(os_)
        out.append(_check("hankel_roundtrip_blocks", _max_block_error(spec.H, back.H), tol))
    if suite in ("moments", "isometry", "all"):
        # J omega_{n-1}* is J-neutral with det(omega_{n-1} J Q) != 0, so every moment is matched
        Q = J @ os_.omega[-1].conj().T
        phi = ml.lft_phi(ml.frakA(spec), Q)
        mu = ml.extract_measure(phi)
        if suite in ("moments", "all"):
            gaps = [np.linalg.norm(spec.H[k] - mu.moment(k)) / (1 + np.linalg.norm(spec.H[k]))
                    for k in range(2 * spec.n - 1)]
            out.append(_check("moments_match", max(gaps), tol))
            rep = ml.verify_appendix(spec, mu, phi)
            out.append(_check("appendix_h15_psd", max(0.0, -rep.h15_min_eig), tol))
            out.append(_check("appendix_h17_mu_zero", rep.h17_residual / (1 + np.linalg.norm(H)), tol))
            out.append(_check("appendix_h14_vs_phi", rep.phi_residual, tol))
        if suite in ("isometry", "all"):
            cs = hc.hamiltonian_from_hankel(spec)
            rng = np.random.default_rng(0)
            worst = 0.0
            for _ in range(5):
                h = [rng.normal(size=2 * spec.p) + 1j * rng.normal(size=2 * spec.p) for _ in range(spec.n)]
                iso = hc.spectral_transform_V(cs, h, mu)
                worst = max(worst, iso.gap / (1 + iso.lhs))
            out.append(_check("spectral_isometry", worst, tol))
    return out


def _suite_omega(os_: hc.OmegaSeq, suite: str, tol: float) -> list[dict]:
    os_.validate()
    out = []
    if suite in ("identity", "all"):
        cs1 = hc.hamiltonian_from_omega(os_)
        cs2 = hc.hamiltonian_from_omega(hc.omega_from_gamma(hc.gamma_factor(cs1)))
        out.append(_check("gamma_normalization", _max_block_error(cs1.Q, cs2.Q), tol))
    if suite in ("roundtrip", "all"):
        back = hc.omega_from_hankel(hc.hankel_from_omega(os_))
        out.append(_check("omega_roundtrip", _max_block_error(os_.omega, back.omega), tol))
    return out


def _suite_rho(seq: td.VerblunskySeqT, suite: str, tol: float) -> list[dict]:
    seq.validate()
    out = []
    if suite in ("identity", "all"):
        err = max(np.abs(td.halmos_decompose(td.halmos_extend(r)) - r).max() for r in seq.rho)
        out.append(_check("halmos_roundtrip", err, tol))
    if suite in ("roundtrip", "all"):
        back = td.verblunsky_from_toeplitz(td.toeplitz_from_verblunsky(seq))
        out.append(_check("rho_roundtrip", _max_block_error(seq.rho, back.rho), tol))
    return out


_SUITES = {
    "toeplitz": (toeplitz_from_doc, _suite_toeplitz, ("identity", "roundtrip")),
    "hankel": (hankel_from_doc, _suite_hankel, ("identity", "roundtrip", "moments", "isometry")),
    "omega": (omega_from_doc, _suite_omega, ("identity", "roundtrip")),
    "verblunsky_rho": (rho_from_doc, _suite_rho, ("identity", "roundtrip")),
}


def cmd_verify(args) -> int:
    doc = load_spec(args.input, tuple(_SUITES))
    parse, run, supported = _SUITES[doc["kind"]]
    if args.suite != "all" and args.suite not in supported:
        raise InputError(f"suite {args.suite!r} does not apply to kind {doc['kind']!r}")
    checks = run(parse(doc), args.suite, args.tol)
    ok = all(c["pass"] for c in checks)
    _emit({"kind": doc["kind"], "suite": args.suite, "checks": checks, "pass": ok}, args.output, args.input)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_moments(args) -> int:
    mu = measure_from_doc(load_spec(args.input, ("measure",)))
    mu.validate()
    if args.n < 1:
        raise InputError("--n must be positive")
    if args.kind == "hankel":
        spec = hc.measure_to_hankel(mu, args.n)
        doc = hankel_to_doc(spec)
        pd = hc.leading_sections_pd(spec)
    else:
        s = tuple(mu.trig_moment(-k) for k in range(args.n))
        spec = td.ToeplitzSpec(s, None)
        doc = toeplitz_to_doc(spec)
        pd = [is_positive_definite(td.assemble_toeplitz(spec.section(m)))[0] for m in range(1, args.n + 1)]
    _emit(doc, args.output, args.input)
    _diag(leading_sections_pd=pd)
    return EXIT_OK


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {text!r}") from exc


def cmd_weyl(args) -> int:
    spec = toeplitz_from_doc(load_spec(args.input, ("toeplitz",)))
    ws = td.weyl_series(spec, args.order)
    evals = []
    for text in args.eval or []:
        lam = _parse_complex(text)
        evals.append({"lambda": [_clean(lam.real), _clean(lam.imag)], "phi": matrix_to_json(td.weyl_eval(ws, lam))})
    doc = {
        "kind": "weyl_series",
        "p": spec.p,
        "alpha0": matrix_to_json(ws.alpha0),
        "tail": [matrix_to_json(b) for b in ws.tail],
        "evaluations": evals,
    }
    _emit(doc, args.output, args.input)
    return EXIT_OK


# -- entry point --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verblunsky", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("input", help="input JSON file")
        sp.add_argument("output", nargs="?", default=None, help="output JSON file (stdout if omitted)")
        sp.set_defaults(func=func)
        return sp

    add("toeplitz-to-rho", cmd_toeplitz_to_rho, "Toeplitz spec -> coefficients rho_k")
    sp = add("rho-to-toeplitz", cmd_rho_to_toeplitz, "coefficients rho_k -> Toeplitz spec")
    sp.add_argument("--method", choices=("newton", "direct"), default="newton")
    sp.add_argument("--tol", type=float, default=1e-10, help="Newton residual target per block")
    sp.add_argument("--max-iter", type=int, default=100, help="Newton iteration cap per block")
    add("hankel-to-omega", cmd_hankel_to_omega, "Hankel spec -> coefficients omega_k")
    sp = add("omega-to-hankel", cmd_omega_to_hankel, "coefficients omega_k -> Hankel spec")
    sp.add_argument("--method", choices=("laurent", "direct"), default="laurent")
    sp = add("verify", cmd_verify, "run an invariant suite and print a JSON report")
    sp.add_argument("--suite", choices=("identity", "roundtrip", "moments", "isometry", "all"), default="all")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp = add("moments", cmd_moments, "moment spec of a finite-atom measure")
    sp.add_argument("--kind", choices=("hankel", "toeplitz"), default="hankel")
    sp.add_argument("--n", type=int, required=True)
    sp = add("weyl", cmd_weyl, "Weyl series of a Toeplitz spec and optional evaluations")
    sp.add_argument("--order", type=int, default=None)
    sp.add_argument("--eval", action="append", metavar="a+bi")
    return ap


def _glue_eval(argv: list[str]) -> list[str]:
    # "--eval -i" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for a in it:
        if a == "--eval":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--eval={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(_glue_eval(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.func(args)
    except (InputError, DimensionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SCHEMA
    except PreconditionError as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except ReconstructionError as exc:
        sys.stderr.write(f"reconstruction failed: {exc}\n")
        return EXIT_RECONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
