"""dn-tau: command-line front end.

Subcommands: wave, basis, twopoint, tau, verify {hirota,string,symmetry,
rationality,l57,ip,schur,debruijn,hciz,quadrature,all}, mirror {constants,
correlator}, golden, bench.  Reports are canonical JSON with a deterministic
content hash (timings and thread counts are excluded from the hash).  Exit
codes: 0 all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Dict, List, Optional

from gmpy2 import mpq

VERSION = "0.1.0"


def _threads() -> int:
    env = os.environ.get("DNTAU_THREADS")
    if env:
        try:
            n = int(env)
            if n < 1:
                raise ValueError
            return n
        except ValueError:
            raise SystemExit(2)
    return os.cpu_count() or 1


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def finalize_report(command: str, params: Dict, results, passed: bool,
                    t0: float) -> Dict:
    body = {"command": command, "parameters": params, "version": VERSION,
            "results": results, "pass": bool(passed)}
    body["content_hash"] = hashlib.sha256(canonical_json(body).encode()).hexdigest()
    body["timings"] = {"total_s": round(time.time() - t0, 3)}
    body["threads"] = _threads()
    return body


def emit(report: Dict, out: Optional[str], fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True)
    else:
        lines = ["check,pass,detail"]
        results = report.get("results", [])
        if isinstance(results, dict):
            results = [results]
        for r in results:
            if isinstance(r, dict):
                name = r.get("check", report["command"])
                ok = r.get("pass", "")
                detail = canonical_json({k: v for k, v in r.items()
                                         if k not in ("check", "pass")})
                lines.append(f"{name},{ok},\"{detail}\"")
        lines.append(f"TOTAL,{report['pass']},")
        text = "\n".join(lines)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def cmd_wave(args) -> Dict:
    from .operators import Params, solve_wave
    p = Params(args.N)
    psi = solve_wave(p, args.order)
    return {"check": "wave", "h": p.h, "order": args.order,
            "psi1": psi.comp1.series.to_json(),
            "psi2": psi.comp2.series.to_json(), "pass": True}


def cmd_basis(args) -> Dict:
    from .operators import Params, build_basis
    p = Params(args.N)
    basis = build_basis(p, args.depth, args.order)
    return {"check": "basis", "h": p.h, "K": args.depth, "order": args.order,
            "psis": {str(k): {"comp1": w.comp1.series.to_json(),
                              "comp2": w.comp2.series.to_json()}
                     for k, w in sorted(basis.psis.items())},
            "pass": True}


def cmd_twopoint(args) -> Dict:
    from .operators import Params, build_basis
    from .twopoint import build_twopoint
    p = Params(args.N)
    win = args.window or 2 * (2 * p.h + 2)
    basis = build_basis(p, max(win, 2), win + 2)
    out = {}
    for pair in ((1, 1), (1, 2), (2, 2)):
        tp = build_twopoint(basis, *pair, window=win)
        out[f"{pair[0]}{pair[1]}"] = {
            "kernel_multiple": tp.kernel_multiple.to_json(),
            "window": tp.window, "regular": tp.regular.to_json()}
    return {"check": "twopoint", "h": p.h, "window": win, "pairs": out,
            "pass": True}


def _tau_for(args, weight=None):
    from .operators import Params
    from .tau import MiwaConfig, tau_series
    p = Params(args.N)
    W = weight or args.weight
    n1 = getattr(args, "n1", None) or W
    n2 = getattr(args, "n2", None)
    if n2 is None:
        n2 = W
    if (n1 + n2) % 2:
        raise SystemExit(2)
    return tau_series(p, MiwaConfig(n1, n2, W), seed=args.seed)


def cmd_tau(args) -> Dict:
    tau = _tau_for(args)
    return {"check": "tau", "h": tau.params.h, "weight": tau.weight,
            "series": tau.series.to_json(), "pass": True}


def cmd_verify(args) -> Dict:
    from .operators import Params
    p = Params(args.N)
    which = args.what
    results: List[Dict] = []

    cache: Dict[str, object] = {}

    def need_tau():
        if "tau" not in cache:
            cache["tau"] = _tau_for(args)
        return cache["tau"]

    if which in ("hirota", "all"):
        from .tau import verify_hirota
        tau = need_tau()
        ms = [args.m] if which == "hirota" and args.m is not None else [0, 1]
        for m in ms:
            results.append(verify_hirota(tau, m))
    if which in ("string", "all"):
        from .tau import verify_string
        results.append(verify_string(need_tau()))
    if which in ("symmetry", "all"):
        from .tau import verify_symmetry
        results.append(verify_symmetry(need_tau()))
    if which in ("rationality", "all"):
        from .tau import verify_rationality
        results.append(verify_rationality(need_tau()))
    if which in ("l57", "all"):
        from .asymptotics import verify_l57
        results.append(verify_l57(p, args.order or 3))
    if which in ("ip", "all"):
        from .asymptotics import verify_ip_relation
        for comp in (1, 2):
            results.append(verify_ip_relation(p, comp, -2, 3, args.order or 4))
    if which in ("schur", "all"):
        from .pfaffian import verify_schur_pfaffian
        for n in (1, 2, 3):
            results.append(verify_schur_pfaffian(n))
    if which in ("debruijn", "all"):
        from .pfaffian import verify_de_bruijn
        for n in (1, 2):
            results.append(verify_de_bruijn(n))
    if which in ("hciz", "all"):
        from .matrixmodel import verify_hciz
        results.append(verify_hciz(2, [1, 2], [3, 5], prec=args.prec))
    if which in ("quadrature", "all"):
        from .matrixmodel import int_sing_numeric, quadrature_vs_asymptotics
        if p.h % 4 == 2:
            results.append(quadrature_vs_asymptotics(
                p, args.z or 3, args.terms or 2, prec=args.prec))
        elif which == "quadrature":
            raise SystemExit(2)
        results.append(int_sing_numeric(2, 1, prec=args.prec))
    if which == "all":
        from .mirror import MirrorConstants, residue_pairing
        results.append(MirrorConstants(p, prec=args.prec).verify())
        results.append(residue_pairing(p.N))
    if not results:
        raise SystemExit(2)
    return {"results": results, "pass": all(r.get("pass") for r in results)}


def cmd_mirror(args) -> Dict:
    from .mirror import (MirrorConstants, extract_correlator, residue_pairing)
    from .operators import Params
    p = Params(args.N)
    if args.what == "constants":
        mc = MirrorConstants(p, prec=args.prec)
        rep = mc.verify()
        rep["residue_pairing"] = residue_pairing(p.N)
        rep["pass"] = rep["pass"] and rep["residue_pairing"]["pass"]
        return rep
    if args.what == "correlator":
        insertions = []
        for tok in args.ins.split(","):
            tok = tok.strip()
            k = 0
            if "psi" in tok:
                tok, kpart = tok.split("psi")
                k = int(kpart)
            if not tok.startswith("e"):
                raise SystemExit(2)
            insertions.append((k, int(tok[1:])))
        weight = _needed_weight(p, insertions, args.flavor)
        if weight > 8 and not args.extended:
            raise SystemExit(
                f"insertion monomial needs tau weight {weight}; rerun with "
                f"--extended (documented slow path)")
        from .tau import MiwaConfig, tau_series
        n1 = weight if _uses_block(p, insertions, args.flavor, 1) else 0
        n2 = weight if _uses_block(p, insertions, args.flavor, 2) else 0
        if n1 == 0 and n2 == 0:
            n1 = n2 = max(2, weight)
        if (n1 + n2) % 2:
            if n2:
                n2 += 1
            else:
                n1 += 1
        tau = tau_series(p, MiwaConfig(n1, n2, weight), seed=args.seed)
        return extract_correlator(tau, args.g, insertions, args.flavor,
                                  prec=args.prec)
    raise SystemExit(2)


def _needed_weight(p, insertions, flavor) -> int:
    from .mirror import _tau_monomial_for
    mono = _tau_monomial_for(p, insertions, flavor)
    return sum(m * k for (a, m), k in mono.items())


def _uses_block(p, insertions, flavor, block) -> bool:
    from .mirror import _tau_monomial_for
    mono = _tau_monomial_for(p, insertions, flavor)
    return any(a == block for (a, m) in mono)


GOLDEN_SPECS = [
    ("wave_h2_order12", lambda: _golden_wave(2, 12)),
    ("wave_h4_order15", lambda: _golden_wave(3, 15)),
    ("basis_h2_K3", lambda: _golden_basis(2, 3, 9)),
    ("tau_h2_w4", lambda: _golden_tau(2, 4)),
    ("tau_h4_w3", lambda: _golden_tau(3, 3)),
]


def _golden_wave(N, order):
    from .operators import Params, solve_wave
    psi = solve_wave(Params(N), order)
    return {"psi1": psi.comp1.series.to_json(), "psi2": psi.comp2.series.to_json()}


def _golden_basis(N, K, order):
    from .operators import Params, build_basis
    b = build_basis(Params(N), K, order)
    return {str(k): w.comp1.series.to_json() for k, w in sorted(b.psis.items())}


def _golden_tau(N, W):
    from .operators import Params
    from .tau import MiwaConfig, tau_series
    n = W if W % 2 == 0 else W + 1
    tau = tau_series(Params(N), MiwaConfig(n, n, W))
    return tau.series.to_json()


def golden_dir() -> str:
    return os.path.join(os.path.dirname(os.path.abspath(__file__)),
                        "..", "..", "tests", "golden")


def cmd_golden(args) -> Dict:
    directory = args.dir or golden_dir()
    os.makedirs(directory, exist_ok=True)
    results = []
    for name, fn in GOLDEN_SPECS:
        path = os.path.join(directory, f"{name}.json")
        payload = fn()
        blob = canonical_json(payload)
        if args.bless:
            with open(path, "w") as f:
                f.write(blob + "\n")
            results.append({"check": f"golden:{name}", "pass": True,
                            "blessed": True})
            continue
        if not os.path.exists(path):
            results.append({"check": f"golden:{name}", "pass": False,
                            "error": "missing golden file (use --bless)"})
            continue
        with open(path) as f:
            want = f.read().strip()
        results.append({"check": f"golden:{name}", "pass": blob == want})
    return {"results": results, "pass": all(r["pass"] for r in results)}


def cmd_bench(args) -> Dict:
    import time as _t
    from .operators import Params, build_basis, solve_wave
    from .tau import MiwaConfig, tau_series, verify_hirota
    rows = []
    t = _t.time()
    solve_wave(Params(args.N), 30)
    rows.append({"step": "solve_wave(order=30)", "seconds": round(_t.time() - t, 3)})
    t = _t.time()
    build_basis(Params(args.N), 6, 12)
    rows.append({"step": "build_basis(K=6)", "seconds": round(_t.time() - t, 3)})
    t = _t.time()
    tau = tau_series(Params(args.N), MiwaConfig(4, 4, 4))
    rows.append({"step": "tau_series(W=4)", "seconds": round(_t.time() - t, 3)})
    t = _t.time()
    verify_hirota(tau, 0)
    rows.append({"step": "verify_hirota(m=0)", "seconds": round(_t.time() - t, 3)})
    return {"check": "bench", "rows": rows, "pass": True}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dn-tau",
                                 description="exact tau-function engine for the "
                                             "(h,2)-reduced 2-component BKP hierarchy")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--out", default=None, help="write the report to this path")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp, weight=False, order=False, prec=False):
        # output flags are accepted before or after the subcommand; SUPPRESS
        # keeps a subcommand-level absence from clobbering a top-level value
        sp.add_argument("--format", choices=("json", "csv"),
                        default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        sp.add_argument("--N", type=int, default=2, help="D_N index (h = 2N-2)")
        sp.add_argument("--seed", type=int, default=11)
        if weight:
            sp.add_argument("--weight", type=int, default=4)
            sp.add_argument("--n1", type=int, default=None)
            sp.add_argument("--n2", type=int, default=None)
        if order:
            sp.add_argument("--order", type=int, default=None)
        if prec:
            sp.add_argument("--prec", type=int, default=512)

    sp = sub.add_parser("wave", help="wave-function coefficients")
    common(sp)
    sp.add_argument("--order", type=int, default=12)
    sp.set_defaults(fn=cmd_wave)

    sp = sub.add_parser("basis", help="Grassmannian basis dump")
    common(sp)
    sp.add_argument("--depth", "--K", type=int, default=4, dest="depth")
    sp.add_argument("--order", type=int, default=10)
    sp.set_defaults(fn=cmd_basis)

    sp = sub.add_parser("twopoint", help="two-point functions in split form")
    common(sp)
    sp.add_argument("--window", type=int, default=None)
    sp.set_defaults(fn=cmd_twopoint)

    sp = sub.add_parser("tau", help="tau-function in the odd times")
    common(sp, weight=True)
    sp.set_defaults(fn=cmd_tau)

    sp = sub.add_parser("verify", help="run verifiers")
    sp.add_argument("what", choices=("hirota", "string", "symmetry",
                                     "rationality", "l57", "ip", "schur",
                                     "debruijn", "hciz", "quadrature", "all"))
    common(sp, weight=True, order=True, prec=True)
    sp.add_argument("--m", type=int, default=None, help="Hirota label")
    sp.add_argument("--z", type=float, default=None)
    sp.add_argument("--terms", type=int, default=None)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("mirror", help="mirror constants and correlators")
    sp.add_argument("what", choices=("constants", "correlator"))
    common(sp, prec=True)
    sp.add_argument("--g", type=int, default=0)
    sp.add_argument("--ins", type=str, default="e0,e0,e1",
                    help="comma list like 'e0,e0,e1' or 'e3psi1,e5'")
    sp.add_argument("--flavor", choices=("fjrw", "sg"), default="fjrw")
    sp.add_argument("--extended", action="store_true",
                    help="allow slow high-weight windows")
    sp.set_defaults(fn=cmd_mirror)

    sp = sub.add_parser("golden", help="golden-file regression corpus")
    sp.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    sp.add_argument("--out", default=argparse.SUPPRESS)
    sp.add_argument("--bless", action="store_true")
    sp.add_argument("--dir", default=None)
    sp.set_defaults(fn=cmd_golden)

    sp = sub.add_parser("bench", help="timing harness")
    common(sp)
    sp.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    t0 = time.time()
    try:
        payload = args.fn(args)
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return 2
        return e.code if isinstance(e.code, int) else 2
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    passed = bool(payload.get("pass", True))
    params = {k: v for k, v in vars(args).items()
              if k not in ("fn", "out", "format") and not callable(v)}
    results = payload.get("results", payload)
    report = finalize_report(args.cmd, params, results, passed, t0)
    emit(report, getattr(args, "out", None), getattr(args, "format", "json"))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
