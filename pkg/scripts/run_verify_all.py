#!/usr/bin/env python3
"""Run the full verification battery and print one line per check.

Usage: python3 scripts/run_verify_all.py [--N 2] [--weight 6]
Equivalent to `dn-tau verify all` but with a compact console summary.
"""

import argparse
import sys
import time

from dntau.asymptotics import verify_ip_relation, verify_l57
from dntau.matrixmodel import int_sing_numeric, quadrature_vs_asymptotics, verify_hciz
from dntau.mirror import MirrorConstants, residue_pairing
from dntau.operators import Params
from dntau.pfaffian import verify_de_bruijn, verify_schur_pfaffian
from dntau.tau import (MiwaConfig, tau_series, verify_hirota,
                       verify_rationality, verify_string, verify_symmetry)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--weight", type=int, default=6)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    p = Params(args.N)
    W = args.weight

    checks = []
    t0 = time.time()
    tau = tau_series(p, MiwaConfig(W, W, W), seed=args.seed)
    print(f"[{time.time()-t0:7.1f}s] tau built: h={p.h} W={W} "
          f"({len(tau.series.terms)} terms)")

    for m in (0, 1):
        checks.append(verify_hirota(tau, m))
    checks.append(verify_string(tau))
    checks.append(verify_symmetry(tau))
    checks.append(verify_rationality(tau))
    checks.append(verify_l57(p, 3))
    for comp in (1, 2):
        checks.append(verify_ip_relation(p, comp, -2, 3, 4))
    for n in (1, 2, 3):
        checks.append(verify_schur_pfaffian(n))
    for n in (1, 2):
        checks.append(verify_de_bruijn(n))
    checks.append(verify_hciz(2, [1, 2], [3, 5]))
    if p.h % 4 == 2:
        checks.append(quadrature_vs_asymptotics(p, 3, 2))
    checks.append(int_sing_numeric(2, 1))
    checks.append(MirrorConstants(p).verify())
    checks.append(residue_pairing(p.N))

    ok = True
    for rep in checks:
        status = "PASS" if rep.get("pass") else "FAIL"
        label = rep.get("check", "?")
        extra = {k: v for k, v in rep.items()
                 if k in ("m", "window", "n", "N", "component") and v is not None}
        print(f"  {status}  {label} {extra if extra else ''}")
        ok = ok and bool(rep.get("pass"))
    print(f"total: {'PASS' if ok else 'FAIL'} in {time.time()-t0:.1f}s")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
