#!/usr/bin/env python3
"""Export cusp-form q-expansion fixtures from PARI/GP.

Each fixture is one space S_k(Gamma_0(N), chi) given by a basis of q-expansions,
together with the character value table and PARI's dimension data so the Rust
side can cross-check its own character evaluation and dimension formula.

Requires the `cypari2` wheel (`pip install cypari2`).

Usage: gen_fixtures.py OUT_DIR [--precision B]
"""
import argparse
import json
import math
import os
import sys

import cypari2

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)
pari.set_real_precision(40)

# (level, weight, conrey label) -- every space needed by the classical suites:
# the main levels, their N/p companions, the p^(n-1)M targets, and the
# conjugate-character spaces required by the primed operators.
SPACES = [
    # squarefree, trivial character
    (33, 2, 1), (11, 2, 1), (3, 2, 1),
    (10, 4, 1), (5, 4, 1), (2, 4, 1),
    # squarefree, nontrivial imprimitive character
    (21, 3, 13), (7, 3, 6),
    (14, 4, 9), (14, 4, 11), (7, 4, 2), (7, 4, 4),
    # p^n M with n >= 2
    (45, 2, 1), (15, 2, 1), (9, 2, 1), (5, 2, 1),
    (16, 4, 1), (8, 4, 1), (4, 4, 1), (2, 4, 1),
    (27, 4, 10), (27, 4, 19), (9, 4, 4), (9, 4, 7), (3, 4, 1),
    (45, 3, 26), (15, 3, 11), (9, 3, 8),
    # prime level, all new
    (11, 4, 1),
]


def char_table(n, j):
    """Value exponents e_x with chi(x) = exp(2 pi i e_x / order); None off units."""
    order = int(pari(f"charorder(znstar({n},1),{j})"))
    vals = []
    for x in range(n):
        if math.gcd(x, n) != 1:
            vals.append(None)
            continue
        r = pari(f"chareval(znstar({n},1),{j},{x})")
        vals.append(int(r * order) % order)
    return order, vals


def export(level, weight, label, precision):
    chi = f"Mod({label},{level})"
    mf = pari(f"mfinit([{level},{weight},{chi}],1)")
    basis = pari.mfbasis(mf)
    forms = []
    for f in basis:
        coefs = pari.mfcoefs(f, precision)
        emb = pari.mfembed(mf, coefs)
        row = []
        for c in list(emb)[1:]:
            z = complex(c)
            row.append([z.real, z.imag])
        assert abs(complex(list(emb)[0])) == 0.0
        forms.append(row)
    order, values = char_table(level, label)
    conductor = int(pari(f"zncharconductor(znstar({level},1),{label})"))
    return {
        "level": level,
        "weight": weight,
        "character": {
            "modulus": level,
            "conrey": label,
            "order": order,
            "conductor": conductor,
            "value_exponents": values,
        },
        "precision": precision,
        "basis": forms,
        "dimensions": {
            "cusp": int(pari(f"mfdim([{level},{weight},{chi}],1)")),
            "new": int(pari(f"mfdim([{level},{weight},{chi}],0)")),
        },
        "provenance": f"PARI/GP {pari.version()} mfinit/mfbasis/mfembed, label {level}.{weight}.{label}",
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--precision", type=int, default=600)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for level, weight, label in SPACES:
        doc = export(level, weight, label, args.precision)
        name = f"{level}.{weight}.{label}.json"
        with open(os.path.join(args.out, name), "w") as fh:
            json.dump(doc, fh, separators=(",", ":"))
        print(f"{name}: dim {doc['dimensions']['cusp']} new {doc['dimensions']['new']}", file=sys.stderr)


if __name__ == "__main__":
    main()
