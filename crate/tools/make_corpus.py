"""Builds the 1,000-molecule round-trip corpus.

Real drug and reference structures from drugs.smi come first; the remainder
is a deterministic enumeration of substituted scaffolds covering charged
groups, heteroaromatics, fused systems and two-digit ring closures.
"""
import itertools
import pathlib
import random

HERE = pathlib.Path(__file__).parent
OUT = HERE.parent / "crates" / "core" / "tests" / "data" / "corpus.smi"
TARGET = 1000

SCAFFOLDS = [
    "c1ccc(cc1)({R})",
    "c1ccc({R})cc1({S})",
    "c1cc({R})ccn1",
    "c1cc({R})c2ccccc2n1",
    "c1ccc2[nH]c({R})cc2c1",
    "c1csc({R})n1",
    "c1coc({R})c1",
    "c1nc({R})c2ccccc2n1",
    "C1CCN(CC1)({R})",
    "C1CN(CCN1({S}))({R})",
    "C%10CCC(CC%10)({R})",
    "c%11ccc%12cc({R})ccc%12c%11",
    "O=C1CCC(N1)({R})",
    "C1CC1({R})",
    "c1cc2ccccc2c(c1)({R})",
    "C1=CC(=O)C=C1({R})",
    "c1ccc2c(c1)CC({R})C2",
    "c1cnn({R})c1",
    "c1c({R})[nH]c(=O)[nH]c1=O",
    "C1CC2(CC1)CC({R})C2",
]

SUBST = [
    "C", "CC", "C(C)C", "C(F)(F)F", "O", "OC", "N", "NC", "N(C)C", "Cl", "Br", "F", "I",
    "C(=O)O", "C(=O)[O-]", "C(=O)N", "C(=O)OC", "C#N", "[N+](=O)[O-]", "S(=O)(=O)N",
    "S(C)(=O)=O", "C[NH3+]", "C[N+](C)(C)C", "CC(=O)NC", "c1ccccc1", "c1ccncc1",
    "OCC(O)CO", "C=O", "C=C", "C#C", "SC", "P(=O)(O)O", "NC(=O)N", "N=[N+]=[N-]",
    "C1CC1", "OC(F)(F)F", "C(=O)c1ccccc1", "Cc1ccccc1", "n1ccnc1", "[Si](C)(C)C",
]


def main() -> None:
    rng = random.Random(20240501)
    seen = []
    for line in (HERE / "drugs.smi").read_text().splitlines():
        if line.strip():
            seen.append(line.split("\t")[0])
    combos = []
    for scaffold in SCAFFOLDS:
        for r, s in itertools.product(SUBST, SUBST):
            if "{S}" not in scaffold and s != SUBST[0]:
                continue
            r, s = r.replace("1", "9"), s.replace("1", "8")
            combos.append(scaffold.replace("{R}", r).replace("{S}", s))
    rng.shuffle(combos)
    uniq = set(seen)
    for smi in combos:
        if len(seen) >= TARGET:
            break
        if smi not in uniq:
            uniq.add(smi)
            seen.append(smi)
    OUT.write_text("".join(f"{s}\tm{i:04d}\n" for i, s in enumerate(seen)))


if __name__ == "__main__":
    main()
