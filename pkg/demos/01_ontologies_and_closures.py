"""Parse a small flight ontology and materialize its entailment closure.

Run from the repository root:

    python3 demos/01_ontologies_and_closures.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from transferlens.ontology import normalize_tbox, parse_ontology
from transferlens.reasoner import Entailment, materialize

DOC = """
# A departure is delayed when its delay-minutes indicator is positive.
SubClassOf(And(Dep Some(hasDelMin Nom(Pos))) DelayedDep)
SubClassOf(Departure Dep)
RoleChain(hasCarrier hasCarHub hasDepHub)

ClassAssert(Departure d)
RoleAssert(hasDelMin d Pos)
RoleAssert(hasCarrier d car)
SameInd(car DL)
RoleAssert(hasCarHub DL ATL)
"""

ont = parse_ontology(DOC)
closure = materialize(normalize_tbox(ont.tbox), ont.abox)

print("derived ground atoms:")
for g in sorted(map(str, closure.atoms())):
    print("  ", g)

print()
print("the flight is delayed:", closure.entails(Entailment.parse("DelayedDep(d)")))
print("its carrier hub chains through the alias merge:",
      closure.entails(Entailment.parse("hasDepHub(d,ATL)")))

# contradictory equality knowledge collapses the closure
bad = parse_ontology(DOC + "DiffInd(car DL)\n")
print()
print("with car and DL declared distinct, consistent =",
      not materialize(normalize_tbox(bad.tbox), bad.abox).inconsistent)
