"""Mine root entailments on the bundled corpus and import external knowledge.

The knowledge base bundled with the corpus contains a song and a person
whose titles collide with airport codes; the consistency gate keeps them
out while the airports themselves come through.

    python3 demos/02_roots_and_external_import.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from transferlens.corpus import load_corpus
from transferlens.kb import FileKbAdapter, VocabularyMapping, import_external
from transferlens.mining import MiningParams, mine_roots

corpus = load_corpus(Path(__file__).resolve().parents[1] / "corpora" / "mini_flights")
domain = corpus.domain("B1")

params = MiningParams(sigma=0.99, kappa=2, tau=0.49)
roots = mine_roots(domain, params)
print(f"domain {domain.id}: {len(roots.frequent)} frequent entailments, "
      f"{len(roots.effective)} effective subsets")
print("root individuals:", ", ".join(roots.root_individuals))

adapter = FileKbAdapter(corpus.kb_path)
mapping = VocabularyMapping.load(corpus.kb_map_path)
axioms, audit = import_external(
    domain, roots.root_individuals, adapter, mapping,
    constraints=corpus.constraints,
)

print()
print("import audit (individual, candidate, decision):")
for rec in audit:
    why = f" (breaks {rec.witness})" if rec.witness else ""
    print(f"  {rec.individual:<10} {rec.entity_id or '-':<10} {rec.status}{why}")

print()
print(f"{len(axioms)} axioms accepted:")
for a in sorted(map(str, axioms)):
    print("  ", a)

before = len(domain.entailment_closure())
domain.set_external_axioms(axioms)
after = len(domain.entailment_closure())
print()
print(f"domain closure grew from {before} to {after} entailments")
