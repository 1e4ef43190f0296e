"""Corpus directory loading.

Layout::

    <root>/
      tbox.ont              shared TBox (required)
      constraints.ont       Bottom-headed axioms for import checks (optional)
      kb.txt                file-backed knowledge-base snapshot (optional)
      kb_map.txt            vocabulary mapping for imports (optional)
      domains/<id>/
        manifest.txt        "key = value" lines: id, target
        lsos/<name>.ont     one LSO per file

LSO files hold ``@ann key value`` annotation lines followed by ABox axioms.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .domain import LearningDomain, Lso
from .errors import DataError
from .ontology import (
    Gci,
    NormalizedTBox,
    OntologyError,
    TBoxAxiom,
    normalize_tbox,
    parse_ontology,
)
from .reasoner import Entailment


@dataclass
class Corpus:
    root: Path
    tbox_axioms: frozenset[TBoxAxiom]
    tbox: NormalizedTBox
    constraints: frozenset[TBoxAxiom]
    domains: list[LearningDomain]

    @property
    def kb_path(self) -> Path | None:
        p = self.root / "kb.txt"
        return p if p.exists() else None

    @property
    def kb_map_path(self) -> Path | None:
        p = self.root / "kb_map.txt"
        return p if p.exists() else None

    def domain(self, domain_id: str) -> LearningDomain:
        for d in self.domains:
            if d.id == domain_id:
                return d
        raise DataError(f"no domain {domain_id!r} in corpus {self.root}")


def _read_manifest(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise DataError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _parse_lso_file(path: Path) -> Lso:
    ann: set[tuple[str, str]] = set()
    body: list[str] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("@ann"):
            parts = stripped.split()
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected '@ann key value'")
            ann.add((parts[1], parts[2]))
        elif stripped.startswith("@"):
            raise DataError(f"{path}:{lineno}: unknown directive {stripped.split()[0]!r}")
        else:
            body.append(raw)
    try:
        ont = parse_ontology("\n".join(body))
    except OntologyError as err:
        raise DataError(f"{path}: {err}") from err
    if ont.tbox:
        raise DataError(f"{path}: TBox axioms are not allowed in LSO files")
    return Lso(name=path.stem, annotations=frozenset(ann), abox=ont.abox)


def load_corpus(root: str | Path) -> Corpus:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"corpus root {root} is not a directory")
    tbox_file = root / "tbox.ont"
    if not tbox_file.exists():
        raise DataError(f"{root} has no tbox.ont")
    try:
        tbox_ont = parse_ontology(tbox_file.read_text())
    except OntologyError as err:
        raise DataError(f"{tbox_file}: {err}") from err
    if tbox_ont.abox:
        raise DataError(f"{tbox_file}: ABox axioms do not belong in the shared TBox")

    constraints: frozenset[TBoxAxiom] = frozenset()
    cfile = root / "constraints.ont"
    if cfile.exists():
        try:
            cont = parse_ontology(cfile.read_text())
        except OntologyError as err:
            raise DataError(f"{cfile}: {err}") from err
        if cont.abox:
            raise DataError(f"{cfile}: constraints must be TBox axioms")
        for ax in cont.tbox:
            if not isinstance(ax, Gci) or str(ax.rhs) != "Bottom":
                raise DataError(
                    f"{cfile}: constraint axioms must be Bottom-headed inclusions, got {ax}"
                )
        constraints = cont.tbox

    ntbox = normalize_tbox(tbox_ont.tbox, reserved=tbox_ont.signature.names)

    domains_dir = root / "domains"
    if not domains_dir.is_dir():
        raise DataError(f"{root} has no domains/ directory")
    domains: list[LearningDomain] = []
    for dom_dir in sorted(p for p in domains_dir.iterdir() if p.is_dir()):
        manifest_file = dom_dir / "manifest.txt"
        if not manifest_file.exists():
            raise DataError(f"{dom_dir} has no manifest.txt")
        manifest = _read_manifest(manifest_file)
        unknown = set(manifest) - {"id", "target", "notes"}
        if unknown:
            raise DataError(f"{manifest_file}: unknown keys {sorted(unknown)}")
        for required in ("id", "target"):
            if required not in manifest:
                raise DataError(f"{manifest_file}: missing {required!r}")
        if manifest["id"] != dom_dir.name:
            raise DataError(
                f"{manifest_file}: id {manifest['id']!r} does not match "
                f"directory name {dom_dir.name!r}"
            )
        try:
            target = Entailment.parse(manifest["target"])
        except ValueError as err:
            raise DataError(f"{manifest_file}: bad target: {err}") from err
        lso_dir = dom_dir / "lsos"
        if not lso_dir.is_dir():
            raise DataError(f"{dom_dir} has no lsos/ directory")
        lso_files = sorted(lso_dir.glob("*.ont"))
        if not lso_files:
            raise DataError(f"{lso_dir} holds no .ont files")
        lsos = tuple(_parse_lso_file(f) for f in lso_files)
        domains.append(
            LearningDomain(id=manifest["id"], tbox=ntbox, lsos=lsos, target=target)
        )
    if not domains:
        raise DataError(f"{domains_dir} holds no domains")
    return Corpus(
        root=root,
        tbox_axioms=tbox_ont.tbox,
        tbox=ntbox,
        constraints=constraints,
        domains=domains,
    )
