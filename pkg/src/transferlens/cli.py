"""Command-line pipeline over a corpus directory.

Stages write their outputs under ``--outdir`` and later stages pick those
artifacts up, so the pipeline is resumable and each stage can be rerun in
isolation:

    materialize      closures/<domain>.atoms
    mine-roots       roots/<domain>.roots, roots/<domain>.inds
    import-external  external/<domain>.axioms, external/<domain>.audit
    fti              fti/auc.csv, fti/matrix.tsv
    report           evidence/*.tsv, report.txt, report.json
    explain          one evidence item, printed
    selftest         embedded correctness checks, no corpus needed

Exit codes: 0 success, 1 usage errors, 2 data errors.  Tuning values come
from flags first, then a ``key = value`` config file, then defaults.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .corpus import Corpus, load_corpus
from .contexts import SearchConfig, core_context_search
from .errors import DataError, UsageError
from .evidence import (
    CoreContext,
    EvidenceSpace,
    FactorKind,
    GeneralFactor,
    ParticularNarrator,
    correlative_reason,
)
from .harness import (
    TrainConfig,
    TransferRecord,
    check_weights,
    fti_from_records,
    fti_matrix,
    records_from_csv,
    records_to_csv,
)
from .kb import FileKbAdapter, HttpKbAdapter, VocabularyMapping, import_external
from .mining import MiningParams, mine_roots
from .ontology import axioms_to_text, parse_abox
from .reasoner import Entailment
from .report import build_report, render_result, sort_results


@dataclass(frozen=True)
class PipelineConfig:
    sigma: float = 0.99
    kappa: int = 2
    tau: float = 0.49
    kappa_cap: int = 2
    epsilon: float = 0.1
    alpha: float = 0.05
    omega1: float = 1.0
    omega2: float = 1.0
    max_dim: int = 4
    n_min: int = 3
    train_frac: float = 0.8
    epochs: int = 200
    ensemble: int = 10
    hidden: int = 16
    lr: float = 0.05
    batch_size: int = 16
    seed: int = 0
    consistency_sample: int | None = None

    def mining_params(self) -> MiningParams:
        return MiningParams(
            sigma=self.sigma, kappa=self.kappa, tau=self.tau, kappa_cap=self.kappa_cap
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            hidden=self.hidden,
            epochs=self.epochs,
            lr=self.lr,
            batch_size=self.batch_size,
            ensemble=self.ensemble,
            train_frac=self.train_frac,
            seed=self.seed,
        )

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            max_dim=self.max_dim,
            epsilon=self.epsilon,
            alpha=self.alpha,
            n_min=self.n_min,
        )


_CFG_FIELDS = {f.name: f.type for f in fields(PipelineConfig)}
_FLOAT_FIELDS = {
    "sigma", "tau", "epsilon", "alpha", "omega1", "omega2", "train_frac", "lr",
}


def _coerce(key: str, value: str):
    try:
        return float(value) if key in _FLOAT_FIELDS else int(value)
    except ValueError:
        kind = "number" if key in _FLOAT_FIELDS else "integer"
        raise DataError(f"config value for {key} must be a {kind}, got {value!r}") from None


def load_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` file; keys match PipelineConfig fields."""
    out: dict = {}
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file {path} does not exist")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CFG_FIELDS:
            raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in out:
            raise DataError(f"{path}:{lineno}: duplicate config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **load_config_file(args.config))
    flags = {
        name: getattr(args, name)
        for name in _CFG_FIELDS
        if getattr(args, name, None) is not None
    }
    return replace(cfg, **flags)


# ---------------------------------------------------------------------------
# artifact helpers

def _fmt(x) -> str:
    return "NA" if x is None else "%.17g" % x


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _load_corpus(args) -> Corpus:
    if not getattr(args, "corpus", None):
        raise UsageError("--corpus is required for this command")
    return load_corpus(args.corpus)


def _apply_external(corpus: Corpus, outdir: Path) -> None:
    """Attach previously imported axioms (if any) to each domain."""
    for d in corpus.domains:
        f = outdir / "external" / f"{d.id}.axioms"
        if f.exists():
            ont = parse_abox(f.read_text())
            d.set_external_axioms(ont)


def _load_fti(args, cfg: PipelineConfig, outdir: Path) -> tuple[list[TransferRecord], dict]:
    check_weights(cfg.omega1, cfg.omega2)
    csv_path = getattr(args, "auc_csv", None) or (outdir / "fti" / "auc.csv")
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise DataError(
            f"no transfer results at {csv_path}; run the fti stage first "
            f"or pass --auc-csv"
        )
    records = records_from_csv(csv_path)
    return records, fti_from_records(records, cfg.omega1, cfg.omega2)


def parse_evidence(text: str):
    """d_new/d_obs/d_inv, one entailment, or a '+'-joined context."""
    text = text.strip()
    if text in ("d_new", "d_obs", "d_inv"):
        return GeneralFactor.parse(text)
    if "+" in text:
        try:
            atoms = frozenset(Entailment.parse(p.strip()) for p in text.split("+"))
        except ValueError as err:
            raise DataError(f"bad context: {err}") from None
        return CoreContext(atoms)
    try:
        return ParticularNarrator(Entailment.parse(text))
    except ValueError as err:
        raise DataError(f"bad evidence {text!r}: {err}") from None


# ---------------------------------------------------------------------------
# subcommands

def cmd_materialize(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    _apply_external(corpus, outdir)
    for d in corpus.domains:
        closures = d.lso_closures()
        bad = sum(1 for c in closures if c.inconsistent)
        lines = [f"# domain {d.id}: {len(closures)} LSOs, {bad} inconsistent"]
        lines += sorted(str(g) for g in d.entailment_closure())
        _write(outdir / "closures" / f"{d.id}.atoms", "\n".join(lines) + "\n")
        print(f"{d.id}: {len(lines) - 1} entailments, {bad} inconsistent LSOs")
    return 0


def cmd_mine_roots(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    _apply_external(corpus, outdir)
    params = cfg.mining_params()
    for d in corpus.domains:
        rs = mine_roots(d, params)
        lines = [
            f"# domain {d.id} sigma={params.sigma} kappa={params.kappa} tau={params.tau}"
        ]
        for g in sorted(rs.frequent, key=str):
            lines.append(f"frequent\t{g}")
        for subset in sorted(rs.effective, key=lambda s: sorted(map(str, s))):
            r_e, r_i = rs.effective[subset]
            names = " | ".join(sorted(map(str, subset)))
            lines.append(f"effective\t{_fmt(r_e)}\t{_fmt(r_i)}\t{names}")
        for g in sorted(rs.root_entailments, key=str):
            lines.append(f"root-entailment\t{g}")
        for x in rs.root_individuals:
            lines.append(f"root-individual\t{x}")
        _write(outdir / "roots" / f"{d.id}.roots", "\n".join(lines) + "\n")
        _write(
            outdir / "roots" / f"{d.id}.inds",
            "".join(f"{x}\n" for x in rs.root_individuals),
        )
        print(
            f"{d.id}: {len(rs.frequent)} frequent, {len(rs.effective)} effective, "
            f"{len(rs.root_individuals)} root individuals"
        )
    return 0


def _make_adapter(args, corpus: Corpus):
    if getattr(args, "kb_lookup_url", None) or getattr(args, "kb_describe_url", None):
        if not (args.kb_lookup_url and args.kb_describe_url):
            raise UsageError("--kb-lookup-url and --kb-describe-url go together")
        return HttpKbAdapter(args.kb_lookup_url, args.kb_describe_url)
    kb_path = getattr(args, "kb", None) or corpus.kb_path
    if kb_path is None:
        raise DataError(
            "no knowledge base: add kb.txt to the corpus, or pass --kb, "
            "or pass --kb-lookup-url/--kb-describe-url"
        )
    return FileKbAdapter(kb_path)


def _make_mapping(args, corpus: Corpus) -> VocabularyMapping:
    map_path = getattr(args, "kb_map", None) or corpus.kb_map_path
    if map_path is None:
        raise DataError(
            "no vocabulary mapping: add kb_map.txt to the corpus or pass --kb-map"
        )
    return VocabularyMapping.load(map_path)


def cmd_import_external(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    adapter = _make_adapter(args, corpus)
    mapping = _make_mapping(args, corpus)
    params = cfg.mining_params()
    for d in corpus.domains:
        inds_file = outdir / "roots" / f"{d.id}.inds"
        if inds_file.exists():
            roots = [x for x in inds_file.read_text().split() if x]
        else:
            roots = list(mine_roots(d, params).root_individuals)
        axioms, audit = import_external(
            d,
            roots,
            adapter,
            mapping,
            constraints=corpus.constraints,
            consistency_sample=cfg.consistency_sample,
            seed=cfg.seed,
        )
        _write(
            outdir / "external" / f"{d.id}.axioms",
            axioms_to_text(axioms) if axioms else "",
        )
        audit_lines = ["# domain\tindividual\tentity\tstatus\twitness"]
        audit_lines += [a.to_line() for a in audit]
        _write(outdir / "external" / f"{d.id}.audit", "\n".join(audit_lines) + "\n")
        n_acc = sum(1 for a in audit if a.status == "accepted")
        print(f"{d.id}: {len(axioms)} axioms imported ({n_acc} entities accepted)")
    return 0


def cmd_fti(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    check_weights(cfg.omega1, cfg.omega2)
    if getattr(args, "auc_csv", None):
        records = records_from_csv(args.auc_csv)
        fti = fti_from_records(records, cfg.omega1, cfg.omega2)
    else:
        _apply_external(corpus, outdir)
        records, fti = fti_matrix(
            corpus.domains, cfg.train_config(), cfg.omega1, cfg.omega2
        )
    records_to_csv(records, _ensure_parent(outdir / "fti" / "auc.csv"))
    rows = ["source\ttarget\tauc_base\tauc_hard\tauc_soft\tfsi\tfgi\tfti"]
    for r in records:
        rows.append(
            "\t".join(
                [r.source, r.target]
                + [
                    _fmt(v)
                    for v in (
                        r.auc_base,
                        r.auc_hard,
                        r.auc_soft,
                        r.fsi,
                        r.fgi,
                        fti[(r.source, r.target)],
                    )
                ]
            )
        )
    _write(outdir / "fti" / "matrix.tsv", "\n".join(rows) + "\n")
    print(f"{len(records)} transfer records over {len({r.source for r in records})} domains")
    return 0


def _ensure_parent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_explain(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    _apply_external(corpus, outdir)
    _, fti = _load_fti(args, cfg, outdir)
    evidence = parse_evidence(args.evidence)
    res = correlative_reason(
        corpus.domains, evidence, fti,
        epsilon=cfg.epsilon, alpha=cfg.alpha, n_min=cfg.n_min,
    )
    print(render_result(res))
    print(
        f"evidence={res.evidence}\tgamma={_fmt(res.gamma)}\trho={_fmt(res.rho)}"
        f"\tn={res.n}\tvalid={res.valid}\treason={res.reason or '-'}"
    )
    return 0


def _result_row(res, cover: int | None = None) -> str:
    cells = [str(res.evidence)]
    if cover is not None:
        cells.append(str(cover))
    cells += [
        _fmt(res.gamma),
        _fmt(res.rho),
        str(res.n),
        "yes" if res.valid else "no",
        res.reason or "-",
    ]
    return "\t".join(cells)


def cmd_report(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args)
    outdir = Path(args.outdir)
    _apply_external(corpus, outdir)
    _, fti = _load_fti(args, cfg, outdir)
    domains = corpus.domains

    space = EvidenceSpace.build(
        domains, fti, epsilon=cfg.epsilon, alpha=cfg.alpha, n_min=cfg.n_min
    )
    general = [space.score(GeneralFactor(k)) for k in FactorKind]

    targets = {d.target for d in domains}
    universe = sorted(frozenset().union(*space.closures) - targets)
    narrators = [space.score(ParticularNarrator(g)) for g in universe]

    scan = core_context_search(domains, fti, cfg.search_config())
    # singleton representatives of singleton clusters cover no real context
    contexts = [(res, cover) for _, res, cover in scan.rep_results() if cover > 0]

    _write(
        outdir / "evidence" / "general.tsv",
        "\n".join(
            ["evidence\tgamma\trho\tn\tvalid\treason"]
            + [_result_row(r) for r in sort_results(general)]
        )
        + "\n",
    )
    _write(
        outdir / "evidence" / "narrators.tsv",
        "\n".join(
            ["evidence\tgamma\trho\tn\tvalid\treason"]
            + [_result_row(r) for r in sort_results(narrators)]
        )
        + "\n",
    )
    ctx_sorted = sorted(
        contexts,
        key=lambda rc: (
            not rc[0].valid,
            -abs(rc[0].gamma) if rc[0].gamma is not None else 1.0,
            str(rc[0].evidence),
        ),
    )
    _write(
        outdir / "evidence" / "contexts.tsv",
        "\n".join(
            ["evidence\tcover\tgamma\trho\tn\tvalid\treason"]
            + [_result_row(r, c) for r, c in ctx_sorted]
        )
        + "\n",
    )

    rep = build_report(
        [d.id for d in domains],
        n_pairs=len(space.pair_src),
        fti=fti,
        general=general,
        narrators=narrators,
        contexts=contexts,
    )
    _write(outdir / "report.txt", rep.text)
    _write(outdir / "report.json", rep.to_json() + "\n")
    stats = scan.stats
    print(rep.text)
    print(
        f"context search: {stats.evaluated} evaluated of {stats.enumerable} "
        f"enumerable, {stats.covered} covered, prune rate {stats.prune_rate:.3f}"
    )
    return 0


def cmd_selftest(args, cfg: PipelineConfig) -> int:
    from . import selfcheck

    failures = selfcheck.run(print)
    return 0 if failures == 0 else 2


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", help="corpus directory")
    common.add_argument("--outdir", default="out", help="artifact directory (default: out)")
    common.add_argument("--config", help="key = value config file")
    for name in sorted(_CFG_FIELDS):
        flag = "--" + name.replace("_", "-")
        common.add_argument(
            flag,
            type=float if name in _FLOAT_FIELDS else int,
            default=None,
            help=f"override {name} (default {getattr(PipelineConfig, name, None)})",
        )

    p = _Parser(
        prog="transferlens",
        description="Mine, import, measure and explain transfer between learning domains.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("materialize", parents=[common], help="compute domain closures")
    sp.set_defaults(func=cmd_materialize)

    sp = sub.add_parser("mine-roots", parents=[common], help="mine frequent and effective roots")
    sp.set_defaults(func=cmd_mine_roots)

    sp = sub.add_parser(
        "import-external", parents=[common], help="import knowledge-base axioms for roots"
    )
    sp.add_argument("--kb", help="knowledge-base file (default: corpus kb.txt)")
    sp.add_argument("--kb-map", help="vocabulary mapping file (default: corpus kb_map.txt)")
    sp.add_argument("--kb-lookup-url", help="HTTP lookup template with {term}")
    sp.add_argument("--kb-describe-url", help="HTTP describe template with {entity}")
    sp.set_defaults(func=cmd_import_external)

    sp = sub.add_parser("fti", parents=[common], help="compute or ingest the transfer matrix")
    sp.add_argument("--auc-csv", help="ingest measured AUCs instead of training")
    sp.set_defaults(func=cmd_fti)

    sp = sub.add_parser("explain", parents=[common], help="score one evidence item")
    sp.add_argument("--evidence", required=True, help="d_new|d_obs|d_inv, an entailment, or a '+'-joined context")
    sp.add_argument("--auc-csv", help="transfer results CSV (default: outdir artifact)")
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("report", parents=[common], help="full evidence tables and report")
    sp.add_argument("--auc-csv", help="transfer results CSV (default: outdir artifact)")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("selftest", parents=[common], help="run embedded correctness checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
