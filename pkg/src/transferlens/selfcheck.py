"""Embedded correctness checks for the selftest subcommand.

Each check recomputes its expectation on the spot with independent means
(hand-derived closures, fraction arithmetic, brute-force enumeration), so a
passing run vouches for the installed package rather than for cached test
artifacts.  No corpus or network is needed.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .contexts import SearchConfig, core_context_search
from .domain import LearningDomain, Lso
from .evidence import change_rates_from_counts, p_value, pearson
from .mining import MiningParams, mine_roots
from .ontology import axioms_to_text, normalize_tbox, parse_abox, parse_ontology, parse_tbox
from .reasoner import Entailment, materialize


def _check_parser_roundtrip():
    doc = """
SubClassOf(And(Dep Some(hasWea HeavySnow)) DelayedDep)
SubRole(hasOri hasApt)
RoleChain(hasCarrier carHub hasDepHub)
ClassAssert(Dep d)
RoleAssert(hasWea d w)
SameInd(a b)
DiffInd(a c)
"""
    ont = parse_ontology(doc)
    again = parse_ontology(axioms_to_text(ont.tbox | ont.abox))
    assert again.tbox == ont.tbox and again.abox == ont.abox, "round-trip changed axioms"


def _check_closure_fixture():
    tbox = parse_tbox(
        """
SubClassOf(And(Dep Some(hasWea Snow)) DelayedDep)
SubClassOf(HeavySnow Snow)
"""
    )
    abox = parse_abox(
        """
ClassAssert(Dep d)
ClassAssert(HeavySnow w)
RoleAssert(hasWea d w)
"""
    )
    closure = materialize(tbox, abox)
    got = {str(g) for g in closure.atoms()}
    want = {
        "Dep(d)", "HeavySnow(w)", "Snow(w)", "DelayedDep(d)", "hasWea(d,w)",
    }
    assert got == want, f"closure mismatch: {sorted(got ^ want)}"
    assert not closure.inconsistent


def _check_merge_inconsistency():
    tbox = parse_tbox("SubClassOf(A A)")
    abox = parse_abox("ClassAssert(A x)\nSameInd(x y)\nDiffInd(x y)")
    closure = materialize(tbox, abox)
    assert closure.inconsistent, "distinct individuals merged without contradiction"
    assert closure.entails(Entailment.parse("B(z)")), "inconsistent closure must entail everything"


def _check_change_rates():
    cr = change_rates_from_counts(
        n_source=10, n_target=16, n_new=10, n_obsolete=4, n_invariant=6
    )
    assert abs(cr.new - 10 / 16) < 1e-15, cr.new
    assert abs(cr.obsolete - 4 / 10) < 1e-15, cr.obsolete
    assert abs(cr.invariant - 6 / 26) < 1e-15, cr.invariant


def _pearson_fraction(xs, ys):
    n = len(xs)
    xs = [Fraction(v) for v in xs]
    ys = [Fraction(v) for v in ys]
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    return sxy, sxx, syy


def _check_pearson():
    xs = [1.0, 2.0, 4.0, 5.0, 8.0]
    ys = [2.0, 3.0, 3.0, 6.0, 7.0]
    sxy, sxx, syy = _pearson_fraction(xs, ys)
    want = float(sxy) / float(sxx * syy) ** 0.5
    got = pearson(np.array(xs), np.array(ys))
    assert abs(got - want) < 1e-12, (got, want)
    rho = p_value(got, len(xs))
    assert 0.0 < rho < 0.1, rho
    assert p_value(1.0, 5) == 0.0


def _toy_domain():
    tbox = normalize_tbox(parse_tbox("SubClassOf(HeavySnow Snow)"))
    lsos = []
    for i, (wea, delayed) in enumerate(
        [("HeavySnow", 1), ("HeavySnow", 1), ("Clear", 0), ("Clear", 1), ("HeavySnow", 0)]
    ):
        abox = parse_abox(
            f"ClassAssert(Dep d)\nClassAssert({wea} w)\nRoleAssert(hasWea d w)\n"
            + ("ClassAssert(DelayedDep d)\n" if delayed else "")
        )
        lsos.append(Lso(f"o{i}", frozenset(), abox))
    return LearningDomain(
        id="toy", tbox=tbox, lsos=tuple(lsos), target=Entailment.parse("DelayedDep(d)")
    )


def _check_mining_brute():
    domain = _toy_domain()
    params = MiningParams(sigma=0.6, kappa=2, tau=0.5)
    rs = mine_roots(domain, params)
    atom_sets = [c.atoms() for c in domain.lso_closures()]
    n = len(atom_sets)
    universe = sorted(set().union(*atom_sets) - {domain.target})
    t_in = [domain.target in s for s in atom_sets]
    freq = {g for g in universe if sum(g in s for s in atom_sets) / n >= params.sigma}
    assert freq == set(rs.frequent), "frequent sets disagree with brute force"
    eff = {}
    for combo in itertools.combinations(sorted(freq, key=str), params.kappa):
        r_e = sum(all(g in s for g in combo) and t for s, t in zip(atom_sets, t_in)) / n
        r_i = sum(all(g not in s for g in combo) and not t for s, t in zip(atom_sets, t_in)) / n
        if r_e + r_i >= params.tau:
            eff[frozenset(combo)] = (r_e, r_i)
    assert eff == rs.effective, "effective subsets disagree with brute force"


def _check_search_cover():
    domain_a = _toy_domain()
    tbox = domain_a.tbox
    domains = []
    specs = [
        ("d1", ["HeavySnow", "HeavySnow", "Clear"]),
        ("d2", ["HeavySnow", "Clear", "Clear"]),
        ("d3", ["Clear", "Clear", "Clear"]),
        ("d4", ["HeavySnow", "HeavySnow", "HeavySnow"]),
    ]
    for did, weas in specs:
        lsos = tuple(
            Lso(
                f"{did}-{i}",
                frozenset(),
                parse_abox(
                    f"ClassAssert(Dep d)\nClassAssert({w} w)\nRoleAssert(hasWea d w)\n"
                    + ("ClassAssert(DelayedDep d)\n" if w == "HeavySnow" else "")
                ),
            )
            for i, w in enumerate(weas)
        )
        domains.append(
            LearningDomain(
                id=did, tbox=tbox, lsos=lsos, target=Entailment.parse("DelayedDep(d)")
            )
        )
    rng = np.random.default_rng(3)
    fti = {
        (a.id, b.id): float(rng.normal())
        for a in domains
        for b in domains
        if a.id != b.id
    }
    scan = core_context_search(
        domains, fti, SearchConfig(max_dim=3, early_stop=False)
    )
    expanded = list(scan.iter_contexts())
    assert len(expanded) == scan.stats.covered, "cover count disagrees with expansion"
    u = len(scan.clusters.universe)
    want = sum(
        1
        for k in (2, 3)
        for _ in itertools.combinations(range(u), k)
    )
    assert len(expanded) == want, (len(expanded), want)
    one = expanded[0]
    again = scan.lookup(one.evidence.entailments)
    assert (again.gamma, again.rho, again.n) == (one.gamma, one.rho, one.n)


CHECKS = [
    ("parser-roundtrip", _check_parser_roundtrip),
    ("closure-fixture", _check_closure_fixture),
    ("merge-inconsistency", _check_merge_inconsistency),
    ("change-rates", _check_change_rates),
    ("pearson-and-p-value", _check_pearson),
    ("mining-vs-brute-force", _check_mining_brute),
    ("search-cover-and-lookup", _check_search_cover),
]


def run(emit=print) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:
            failures += 1
            emit(f"FAIL {name}: {exc}")
        else:
            emit(f"PASS {name}")
    emit(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
