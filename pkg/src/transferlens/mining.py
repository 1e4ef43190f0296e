"""Root mining: the entailments and individuals that anchor a domain.

Two routes feed the root set.  Frequent entailments hold in at least a
``sigma`` fraction of a domain's LSO closures.  Effective subsets are
exactly-``kappa``-sized entailment sets scored by how tightly they travel
with the target: ``r_e`` is the fraction of LSOs whose closure contains the
subset together with the target, ``r_i`` the fraction whose closure avoids
all of them, and a subset qualifies when ``r_e + r_i >= tau``.  Both scores
can only shrink as a subset grows, so candidate generation is apriori-style:
only joins of surviving smaller subsets are ever scored, which is lossless.

Root individuals are the individuals named by root entailments, in
lexicographic order; downstream import walks them in exactly that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .domain import LearningDomain
from .errors import DataError
from .reasoner import Entailment


@dataclass(frozen=True)
class MiningParams:
    sigma: float = 0.99
    kappa: int = 2
    tau: float = 0.49
    kappa_cap: int = 2

    def __post_init__(self):
        if not 0.0 < self.sigma <= 1.0:
            raise DataError(f"sigma must be in (0, 1], got {self.sigma}")
        if not 0.0 <= self.tau <= 2.0:
            raise DataError(f"tau must be in [0, 2], got {self.tau}")
        if self.kappa < 1:
            raise DataError(f"kappa must be at least 1, got {self.kappa}")
        if self.kappa > self.kappa_cap:
            raise DataError(
                f"kappa={self.kappa} exceeds the configured cap {self.kappa_cap}; "
                f"raise kappa_cap deliberately if the blow-up is intended"
            )


@dataclass
class RootSet:
    domain_id: str
    params: MiningParams
    frequent: frozenset[Entailment]
    effective: dict[frozenset[Entailment], tuple[float, float]]
    root_entailments: frozenset[Entailment]
    root_individuals: tuple[str, ...]


class _Bitsets:
    """Per-entailment LSO membership masks for fast subset scoring."""

    def __init__(self, domain: LearningDomain):
        closures = []
        for i, c in enumerate(domain.lso_closures()):
            if c.inconsistent:
                raise DataError(
                    f"LSO {domain.lsos[i].name!r} of domain {domain.id} is "
                    f"inconsistent; mine roots on a consistent corpus"
                )
            closures.append(c.atoms())
        self.n = len(closures)
        self.full = (1 << self.n) - 1
        self.mask: dict[Entailment, int] = {}
        for i, atoms in enumerate(closures):
            bit = 1 << i
            for g in atoms:
                self.mask[g] = self.mask.get(g, 0) | bit

    def support(self, g: Entailment) -> float:
        return self.mask.get(g, 0).bit_count() / self.n

    def score(self, subset, target_mask: int) -> tuple[float, float]:
        both = target_mask
        any_of = target_mask
        for g in subset:
            m = self.mask.get(g, 0)
            both &= m
            any_of |= m
        r_e = both.bit_count() / self.n
        r_i = (self.full & ~any_of).bit_count() / self.n
        return r_e, r_i


def frequent_entailments(domain: LearningDomain, sigma: float) -> frozenset[Entailment]:
    bits = _Bitsets(domain)
    return frozenset(
        g for g in bits.mask if g != domain.target and bits.support(g) >= sigma
    )


def effective_subsets(
    domain: LearningDomain, kappa: int, tau: float, kappa_cap: int = 2
) -> dict[frozenset[Entailment], tuple[float, float]]:
    """Qualifying exactly-``kappa``-element subsets with their (r_e, r_i)."""
    MiningParams(sigma=1.0, kappa=kappa, tau=tau, kappa_cap=kappa_cap)
    bits = _Bitsets(domain)
    target_mask = bits.mask.get(domain.target, 0)
    universe = sorted(g for g in bits.mask if g != domain.target)

    level: dict[frozenset[Entailment], tuple[float, float]] = {}
    for g in universe:
        s = bits.score((g,), target_mask)
        if s[0] + s[1] >= tau:
            level[frozenset((g,))] = s
    singles = sorted(g for fs in level for g in fs)
    size = 1
    while size < kappa:
        nxt: dict[frozenset[Entailment], tuple[float, float]] = {}
        seen: set[frozenset[Entailment]] = set()
        for base in level:
            for g in singles:
                if g in base:
                    continue
                cand = base | {g}
                if cand in seen:
                    continue
                seen.add(cand)
                if any(cand - {h} not in level for h in cand):
                    continue
                s = bits.score(cand, target_mask)
                if s[0] + s[1] >= tau:
                    nxt[cand] = s
        level = nxt
        size += 1
    return level


def root_individuals(root_entailments, fresh: frozenset[str] = frozenset()) -> tuple[str, ...]:
    inds: set[str] = set()
    for g in root_entailments:
        inds.update(a for a in g.args if a not in fresh)
    return tuple(sorted(inds))


def mine_roots(domain: LearningDomain, params: MiningParams) -> RootSet:
    freq = frequent_entailments(domain, params.sigma)
    eff = effective_subsets(domain, params.kappa, params.tau, params.kappa_cap)
    roots = frozenset(freq) | frozenset(itertools.chain.from_iterable(eff))
    return RootSet(
        domain_id=domain.id,
        params=params,
        frequent=freq,
        effective=eff,
        root_entailments=roots,
        root_individuals=root_individuals(roots, domain.tbox.fresh),
    )
