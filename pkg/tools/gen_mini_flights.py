"""Generate the mini_flights corpus (deterministic, seed below).

Eight single-route flight-departure domains in two families.  Family A
(east-coast origins ORD/JFK) suffers snow-family weather and congestion
delays: an LSO is delayed when the weather is snowy or the preceding
departure was delayed.  Family B (west-coast origins LAX/SFO/SEA) suffers
fog-family weather and the congestion effect is inverted: quiet runways
mean rebooked long-haul loads, so an LSO is delayed when the weather is
foggy or the preceding departure was NOT delayed.  Labels carry 8% noise.

Planted structure the pipeline should find:
  * EastOriDep(d) + BigCarDep(d) is a core context exactly covering the
    family-A domains (B3 also flies a big carrier, so the two atoms sit in
    different synchronization clusters).
  * Cross-family pairs share fewer entailments (higher d_obs) and transfer
    worse, so d_obs should correlate negatively with fti.
  * kb.txt lists a song before the LAX airport and a person before the JFK
    airport; constraints make the homonyms inconsistent so imports must
    reject them and accept the airports.
  * hasAltApt(d PDX) is too rare to survive root mining, so root-gated
    imports stay a strict subset of importing every individual.
"""

from __future__ import annotations

import shutil
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

OUT = REPO / "corpora" / "mini_flights"
SEED = 20260301

TBOX = """\
# Shared flight-departure vocabulary.
SubClassOf(Departure Dep)
SubClassOf(HeavySnow Snow)
SubClassOf(Blizzard Snow)
SubClassOf(Fog LowVis)
SubClassOf(Mist LowVis)
SubClassOf(EastApt Airport)
SubClassOf(WestApt Airport)
SubClassOf(Airport Location)
SubClassOf(BigCar Carrier)
SubClassOf(SmallCar Carrier)
SubClassOf(And(Dep Some(hasWea Snow)) SnowyDep)
SubClassOf(And(Dep Some(hasWea LowVis)) FoggyDep)
SubClassOf(And(Dep Some(hasOri EastApt)) EastOriDep)
SubClassOf(And(Dep Some(hasOri WestApt)) WestOriDep)
SubClassOf(And(Dep Some(hasCarrier BigCar)) BigCarDep)
SubClassOf(And(Dep Some(hasCarrier SmallCar)) SmallCarDep)
SubClassOf(And(Dep Some(hasRecDep DelayedDep)) CongestedDep)
SubClassOf(And(Dep Some(hasOri Nom(SEA))) SeattleDep)
SubRole(hasOri hasApt)
SubRole(hasDes hasApt)
RoleChain(hasCarrier carHub hasDepHub)
"""

CONSTRAINTS = """\
# Integrity constraints for knowledge-base imports.
SubClassOf(And(Location Song) Bottom)
SubClassOf(And(Location Person) Bottom)
"""

# entity id, labels, types, props; the two homonym traps come first so a
# naive first-match import would take them
KB = """\
SONG_LAX\tL.A. International Airport|LAX\tSong\twriter=Leanne_Scott;year=1971
APT_LAX\tLAX|Los Angeles International Airport\tCivilAirport\tiata=LAX;city=Los_Angeles
PER_JFK\tJFK|John F. Kennedy\tPerson\tborn=1917
APT_JFK\tJFK|John F. Kennedy International Airport\tCivilAirport\tiata=JFK;city=New_York
APT_ORD\tORD|O'Hare International Airport\tCivilAirport\tiata=ORD;city=Chicago
APT_SFO\tSFO|San Francisco International Airport\tCivilAirport\tiata=SFO;city=San_Francisco
APT_SEA\tSEA|Seattle-Tacoma International Airport\tCivilAirport\tiata=SEA;city=Seattle
APT_BOS\tBOS|Logan International Airport\tCivilAirport\tiata=BOS;city=Boston
APT_PDX\tPDX|Portland International Airport\tCivilAirport\tiata=PDX;city=Portland
CAR_DL\tDL|Delta Air Lines\tAirline\tcarHub=ATL
CAR_AA\tAA|American Airlines\tAirline\tcarHub=DFW
CAR_B6\tB6|JetBlue Airways\tAirline\tcarHub=JFK
CAR_WN\tWN|Southwest Airlines\tAirline\tcarHub=DAL
EQ_B738\tB738|Boeing 737-800\tAircraftModel\tmfr=Boeing
"""

KB_MAP = """\
# knowledge-base vocabulary -> corpus vocabulary
type CivilAirport -> Airport
type Airline -> Carrier
type Song -> Song
type Person -> Person
prop iata -> iataCode
prop city -> inCity
prop carHub -> carHub
drop-unmapped = true
"""

EAST = {"ORD", "JFK", "BOS"}
BIG = {"DL", "AA"}

# id, family, carrier, origin, destination, distance, first date
DOMAINS = [
    ("A1", "A", "DL", "ORD", "LAX", 1750, date(2026, 2, 2)),
    ("A2", "A", "AA", "ORD", "SFO", 1850, date(2026, 2, 5)),
    ("A3", "A", "DL", "JFK", "SFO", 2600, date(2026, 2, 8)),
    ("A4", "A", "AA", "JFK", "LAX", 2500, date(2026, 2, 11)),
    ("B1", "B", "B6", "LAX", "JFK", 2500, date(2026, 2, 3)),
    ("B2", "B", "WN", "SFO", "BOS", 2700, date(2026, 2, 6)),
    ("B3", "B", "DL", "SEA", "BOS", 2500, date(2026, 2, 9)),
    ("B4", "B", "B6", "SEA", "JFK", 2400, date(2026, 2, 12)),
]

WEATHER = {
    "A": [("HeavySnow", 0.20), ("Blizzard", 0.15), ("Clear", 0.40), ("Windy", 0.25)],
    "B": [("Fog", 0.20), ("Mist", 0.15), ("Clear", 0.40), ("Windy", 0.25)],
}
BAD = {"HeavySnow", "Blizzard", "Fog", "Mist"}
P_RECENT_DELAYED = 0.45
P_FLIP = 0.08
P_ALT_APT = 0.10
P_ALIAS = 0.15


def apt_class(code: str) -> str:
    return "EastApt" if code in EAST else "WestApt"


def car_class(code: str) -> str:
    return "BigCar" if code in BIG else "SmallCar"


def gen_lso(rng: np.random.Generator, fam, car, ori, des, dist):
    weas, probs = zip(*WEATHER[fam])
    wea = str(rng.choice(weas, p=probs))
    rec_delayed = rng.random() < P_RECENT_DELAYED
    if fam == "A":
        label = (wea in BAD) or rec_delayed
    else:
        label = (wea in BAD) or not rec_delayed
    if rng.random() < P_FLIP:
        label = not label
    lines = ["ClassAssert(Departure d)"]
    if rng.random() < P_ALIAS:
        lines += [f"RoleAssert(hasCarrier d car)", f"SameInd(car {car})"]
    else:
        lines.append(f"RoleAssert(hasCarrier d {car})")
    lines += [
        f"ClassAssert({car_class(car)} {car})",
        f"RoleAssert(hasOri d {ori})",
        f"ClassAssert({apt_class(ori)} {ori})",
        f"RoleAssert(hasDes d {des})",
        f"ClassAssert({apt_class(des)} {des})",
        f"RoleAssert(hasDist d {dist})",
        f"ClassAssert({wea} w)",
        "RoleAssert(hasWea d w)",
        "RoleAssert(hasRecDep d r)",
        "ClassAssert(Departure r)",
        # operational details: pure nuisance for the learner
        f"RoleAssert(hasGate d G{rng.integers(1, 13):02d})",
        f"RoleAssert(hasRwy d R{rng.integers(1, 5)})",
    ]
    # graded-support extras so tightening sigma thins the frequent set
    extras = {"meal": False, "equip": False, "status": False}
    if rng.random() < 0.915:
        lines.append("RoleAssert(hasMeal d Snack)")
        extras["meal"] = True
    if rng.random() < 0.945:
        lines.append("RoleAssert(hasEquip d B738)")
        extras["equip"] = True
    else:
        lines.append("RoleAssert(hasEquip d E175)")
    if rng.random() < 0.975:
        lines.append("RoleAssert(hasStatus d Scheduled)")
        extras["status"] = True
    if rec_delayed:
        lines.append("ClassAssert(DelayedDep r)")
    if rng.random() < P_ALT_APT:
        lines += ["RoleAssert(hasAltApt d PDX)", "ClassAssert(WestApt PDX)"]
    if label:
        lines.append("ClassAssert(DelayedDep d)")
    return lines, label, extras


def gen_domain(did, fam, car, ori, des, dist, day0, sub_seed):
    did_key = int.from_bytes(did.encode(), "big")
    rng = np.random.default_rng((SEED, did_key, sub_seed))
    n = int(rng.integers(48, 73))
    lsos, labels = [], []
    counts = {"meal": 0, "equip": 0, "status": 0}
    for i in range(n):
        lines, label, extras = gen_lso(rng, fam, car, ori, des, dist)
        lsos.append((i, lines))
        labels.append(label)
        for k, v in extras.items():
            counts[k] += v
    # chronological split must keep both classes on both sides
    cut = int(np.ceil(0.8 * n))
    head, tail = labels[:cut], labels[cut:]
    ok = (
        len(set(head)) == 2
        and len(set(tail)) == 2
        and sum(tail) >= 2
        and len(tail) - sum(tail) >= 2
        # realized supports must fall between consecutive sigma regimes so
        # each tightening strictly thins the frequent set
        and 0.90 <= counts["meal"] / n < 0.93
        and 0.93 <= counts["equip"] / n < 0.96
        and 0.96 <= counts["status"] / n < 0.99
    )
    return lsos, ok, n


def main():
    if OUT.exists():
        shutil.rmtree(OUT)
    (OUT / "domains").mkdir(parents=True)
    (OUT / "tbox.ont").write_text(TBOX)
    (OUT / "constraints.ont").write_text(CONSTRAINTS)
    (OUT / "kb.txt").write_text(KB)
    (OUT / "kb_map.txt").write_text(KB_MAP)

    for did, fam, car, ori, des, dist, day0 in DOMAINS:
        sub_seed = 0
        while True:
            lsos, ok, n = gen_domain(did, fam, car, ori, des, dist, day0, sub_seed)
            if ok:
                break
            sub_seed += 1
        ddir = OUT / "domains" / did
        (ddir / "lsos").mkdir(parents=True)
        (ddir / "manifest.txt").write_text(
            f"id = {did}\n"
            f"target = DelayedDep(d)\n"
            f"notes = {car} {ori}-{des}, family {fam}\n"
        )
        for i, lines in lsos:
            day = day0 + timedelta(days=i)
            body = "\n".join(lines)
            (ddir / "lsos" / f"lso-{i:03d}.ont").write_text(
                f"@ann dat {day.isoformat()}\n"
                f"@ann fam {fam}\n"
                f"@ann car {car}\n"
                f"{body}\n"
            )
        print(f"{did}: {n} LSOs (sub_seed {sub_seed})")

    # sanity: the loader must accept what we wrote
    from transferlens.corpus import load_corpus

    corpus = load_corpus(OUT)
    for d in corpus.domains:
        closures = d.lso_closures()
        assert not any(c.inconsistent for c in closures), d.id
        y = d.labels()
        print(f"{d.id}: {len(y)} LSOs, positive rate {y.mean():.2f}")
    print("corpus OK:", OUT)


if __name__ == "__main__":
    main()
