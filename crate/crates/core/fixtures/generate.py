#!/usr/bin/env python3
"""Regenerates the bundled end-to-end fixture in fixtures/mini/.

Deterministic: the same script always writes the same bytes. Run from any
directory; output goes next to this file.
"""

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

OUT = Path(__file__).resolve().parent / "mini"
RNG = random.Random(20230415)
HORIZON = datetime(2013, 1, 1, tzinfo=timezone.utc)

TABOO_TERMS = ["hell", "death", "penis", "prostitution", "urine", "drunkenness",
               "menstruation", "vagina", "piss", "sex"]
COMPARISON_TERMS = ["river", "bread", "mountain", "castle", "violin", "harbor", "orchard",
                    "copper", "lantern", "glacier", "meadow", "anchor", "kettle", "harp",
                    "pebble", "willow", "fiddle", "mount", "orbit", "circuit", "ferry"]
FILLER = ["small", "old", "common", "large", "kind", "object", "place", "thing", "part",
          "certain", "form", "act", "state", "matter", "quiet", "bright", "heavy", "round"]
EUPH_FRAMES = ["A {f} way of referring to {t}.", "{t}, said {f}ly.", "The {f} {g} of {t}.",
               "To speak of {t} in a {f} manner.", "Polite word for {t} or {g} {t}."]
PLAIN_FRAMES = ["A {f} {c} near the {g}.", "The {c} of a {f} {g}.", "{c} made from {f} {g}.",
                "Any {f} {c}.", "A {c} or {g} {c2}."]


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------- dictionary

def dictionary():
    lines = []
    senses = 0

    def entry(word, glosses, tags=(), lang="English", code="en"):
        nonlocal senses
        senses += len(glosses)
        obj = {"word": word, "lang": lang, "lang_code": code,
               "senses": [{"glosses": [g], "tags": list(tags)} for g in glosses]}
        lines.append(json.dumps(obj, sort_keys=True))

    for i in range(90):
        t = TABOO_TERMS[i % len(TABOO_TERMS)]
        frame = EUPH_FRAMES[i % len(EUPH_FRAMES)]
        gloss = frame.format(t=t, f=RNG.choice(FILLER), g=RNG.choice(FILLER))
        entry(f"{t} phrase {i}", [gloss], tags=["euphemistic", "informal"])
    for i in range(400):
        c = COMPARISON_TERMS[i % len(COMPARISON_TERMS)]
        c2 = RNG.choice(COMPARISON_TERMS)
        frame = PLAIN_FRAMES[i % len(PLAIN_FRAMES)]
        gloss = frame.format(c=c, c2=c2, f=RNG.choice(FILLER), g=RNG.choice(FILLER))
        entry(f"{c} word {i}", [gloss])
    # taboo words also appear, less often, outside euphemisms
    for i in range(12):
        t = TABOO_TERMS[i % len(TABOO_TERMS)]
        entry(f"clinical {i}", [f"The {RNG.choice(FILLER)} study of {t} and {RNG.choice(COMPARISON_TERMS)}."])
    # filtered out: redirect-style glosses, other languages, duplicates
    entry("pee", ["Synonym of piss."], tags=["euphemistic"])
    entry("hölle", ["Hell."], tags=["euphemistic"], lang="German", code="de")
    entry("river phrase", ["Alternative form of river."])
    entry("pass away", ["To die; a gentle word for death."], tags=["euphemistic"])
    entry("pass away", ["To die; a gentle word for death."], tags=["euphemistic"])
    lines.insert(37, '{"word": "broken", "senses": [')
    lines.insert(200, "not json at all")
    (OUT / "dictionary.jsonl").write_text("\n".join(lines) + "\n")
    return senses


# ---------------------------------------------------------------- pages

ACCOUNTS = ["Quillon Varga", "Zephyrine Oduya", "Marlowe Ashgrove", "Tamsin Kettleby",
            "Orrin Blackwood", "Isaura Pemberton", "Caspian Thorne", "Wrenna Holloway",
            "Fenwick Aldous", "Odalys Ferrante", "Lucan Merriweather", "Saoirse Delacroix",
            "Bram Ostrowski", "Junia Calloway", "Thaddeus Winterbourne", "Elowen Marchetti",
            "Hollis Vantongeren", "Perpetua Nakashima", "Ignatius Farrow", "Rosalind Quarry",
            "Cyprian Lindqvist", "Maelis Okonkwo", "Evander Pritchard", "Sable Montague"]
BOTS = ["ArchiveTidyBot", "CiteFormatterBot"]
IPS = [f"192.0.2.{i}" for i in range(1, 60)] + [f"198.51.100.{i}" for i in range(1, 40)]

# title -> ground-truth sample
ARTICLES = {
    "Hell": "taboo", "Death": "taboo", "Penis": "taboo", "Prostitution": "taboo",
    "Urine": "taboo", "Drunkenness": "taboo", "Menstruation": "taboo", "Vagina": "taboo",
    "Being Bobby Brown": "taboo",
    "River": "comparison", "Bread": "comparison", "Mountain": "comparison", "Castle": "comparison",
    "Violin": "comparison", "Harbor": "comparison", "Orchard": "comparison", "Copper": "comparison",
    "Lantern": "comparison", "Glacier": "comparison", "Meadow": "comparison", "Anchor": "comparison",
    "Kettle": "comparison", "Harp": "comparison", "Pebble": "comparison", "Willow": "comparison",
    "Zanzibar Quartet": "excluded", "Quillfeather Press": "excluded", "Ostrogoth Almanac": "excluded",
    "List of mountains": "excluded",
}
# redirect title -> target
REDIRECTS = {
    "Hell to the no": "Being Bobby Brown",
    "Piss": "Urine#Slang",
    "Mount": "List of mountains",
    "Orbit": "Circuit",
    "Circuit": "Orbit",
    "Ferry": "Nonexistent boat",
    "Fiddle": "Violin",
}
DISAMBIGUATION = ["Sex"]
USER_PAGES = {"Quillon Varga": 2005, "Marlowe Ashgrove": 2006, "Isaura Pemberton": 2011,
              "Bram Ostrowski": 2007, "Saoirse Delacroix": 2014, "Sable Montague": 2004}


def history(sample, start):
    """Synthetic revisions: (timestamp, contributor, checksum)."""
    if sample == "taboo":
        n, anon, revert = RNG.randint(45, 80), 0.38, 0.07
    else:
        n, anon, revert = RNG.randint(10, 28), 0.22, 0.02
    t = start
    states = []
    revs = []
    for _ in range(n):
        t += timedelta(days=RNG.uniform(3, 3 * 365 / n), seconds=RNG.randint(0, 86399))
        r = RNG.random()
        if r < 0.04:
            who = ("bot", RNG.choice(BOTS))
        elif r < 0.06:
            who = ("suppressed", None)
        elif r < 0.06 + anon:
            who = ("ip", RNG.choice(IPS))
        else:
            who = ("user", RNG.choice(ACCOUNTS[:16] if sample == "taboo" else ACCOUNTS[8:]))
        if states and RNG.random() < revert:
            back = RNG.randint(1, min(len(states), 10))
            checksum = states[-back - 1] if len(states) > back else "%040x" % RNG.getrandbits(160)
        else:
            checksum = "%040x" % RNG.getrandbits(160)
        states.append(checksum)
        revs.append((t, who, checksum))
    return revs


def contributor_xml(who):
    kind, name = who
    if kind == "suppressed":
        return '      <contributor deleted="deleted" />'
    if kind == "ip":
        return f"      <contributor>\n        <ip>{name}</ip>\n      </contributor>"
    uid = 1000 + (ACCOUNTS + BOTS).index(name)
    return (f"      <contributor>\n        <username>{escape(name)}</username>\n"
            f"        <id>{uid}</id>\n      </contributor>")


def pages():
    page_id = 100
    all_pages = []  # (page_id, ns, title, redirect, revisions, text)

    def add(ns, title, redirect, revs, text=""):
        nonlocal page_id
        page_id += 1
        all_pages.append((page_id, ns, title, redirect, revs, text))
        return page_id

    one_edit = lambda year: [(datetime(year, 3, 1, 12, tzinfo=timezone.utc), ("user", "Quillon Varga"), "%040x" % RNG.getrandbits(160))]
    for title, sample in ARTICLES.items():
        start = datetime(RNG.randint(2003, 2007), RNG.randint(1, 12), 1, tzinfo=timezone.utc)
        if title == "Pebble":
            revs = [(datetime(2013, 2, 1, tzinfo=timezone.utc) + timedelta(days=i), ("user", "Rosalind Quarry"), "%040x" % i) for i in range(3)]
        elif sample == "excluded":
            revs = one_edit(2009)
        else:
            revs = history(sample, start)
            if title == "Hell":
                # edits after the observation window are ignored
                revs.append((datetime(2013, 6, 1, tzinfo=timezone.utc), ("ip", "192.0.2.250"), "f" * 40))
        add(0, title, None, revs)
    for title in DISAMBIGUATION:
        add(0, title, None, one_edit(2008), "'''Sex''' may refer to:\n{{disambiguation}}")
    for title, target in REDIRECTS.items():
        add(0, title, target, one_edit(2010), f"#REDIRECT [[{target}]]")
    for name, year in USER_PAGES.items():
        add(2, f"User:{name}", None, [(datetime(year, 5, 5, tzinfo=timezone.utc), ("user", name), "%040x" % RNG.getrandbits(160))])
    add(2, "User:Quillon Varga/sandbox", None, one_edit(2003))

    # revision ids increase with time across the whole wiki
    flat = sorted((r[0], pid, i) for pid, _, _, _, revs, _ in all_pages for i, r in enumerate(revs))
    rev_id = {(pid, i): 50000 + k for k, (_, pid, i) in enumerate(flat)}

    out = ['<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" version="0.10" xml:lang="en">',
           "  <siteinfo>\n    <sitename>Fixturepedia</sitename>\n  </siteinfo>"]
    for pid, ns, title, redirect, revs, text in all_pages:
        out.append("  <page>")
        out.append(f"    <title>{escape(title)}</title>")
        out.append(f"    <ns>{ns}</ns>")
        out.append(f"    <id>{pid}</id>")
        if redirect:
            out.append(f"    <redirect title={quoteattr(redirect)} />")
        for i, (t, who, checksum) in enumerate(revs):
            out.append("    <revision>")
            out.append(f"      <id>{rev_id[(pid, i)]}</id>")
            out.append(f"      <timestamp>{iso(t)}</timestamp>")
            out.append(contributor_xml(who))
            body = text if i == len(revs) - 1 else ""
            out.append(f'      <text xml:space="preserve" bytes="{len(body)}">{escape(body)}</text>')
            out.append(f"      <sha1>{checksum}</sha1>")
            out.append("    </revision>")
        out.append("  </page>")
    out.append("</mediawiki>")
    (OUT / "history.xml").write_text("\n".join(out) + "\n")
    return all_pages, rev_id


# ---------------------------------------------------------------- side inputs

def side_inputs(all_pages, rev_id):
    ids = {title: pid for pid, ns, title, *_ in all_pages if ns == 0}
    (OUT / "bots.txt").write_text("# known bots\nUser:ArchiveTidyBot\nCiteFormatterBot\n")

    events = [
        {"page_id": ids["Hell"], "timestamp": "2006-02-01T00:00:00Z", "action": "protect", "level": "edit=sysop"},
        {"page_id": ids["Hell"], "timestamp": "2006-02-01T00:00:00Z", "action": "protect", "level": "edit=sysop"},
        {"page_id": ids["Death"], "timestamp": "2009-01-01T00:00:00Z", "action": "protect",
         "level": "[edit=autoconfirmed] (indefinite) [move=sysop] (indefinite)", "expiry": "2010-01-01T00:00:00Z"},
        {"page_id": ids["Penis"], "timestamp": "2010-01-01T00:00:00Z", "action": "protect", "level": "edit=autoconfirmed:move=autoconfirmed"},
        {"page_id": ids["Penis"], "timestamp": "2011-01-01T00:00:00Z", "action": "modify", "level": "edit=sysop:move=sysop"},
        {"page_id": ids["Penis"], "timestamp": "2012-01-01T00:00:00Z", "action": "unprotect"},
        {"page_id": ids["Vagina"], "timestamp": "2008-07-01T00:00:00Z", "action": "protect", "level": "edit=autoconfirmed"},
        {"page_id": ids["Castle"], "timestamp": "2009-05-01T00:00:00Z", "action": "protect", "level": "move=sysop"},
        {"title": "River", "timestamp": "2011-06-01T00:00:00Z", "action": "protect", "level": "edit=autoconfirmed"},
        {"title": "River", "timestamp": "2012-06-01T00:00:00Z", "action": "unprotect"},
        {"page_id": ids["Bread"], "timestamp": "2010-03-03T00:00:00Z", "action": "unprotect"},
        {"page_id": ids["Meadow"], "timestamp": "2006-01-01T00:00:00Z", "action": "protect", "level": "edit=autoconfirmed"},
        {"page_id": ids["Meadow"], "timestamp": "2009-01-01T00:00:00Z", "action": "unprotect"},
        {"page_id": ids["Zanzibar Quartet"], "timestamp": "2009-01-01T00:00:00Z", "action": "protect", "level": "edit=sysop"},
    ]
    (OUT / "protection.jsonl").write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in events))

    rows = ["page\tmonth\tviews"]
    for title, sample in ARTICLES.items():
        if title == "Anchor":
            continue
        base = 40000 if sample == "taboo" else 6000
        key = str(ids[title]) if title in ("Harp", "Death") else title
        for y in (2011, 2012):
            for m in range(1, 13):
                rows.append(f"{key}\t{y}-{m:02d}\t{int(base * RNG.lognormvariate(0, 0.8))}")
    rows.append("Hell\t2012-12\t15")  # duplicate row, summed
    (OUT / "pageviews.tsv").write_text("\n".join(rows) + "\n")

    cache = OUT / "cache"
    cache.mkdir(exist_ok=True)
    classes = ["Stub", "Start", "C", "B", "GA", "FA"]
    quality, damaging = [], []
    names = set()
    for pid, ns, title, redirect, revs, _ in all_pages:
        if ns != 0 or redirect:
            continue
        sample = ARTICLES.get(title, "excluded")
        level = 1.0
        for i, (t, who, _) in enumerate(revs):
            rid = rev_id[(pid, i)]
            if who[0] == "user" and who[1] not in BOTS:
                names.add(who[1])
            level = min(5.0, level + RNG.uniform(0, 0.12 if sample == "taboo" else 0.08))
            weights = [pow(2.718281828, -abs(k - level)) for k in range(6)]
            s = sum(weights)
            probs = {c: round(w / s, 6) for c, w in zip(classes, weights)}
            pred = max(probs, key=probs.get)
            if rid % 97 != 5:
                body = {"enwiki": {"scores": {str(rid): {"articlequality": {"score": {"prediction": pred, "probability": probs}}}}}}
                quality.append((f"articlequality:{rid}", body))
            p = round(RNG.betavariate(2, 6 if sample == "taboo" else 9), 6)
            if rid % 89 != 7:
                body = {"enwiki": {"scores": {str(rid): {"damaging": {"score": {"prediction": p >= 0.5, "probability": {"false": round(1 - p, 6), "true": p}}}}}}}
                damaging.append((f"damaging:{rid}", body))

    users = []
    for k, name in enumerate(sorted(names)):
        if name == "Lucan Merriweather":
            user = {"name": name, "missing": True}
        else:
            gender = ["female", "male", "unknown", "unknown"][k % 4]
            user = {"userid": 1000 + k, "name": name, "gender": gender, "emailable": k % 3 != 0}
        users.append((f"user:{name}", {"batchcomplete": True, "query": {"users": [user]}}))

    cats = []
    for title, sample in ARTICLES.items():
        if sample == "excluded":
            continue
        page_cats = ["Articles with short description", f"{title} topics"]
        talk = ["WikiProject Sexology and sexuality articles"] if sample == "taboo" and title not in ("Hell", "Drunkenness") else []
        if title == "Harp":
            talk = ["WikiProject Sexology and Sexuality articles"]
        for page, cs in ((title, page_cats), (f"Talk:{title}", talk)):
            p = {"pageid": ids[title], "ns": 1 if page.startswith("Talk:") else 0, "title": page}
            if cs:
                p["categories"] = [{"ns": 14, "title": f"Category:{c}"} for c in cs]
            cats.append((f"categories:{page}", {"batchcomplete": True, "query": {"pages": [p]}}))

    for name, entries in (("quality", quality), ("damaging", damaging), ("users", users), ("categories", cats)):
        entries.sort(key=lambda e: e[0])
        text = "".join(json.dumps({"key": k, "body": json.dumps(b, sort_keys=True)}, sort_keys=True) + "\n" for k, b in entries)
        (cache / f"{name}.jsonl").write_text(text)

    truth = ["title\tpage_id\tsample"]
    for title, sample in ARTICLES.items():
        if sample != "excluded":
            truth.append(f"{title}\t{ids[title]}\t{sample}")
    (OUT / "truth.tsv").write_text("\n".join(truth) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    n = dictionary()
    all_pages, rev_id = pages()
    side_inputs(all_pages, rev_id)
    n_rev = sum(len(p[4]) for p in all_pages)
    print(f"{n} senses, {len(all_pages)} pages, {n_rev} revisions")


if __name__ == "__main__":
    main()
