#!/usr/bin/env python3
"""Regenerates the scripted mock sessions under tests/fixtures.

Run from anywhere: python3 tests/fixtures/generate.py
Outputs are committed; rerunning must produce identical files.
"""
import json
import shutil
import struct
import zlib
from pathlib import Path

HERE = Path(__file__).resolve().parent
MAGICIAN = HERE / "magician"

DESIGN_TYPE = "book cover"
BRIEF = ("Cartoon-style book cover of a magician, highlighting a book full of magic tricks, "
         "focusing on the magician in the center, in a colorful comic book style.")


def png(width, height, rgb):
    """Minimal solid-colour RGB PNG, written without third-party libraries."""
    raw = b"".join(b"\x00" + bytes(rgb) * width for _ in range(height))

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw, 9))
            + chunk(b"IEND", b""))


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_bytes(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


NODES = [
    ("n1", "Function", "Cover for a cartoon-style book of magic tricks that invites readers to learn and perform them"),
    ("n2", "SubjectiveImpression", "Playful, whimsical, energetic and magical mood"),
    ("n3", "ArtStyle", "Cartoon illustration with comic book aesthetic bold outlines dynamic poses, vector style"),
    ("n4", "Narratives", "Magic performance: a magician presenting tricks on stage"),
    ("n5", "Motifs", "Main motif: magician figure centered, wearing a top hat and cape, performing a trick"),
    ("n6", "Motifs", "Secondary motifs: magic props such as top hat, wand, rabbit and playing cards, with stars and sparkles"),
    ("n7", "Composition", "Centered magician with props in a dynamic arrangement around the figure"),
    ("n8", "Typography", "bold, dynamic sans-serif with outline for a comic-style title"),
    ("n9", "Colors", "Bright saturated colors (red, blue, yellow, green, purple, pink, black, white) with contrasting costume and background"),
    ("n10", "Textures", "Flat vector textures with sparkly effects"),
]

EDGES = [
    ("n3", "n1", "A cartoon look signals a fun, approachable trick book"),
    ("n3", "n2", "The comic aesthetic carries the playful mood"),
    ("n4", "n2", "A stage show evokes wonder and energy"),
    ("n5", "n4", "The performing magician embodies the magic show"),
    ("n6", "n4", "Props are the recognizable tools of a magic performance"),
    ("n7", "n5", "Centering makes the magician clearly identifiable"),
    ("n8", "n3", "Outlined comic lettering matches the comic book style"),
    ("n9", "n8", "A high-contrast palette keeps the outlined title readable"),
    ("n9", "n2", "Vibrant colors reinforce a playful mood"),
    ("n10", "n3", "Flat vector surfaces are typical of the cartoon style"),
]

# Evidence per node: brief quotes and image indices. The secondary-motifs node
# draws on several images; every image is cited by at least one node.
EVIDENCE = {
    "n1": [{"brief_quote": "book cover of a magician"}, {"brief_quote": "a book full of magic tricks"}],
    "n2": [{"image": 0}, {"image": 2}],
    "n3": [{"brief_quote": "Cartoon-style"}, {"brief_quote": "comic book style"}, {"image": 0}, {"image": 1}],
    "n4": [{"brief_quote": "a book full of magic tricks"}, {"image": 3}],
    "n5": [{"brief_quote": "a magician"}, {"image": 0}, {"image": 4}],
    "n6": [{"image": 0}, {"image": 1}, {"image": 3}],
    "n7": [{"brief_quote": "focusing on the magician in the center"}, {"image": 4}],
    "n8": [{"image": 2}],
    "n9": [{"brief_quote": "colorful"}, {"image": 2}, {"image": 4}],
    "n10": [{"image": 1}],
}

COVERAGE = {
    "Cartoon-style": "n3",
    "book cover of a magician": "n1",
    "a book full of magic tricks": "n4",
    "focusing on the magician in the center": "n7",
    "colorful": "n9",
    "comic book style": "n3",
}

IMAGE_COLOURS = [(230, 40, 60), (40, 90, 220), (250, 210, 30), (60, 170, 80), (140, 60, 180)]

IMAGE_ANALYSES = [
    {"nodes": [{"id": "a", "type": "Motifs", "description": "Magician in a top hat pulling a rabbit from the hat"},
               {"id": "b", "type": "ArtStyle", "description": "Cartoon illustration with thick outlines"},
               {"id": "c", "type": "SubjectiveImpression", "description": "Playful and surprising"}],
     "edges": [{"source": "b", "target": "c", "reason": "Cartoon rendering feels light-hearted"}]},
    {"nodes": [{"id": "a", "type": "Motifs", "description": "Scattered playing cards and a magic wand"},
               {"id": "b", "type": "Textures", "description": "Flat vector fills with sparkle accents"}],
     "edges": []},
    {"nodes": [{"id": "a", "type": "Colors", "description": "Saturated primaries on a dark background"},
               {"id": "b", "type": "Typography", "description": "Chunky outlined comic lettering"}],
     "edges": [{"source": "a", "target": "b", "reason": "Contrast keeps the lettering readable"}]},
    # The model wraps this one in prose and a code fence; parsing must still succeed.
    "Here is the analysis you asked for:\n```json\n" + json.dumps(
        {"nodes": [{"id": "a", "type": "Narratives", "description": "A stage show with a curtain and spotlight"},
                   {"id": "b", "type": "Motifs", "description": "Stars and sparkles around a wand"}],
         "edges": [{"source": "b", "target": "a", "reason": "Sparkles signal that magic is happening"}]},
        indent=2) + "\n```\n",
    {"nodes": [{"id": "a", "type": "Composition", "description": "Single central figure with symmetrical props"},
               {"id": "b", "type": "Colors", "description": "Purple and yellow complementary pair"}],
     "edges": []},
]


def synthesis_output():
    return {
        "nodes": [{"id": i, "type": t, "description": d, "evidence": EVIDENCE[i]} for i, t, d in NODES],
        "edges": [{"source": s, "target": t, "reason": r} for s, t, r in EDGES],
        "coverage": COVERAGE,
    }


def build_magician():
    if MAGICIAN.exists():
        shutil.rmtree(MAGICIAN)
    write_json(MAGICIAN / "project.json", {"design_type": DESIGN_TYPE, "brief": BRIEF})
    for i, rgb in enumerate(IMAGE_COLOURS):
        write_bytes(MAGICIAN / "inputs" / f"ref{i}.png", png(4, 4, rgb))

    r = MAGICIAN / "responses"
    for i, analysis in enumerate(IMAGE_ANALYSES):
        if isinstance(analysis, str):
            write_text(r / "image_analysis" / f"{i}.resp.txt", analysis)
        else:
            write_json(r / "image_analysis" / f"{i}.resp.json", analysis)
    write_json(r / "synthesis" / "0.resp.json", synthesis_output())

    # 0: "more sparkles" refines the existing secondary-motifs node.
    # 1: "make the colors blue" targets the palette node (locked in the tests).
    write_json(r / "interpret" / "0.resp.json", {
        "edits": [{"node": "n6", "description": "Secondary motifs: magic props such as top hat, wand, rabbit and "
                                                "playing cards, surrounded by abundant stars and sparkles"}],
        "additions": []})
    write_json(r / "consistency" / "0.resp.json", {"edits": [], "additions": []})
    write_json(r / "interpret" / "1.resp.json", {
        "edits": [{"node": "n9", "description": "Cool palette dominated by shades of blue"}],
        "additions": []})
    write_json(r / "consistency" / "1.resp.json", {
        "edits": [{"node": "n9", "description": "Cool palette dominated by shades of blue with white highlights"}],
        "additions": []})

    write_json(r / "question" / "0.resp.json", {
        "text": "What feeling should a reader get at first glance, and should the cover carry any words besides "
                "the title?",
        "target_types": ["SubjectiveImpression", "VerbalElements"]})

    write_bytes(r / "generate" / "0.resp.png", png(8, 8, (200, 60, 160)))
    write_json(r / "gap" / "0.resp.json", {"verdicts": [
        {"node": "n2", "satisfied": True},
        {"node": "n3", "satisfied": True},
        {"node": "n4", "satisfied": True},
        {"node": "n5", "satisfied": True},
        {"node": "n6", "satisfied": True},
        {"node": "n7", "satisfied": True},
        {"node": "n8", "satisfied": False, "gap": "The title uses a thin serif face without an outline",
         "instruction": "Set the title in a bold sans-serif with a dark comic-style outline"},
        {"node": "n9", "satisfied": True},
        {"node": "n10", "satisfied": True}]})
    write_bytes(r / "update" / "0.resp.png", png(8, 8, (190, 70, 150)))
    write_json(r / "apply" / "0.resp.json", {
        "instruction": "Add more sparkles and stars around the wand and the magician's hands"})
    write_bytes(r / "apply" / "1.resp.png", png(8, 8, (210, 80, 170)))


def build_magician_graph():
    doc = {
        "version": 1,
        "nodes": [{"id": i, "type": t, "description": d} for i, t, d in NODES],
        "edges": [{"source": s, "target": t, "reason": r} for s, t, r in EDGES],
    }
    write_json(HERE / "magician.cgraph.json", doc)


if __name__ == "__main__":
    build_magician()
    build_magician_graph()
