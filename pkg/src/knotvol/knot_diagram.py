"""Closed-braid knot diagrams, base points and the reduced graph G.

Conventions
-----------
A braid word is a sequence of nonzero ints; ``i`` is s_i and ``-i`` its
inverse.  Crossings are read top to bottom and strands flow downward.
Position p is the p-th strand slot (0 = leftmost).  The closure arcs run
up the right-hand side, so the diagram has one face left of position 0
and one face right of the last position.

At crossing c on level i (positions i, i+1) the four slots are TL, TR, BL,
BR.  For a positive crossing the over strand runs TR -> BL, for a
negative one TL -> BR.  Roles:

    alpha: incoming under edge    delta: outgoing under edge
    beta:  incoming over edge     gamma: outgoing over edge

The base point sits on the closure arc of position 0.  Face 0 is the
face left of position 0 and face n+1 the level-0 gap containing the
closure; these are the two faces touching the base point.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

SCHEMA = "knotvol.diagram/1"

ROLE_SLOTS = {
    1: {"alpha": "TL", "beta": "TR", "gamma": "BL", "delta": "BR"},
    -1: {"beta": "TL", "alpha": "TR", "delta": "BL", "gamma": "BR"},
}
# corner name -> (first role, second role); corner values are
# top=[e(a-b)], bot=[e(d-g)-1], bd=[e(b-d)], ga=[e(g-a)]
CORNER_ROLES = {"top": ("alpha", "beta"), "bot": ("delta", "gamma"),
                "bd": ("beta", "delta"), "ga": ("gamma", "alpha")}


class DiagramError(ValueError):
    """Invalid or unsupported diagram.  ``reason`` is a short machine code."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class CensusError(RuntimeError):
    """The reduced-graph census disagrees with the survival rules."""

    reason = "census"


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"^(-)?(?:s|σ|sigma)?_?(\d+)(\^-1|\^\{-1\}|')?$", re.IGNORECASE)


def parse_word(text) -> list[int]:
    """Braid text -> list of signed generator indices."""
    if isinstance(text, (list, tuple)):
        word = [int(g) for g in text]
    else:
        toks = [t for t in re.split(r"[\s,;]+", str(text).strip()) if t]
        word = []
        for t in toks:
            m = _TOKEN.match(t)
            if not m:
                raise DiagramError("syntax", f"cannot parse braid token {t!r}")
            g = int(m.group(2))
            inv = (m.group(1) is not None) != (m.group(3) is not None)
            word.append(-g if inv else g)
    if not word:
        raise DiagramError("empty", "empty braid word")
    if any(g == 0 for g in word):
        raise DiagramError("syntax", "generator index 0 is not allowed")
    return word


def format_word(word) -> str:
    return " ".join(("-" if g < 0 else "") + f"s{abs(g)}" for g in word)


def closure_components(word) -> int:
    s = max(abs(g) for g in word) + 1
    perm = list(range(s))
    for g in word:
        i = abs(g) - 1
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    seen, comps = set(), 0
    for p in range(s):
        if p in seen:
            continue
        comps += 1
        while p not in seen:
            seen.add(p)
            p = perm[p]
    return comps


# ---------------------------------------------------------------- diagram

@dataclass(frozen=True)
class Crossing:
    index: int
    level: int      # 0-based: crosses positions level, level+1
    sign: int


@dataclass(frozen=True)
class Edge:
    index: int
    position: int
    segment: int
    wrap: bool      # runs through the closure arc
    tail: int       # crossing it leaves (bottom slot)
    head: int       # crossing it enters (top slot)


@dataclass(frozen=True)
class Face:
    index: int
    kind: str       # "left", "right" or "gap"
    level: int = -1
    gap: int = -1


class KnotDiagram:
    """Planar combinatorics of a closed braid."""

    def __init__(self, word):
        word = parse_word(word)
        ncomp = closure_components(word)
        if ncomp != 1:
            raise DiagramError("components", f"closure has {ncomp} components; a knot is required")
        self.word = tuple(word)
        n = self.n = len(word)
        s = self.strands = max(abs(g) for g in word) + 1
        self.crossings = tuple(Crossing(c, abs(g) - 1, 1 if g > 0 else -1) for c, g in enumerate(word))
        self.sign = tuple(c.sign for c in self.crossings)
        lev = [c.level for c in self.crossings]
        touch = {p: [c for c in range(n) if p in (lev[c], lev[c] + 1)] for p in range(s)}
        self._touch = touch

        edges, eid = [], {}
        for p in range(s):
            k = len(touch[p])
            for t in range(k):
                eid[(p, t)] = len(edges)
                edges.append(Edge(len(edges), p, t, t == k - 1, touch[p][t], touch[p][(t + 1) % k]))
        self.edges = tuple(edges)

        slots = {}
        for c in range(n):
            i = lev[c]
            for p, side in ((i, "L"), (i + 1, "R")):
                t = touch[p].index(c)
                k = len(touch[p])
                slots[(c, "T" + side)] = eid[(p, (t - 1) % k)]
                slots[(c, "B" + side)] = eid[(p, t)]
        self.slots = slots
        self.roles = tuple({r: slots[(c, sl)] for r, sl in ROLE_SLOTS[self.sign[c]].items()} for c in range(n))

        # faces: 0 = left, gaps in (level, gap) order, right, then n+1 = level-0 closure gap
        levc = {i: [c for c in range(n) if lev[c] == i] for i in range(s - 1)}
        self._levc = levc
        raw = [("left", -1, -1)]
        for i in range(s - 1):
            for g in range(len(levc[i])):
                if i == 0 and g == len(levc[0]) - 1:
                    continue
                raw.append(("gap", i, g))
        raw.append(("right", -1, -1))
        raw.append(("gap", 0, len(levc[0]) - 1))
        self.faces = tuple(Face(k, *r) for k, r in enumerate(raw))
        fid = {(f.kind, f.level, f.gap): f.index for f in self.faces}
        self._fid = fid
        if len(self.faces) != n + 2:
            raise DiagramError("euler", "face count violates the Euler relation")

        def gap_at(i, h):
            cs = levc[i]
            for g in range(len(cs) - 1):
                if cs[g] < h < cs[g + 1]:
                    return fid[("gap", i, g)]
            return fid[("gap", i, len(cs) - 1)]

        self._gap_at = gap_at
        corner = {}
        for c in range(n):
            i = lev[c]
            cs = levc[i]
            t = cs.index(c)
            corner[(c, "top")] = fid[("gap", i, (t - 1) % len(cs))]
            corner[(c, "bot")] = fid[("gap", i, t)]
            corner[(c, "left")] = 0 if i == 0 else gap_at(i - 1, c)
            corner[(c, "right")] = fid[("right", -1, -1)] if i + 1 == s - 1 else gap_at(i + 1, c)
        self._corner = corner
        self.q_sets = tuple(tuple(corner[(c, k)] for k in ("top", "right", "bot", "left")) for c in range(n))
        self.r_sets = tuple(tuple(c for c in range(n) if f in self.q_sets[c]) for f in range(n + 2))

        # edge side faces (relative to the downward flow: left = smaller position)
        sides = []
        for e in self.edges:
            h = e.tail + 0.5
            lf = 0 if e.position == 0 else gap_at(e.position - 1, h)
            rf = fid[("right", -1, -1)] if e.position == s - 1 else gap_at(e.position, h)
            sides.append((lf, rf))
        self.edge_faces = tuple(sides)

        self.seq = self._traverse()
        # every closure arc turns the same way; position 0 carries the base point
        self.maxima_cw = tuple(p for p in range(1, s))
        self.maxima_ccw = ()

    def _traverse(self):
        """Pass sequence [(crossing, 'O'|'U')] from the base point along the orientation."""
        seq, seen = [], set()
        cur = (0, 0)
        while True:
            p, t = cur
            c = self._touch[p][t]
            if (c, p) in seen:
                break
            seen.add((c, p))
            i = self.crossings[c].level
            left = p == i
            over = (self.sign[c] > 0) != left
            seq.append((c, "O" if over else "U"))
            np_ = i + 1 if left else i
            t2 = self._touch[np_].index(c) + 1
            cur = (np_, t2 % len(self._touch[np_]))
        return tuple(seq)

    # corner helpers ------------------------------------------------------
    def corner_face(self, c: int, name: str) -> int:
        """Face of the corner 'top', 'bot', 'bd' or 'ga' at crossing c."""
        pos = self.sign[c] > 0
        if name in ("top", "bot"):
            return self._corner[(c, name)]
        if name == "bd":
            return self._corner[(c, "right" if pos else "left")]
        if name == "ga":
            return self._corner[(c, "left" if pos else "right")]
        raise KeyError(name)

    def label_offset(self, c: int, role: str) -> int:
        """-1 where a top slot sits on a closure arc away from position 0."""
        slot = ROLE_SLOTS[self.sign[c]][role]
        e = self.edges[self.roles[c][role]]
        return -1 if (e.wrap and slot[0] == "T" and e.position != 0) else 0

    @property
    def writhe(self) -> int:
        return sum(self.sign)

    @property
    def base_edge(self) -> int:
        return next(e.index for e in self.edges if e.position == 0 and e.wrap)

    def is_alternating(self) -> bool:
        kinds = [k for _, k in self.seq]
        return all(kinds[i] != kinds[(i + 1) % len(kinds)] for i in range(len(kinds)))

    def reducible_crossings(self) -> list[int]:
        return [c for c in range(self.n) if len(set(self.q_sets[c])) < 4]

    def cancelling_bigons(self) -> list[tuple[int, int]]:
        """Bigon faces bounded by two crossings of opposite sign (a cancelling pair)."""
        out = []
        lev = [c.level for c in self.crossings]
        for i, cs in self._levc.items():
            k = len(cs)
            if k < 2:
                continue
            for g in range(k):
                c1, c2 = cs[g], cs[(g + 1) % k]
                if self.sign[c1] == self.sign[c2]:
                    continue
                between = [c for c in range(self.n)
                           if lev[c] in (i - 1, i + 1) and ((c1 < c < c2) if c1 < c2 else (c > c1 or c < c2))]
                if not between:
                    out.append((c1, c2))
        return out

    def validate(self):
        bad = self.reducible_crossings()
        if bad:
            raise DiagramError("reducible", f"crossings {bad} touch fewer than four distinct faces; simplify the diagram")
        big = self.cancelling_bigons()
        if big:
            raise DiagramError("reducible", f"crossing pairs {big} cancel across a bigon; simplify the diagram")

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "word": list(self.word),
            "braid": format_word(self.word),
            "strands": self.strands,
            "crossings": [{"index": c.index, "level": c.level, "sign": c.sign} for c in self.crossings],
            "edges": [{"index": e.index, "position": e.position, "segment": e.segment, "wrap": e.wrap,
                       "tail": e.tail, "head": e.head} for e in self.edges],
            "faces": [{"index": f.index, "kind": f.kind, "level": f.level, "gap": f.gap} for f in self.faces],
            "roles": [dict(r) for r in self.roles],
            "q_sets": [list(q) for q in self.q_sets],
            "r_sets": [list(r) for r in self.r_sets],
            "maxima_cw": list(self.maxima_cw),
            "maxima_ccw": list(self.maxima_ccw),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "KnotDiagram":
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise DiagramError("schema", f"unsupported schema {data.get('schema')!r}")
        d = cls(data["word"])
        if d.to_dict() != data:
            raise DiagramError("schema", "serialized structure does not match its word")
        return d

    def __eq__(self, other):
        return isinstance(other, KnotDiagram) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.word)

    def __repr__(self):
        return f"KnotDiagram({format_word(self.word)!r})"


def parse_braid(text) -> KnotDiagram:
    return KnotDiagram(text)


# ---------------------------------------------------------------- PD codes

def braid_to_pd(d: KnotDiagram) -> list[tuple[int, int, int, int]]:
    """PD code (incoming under strand first, then counterclockwise).

    Edge labels are 1-based and consecutive along the orientation.
    """
    order = []
    c_in = {}
    # walk edges in orientation order starting at the base edge
    e = d.base_edge
    for _ in range(len(d.edges)):
        order.append(e)
        h = d.edges[e].head
        r = next(r for r, x in d.roles[h].items() if x == e)
        e = d.roles[h]["delta" if r == "alpha" else "gamma"]
    label = {e: k + 1 for k, e in enumerate(order)}
    pd = []
    for c in range(d.n):
        ro = d.roles[c]
        # counterclockwise seen from above, starting at incoming under
        if d.sign[c] > 0:
            # alpha TL, beta TR, gamma BL, delta BR; ccw from TL: TL, BL, BR, TR
            cyc = ["alpha", "gamma", "delta", "beta"]
        else:
            # alpha TR, beta TL, gamma BR, delta BL; ccw from TR: TR, TL, BL, BR
            cyc = ["alpha", "beta", "delta", "gamma"]
        pd.append(tuple(label[ro[r]] for r in cyc))
    return pd


def pd_faces(pd) -> list[list[tuple[int, int]]]:
    """Faces of a PD code by tracing corners; returns lists of (crossing, slot)."""
    # a face corner at crossing c between slot k and slot k+1 (ccw order)
    where = {}
    for c, x in enumerate(pd):
        for k, lab in enumerate(x):
            where.setdefault(lab, []).append((c, k))
    seen, faces = set(), []
    for c, x in enumerate(pd):
        for k in range(4):
            if (c, k) in seen:
                continue
            face, cur = [], (c, k)
            while cur not in seen:
                seen.add(cur)
                face.append(cur)
                cc, kk = cur
                lab = pd[cc][(kk + 1) % 4]
                other = [w for w in where[lab] if w != (cc, (kk + 1) % 4)]
                if not other:   # a loop edge at the same crossing
                    other = [w for w in where[lab] if w[1] != (kk + 1) % 4] or [(cc, (kk + 1) % 4)]
                oc, ok = other[0]
                cur = (oc, ok)
            faces.append(face)
    return faces


def parse_pd(text) -> list[tuple[int, int, int, int]]:
    """Parse 'X[1,5,2,4] X[3,1,4,6] ...' or '[[1,5,2,4],...]' style PD text."""
    nums = [int(t) for t in re.findall(r"-?\d+", str(text))]
    if not nums or len(nums) % 4:
        raise DiagramError("syntax", "PD code must contain 4 labels per crossing")
    pd = [tuple(nums[k:k + 4]) for k in range(0, len(nums), 4)]
    from collections import Counter
    cnt = Counter(nums)
    if any(v != 2 for v in cnt.values()):
        raise DiagramError("syntax", "every PD label must occur exactly twice")
    return pd


def pd_to_braid(pd) -> list[int]:
    """Recover a braid word from a PD code that is already a closed braid.

    Works when the Seifert circles are nested in a single chain (braid
    form).  Other diagrams are rejected; we do not apply Vogel moves.
    """
    n = len(pd)
    if n == 0:
        raise DiagramError("empty", "empty PD code")
    labels = sorted({l for x in pd for l in x})
    L = len(labels)
    if labels != list(range(1, L + 1)) or L != 2 * n:
        raise DiagramError("syntax", "PD labels must be 1..2n")
    nxt = lambda l: l % L + 1
    # orientation: in each crossing x[0] is incoming under, x[2] outgoing under;
    # the over strand is x[1]/x[3] with direction given by consecutive labels
    over_in, over_out = {}, {}
    for c, x in enumerate(pd):
        if nxt(x[0]) != x[2] and not (x[0] == L and x[2] == 1):
            raise DiagramError("syntax", f"crossing {c}: under strand labels are not consecutive")
        if nxt(x[3]) == x[1]:
            over_in[c], over_out[c], sgn = x[3], x[1], 1
        elif nxt(x[1]) == x[3]:
            over_in[c], over_out[c], sgn = x[1], x[3], -1
        else:
            raise DiagramError("syntax", f"crossing {c}: over strand labels are not consecutive")
        over_in[c] = (over_in[c], sgn)
    sign = {c: over_in[c][1] for c in range(n)}
    # Seifert smoothing: incoming label -> outgoing label at each crossing
    smooth = {}
    for c, x in enumerate(pd):
        oin = over_in[c][0]
        smooth[x[0]] = over_out[c]
        smooth[oin] = x[2]
    circ, seen = {}, set()
    ncirc = 0
    for l in labels:
        if l in seen:
            continue
        cur = l
        while cur not in seen:
            seen.add(cur)
            circ[cur] = ncirc
            cur = smooth.get(cur, nxt(cur))
        ncirc += 1
    # adjacency of Seifert circles through crossings
    adj = {}
    for c, x in enumerate(pd):
        a, b = circ[x[0]], circ[over_in[c][0]]
        if a == b:
            raise DiagramError("unsupported", "PD code is not in closed-braid form")
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    ends = [k for k, v in adj.items() if len(v) == 1]
    if ncirc == 1 or any(len(v) > 2 for v in adj.values()) or (ncirc > 2 and len(ends) != 2):
        raise DiagramError("unsupported", "Seifert circles do not form a single chain; convert to a braid first")
    chain = [min(ends)] if ncirc > 2 else [0]
    while len(chain) < ncirc:
        chain.append(next(k for k in adj[chain[-1]] if k not in chain))
    pos = {k: p for p, k in enumerate(chain)}
    level_of = {c: min(pos[circ[pd[c][0]]], pos[circ[over_in[c][0]]]) for c in range(n)}
    # each circle meets its crossings in the same cyclic (downward) order
    order_on = {}
    for k in chain:
        start = next(l for l in labels if circ[l] == k)
        cur, seq = start, []
        while True:
            seq.extend(c for c, x in enumerate(pd) if x[0] == cur or over_in[c][0] == cur)
            cur = smooth.get(cur, nxt(cur))
            if cur == start:
                break
        order_on[k] = seq
    # circle k (k >= 1) carries levels k-1 and k; merge level by level,
    # placing level-k crossings after the preceding level-(k-1) crossing
    best = list(order_on[chain[1]]) if ncirc > 2 else list(order_on[chain[0]])
    for k in range(2, ncirc):
        seq = order_on[chain[k]]
        pivot = next(c for c in seq if level_of[c] == k - 1)
        r = seq.index(pivot)
        seq = seq[r:] + seq[:r]
        merged, anchor = [], {}
        last = pivot
        for c in seq:
            if level_of[c] == k - 1:
                last = c
            else:
                anchor.setdefault(last, []).append(c)
        for c in best:
            merged.append(c)
            merged.extend(anchor.get(c, []))
        best = merged
    word = []
    for c in best:
        word.append((level_of[c] + 1) * sign[c])
    d = KnotDiagram(word)
    if sorted(len(f) for f in pd_faces(pd)) != sorted(len(f) for f in pd_faces(braid_to_pd(d))):
        raise DiagramError("unsupported", "recovered braid does not reproduce the PD faces")
    return word


# ---------------------------------------------------------------- base point

@dataclass(frozen=True)
class BasePointDecomposition:
    diagram: KnotDiagram          # presentation with the base point on position 0's closure arc
    rotation: int                 # cyclic shift applied to the input word
    flipped: bool                 # s_i -> s_{s-i} applied before rotating
    over_bridge: tuple            # crossings passed over right after the base point
    under_bridge: tuple           # crossings passed under right before it (listed backwards)
    x: int
    y: int
    boundary_faces: tuple = (0, -1)
    r_crossings: frozenset = frozenset()
    covered_faces: frozenset = frozenset()

    @property
    def bridge_set(self):
        return set(self.over_bridge) | set(self.under_bridge)

    @property
    def a(self) -> int:
        return len(self.over_bridge)

    @property
    def b(self) -> int:
        return self.diagram.n - len(self.under_bridge) + 1

    def labels(self) -> dict:
        """Crossing -> label in 1..n with bridge = {1..a} u {b..n}, x = a+1, y = b-1."""
        d = self.diagram
        lab = {c: k + 1 for k, c in enumerate(self.over_bridge)}
        lab[self.x] = self.a + 1
        for k, c in enumerate(self.under_bridge):
            lab[c] = d.n - k
        lab[self.y] = self.b - 1
        k = self.a + 2
        for c, _ in d.seq:
            if c not in lab:
                lab[c] = k
                k += 1
        return lab

    def to_dict(self) -> dict:
        return {"word": list(self.diagram.word), "rotation": self.rotation, "flipped": self.flipped,
                "a": self.a, "b": self.b, "over_bridge": list(self.over_bridge),
                "under_bridge": list(self.under_bridge), "x": self.x, "y": self.y,
                "boundary_faces": list(self.boundary_faces),
                "labels": {str(k): v for k, v in sorted(self.labels().items())}}


def _decompose(d: KnotDiagram):
    """Check the base point on position 0's closure arc; return fields or a reason."""
    seq = d.seq
    n = d.n
    if seq[0][1] != "O" or seq[-1][1] != "U":
        return None, "the base point must be followed by an over pass and preceded by an under pass"
    A, k = [], 0
    while seq[k][1] == "O":
        A.append(seq[k][0])
        k += 1
    x = seq[k][0]
    B, k = [], len(seq) - 1
    while seq[k][1] == "U":
        B.append(seq[k][0])
        k -= 1
    y = seq[k][0]
    if set(A) & set(B) or len(set(A)) < len(A) or len(set(B)) < len(B):
        return None, "bridge passes overlap"
    if x in A + B or y in A + B:
        return None, "x or y lies on the bridge"
    if x == y:
        return None, "x = y"
    R0, Rn1 = 0, n + 1
    Q = lambda c: set(d.q_sets[c])
    if Q(A[0]) & Q(B[0]) != {R0, Rn1}:
        return None, "first and last bridge crossings share a face other than 0, n+1"
    Rc = frozenset(c for c in range(n) if R0 in Q(c) or Rn1 in Q(c))
    if set(A + B) & Rc != {A[0], B[0]}:
        return None, "bridge meets faces 0, n+1 away from its ends"
    if Q(A[-1]) & Q(x) & Q(y) & Q(B[-1]):
        return None, "Q_a, Q_x, Q_y, Q_b share a face"
    covered = frozenset(f for c in A + B for f in d.q_sets[c])
    return dict(over_bridge=tuple(A), under_bridge=tuple(B), x=x, y=y, boundary_faces=(R0, Rn1),
                r_crossings=Rc, covered_faces=covered), "ok"


def flip_word(word):
    s = max(abs(g) for g in word) + 1
    return [(1 if g > 0 else -1) * (s - abs(g)) for g in word]


def base_point_candidates(d: KnotDiagram):
    """All (flipped, rotation, diagram, fields, reason) in search order."""
    out = []
    for flipped in (False, True):
        w = flip_word(d.word) if flipped else list(d.word)
        for r in range(len(w)):
            dd = KnotDiagram(w[r:] + w[:r])
            fields, why = _decompose(dd)
            out.append((flipped, r, dd, fields, why))
    return out


def choose_base_point(d: KnotDiagram) -> BasePointDecomposition:
    """First admissible base point, trying closure arcs along the word then the flipped word."""
    d.validate()
    reasons = []
    for flipped, r, dd, fields, why in base_point_candidates(d):
        if fields:
            return BasePointDecomposition(diagram=dd, rotation=r, flipped=flipped, **fields)
        reasons.append(why)
    raise DiagramError("no_base_point",
                       "no admissible base point on this diagram (" + "; ".join(sorted(set(reasons)))
                       + "); use an equivalent braid, e.g. via find_valid_presentation")


# ---------------------------------------------------------------- braid rewriting

def _relations(s):
    """Length-preserving braid rewrites on triples and pairs."""
    rules = []
    for i in range(1, s):
        for j in (i - 1, i + 1):
            if not 1 <= j < s:
                continue
            for e in (1, -1):
                rules.append(((e * i, e * j, e * i), (e * j, e * i, e * j)))
                for f in (1, -1):
                    # s_i^e s_j^f s_i^-e = s_j^-e s_i^f s_j^e
                    rules.append(((e * i, f * j, -e * i), (-e * j, f * i, e * j)))
        for j in range(1, s):
            if abs(i - j) >= 2:
                for e in (1, -1):
                    for f in (1, -1):
                        rules.append(((e * i, f * j), (f * j, e * i)))
    return rules


def _orbit(word, rules, cap):
    start = tuple(word)
    seen = {start}
    front = [start]
    while front and len(seen) < cap:
        nxt = []
        for w in front:
            n = len(w)
            for k in range(n):
                rot = w[k:] + w[:k]
                for a, b in rules:
                    if rot[:len(a)] == a:
                        v = b + rot[len(a):]
                        if v not in seen:
                            seen.add(v)
                            nxt.append(v)
        front = nxt
    return seen


def valid_presentations(word, max_conjugator: int = 2, orbit_cap: int = 20000):
    """Braid words with the same closure that admit a base point, in search order.

    Candidates are c w c^-1 for short conjugators c (with w or its
    s_i -> s_{s-i} flip), closed under braid relations and cyclic
    rotation.  Each move is a Markov conjugation or braid relation, so
    the closure is the same knot.  Yields (new_word, info).
    """
    word = parse_word(word)
    s = max(abs(g) for g in word) + 1
    gens = [g for i in range(1, s) for g in (i, -i)]
    rules = _relations(s)
    for L in range(0, max_conjugator + 1):
        for flipped in (False, True):
            w = flip_word(word) if flipped else list(word)
            for c in itertools.product(gens, repeat=L):
                ci = tuple(-g for g in reversed(c))
                cw = c + tuple(w) + ci
                for v in sorted(_orbit(cw, rules, orbit_cap)):
                    if any(v[k] == -v[(k + 1) % len(v)] for k in range(len(v))):
                        continue
                    try:
                        d = KnotDiagram(v)
                        bp = choose_base_point(d)
                    except DiagramError:
                        continue
                    yield list(v), {"conjugator": list(c), "flipped": flipped, "base_word": list(bp.diagram.word)}


def find_valid_presentation(word, max_conjugator: int = 2, orbit_cap: int = 20000):
    """First result of valid_presentations, or DiagramError."""
    for out in valid_presentations(word, max_conjugator, orbit_cap):
        return out
    raise DiagramError("no_base_point", "no equivalent presentation with an admissible base point within the search bounds")


# ---------------------------------------------------------------- reduced graph

@dataclass(frozen=True)
class CensusEntry:
    nu: int
    mu: int
    corner: str
    phi: int        # G-edge ids
    psi: int
    eps: int


@dataclass(frozen=True)
class EdgeEnd:
    crossing: int
    over: bool
    left: int | None    # G-edge id of the transversal edge on the left (None = empty slot)
    right: int | None


@dataclass
class ReducedGraph:
    bp: BasePointDecomposition
    arc_edges: tuple                 # diagram edges removed with the base arc
    edge_classes: list               # G-edge id -> list of diagram edges (in flow order)
    offsets: dict                    # diagram edge -> label offset relative to its G-edge
    boundary_edges: frozenset        # F
    m: int
    face_partition: list             # M_0..M_{m+1}
    base_face_class: tuple           # the G-face containing faces 0 and n+1
    edge_class: dict                 # phi -> eps(phi) for phi in E \ F
    tails: dict                      # phi -> EdgeEnd
    heads: dict                      # phi -> EdgeEnd
    census: list = field(default_factory=list)

    @property
    def diagram(self) -> KnotDiagram:
        return self.bp.diagram

    @property
    def n_edges(self) -> int:
        return len(self.edge_classes)

    @property
    def free_edges(self) -> list:
        return [g for g in range(self.n_edges) if g not in self.boundary_edges]

    def neighborhood(self, phi: int) -> dict:
        """alpha, beta at the tail (left, right); gamma, delta at the head (left, right)."""
        t, h = self.tails[phi], self.heads[phi]
        return {"alpha": t.left, "beta": t.right, "gamma": h.left, "delta": h.right}

    def census_counts(self) -> dict:
        out = {c: 0 for c in range(self.diagram.n)}
        for t in self.census:
            out[t.nu] += 1
        return out

    def expected_counts(self) -> dict:
        """Survival counts per crossing: 0 on the bridge, 1 or 2 at x, y, 3 next to faces 0, n+1, else 4."""
        bp, d = self.bp, self.diagram
        R = bp.r_crossings
        out = {}
        for c in range(d.n):
            if c in bp.bridge_set:
                out[c] = 0
            elif c in (bp.x, bp.y):
                out[c] = 1 if c in R else 2
            elif c in R:
                out[c] = 3
            else:
                out[c] = 4
        return out

    def edge_count_identity(self) -> bool:
        """The stated |E \\ F| = 2m+3."""
        return len(self.free_edges) == 2 * self.m + 3

    def to_dict(self) -> dict:
        return {
            "schema": "knotvol.reduced_graph/1",
            "base_point": self.bp.to_dict(),
            "m": self.m,
            "arc_edges": list(self.arc_edges),
            "edges": [list(es) for es in self.edge_classes],
            "boundary_edges": sorted(self.boundary_edges),
            "free_edges": self.free_edges,
            "edge_class": {str(k): v for k, v in sorted(self.edge_class.items())},
            "neighborhoods": {str(p): self.neighborhood(p) for p in self.free_edges},
            "face_partition": [list(x) for x in self.face_partition],
            "census": [{"nu": t.nu, "mu": t.mu, "corner": t.corner, "phi": t.phi, "psi": t.psi, "eps": t.eps}
                       for t in self.census],
        }


def arc_edges(d: KnotDiagram, bp: BasePointDecomposition) -> list[int]:
    """Diagram edges on the arc Y -> bridge -> base point -> bridge -> X."""
    seq = d.seq
    L = len(seq)
    a, bl = len(bp.over_bridge), len(bp.under_bridge)
    e_out = lambda c, t: d.roles[c]["gamma" if t == "O" else "delta"]
    e_in = lambda c, t: d.roles[c]["beta" if t == "O" else "alpha"]
    out = [e_out(*seq[k]) for k in range(L - bl - 1, L)]
    out += [e_in(*seq[k]) for k in range(0, a + 1)]
    return sorted(set(out))


def _uf(n):
    par = list(range(n))

    def find(x):
        while par[x] != x:
            par[x] = par[par[x]]
            x = par[x]
        return x

    def union(a, b):
        par[find(a)] = find(b)
    return find, union


def build_reduced_graph(d: KnotDiagram, bp: BasePointDecomposition) -> ReducedGraph:
    if d is not bp.diagram and d.word != bp.diagram.word:
        d = bp.diagram
    d = bp.diagram
    arc = set(arc_edges(d, bp))
    n = d.n
    A, B, x, y = bp.over_bridge, bp.under_bridge, bp.x, bp.y

    # G-edges: merge through bridge crossings, tracking label offsets
    # (value on edge e = value on its class + offset[e])
    succ = {}
    for c in A:
        succ[d.roles[c]["alpha"]] = (d.roles[c]["delta"], c, "alpha", "delta")
    for c in B:
        succ[d.roles[c]["beta"]] = (d.roles[c]["gamma"], c, "beta", "gamma")
    has_pred = {v[0] for v in succ.values()}
    classes, offsets = [], {}
    done = set()
    for e in range(len(d.edges)):
        if e in arc or e in done or e in has_pred:
            continue
        chain, off = [e], {e: 0}
        cur = e
        while cur in succ:
            nx_, c, r_in, r_out = succ[cur]
            # A: label(alpha) = label(delta); B: label(beta) = label(gamma) + eps
            shift = d.label_offset(c, r_in) - d.label_offset(c, r_out)
            if c in B:
                shift -= d.sign[c]
            off[nx_] = off[cur] + shift
            cur = nx_
            chain.append(cur)
        done.update(chain)
        classes.append(chain)
        offsets.update(off)
    covered = set().union(*map(set, classes))
    if covered | arc != set(range(len(d.edges))):
        raise CensusError("a G-edge closes up without ends")
    gid = {e: k for k, es in enumerate(classes) for e in es}

    # faces of G
    find, union = _uf(n + 2)
    for e in arc:
        union(*d.edge_faces[e])
    groups = {}
    for f in range(n + 2):
        groups.setdefault(find(f), []).append(f)
    base = next(v for v in groups.values() if 0 in v)
    if n + 1 not in base:
        raise CensusError("faces 0 and n+1 are not joined by the base arc")
    others = [sorted(v) for v in groups.values() if 0 not in v]
    qa, qx = set(d.q_sets[A[-1]]), set(d.q_sets[x])
    qb, qy = set(d.q_sets[B[-1]]), set(d.q_sets[y])
    first = [g for g in others if qa & qx & set(g)]
    last = [g for g in others if qb & qy & set(g)]
    M0 = first[0] if first else None
    Mlast = last[0] if last else None
    middle = [g for g in others if g is not M0 and g is not Mlast]
    part = ([M0] if M0 else []) + sorted(middle) + ([Mlast] if Mlast and Mlast is not M0 else [])

    R0, Rn1 = 0, n + 1
    F = frozenset(gid[e] for e in range(len(d.edges)) if e not in arc and set(d.edge_faces[e]) & {R0, Rn1})

    # census
    census = []
    for c in range(n):
        if c in bp.bridge_set:
            continue
        eps = d.sign[c]
        for name, (r1, r2) in CORNER_ROLES.items():
            f = d.corner_face(c, name)
            e1, e2 = d.roles[c][r1], d.roles[c][r2]
            if f in (R0, Rn1) or e1 in arc or e2 in arc:
                continue
            phi, psi = (e1, e2) if eps > 0 else (e2, e1)
            enm = eps if name in ("top", "bot") else -eps
            census.append(CensusEntry(c, f, name, gid[phi], gid[psi], enm))

    # ends of each G-edge, with transversal neighbours on each side
    def end_record(c, e_role):
        slot = ROLE_SLOTS[d.sign[c]][e_role]
        over = e_role in ("beta", "gamma")
        inv = {v: k for k, v in ROLE_SLOTS[d.sign[c]].items()}
        # tail leaving BL: left BR, right TL; leaving BR: left TR, right BL
        # head entering TL: left TR, right BL; entering TR: left BR, right TL
        lr = {"BL": ("BR", "TL"), "BR": ("TR", "BL"), "TL": ("TR", "BL"), "TR": ("BR", "TL")}[slot]
        ids = []
        for sl in lr:
            e = d.roles[c][inv[sl]]
            ids.append(None if e in arc else gid[e])
        return EdgeEnd(c, over, ids[0], ids[1])

    tails, heads, ecls = {}, {}, {}
    for g, es in enumerate(classes):
        e0, e1 = es[0], es[-1]
        tc, hc = d.edges[e0].tail, d.edges[e1].head
        tr = next(r for r, v in d.roles[tc].items() if v == e0)
        hr = next(r for r, v in d.roles[hc].items() if v == e1)
        tails[g] = end_record(tc, tr)
        heads[g] = end_record(hc, hr)
        if g not in F:
            o1, o2 = tails[g].over, heads[g].over
            ecls[g] = 1 if (o1 and o2) else -1 if not (o1 or o2) else 0

    m = n - len(bp.bridge_set) - 2
    g = ReducedGraph(bp=bp, arc_edges=tuple(sorted(arc)), edge_classes=classes, offsets=offsets,
                     boundary_edges=F, m=m, face_partition=part, base_face_class=tuple(sorted(base)),
                     edge_class=ecls, tails=tails, heads=heads, census=census)
    got, want = g.census_counts(), g.expected_counts()
    if got != want:
        bad = {c: (got[c], want[c]) for c in got if got[c] != want[c]}
        raise CensusError(f"census survival counts disagree with the expected counts: {bad}")
    return g


def reduce_diagram(text, rewrite: bool = False):
    """Parse, choose a base point (optionally searching equivalent braids) and build G."""
    d = parse_braid(text)
    info = None
    try:
        bp = choose_base_point(d)
    except DiagramError as err:
        if not rewrite or err.reason not in ("no_base_point", "reducible"):
            raise
        w, info = find_valid_presentation(d.word)
        d = parse_braid(w)
        bp = choose_base_point(d)
    return d, bp, build_reduced_graph(bp.diagram, bp), info
