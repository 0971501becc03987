"""Answer-set computation over ground programs.

Interpretations are frozensets of atom-table indices.  Enumeration runs a
chronological branch-and-propagate search over bitmask clauses: each rule
contributes the clause `head or not body`, true atoms additionally need a
live deriving rule, and every total candidate passes a reduct-minimality
check.  Branching is deterministic: lowest atom index first, false before
true, so model order is reproducible.

`brute_force_answer_sets` enumerates all 2^n interpretations and is the
independent reference the search is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .grounder import GroundProgram, GroundRule
from .syntax import Atom

Interpretation = frozenset[int]

_ENUM_MINIMALITY_LIMIT = 10
_BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class SolveResult:
    models: tuple[Interpretation, ...]
    exhausted: bool
    model_limit_hit: bool

    @property
    def coherent(self) -> bool:
        return bool(self.models)

    @property
    def incoherent(self) -> bool:
        return self.exhausted and not self.models


# -- mask plumbing ---------------------------------------------------------


def _bit_indices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _rule_masks(
    g: GroundProgram, extra_facts: Iterable[Atom] = ()
) -> tuple[int, list[tuple[int, int, int]]]:
    n = len(g.atom_table)
    rules = [
        (_mask(r.head), _mask(r.positive_body), _mask(r.negative_body))
        for r in g.rules
    ]
    for atom in extra_facts:
        rules.append((1 << g.atom_table.index_of(atom), 0, 0))
    return n, rules


# -- classical notions -----------------------------------------------------


def is_model(g: GroundProgram, interpretation: Iterable[int]) -> bool:
    n, rules = _rule_masks(g)
    i = _mask(interpretation)
    if i >> n:
        raise ValueError("interpretation outside the atom table")
    return all(not (pos & i == pos and neg & i == 0 and head & i == 0) for head, pos, neg in rules)


def reduct(g: GroundProgram, interpretation: Iterable[int]) -> GroundProgram:
    """Remove rules whose negative body intersects I, strip the rest."""
    i = set(interpretation)
    kept = tuple(
        replace(r, negative_body=())
        for r in g.rules
        if not any(a in i for a in r.negative_body)
    )
    return GroundProgram(kept, g.atom_table, g.herbrand_base, ())


def _models_reduct(rules: Sequence[tuple[int, int]], j: int) -> bool:
    return all(not (pos & j == pos and head & j == 0) for head, pos in rules)


def _has_smaller_reduct_model_enum(rules: Sequence[tuple[int, int]], i: int) -> bool:
    sub = (i - 1) & i
    while sub != i:
        if _models_reduct(rules, sub):
            return True
        if sub == 0:
            break
        sub = (sub - 1) & i
    return False


def _has_smaller_reduct_model_search(rules: Sequence[tuple[int, int]], i: int) -> bool:
    """Clause search for a proper submodel of the reduct within I."""
    clauses = []
    for head, pos in rules:
        if pos & ~i:
            continue
        clauses.append((head & i, pos))
    clauses.append((0, i))  # at least one atom of I must be dropped
    free = _bit_indices(i)

    def search(t: int, f: int) -> bool:
        while True:
            forced = False
            for want_true, want_false in clauses:
                if want_true & t or want_false & f:
                    continue
                cand_t = want_true & ~f
                cand_f = want_false & ~t
                count = cand_t.bit_count() + cand_f.bit_count()
                if count == 0:
                    return False
                if count == 1:
                    if cand_t:
                        t |= cand_t
                    else:
                        f |= cand_f
                    forced = True
            if not forced:
                break
        for b in free:
            bit = 1 << b
            if not (t | f) & bit:
                return search(t, f | bit) or search(t | bit, f)
        return True

    # atoms outside I are false throughout; pos & ~i clauses were skipped
    return search(0, ~i)


def _is_stable(rules: Sequence[tuple[int, int, int]], i: int) -> bool:
    reduct_rules = [(head, pos) for head, pos, neg in rules if neg & i == 0]
    if i == 0:
        return _models_reduct(reduct_rules, 0)
    if i.bit_count() <= _ENUM_MINIMALITY_LIMIT:
        return not _has_smaller_reduct_model_enum(reduct_rules, i)
    return not _has_smaller_reduct_model_search(reduct_rules, i)


def is_answer_set(g: GroundProgram, interpretation: Iterable[int]) -> bool:
    if not is_model(g, interpretation):
        return False
    _, rules = _rule_masks(g)
    return _is_stable(rules, _mask(interpretation))


# -- enumeration -----------------------------------------------------------


class _Enumerator:
    def __init__(self, n: int, rules: Sequence[tuple[int, int, int]]) -> None:
        self.n = n
        self.rules = list(rules)
        self.head_rules: list[list[int]] = [[] for _ in range(n)]
        for ri, (head, _, _) in enumerate(self.rules):
            for b in _bit_indices(head):
                self.head_rules[b].append(ri)
        self.full = (1 << n) - 1

    def _viable_supporter(self, bit: int, ri: int, t: int, f: int) -> bool:
        # a supporting rule derives the atom alone: body not yet
        # contradicted, no other head atom true, and the atom itself
        # appears in neither body part
        head, pos, neg = self.rules[ri]
        if pos & f or neg & t or (head ^ bit) & t:
            return False
        return not (pos | neg) & bit

    def _propagate(self, t: int, f: int) -> tuple[int, int, bool]:
        rules = self.rules
        while True:
            if t & f:
                return t, f, False
            changed = False
            for head, pos, neg in rules:
                if head & t or pos & f or neg & t:
                    continue
                cand_h = head & ~f
                cand_p = pos & ~t
                cand_n = neg & ~f
                count = cand_h.bit_count() + cand_p.bit_count() + cand_n.bit_count()
                if count == 0:
                    return t, f, False
                if count == 1:
                    if cand_h:
                        t |= cand_h
                    elif cand_p:
                        f |= cand_p
                    else:
                        t |= cand_n
                    changed = True
            # support: every true atom needs a viable deriving rule, and
            # atoms with no viable deriving rule cannot become true
            for a in _bit_indices(t):
                bit = 1 << a
                live = -1
                count = 0
                for ri in self.head_rules[a]:
                    if not self._viable_supporter(bit, ri, t, f):
                        continue
                    count += 1
                    live = ri
                    if count > 1:
                        break
                if count == 0:
                    return t, f, False
                if count == 1:
                    head, pos, neg = rules[live]
                    if pos & ~t or neg & ~f or (head ^ bit) & ~f:
                        t |= pos
                        f |= neg | (head ^ bit)
                        changed = True
            for a in _bit_indices(self.full & ~(t | f)):
                bit = 1 << a
                if not any(
                    self._viable_supporter(bit, ri, t, f)
                    for ri in self.head_rules[a]
                ):
                    f |= bit
                    changed = True
            if not changed:
                return t, f, True

    def run(self, cap: int | None) -> tuple[list[int], bool]:
        """Stable models in branch order; returns (models, exhausted)."""
        models: list[int] = []
        if cap == 0:
            return models, True

        def search(t: int, f: int) -> bool:
            t, f, ok = self._propagate(t, f)
            if not ok:
                return True
            undef = self.full & ~(t | f)
            if not undef:
                if _is_stable(self.rules, t):
                    models.append(t)
                    if cap is not None and len(models) >= cap:
                        return False
                return True
            bit = undef & -undef
            if not search(t, f | bit):
                return False
            return search(t | bit, f)

        exhausted = search(0, 0)
        return models, exhausted


def enumerate_answer_sets(
    g: GroundProgram,
    limit: int | None = None,
    extra_facts: Iterable[Atom] = (),
) -> SolveResult:
    n, rules = _rule_masks(g, extra_facts)
    enum = _Enumerator(n, rules)
    internal_cap = 1 if limit == 0 else limit
    raw, exhausted = enum.run(internal_cap)
    if limit == 0:
        hit = bool(raw)
        return SolveResult((), exhausted and not raw, hit)
    hit = limit is not None and len(raw) >= limit and not exhausted
    models = tuple(frozenset(_bit_indices(m)) for m in raw)
    return SolveResult(models, exhausted, hit)


def check_coherence(g: GroundProgram, extra_facts: Iterable[Atom] = ()) -> bool:
    """True when the program extended with the given facts has an answer set."""
    result = enumerate_answer_sets(g, limit=1, extra_facts=extra_facts)
    return result.coherent


# -- reference implementation ---------------------------------------------


def brute_force_answer_sets(g: GroundProgram) -> frozenset[Interpretation]:
    """Filter all 2^n interpretations by modelhood and reduct minimality."""
    n, rules = _rule_masks(g)
    if n > _BRUTE_FORCE_LIMIT:
        raise ValueError("atom table too large for brute force")
    out = []
    for i in range(1 << n):
        if any(pos & i == pos and neg & i == 0 and head & i == 0 for head, pos, neg in rules):
            continue
        reduct_rules = [(head, pos) for head, pos, neg in rules if neg & i == 0]
        if i and _has_smaller_reduct_model_enum(reduct_rules, i):
            continue
        if i == 0 and not _models_reduct(reduct_rules, 0):
            continue
        out.append(frozenset(_bit_indices(i)))
    return frozenset(out)
