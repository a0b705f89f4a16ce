"""A small reduced-ordered-BDD engine.

Just enough for exact evaluation of grounded MSO formulas: conjunction,
disjunction, negation, block quantification, model counting and model
iteration.  Variables are allocated on demand; their allocation order is
the variable order.  The manager enforces a node budget and raises
SizeLimit when it is exceeded.
"""

from __future__ import annotations

from .errors import SizeLimit

FALSE = 0
TRUE = 1

_TERMINAL_LEVEL = 1 << 60


class Bdd:
    def __init__(self, budget=1_000_000):
        self.budget = budget
        # node arrays; 0 and 1 are the terminals
        self.var_of = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self.lo_of = [0, 1]
        self.hi_of = [0, 1]
        self.unique = {}
        self.cache = {}
        self.num_vars = 0

    def new_var(self):
        v = self.num_vars
        self.num_vars += 1
        return v

    def new_vars(self, k):
        return [self.new_var() for _ in range(k)]

    def mk(self, var, lo, hi):
        if lo == hi:
            return lo
        key = (var, lo, hi)
        node = self.unique.get(key)
        if node is None:
            node = len(self.var_of)
            if node > self.budget:
                raise SizeLimit(f"BDD node budget ({self.budget}) exceeded")
            self.var_of.append(var)
            self.lo_of.append(lo)
            self.hi_of.append(hi)
            self.unique[key] = node
        return node

    def var_node(self, var):
        return self.mk(var, FALSE, TRUE)

    def lit(self, value):
        if value is True:
            return TRUE
        if value is False:
            return FALSE
        return value  # already a node

    # ------------------------------------------------------------ apply

    def apply_not(self, a):
        if a == FALSE:
            return TRUE
        if a == TRUE:
            return FALSE
        key = ("~", a)
        r = self.cache.get(key)
        if r is None:
            r = self.mk(self.var_of[a], self.apply_not(self.lo_of[a]), self.apply_not(self.hi_of[a]))
            self.cache[key] = r
        return r

    def apply_and(self, a, b):
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("&", a, b)
        r = self.cache.get(key)
        if r is None:
            va, vb = self.var_of[a], self.var_of[b]
            v = min(va, vb)
            a_lo, a_hi = (self.lo_of[a], self.hi_of[a]) if va == v else (a, a)
            b_lo, b_hi = (self.lo_of[b], self.hi_of[b]) if vb == v else (b, b)
            r = self.mk(v, self.apply_and(a_lo, b_lo), self.apply_and(a_hi, b_hi))
            self.cache[key] = r
        return r

    def apply_or(self, a, b):
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("|", a, b)
        r = self.cache.get(key)
        if r is None:
            va, vb = self.var_of[a], self.var_of[b]
            v = min(va, vb)
            a_lo, a_hi = (self.lo_of[a], self.hi_of[a]) if va == v else (a, a)
            b_lo, b_hi = (self.lo_of[b], self.hi_of[b]) if vb == v else (b, b)
            r = self.mk(v, self.apply_or(a_lo, b_lo), self.apply_or(a_hi, b_hi))
            self.cache[key] = r
        return r

    def and_all(self, nodes):
        r = TRUE
        for n in nodes:
            r = self.apply_and(r, n)
            if r == FALSE:
                return FALSE
        return r

    def or_all(self, nodes):
        r = FALSE
        for n in nodes:
            r = self.apply_or(r, n)
            if r == TRUE:
                return TRUE
        return r

    def iff(self, a, b):
        return self.apply_or(self.apply_and(a, b), self.apply_and(self.apply_not(a), self.apply_not(b)))

    # ----------------------------------------------------- quantification

    def exists(self, a, variables):
        variables = frozenset(variables)
        if not variables:
            return a

        def walk(n):
            if n <= TRUE:
                return n
            key = ("E", n, variables)
            r = self.cache.get(key)
            if r is not None:
                return r
            v = self.var_of[n]
            lo = walk(self.lo_of[n])
            hi = walk(self.hi_of[n])
            if v in variables:
                r = self.apply_or(lo, hi)
            else:
                r = self.mk(v, lo, hi)
            self.cache[key] = r
            return r

        return walk(a)

    def forall(self, a, variables):
        return self.apply_not(self.exists(self.apply_not(a), variables))

    # ------------------------------------------------------------ queries

    def support(self, a):
        seen = set()
        out = set()
        stack = [a]
        while stack:
            n = stack.pop()
            if n <= TRUE or n in seen:
                continue
            seen.add(n)
            out.add(self.var_of[n])
            stack.append(self.lo_of[n])
            stack.append(self.hi_of[n])
        return frozenset(out)

    def count(self, a, care_vars):
        """Number of satisfying assignments over `care_vars` (which must
        contain the support of `a`)."""
        care = sorted(set(care_vars))
        pos = {v: i for i, v in enumerate(care)}
        total = len(care)

        def level(n):
            if n <= TRUE:
                return total
            v = self.var_of[n]
            if v not in pos:
                raise ValueError("support of the BDD is not within care_vars")
            return pos[v]

        memo = {}

        def cnt(n):
            if n == FALSE:
                return 0
            if n == TRUE:
                return 1
            r = memo.get(n)
            if r is None:
                lo, hi = self.lo_of[n], self.hi_of[n]
                here = level(n)
                r = (cnt(lo) << (level(lo) - here - 1)) + (cnt(hi) << (level(hi) - here - 1))
                memo[n] = r
            return r

        if a == FALSE:
            return 0
        return cnt(a) << level(a)

    def iter_models(self, a, care_vars):
        """Yield complete assignments (dict var -> bool) over care_vars."""
        care = sorted(set(care_vars))

        def walk(n, i, acc):
            if n == FALSE:
                return
            if i == len(care):
                yield dict(acc)
                return
            v = care[i]
            nv = self.var_of[n] if n > TRUE else _TERMINAL_LEVEL
            if nv == v:
                lo, hi = self.lo_of[n], self.hi_of[n]
            elif nv > v:
                lo = hi = n
            else:
                raise ValueError("support of the BDD is not within care_vars")
            acc.append((v, False))
            yield from walk(lo, i + 1, acc)
            acc.pop()
            acc.append((v, True))
            yield from walk(hi, i + 1, acc)
            acc.pop()

        yield from walk(a, 0, [])
