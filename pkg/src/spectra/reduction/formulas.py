"""Three-variable graph formulas that pin down the encoding.

Every builder takes the names of its free variables explicitly and writes
the rest of the formula in the remaining work variables, rebinding them as
it nests. A free variable may also be a pool variable outside the work
triple (``translate`` needs this when the source sentence has k > 3
variables); the spares are then the first two work variables.

Results are cached per argument tuple, so the same subformula object is
shared everywhere it occurs and the evaluator sees a small DAG.
"""

from __future__ import annotations

from functools import lru_cache

from ..logic import (
    FALSE,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Var,
    conj,
    disj,
)
from .params import ReductionError, ReductionParams


def E(a: Var, b: Var) -> Formula:
    return Atom("E", a, b)


class PsiBuilder:
    def __init__(self, params: ReductionParams):
        self.params = params
        self.work = params.work_vars

    # variable plumbing

    def others(self, a: Var) -> tuple[Var, Var]:
        rest = [v for v in self.work if v != a]
        return rest[0], rest[1]

    def spare(self, a: Var, b: Var) -> Var:
        for v in self.work:
            if v != a and v != b:
                return v
        raise AssertionError("unreachable")

    # Step 1: degree one, the line U, its ends, distances along it

    @lru_cache(maxsize=None)
    def deg1(self, a: Var) -> Formula:
        b, c = self.others(a)
        return Exists(b, conj(E(a, b), Forall(c, Implies(E(a, c), Eq(b, c)))))

    @lru_cache(maxsize=None)
    def in_u(self, a: Var) -> Formula:
        """Degree other than one and exactly one degree-one neighbour."""
        b, c = self.others(a)
        return conj(
            Not(self.deg1(a)),
            Exists(
                b,
                conj(
                    E(a, b),
                    self.deg1(b),
                    Forall(c, Implies(conj(E(a, c), self.deg1(c)), Eq(c, b))),
                ),
            ),
        )

    @lru_cache(maxsize=None)
    def end(self, a: Var) -> Formula:
        b, c = self.others(a)
        return conj(
            self.in_u(a),
            Exists(
                b,
                conj(
                    self.in_u(b),
                    E(a, b),
                    Forall(c, Implies(conj(self.in_u(c), E(a, c)), Eq(b, c))),
                ),
            ),
        )

    @lru_cache(maxsize=None)
    def within(self, n: int, a: Var, b: Var) -> Formula:
        """Both in U and joined by a U-internal walk of length <= n."""
        if n < 0 or a == b:
            raise ReductionError(f"bad distance formula arguments {n}, {a}, {b}")
        base = conj(Eq(a, b), self.in_u(a))
        if n == 0:
            return base
        c = self.spare(a, b)
        return disj(base, conj(self.in_u(a), Exists(c, conj(E(a, c), self.within(n - 1, c, b)))))

    @lru_cache(maxsize=None)
    def dist(self, n: int, a: Var, b: Var) -> Formula:
        """U-internal distance exactly n."""
        if not 0 <= n <= 4 * self.params.m:
            raise ReductionError(f"distance {n} outside 0..{4 * self.params.m}")
        if n == 0:
            return self.within(0, a, b)
        return conj(self.within(n, a, b), Not(self.within(n - 1, a, b)))

    @lru_cache(maxsize=None)
    def anchor(self, a: Var) -> Formula:
        """An end of the line with a neighbour that is neither in U nor a pendant."""
        b, _ = self.others(a)
        return conj(self.end(a), Exists(b, conj(E(a, b), Not(self.in_u(b)), Not(self.deg1(b)))))

    # Step 1 sentences

    @lru_cache(maxsize=None)
    def p1(self) -> Formula:
        x, y, _ = self.work
        return Forall(x, Forall(y, Implies(conj(self.deg1(x), E(x, y)), self.in_u(y))))

    @lru_cache(maxsize=None)
    def p2(self) -> Formula:
        x, y, z = self.work
        return Exists(
            x,
            Exists(
                y,
                conj(
                    self.end(x),
                    self.end(y),
                    Not(Eq(x, y)),
                    Forall(z, Implies(self.end(z), disj(Eq(z, x), Eq(z, y)))),
                ),
            ),
        )

    @lru_cache(maxsize=None)
    def p3(self) -> Formula:
        """Connected with diameter <= 4m, and BFS layers from an end are singletons."""
        x, y, z = self.work
        top = 4 * self.params.m
        diameter = Forall(x, Forall(y, Implies(conj(self.in_u(x), self.in_u(y)), self.within(top, x, y))))
        layers = conj(
            *(
                Forall(y, Implies(self.dist(n, x, y), Forall(z, Implies(self.dist(n, x, z), Eq(z, y)))))
                for n in range(top + 1)
            )
        )
        return conj(diameter, Exists(x, conj(self.end(x), layers)))

    @lru_cache(maxsize=None)
    def p4(self) -> Formula:
        x, y, _ = self.work
        top = 4 * self.params.m
        return Forall(
            x, Forall(y, Implies(conj(self.end(x), self.end(y), Not(Eq(x, y))), self.dist(top, x, y)))
        )

    @lru_cache(maxsize=None)
    def orientation(self) -> Formula:
        x, y, _ = self.work
        return Forall(x, Forall(y, Implies(conj(self.anchor(x), self.anchor(y)), Eq(x, y))))

    # Step 2: element roles

    @lru_cache(maxsize=None)
    def role(self, alpha: str, a: Var) -> Formula:
        if alpha == "U":
            return self.in_u(a)
        table = self.params.attachment
        if alpha not in table:
            raise ReductionError(f"unknown role {alpha!r}")
        b, c = self.others(a)
        return conj(
            Not(self.in_u(a)),
            Not(self.deg1(a)),
            Exists(
                b,
                conj(
                    self.anchor(b),
                    Forall(c, Implies(self.in_u(c), Iff(E(a, c), self.dist(table[alpha], b, c)))),
                ),
            ),
        )

    def element(self, a: Var) -> Formula:
        return disj(*(self.role(r, a) for r in self.params.roles))

    def any_r(self, a: Var) -> Formula:
        return disj(*(self.role(r, a) for r in self.params.r_roles))

    # Step 3: block shape

    def middle(self, alpha: str, beta: str) -> str:
        pair = {alpha, beta}
        rs = set(self.params.r_roles)
        if pair == {"P", "S"}:
            return "Q"
        if len(pair) == 2 and "Q" in pair and pair - {"Q"} <= rs:
            return "P"
        if len(pair) == 2 and pair <= rs:
            return "P"
        raise ReductionError(f"no middle vertex defined for ({alpha}, {beta})")

    @lru_cache(maxsize=None)
    def pair(self, alpha: str, beta: str, a: Var, b: Var) -> Formula:
        gamma = self.middle(alpha, beta)
        c = self.spare(a, b)
        return conj(
            self.role(alpha, a),
            self.role(beta, b),
            Exists(c, conj(self.role(gamma, c), E(a, c), E(c, b))),
        )

    def _one_neighbour(self, a: Var, alpha: str) -> Formula:
        b, c = self.others(a)
        return Exists(
            b,
            conj(
                E(a, b),
                self.role(alpha, b),
                Forall(c, Implies(conj(E(a, c), self.role(alpha, c)), Eq(c, b))),
            ),
        )

    def _one_distant(self, a: Var, alpha: str, beta: str) -> Formula:
        b, c = self.others(a)
        return Exists(
            b,
            conj(
                self.pair(alpha, beta, a, b),
                Not(E(a, b)),
                Forall(c, Implies(self.pair(alpha, beta, a, c), Eq(c, b))),
            ),
        )

    def _no_edge_between_neighbours(self, a: Var, beta: str, gamma: str) -> Formula:
        b, c = self.others(a)
        return Forall(
            b,
            Forall(
                c,
                Implies(
                    conj(E(a, b), self.role(beta, b), E(a, c), self.role(gamma, c)),
                    Not(E(b, c)),
                ),
            ),
        )

    def p5_groups(self) -> dict[str, list[Formula]]:
        """The per-role condition lists, each with free variable work_vars[0]."""
        x, y, z = self.work
        rs = self.params.r_roles
        groups = {}
        groups["P"] = [
            self._one_neighbour(x, "Q"),
            *(self._one_neighbour(x, r) for r in rs),
            self._one_distant(x, "P", "S"),
            *(self._no_edge_between_neighbours(x, "Q", r) for r in rs),
            *(
                self._no_edge_between_neighbours(x, r1, r2)
                for i, r1 in enumerate(rs)
                for r2 in rs[i + 1:]
            ),
        ]
        groups["Q"] = [
            self._one_neighbour(x, "P"),
            self._one_neighbour(x, "S"),
            *(self._one_distant(x, "Q", r) for r in rs),
        ]
        groups["S"] = [
            self._one_neighbour(x, "Q"),
            self._one_distant(x, "S", "P"),
            *(
                Forall(
                    y,
                    Forall(
                        z,
                        Implies(
                            conj(self.role("Q", y), E(x, y), self.pair("Q", r, y, z)),
                            Not(E(x, z)),
                        ),
                    ),
                )
                for r in rs
            ),
        ]
        for r in rs:
            groups[r] = [
                self._one_neighbour(x, "P"),
                self._one_distant(x, r, "Q"),
                Forall(
                    y,
                    Forall(
                        z,
                        Implies(
                            conj(self.role("P", y), E(x, y), self.pair("P", "S", y, z)),
                            Not(E(x, z)),
                        ),
                    ),
                ),
            ]
        return groups

    @lru_cache(maxsize=None)
    def p5(self) -> Formula:
        x = self.work[0]
        return conj(
            *(Forall(x, Implies(self.role(alpha, x), conj(*conds))) for alpha, conds in self.p5_groups().items())
        )

    @lru_cache(maxsize=None)
    def totality(self) -> Formula:
        x = self.work[0]
        options = [self.deg1(x), self.in_u(x)] + [self.role(r, x) for r in self.params.roles]
        return Forall(x, disj(*options))

    @lru_cache(maxsize=None)
    def loop_free(self) -> Formula:
        x = self.work[0]
        return Forall(x, Not(E(x, x)))

    @lru_cache(maxsize=None)
    def psi0(self) -> Formula:
        return conj(
            self.p1(),
            self.p2(),
            self.p3(),
            self.p4(),
            self.orientation(),
            self.p5(),
            self.loop_free(),
            self.totality(),
        )

    # Step 4: cross edges

    def _pattern(self, alpha: str, beta: str, a: Var, b: Var) -> Formula:
        if alpha == beta:
            return conj(self.role(alpha, a), Eq(a, b))
        edge_pairs = {frozenset(p) for p in (("P", "Q"), ("Q", "S"))}
        edge_pairs |= {frozenset(("P", r)) for r in self.params.r_roles}
        if frozenset((alpha, beta)) in edge_pairs:
            return conj(self.role(alpha, a), self.role(beta, b), E(a, b))
        c = self.spare(a, b)
        if alpha == "S" and beta in self.params.r_roles:
            return conj(self.role("S", a), Exists(c, conj(E(a, c), self.role("Q", c), self.pair("Q", beta, c, b))))
        if beta == "S" and alpha in self.params.r_roles:
            return conj(self.role("S", b), Exists(c, conj(E(b, c), self.role("Q", c), self.pair("Q", alpha, c, a))))
        return self.pair(alpha, beta, a, b)

    @lru_cache(maxsize=None)
    def same_component(self, a: Var, b: Var) -> Formula:
        roles = self.params.roles
        return disj(*(self._pattern(alpha, beta, a, b) for alpha in roles for beta in roles))

    @lru_cache(maxsize=None)
    def p6(self) -> Formula:
        x, y, _ = self.work
        crossing = conj(E(x, y), self.element(x), self.element(y), Not(self.same_component(x, y)))
        allowed = disj(conj(self.role("S", x), self.any_r(y)), conj(self.any_r(x), self.role("S", y)))
        return Forall(x, Forall(y, Implies(crossing, allowed)))


def build_base_predicates(params: ReductionParams) -> dict[str, Formula]:
    b = PsiBuilder(params)
    x = params.work_vars[0]
    return {"deg1": b.deg1(x), "U": b.in_u(x), "end": b.end(x)}


def build_dist(params: ReductionParams, n: int, mode: str = "exactly") -> Formula:
    b = PsiBuilder(params)
    x, y, _ = params.work_vars
    if mode == "exactly":
        return b.dist(n, x, y)
    if mode == "at-most":
        if not 0 <= n <= 4 * params.m:
            raise ReductionError(f"distance {n} outside 0..{4 * params.m}")
        return b.within(n, x, y)
    raise ReductionError(f"unknown distance mode {mode!r}")


__all__ = ["PsiBuilder", "build_base_predicates", "build_dist", "E", "FALSE"]
