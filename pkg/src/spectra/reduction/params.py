from __future__ import annotations

from dataclasses import dataclass

from ..logic import Var


class ReductionError(ValueError):
    pass


def r_role(l: int) -> str:
    """Role name of the l-th relation port (1-based)."""
    return f"R{l}"


@dataclass(frozen=True)
class ReductionParams:
    """Constants of one reduction instance.

    ``relations`` are the post-preprocessing relation symbols; relation
    ``relations[l-1]`` is carried by role ``R<l>``. ``work_vars`` are the three
    variables every gadget formula is written in.
    """

    relations: tuple[str, ...]
    work_vars: tuple[Var, Var, Var] = ("x", "y", "z")

    def __post_init__(self):
        if self.m < 3:
            raise ReductionError(f"need at least 3 relation symbols, got {self.m}")
        if len(set(self.work_vars)) != 3:
            raise ReductionError("work variables must be three distinct names")

    @property
    def m(self) -> int:
        return len(self.relations)

    @property
    def p(self) -> int:
        return self.m + 3

    @property
    def q(self) -> int:
        return 8 * self.m + 2

    @property
    def line_length(self) -> int:
        return 4 * self.m + 1

    @property
    def roles(self) -> tuple[str, ...]:
        return ("P", "Q", "S") + tuple(r_role(l) for l in range(1, self.m + 1))

    @property
    def r_roles(self) -> tuple[str, ...]:
        return self.roles[3:]

    @property
    def attachment(self) -> dict[str, int]:
        """Role -> U-distance from the anchor end of the line.

        Q and the R ports sit at odd distances and P, S at even ones, which is
        what keeps every encoded graph bipartite.
        """
        table = {"P": 0, "Q": 1, "S": 2}
        for l in range(1, self.m + 1):
            table[r_role(l)] = 2 * l + 1
        return table

    def relation_of(self, role: str) -> str:
        return self.relations[int(role[1:]) - 1]

    def role_of(self, relation: str) -> str:
        return r_role(self.relations.index(relation) + 1)

    def size_for(self, n: int) -> int:
        return self.p * n + self.q
