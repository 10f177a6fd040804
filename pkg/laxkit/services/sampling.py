"""Seeded random elements, drawn from section spaces so that members are members by construction."""
import random
from functools import lru_cache
from typing import List, Optional, Tuple

from .classical import finite_algebra
from .exactmath import K, ZERO_RF, RationalFunction, Scalar
from .geometry import ConstraintSystem, Divisor, MarkedConfig, section_space
from .laxalgebra import LaxElement, VectorField, tyurin_conditions

DEFAULT_POLE = 2


def random_scalar(rng: random.Random, spread: int = 3, gaussian: bool = False) -> Scalar:
    re_part = rng.randint(-spread, spread)
    im_part = rng.randint(-spread, spread) if gaussian else 0
    return K(re_part, im_part)


def member_divisor(config: MarkedConfig, pole: int = DEFAULT_POLE, order_at_in: Optional[int] = None) -> Divisor:
    """pole * A + eps * W; with ``order_at_in`` the in-points instead demand that vanishing order."""
    parts = {p: pole for p in config.marked_points}
    if order_at_in is not None:
        for p in config.in_points:
            parts[p] = -order_at_in
    for t in config.tyurin:
        parts[t.gamma] = config.eps
    return Divisor.from_map(parts)


@lru_cache(maxsize=None)
def member_space(config: MarkedConfig, divisor: Divisor) -> Tuple[Tuple[RationalFunction, ...], ...]:
    """Basis (in g-coordinates) of the members with divisor bounded by ``divisor``."""
    alg = finite_algebra(config.algebra)
    system = ConstraintSystem(divisor, tyurin_conditions(config, alg))
    return tuple(section_space(system, alg.dim))


def _combination(rng: random.Random, space, terms: int, gaussian: bool):
    if not space:
        return None
    picks = rng.sample(range(len(space)), min(terms, len(space)))
    width = len(space[0])
    acc = [ZERO_RF] * width
    for k in picks:
        c = random_scalar(rng, gaussian=gaussian)
        if not c:
            c = K(1, 0)
        acc = [a + f * c for a, f in zip(acc, space[k])]
    return acc


def random_member(config: MarkedConfig, rng: random.Random, divisor: Optional[Divisor] = None,
                  terms: int = 3, gaussian: bool = False) -> LaxElement:
    space = member_space(config, divisor or member_divisor(config))
    coords = _combination(rng, space, terms, gaussian)
    if coords is None:
        return LaxElement.zero(config)
    return LaxElement.from_coordinates(config, coords)


def random_members(config: MarkedConfig, rng: random.Random, count: int, **kwargs) -> List[LaxElement]:
    return [random_member(config, rng, **kwargs) for _ in range(count)]


@lru_cache(maxsize=None)
def _function_space(config: MarkedConfig, pole: int, weight: int):
    divisor = Divisor.from_map({p: pole for p in config.marked_points})
    return tuple(section_space(ConstraintSystem(divisor, weight=weight), 1))


def random_function(config: MarkedConfig, rng: random.Random, pole: int = DEFAULT_POLE, terms: int = 3) -> RationalFunction:
    """An element of A with poles of order at most ``pole`` at each marked point."""
    coords = _combination(rng, _function_space(config, pole, 0), terms, False)
    return ZERO_RF if coords is None else coords[0]


def random_vector_field(config: MarkedConfig, rng: random.Random, pole: int = DEFAULT_POLE,
                        terms: int = 3) -> VectorField:
    coords = _combination(rng, _function_space(config, pole, -1), terms, False)
    return VectorField(ZERO_RF if coords is None else coords[0])
