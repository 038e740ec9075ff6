from concurrent.futures import ProcessPoolExecutor
from numbers import Real
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
from scipy.integrate import trapezoid

T = TypeVar('T')
R = TypeVar('R')


def uniform_quadrature(
        values: np.ndarray,
        step: Real,
        axis: int = -1
) -> np.ndarray:
    """
    Composite trapezoid rule for ``values`` sampled on a uniform lattice with spacing ``step``.

    :param values: samples of the integrand, possibly complex and multi-dimensional.
    :param step: lattice spacing.
    :param axis: axis along which to integrate.
    :return: the integral, with ``axis`` removed.
    """
    return trapezoid(values, dx=step, axis=axis)


def tensor_quadrature(
        values: np.ndarray,
        step1: Real,
        step2: Real
) -> complex:
    """
    Trapezoid rule on the tensor product of two uniform lattices: integrates over both axes of a matrix.
    """
    return uniform_quadrature(
        uniform_quadrature(values, step2, axis=1),
        step1
    )


def parallel_map(
        function: Callable[[T], R],
        items: Iterable[T],
        max_workers: Optional[int] = None
) -> List[R]:
    """
    Maps ``function`` over ``items`` and returns the results in input order.

    With ``max_workers`` ``None`` or 1 the map is evaluated in-process. Otherwise the work is spread over a process
    pool, so ``function`` and the items have to be picklable.
    """
    items = list(items)
    if max_workers is None or max_workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ProcessPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(function, items))


def trapezoid_weights(
        n_points: int,
        step: Real
) -> np.ndarray:
    """
    Weights of the composite trapezoid rule on ``n_points`` uniformly spaced samples, for use in matrix contractions.
    """
    weights = np.full(n_points, float(step))
    weights[[0, -1]] /= 2
    return weights
