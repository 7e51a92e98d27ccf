"""Enumeration of connected vertex subsets (ESU-style extension sets)."""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Sequence


def connected_subsets(
    neighbors: Sequence[Iterable[int]] | Callable[[int], Iterable[int]],
    root: int,
    max_size: int,
    allowed: Callable[[int], bool] | None = None,
    above_root: bool = False,
) -> Iterator[frozenset[int]]:
    """Yield each connected set containing ``root`` with at most ``max_size`` members once.

    A candidate joins the extension list only when it is outside the closed
    neighbourhood of the current set; that exclusivity rule is what makes
    every set appear exactly once.  With ``above_root`` only members larger
    than ``root`` may join, so looping over all roots lists every connected
    set of the graph exactly once.
    """
    nbr = neighbors if callable(neighbors) else neighbors.__getitem__
    if allowed is not None and not allowed(root):
        return
    if max_size < 1:
        return

    def ok(u: int) -> bool:
        if above_root and u <= root:
            return False
        return allowed is None or allowed(u)

    start_nbhd = {root}
    start_nbhd.update(nbr(root))
    start_ext = [u for u in nbr(root) if ok(u)]

    def extend(sub: list[int], ext: list[int], nbhd: set[int]) -> Iterator[frozenset[int]]:
        yield frozenset(sub)
        if len(sub) == max_size:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            fresh = [u for u in nbr(w) if u not in nbhd]
            new_nbhd = nbhd.union(fresh)
            sub.append(w)
            yield from extend(sub, ext + [u for u in fresh if ok(u)], new_nbhd)
            sub.pop()

    yield from extend([root], start_ext, start_nbhd)
