"""Block importance ranking: keep-2n, intersect, keep-n.

Blocks are ordered descending by three metrics (sub-block count, word
count, size proxy). Each ordering is truncated to its first 2n entries,
the three sets are intersected, and the top n of the intersection are
kept, ordered by the sum of the three per-metric ranks (ties broken by
document order). When the intersection holds fewer than n blocks, the
remainder is padded from the rank-sum-ordered rest and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .segmenter import Block

DEFAULT_TOP_N = 10


@dataclass
class RankedBlock:
    block: Block
    rank: int
    fallback: bool
    rank_sum: int

    def to_json(self) -> dict:
        doc = self.block.to_json()
        doc["rank"] = self.rank
        doc["fallback"] = self.fallback
        return doc


def sort_blocks(blocks: list[Block], n: int = DEFAULT_TOP_N) -> list[RankedBlock]:
    """Rank blocks by the three-metric intersection procedure."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not blocks:
        return []

    indices = range(len(blocks))

    def order_by(metric) -> list[int]:
        return sorted(indices, key=lambda i: (-metric(blocks[i]), i))

    by_count = order_by(lambda b: b.metrics.sub_block_count)
    by_words = order_by(lambda b: b.metrics.word_count)
    by_size = order_by(lambda b: b.metrics.size_proxy)

    ranks = [dict() for _ in range(3)]
    for r, ordering in enumerate((by_count, by_words, by_size)):
        for pos, i in enumerate(ordering):
            ranks[r][i] = pos + 1

    keep = 2 * n
    candidates = set(by_count[:keep]) & set(by_words[:keep]) & set(by_size[:keep])

    def rank_sum(i: int) -> int:
        return ranks[0][i] + ranks[1][i] + ranks[2][i]

    chosen = sorted(candidates, key=lambda i: (rank_sum(i), i))[:n]
    taken = set(chosen)
    out = [(i, False) for i in chosen]
    if len(out) < n:
        rest = sorted((i for i in indices if i not in taken),
                      key=lambda i: (rank_sum(i), i))
        out.extend((i, True) for i in rest[: n - len(out)])

    return [RankedBlock(block=blocks[i], rank=pos + 1, fallback=fb, rank_sum=rank_sum(i))
            for pos, (i, fb) in enumerate(out)]
