"""Breadth-first page segmentation into blocks of similar sub-blocks.

A queue walk visits every element; an element whose structure equals its
immediate left or right sibling is marked as a sub-block and its subtree
is not descended into. Adjacent marked siblings with identical structure
signatures then merge into blocks. Iframes are entered by enqueuing the
loaded inner root.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .dom import DOCUMENT, DomNode, SelectorPath, resolve_selector, selector_of

# Tags whose text content is never page data.
NON_CONTENT_TAGS = {"script", "style", "template"}


def _norm_tag(tag: str) -> str:
    # Header and data cells describe the same table column structure.
    return "td" if tag == "th" else tag


def _subtree_tags(el: DomNode, deep: bool, out: list[str]) -> None:
    out.append(_norm_tag(el.tag))
    if not deep:
        return
    for child in el.children:
        if child.kind == "element":
            _subtree_tags(child, deep, out)


def structure_signature(el: DomNode, deep: bool = True) -> tuple[str, ...]:
    """One string per child element: the child's preorder tag sequence.

    ``deep=False`` falls back to the child tag names alone (kept for
    experiments; the deep form is the default everywhere).
    """
    items = []
    for child in el.element_children():
        tags: list[str] = []
        _subtree_tags(child, deep, tags)
        items.append(" ".join(tags))
    return tuple(items)


def similar(e1: DomNode, e2: DomNode, deep: bool = True) -> bool:
    """Structural similarity: identical signatures, item by item."""
    return structure_signature(e1, deep) == structure_signature(e2, deep)


@dataclass
class BlockMetrics:
    sub_block_count: int
    word_count: int
    size_proxy: int

    def to_json(self) -> dict:
        return {
            "sub_block_count": self.sub_block_count,
            "word_count": self.word_count,
            "size_proxy": self.size_proxy,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BlockMetrics":
        return cls(doc["sub_block_count"], doc["word_count"], doc["size_proxy"])


@dataclass
class Block:
    """A merged run of structurally identical sibling sub-blocks."""

    parent_selector: SelectorPath
    sub_block_selectors: list[SelectorPath]
    signature: tuple[str, ...]
    metrics: BlockMetrics

    def to_json(self) -> dict:
        return {
            "parent_selector": self.parent_selector.serialize(),
            "sub_block_selectors": [s.serialize() for s in self.sub_block_selectors],
            "signature": list(self.signature),
            "metrics": self.metrics.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Block":
        return cls(
            parent_selector=SelectorPath.parse(doc["parent_selector"]),
            sub_block_selectors=[SelectorPath.parse(s) for s in doc["sub_block_selectors"]],
            signature=tuple(doc["signature"]),
            metrics=BlockMetrics.from_json(doc["metrics"]),
        )


def _descendant_elements(el: DomNode) -> int:
    count = 0
    stack = list(el.children)
    while stack:
        node = stack.pop()
        if node.kind == "element":
            count += 1
            stack.extend(node.children)
        elif node.kind == DOCUMENT:
            stack.extend(node.children)
    return count


def _word_count(el: DomNode) -> int:
    count = 0
    stack = [el]
    while stack:
        node = stack.pop()
        if node.kind == "text":
            count += len(node.text.split())
        elif node.kind == "element":
            if node.tag in NON_CONTENT_TAGS:
                continue
            stack.extend(node.children)
        else:
            stack.extend(node.children)
    return count


def block_metrics(sub_blocks: list[DomNode]) -> BlockMetrics:
    return BlockMetrics(
        sub_block_count=len(sub_blocks),
        word_count=sum(_word_count(s) for s in sub_blocks),
        size_proxy=sum(_descendant_elements(s) for s in sub_blocks),
    )


def _iter_parents(root: DomNode) -> Iterator[DomNode]:
    """Preorder walk over elements and loaded inner documents."""
    stack: list[DomNode] = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed([c for c in node.children
                               if c.kind in ("element", DOCUMENT)]))


def segment(document: DomNode, deep: bool = True) -> list[Block]:
    """Segment a parsed page into blocks (queue walk + sibling marking).

    Returns blocks in document order of their first sub-block. Repeated
    structure sitting directly under a document root (fragment input with
    no enclosing element) is not reported: block parents are elements.
    """
    marked: set[int] = set()
    queue: deque[DomNode] = deque(document.element_children())
    while queue:
        el = queue.popleft()
        if el.tag == "iframe":
            inner = el.inner_document()
            children = inner.element_children() if inner is not None else []
        else:
            children = el.element_children()

        siblings = el.parent.element_children() if el.parent is not None else [el]
        pos = siblings.index(el)
        left = siblings[pos - 1] if pos > 0 else None
        right = siblings[pos + 1] if pos + 1 < len(siblings) else None
        if (left is not None and similar(el, left, deep)) or \
           (right is not None and similar(el, right, deep)):
            marked.add(id(el))
        else:
            queue.extend(children)

    blocks: list[Block] = []
    for parent in _iter_parents(document):
        if parent.kind != "element":
            continue
        run: list[DomNode] = []
        run_sig: tuple[str, ...] | None = None
        for child in parent.element_children() + [None]:  # sentinel flushes the last run
            sig = structure_signature(child, deep) if child is not None else None
            is_marked = child is not None and id(child) in marked
            if is_marked and (not run or sig == run_sig):
                run.append(child)
                run_sig = sig
                continue
            if len(run) >= 2:
                blocks.append(_make_block(parent, run, run_sig, document))
            run = [child] if is_marked else []
            run_sig = sig if is_marked else None
        # sentinel guarantees the loop above flushed everything
    return blocks


def _make_block(parent: DomNode, subs: list[DomNode], sig: tuple[str, ...],
                document: DomNode) -> Block:
    return Block(
        parent_selector=selector_of(parent, document),
        sub_block_selectors=[selector_of(s, document) for s in subs],
        signature=sig,
        metrics=block_metrics(subs),
    )


def locate_sub_blocks(page: DomNode, block: Block) -> list[DomNode]:
    """Find a stored block's sub-blocks on a fresh page.

    The parent position is assumed stable; the sub-blocks are whatever
    element children currently carry the recorded signature, so row-count
    changes between invocations are absorbed.
    """
    parent = resolve_selector(page, block.parent_selector)
    return [c for c in parent.element_children()
            if structure_signature(c) == block.signature]


def block_fields(block: Block, document: DomNode) -> list[list[dict]]:
    """Per-sub-block carrier skeletons, aligned positionally.

    Raises AlignmentError when sub-blocks disagree on their per-category
    carrier counts (the rules document could not serve them uniformly).
    """
    from .rules import carrier_skeletons  # local import: rules builds on segmenter

    return carrier_skeletons(block, document)
