"""HTML tree model, error-tolerant parsing, and positional selectors.

The tree distinguishes three node kinds: elements, text segments, and
document roots. Document roots appear twice: once for the parsed page and
once under every ``<iframe>`` whose source the page provider could load.
Selector paths address elements positionally (``div>ul>li:nth-child(3)``)
and cross iframe boundaries with the ``>f>`` separator.

Trees are immutable by convention once parsing returns; nothing here
mutates a finished tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html import escape
from html.parser import HTMLParser
from typing import Callable, Iterator, NamedTuple

from .errors import DecodeError, FrameError, NotInDocumentError, ResolutionError

ELEMENT = "element"
TEXT = "text"
DOCUMENT = "document"

FRAME_MARK = ">f>"

VOID_ELEMENTS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

# Start tags that implicitly close an open element of the given kind,
# unless one of the stop tags is reached first on the open stack.
_IMPLIED_CLOSES: dict[str, tuple[frozenset[str], frozenset[str]]] = {
    "li": (frozenset({"li"}), frozenset({"ul", "ol", "menu"})),
    "td": (frozenset({"td", "th"}), frozenset({"tr", "table"})),
    "th": (frozenset({"td", "th"}), frozenset({"tr", "table"})),
    "tr": (frozenset({"tr", "td", "th"}), frozenset({"table", "thead", "tbody", "tfoot"})),
    "thead": (frozenset({"tr", "td", "th", "thead", "tbody", "tfoot"}), frozenset({"table"})),
    "tbody": (frozenset({"tr", "td", "th", "thead", "tbody", "tfoot"}), frozenset({"table"})),
    "tfoot": (frozenset({"tr", "td", "th", "thead", "tbody", "tfoot"}), frozenset({"table"})),
    "option": (frozenset({"option"}), frozenset({"select", "datalist"})),
    "p": (frozenset({"p"}), frozenset({"div", "td", "th", "li", "section", "article", "body", "html", "form", "blockquote"})),
}


class DomNode:
    """One node of the parsed tree.

    kind is one of ELEMENT / TEXT / DOCUMENT. Elements carry ``tag``,
    ``attrs`` and ``children``; text segments carry ``text``; document
    roots carry ``children`` plus the ``base_url`` they were fetched from.
    ``frame_depth`` counts enclosing iframe boundaries.
    """

    __slots__ = ("kind", "tag", "attrs", "children", "text", "parent", "frame_depth", "base_url")

    def __init__(self, kind: str, tag: str = "", attrs: dict[str, str] | None = None,
                 text: str = "", frame_depth: int = 0, base_url: str = ""):
        self.kind = kind
        self.tag = tag
        self.attrs = attrs if attrs is not None else {}
        self.children: list[DomNode] = []
        self.text = text
        self.parent: DomNode | None = None
        self.frame_depth = frame_depth
        self.base_url = base_url

    def __repr__(self) -> str:
        if self.kind == TEXT:
            return f"DomNode(#text {self.text[:30]!r})"
        if self.kind == DOCUMENT:
            return f"DomNode(#document children={len(self.children)})"
        return f"DomNode(<{self.tag}> children={len(self.children)})"

    @property
    def is_element(self) -> bool:
        return self.kind == ELEMENT

    def element_children(self) -> list[DomNode]:
        return [c for c in self.children if c.kind == ELEMENT]

    def attr(self, name: str, default: str = "") -> str:
        return self.attrs.get(name, default)

    def inner_document(self) -> DomNode | None:
        """The loaded document root under an iframe element, if any."""
        for child in self.children:
            if child.kind == DOCUMENT:
                return child
        return None


class RankedText(NamedTuple):
    """A direct text segment and its 1-based position among its siblings."""

    content: str
    rank: int


class SelectorStep(NamedTuple):
    """One path step: tag plus 1-based element-child index.

    ``index`` is None when the serialized form omits ``:nth-child`` (the
    tag alone is unambiguous at that level).
    """

    tag: str
    index: int | None

    def serialize(self) -> str:
        if self.index is None:
            return self.tag
        return f"{self.tag}:nth-child({self.index})"


_STEP_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9_-]*)(?::nth-child\((\d+)\))?$")


@dataclass(frozen=True)
class SelectorPath:
    """A positional selector: frames of steps, frames joined by `>f>`."""

    frames: tuple[tuple[SelectorStep, ...], ...]

    def serialize(self) -> str:
        return FRAME_MARK.join(">".join(s.serialize() for s in frame) for frame in self.frames)

    def __str__(self) -> str:
        return self.serialize()

    @property
    def frame_count(self) -> int:
        """Number of `>f>` separators."""
        return len(self.frames) - 1

    @classmethod
    def parse(cls, text: str) -> "SelectorPath":
        if not text:
            return cls(frames=((),))
        frames = []
        for chunk in text.split(FRAME_MARK):
            steps = []
            for raw in chunk.split(">"):
                m = _STEP_RE.match(raw.strip())
                if not m:
                    raise ValueError(f"bad selector step {raw!r} in {text!r}")
                steps.append(SelectorStep(m.group(1).lower(), int(m.group(2)) if m.group(2) else None))
            frames.append(tuple(steps))
        return cls(frames=tuple(frames))

    @property
    def is_empty(self) -> bool:
        return self.frames == ((),)


# An iframe loader maps (base_url, src) to (html, resolved_url) or None.
IframeLoader = Callable[[str, str], "tuple[bytes | str, str] | None"]


class _TreeBuilder(HTMLParser):
    """Error-tolerant tree construction on top of the stdlib tokenizer.

    Repairs applied: void elements never take children, a small table of
    implied end tags (li/td/tr/option/p families), stray end tags are
    dropped, unclosed elements close with their parent. Adjacent text is
    merged so text ranks stay stable.
    """

    def __init__(self, frame_depth: int, base_url: str):
        super().__init__(convert_charrefs=True)
        self.root = DomNode(DOCUMENT, frame_depth=frame_depth, base_url=base_url)
        self.stack: list[DomNode] = [self.root]
        self.frame_depth = frame_depth

    def _append(self, node: DomNode) -> None:
        node.parent = self.stack[-1]
        self.stack[-1].children.append(node)

    def _append_text(self, data: str) -> None:
        if not data:
            return
        top = self.stack[-1]
        if top.children and top.children[-1].kind == TEXT:
            top.children[-1].text += data
        else:
            self._append(DomNode(TEXT, text=data, frame_depth=self.frame_depth))

    def _close_implied(self, tag: str) -> None:
        rule = _IMPLIED_CLOSES.get(tag)
        if rule is None:
            return
        targets, stops = rule
        cut = None
        for i in range(len(self.stack) - 1, 0, -1):
            t = self.stack[i].tag
            if t in stops:
                break
            if t in targets:
                cut = i  # keep scanning: close the outermost open target too
        if cut is not None:
            del self.stack[cut:]

    def handle_starttag(self, tag, attrs):
        self._close_implied(tag)
        attr_map: dict[str, str] = {}
        for name, value in attrs:
            attr_map[name] = value if value is not None else ""
        node = DomNode(ELEMENT, tag=tag, attrs=attr_map, frame_depth=self.frame_depth)
        self._append(node)
        if tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        attr_map = {name: (value if value is not None else "") for name, value in attrs}
        self._append(DomNode(ELEMENT, tag=tag, attrs=attr_map, frame_depth=self.frame_depth))

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray close tag: ignore

    def handle_data(self, data):
        self._append_text(data)


def _build_tree(text: str, frame_depth: int, base_url: str) -> DomNode:
    builder = _TreeBuilder(frame_depth, base_url)
    builder.feed(text)
    builder.close()
    return builder.root


def parse_document(html: bytes | str, encoding: str | None = None, base_url: str = "",
                   iframe_loader: IframeLoader | None = None, _frame_depth: int = 0,
                   _max_frame_depth: int = 5) -> DomNode:
    """Parse HTML into a document-root DomNode.

    ``html`` may be bytes (decoded with ``encoding``, default utf-8) or str.
    When ``iframe_loader`` is given, every ``<iframe src=...>`` is loaded
    through it and the inner tree is attached as a document-root child;
    iframes whose source is unavailable stay opaque.
    """
    if isinstance(html, bytes):
        try:
            text = html.decode(encoding or "utf-8")
        except (UnicodeDecodeError, LookupError) as exc:
            raise DecodeError(f"cannot decode page as {encoding or 'utf-8'}: {exc}") from exc
    else:
        text = html

    root = _build_tree(text, _frame_depth, base_url)

    if iframe_loader is not None and _frame_depth < _max_frame_depth:
        for el in iter_elements(root, enter_frames=False):
            if el.tag != "iframe":
                continue
            src = el.attr("src")
            if not src:
                continue
            loaded = iframe_loader(base_url, src)
            if loaded is None:
                continue
            inner_html, inner_url = loaded
            inner = parse_document(inner_html, encoding=encoding, base_url=inner_url,
                                   iframe_loader=iframe_loader,
                                   _frame_depth=el.frame_depth + 1,
                                   _max_frame_depth=_max_frame_depth)
            inner.parent = el
            el.children.clear()
            el.children.append(inner)
    return root


def iter_elements(root: DomNode, enter_frames: bool = True) -> Iterator[DomNode]:
    """Preorder walk over element nodes, optionally crossing iframe boundaries."""
    stack = list(reversed(root.children)) if root.kind != ELEMENT else [root]
    while stack:
        node = stack.pop()
        if node.kind == ELEMENT:
            yield node
            stack.extend(reversed([c for c in node.children
                                   if c.kind == ELEMENT or (c.kind == DOCUMENT and enter_frames)]))
        elif node.kind == DOCUMENT:
            stack.extend(reversed(node.children))


def text_segments(node: DomNode) -> list[RankedText]:
    """Direct, non-whitespace text segments of an element with 1-based ranks."""
    out: list[RankedText] = []
    rank = 0
    for child in node.children:
        if child.kind == TEXT and child.text.strip():
            rank += 1
            out.append(RankedText(child.text, rank))
    return out


def _step_for(node: DomNode) -> SelectorStep:
    # the index is written exactly when the tag alone is ambiguous at
    # this level; a unique tag resolves by name wherever it sits
    parent = node.parent
    assert parent is not None
    siblings = parent.element_children()
    same_tag = sum(1 for s in siblings if s.tag == node.tag)
    if same_tag > 1:
        return SelectorStep(node.tag, siblings.index(node) + 1)
    return SelectorStep(node.tag, None)


def selector_of(node: DomNode, document: DomNode) -> SelectorPath:
    """Positional selector of ``node`` within ``document`` (round-trip exact)."""
    if node.kind != ELEMENT:
        raise NotInDocumentError("selectors address element nodes only")
    frames: list[tuple[SelectorStep, ...]] = []
    steps: list[SelectorStep] = []
    cur = node
    while True:
        parent = cur.parent
        if parent is None:
            raise NotInDocumentError("node is not attached to the given document")
        steps.insert(0, _step_for(cur))
        if parent.kind == DOCUMENT:
            frames.insert(0, tuple(steps))
            steps = []
            if parent is document:
                return SelectorPath(frames=tuple(frames))
            holder = parent.parent
            if holder is None or holder.kind != ELEMENT or holder.tag != "iframe":
                raise NotInDocumentError("node is not attached to the given document")
            cur = holder
        else:
            cur = parent


def resolve_steps(root: DomNode, steps: tuple[SelectorStep, ...], *,
                  tag_equiv: Callable[[str, str], bool] | None = None,
                  base_index: int = 0) -> DomNode:
    """Resolve a single frame of steps below ``root``.

    ``tag_equiv(step_tag, node_tag)`` overrides exact tag comparison; the
    rule engine uses it to treat ``td`` and ``th`` as interchangeable.
    """
    same = tag_equiv or (lambda a, b: a == b)
    cur = root
    for i, step in enumerate(steps):
        elems = cur.element_children()
        nxt = None
        if step.index is not None:
            if 1 <= step.index <= len(elems) and same(step.tag, elems[step.index - 1].tag):
                nxt = elems[step.index - 1]
        else:
            for el in elems:
                if same(step.tag, el.tag):
                    nxt = el
                    break
        if nxt is None:
            raise ResolutionError(
                f"no node at step {step.serialize()!r}", step_index=base_index + i)
        cur = nxt
    return cur


def resolve_selector(document: DomNode, path: SelectorPath) -> DomNode:
    """Resolve ``path`` against a document root, descending at each `>f>`."""
    cur = document
    offset = 0
    for fi, frame in enumerate(path.frames):
        if fi > 0:
            if cur.kind != ELEMENT or cur.tag != "iframe":
                raise FrameError(f"`{FRAME_MARK}` used on non-iframe element <{cur.tag}>")
            inner = cur.inner_document()
            if inner is None:
                raise FrameError("iframe has no loaded inner document")
            cur = inner
        cur = resolve_steps(cur, frame, base_index=offset)
        offset += len(frame)
    return cur


def serialize_html(node: DomNode) -> str:
    """Serialize a tree back to HTML. Loaded iframe documents are omitted
    (they belong to a different fetch)."""
    parts: list[str] = []
    _serialize_into(node, parts)
    return "".join(parts)


def _serialize_into(node: DomNode, parts: list[str]) -> None:
    if node.kind == DOCUMENT:
        for child in node.children:
            _serialize_into(child, parts)
        return
    if node.kind == TEXT:
        parent = node.parent
        if parent is not None and parent.kind == ELEMENT and parent.tag in ("script", "style"):
            parts.append(node.text)
        else:
            parts.append(escape(node.text, quote=False))
        return
    attrs = "".join(
        f' {name}' if value == "" else f' {name}="{escape(value)}"'
        for name, value in node.attrs.items()
    )
    if node.tag in VOID_ELEMENTS:
        parts.append(f"<{node.tag}{attrs}>")
        return
    parts.append(f"<{node.tag}{attrs}>")
    for child in node.children:
        if child.kind == DOCUMENT:
            continue
        _serialize_into(child, parts)
    parts.append(f"</{node.tag}>")


def structural_equal(a: DomNode, b: DomNode) -> bool:
    """Deep structural comparison: kind, tag, attributes, text, children."""
    if a.kind != b.kind:
        return False
    if a.kind == TEXT:
        return a.text == b.text
    if a.kind == ELEMENT and (a.tag != b.tag or a.attrs != b.attrs):
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structural_equal(x, y) for x, y in zip(a.children, b.children))


def owning_document(node: DomNode) -> DomNode:
    """The nearest enclosing document root (the node's own frame)."""
    cur: DomNode | None = node
    while cur is not None:
        if cur.kind == DOCUMENT:
            return cur
        cur = cur.parent
    raise NotInDocumentError("node has no document root")


def top_document(node: DomNode) -> DomNode:
    """The outermost document root, crossing iframe boundaries upward."""
    doc = owning_document(node)
    while doc.parent is not None:
        doc = owning_document(doc.parent)
    return doc
