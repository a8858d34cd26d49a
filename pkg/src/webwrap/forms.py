"""Query-form detection: fields, button candidates, synthetic forms.

Every ``<form>`` (including ones inside loaded iframes) yields a record
of its fillable fields and a button-candidate list ordered by a priority
ladder: submit inputs, button inputs, ``<button>`` tags, then click-bound
anchors, images, and other elements. Click-bound elements outside any
form that sit next to fillable inputs are grouped into synthetic forms.

Click EventListeners cannot be observed without a script runtime; the
static markers recognized instead are an ``onclick`` attribute, a
``javascript:`` href, and ``role="button"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dom import DomNode, SelectorPath, iter_elements, selector_of, text_segments

FIELD_TAGS = {"input", "select", "datalist", "textarea"}
BUTTON_INPUT_TYPES = {"submit", "button", "image", "reset"}
NON_FILLABLE_INPUT_TYPES = {"hidden", "password", "file"}

KIND_INPUT_SUBMIT = "input-submit"
KIND_INPUT_BUTTON = "input-button"
KIND_BUTTON_TAG = "button-tag"
KIND_ANCHOR = "anchor"
KIND_IMAGE = "image"
KIND_OTHER = "click-bound-other"

_LADDER = (KIND_INPUT_SUBMIT, KIND_INPUT_BUTTON, KIND_BUTTON_TAG,
           KIND_ANCHOR, KIND_IMAGE, KIND_OTHER)


@dataclass
class FieldRecord:
    css_selector: SelectorPath
    input_type: str
    name: str = ""
    value: str = ""
    placeholder: str = ""
    description: str = ""
    fillable: bool = True
    checked: Optional[bool] = None       # checkbox only
    select_index: Optional[int] = None   # select/datalist only
    ui_mark: str = ""

    def to_json(self) -> dict:
        doc = {
            "css_selector": self.css_selector.serialize(),
            "type": self.input_type,
            "name": self.name,
            "value": self.value,
            "placeholder": self.placeholder,
            "description": self.description,
            "fillable": self.fillable,
            "ui_mark": self.ui_mark,
        }
        if self.checked is not None:
            doc["checked"] = self.checked
        if self.select_index is not None:
            doc["select_index"] = self.select_index
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "FieldRecord":
        return cls(
            css_selector=SelectorPath.parse(doc["css_selector"]),
            input_type=doc["type"],
            name=doc.get("name", ""),
            value=doc.get("value", ""),
            placeholder=doc.get("placeholder", ""),
            description=doc.get("description", ""),
            fillable=doc.get("fillable", True),
            checked=doc.get("checked"),
            select_index=doc.get("select_index"),
            ui_mark=doc.get("ui_mark", ""),
        )


@dataclass
class ButtonCandidate:
    css_selector: SelectorPath
    source_kind: str
    confidence_rank: int
    label: str = ""
    ui_mark: str = ""

    def to_json(self) -> dict:
        return {
            "css_selector": self.css_selector.serialize(),
            "source_kind": self.source_kind,
            "confidence_rank": self.confidence_rank,
            "label": self.label,
            "ui_mark": self.ui_mark,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ButtonCandidate":
        return cls(
            css_selector=SelectorPath.parse(doc["css_selector"]),
            source_kind=doc["source_kind"],
            confidence_rank=doc["confidence_rank"],
            label=doc.get("label", ""),
            ui_mark=doc.get("ui_mark", ""),
        )


@dataclass
class FormRecord:
    css_selector: SelectorPath
    input_list: list[FieldRecord] = field(default_factory=list)
    query_button_list: list[ButtonCandidate] = field(default_factory=list)
    main_btn_index: Optional[int] = None
    synthetic: bool = False

    def to_json(self) -> dict:
        return {
            "css_selector": self.css_selector.serialize(),
            "main_btn_index": self.main_btn_index,
            "input_list": [f.to_json() for f in self.input_list],
            "query_button_list": [b.to_json() for b in self.query_button_list],
            "synthetic": self.synthetic,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FormRecord":
        return cls(
            css_selector=SelectorPath.parse(doc["css_selector"]),
            input_list=[FieldRecord.from_json(f) for f in doc.get("input_list", [])],
            query_button_list=[ButtonCandidate.from_json(b) for b in doc.get("query_button_list", [])],
            main_btn_index=doc.get("main_btn_index"),
            synthetic=doc.get("synthetic", False),
        )


@dataclass
class FormAnalysis:
    url: str
    forms: list[FormRecord] = field(default_factory=list)
    main_form_index: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "url": self.url,
            "main_form_index": self.main_form_index,
            "forms": [f.to_json() for f in self.forms],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FormAnalysis":
        return cls(
            url=doc.get("url", ""),
            forms=[FormRecord.from_json(f) for f in doc.get("forms", [])],
            main_form_index=doc.get("main_form_index"),
        )


def detect_click_bound(element: DomNode) -> bool:
    """Static stand-in for click-listener detection."""
    if element.kind != "element":
        return False
    if "onclick" in element.attrs:
        return True
    href = element.attr("href").strip().lower()
    if href.startswith("javascript:"):
        return True
    return element.attr("role").strip().lower() == "button"


def _element_label(el: DomNode) -> str:
    value = el.attr("value").strip()
    if value:
        return value
    parts: list[str] = []
    stack = [el]
    while stack:
        node = stack.pop()
        if node.kind == "text":
            parts.append(node.text.strip())
        elif node.kind == "element":
            stack.extend(reversed(node.children))
    return " ".join(p for p in parts if p)[:80]


def _field_record(el: DomNode, document: DomNode) -> Optional[FieldRecord]:
    tag = el.tag
    if tag == "input":
        input_type = el.attr("type", "text").strip().lower() or "text"
        if input_type in BUTTON_INPUT_TYPES:
            return None
        fillable = input_type not in NON_FILLABLE_INPUT_TYPES
        record = FieldRecord(
            css_selector=selector_of(el, document),
            input_type=input_type,
            name=el.attr("name"),
            value=el.attr("value"),
            placeholder=el.attr("placeholder"),
            fillable=fillable,
        )
        if input_type == "checkbox":
            record.checked = "checked" in el.attrs
    elif tag in ("select", "datalist"):
        options = [c for c in el.element_children() if c.tag == "option"]
        selected = 0
        for i, opt in enumerate(options):
            if "selected" in opt.attrs:
                selected = i
                break
        value = ""
        if options:
            opt = options[selected]
            value = opt.attr("value") or (text_segments(opt)[0].content.strip()
                                          if text_segments(opt) else "")
        record = FieldRecord(
            css_selector=selector_of(el, document),
            input_type=tag,
            name=el.attr("name"),
            value=value,
            placeholder="",
            select_index=selected,
        )
    elif tag == "textarea":
        segs = text_segments(el)
        record = FieldRecord(
            css_selector=selector_of(el, document),
            input_type="textarea",
            name=el.attr("name"),
            value=segs[0].content.strip() if segs else "",
            placeholder=el.attr("placeholder"),
        )
    else:
        return None
    record.description = record.placeholder or record.name
    return record


def _subtree_elements(root: DomNode) -> list[DomNode]:
    return list(iter_elements(root, enter_frames=True))


def _button_candidates(container: DomNode, document: DomNode,
                       extra: list[DomNode] | None = None) -> list[ButtonCandidate]:
    pool = _subtree_elements(container) if extra is None else extra
    taken: set[int] = set()
    out: list[ButtonCandidate] = []
    for rung, kind in enumerate(_LADDER, start=1):
        for el in pool:
            if id(el) in taken:
                continue
            if kind == KIND_INPUT_SUBMIT:
                hit = el.tag == "input" and el.attr("type", "").lower() == "submit"
            elif kind == KIND_INPUT_BUTTON:
                hit = el.tag == "input" and el.attr("type", "").lower() == "button"
            elif kind == KIND_BUTTON_TAG:
                hit = el.tag == "button"
            elif kind == KIND_ANCHOR:
                hit = el.tag == "a" and detect_click_bound(el)
            elif kind == KIND_IMAGE:
                hit = (el.tag == "img" and detect_click_bound(el)) or \
                      (el.tag == "input" and el.attr("type", "").lower() == "image")
            else:
                hit = el.tag not in ("input", "button", "a", "img") and detect_click_bound(el)
            if hit:
                taken.add(id(el))
                out.append(ButtonCandidate(
                    css_selector=selector_of(el, document),
                    source_kind=kind,
                    confidence_rank=rung,
                    label=_element_label(el),
                ))
    return out


def _within(el: DomNode, containers: list[DomNode]) -> bool:
    cur = el
    while cur is not None:
        if any(cur is c for c in containers):
            return True
        cur = cur.parent
    return False


def extract_forms(document: DomNode, source_url: str = "") -> FormAnalysis:
    """Detect forms, their fields, and query-button candidates (T/B marked)."""
    all_elements = _subtree_elements(document)
    form_els = [el for el in all_elements if el.tag == "form"]

    records: list[FormRecord] = []
    for form_el in form_els:
        fields = []
        for el in _subtree_elements(form_el):
            if el.tag in FIELD_TAGS:
                rec = _field_record(el, document)
                if rec is not None:
                    fields.append(rec)
        records.append(FormRecord(
            css_selector=selector_of(form_el, document),
            input_list=fields,
            query_button_list=_button_candidates(form_el, document),
        ))

    # Click-bound elements outside every form, grouped with the free
    # fillable inputs that share their parent or grandparent.
    free_fields = [el for el in all_elements
                   if el.tag in FIELD_TAGS and not _within(el, form_els)]
    fillable_free = []
    for el in free_fields:
        rec = _field_record(el, document)
        if rec is not None and rec.fillable:
            fillable_free.append(el)

    def is_outside_trigger(el: DomNode) -> bool:
        if _within(el, form_els):
            return False
        if el.tag == "input" and el.attr("type", "").lower() in ("submit", "button", "image"):
            return True
        if el.tag == "button":
            return True
        return detect_click_bound(el)

    groups: dict[int, dict] = {}
    for el in all_elements:
        if not is_outside_trigger(el):
            continue
        container = None
        for candidate in (el.parent, el.parent.parent if el.parent else None):
            if candidate is None or candidate.kind != "element":
                continue
            if any(_within(f, [candidate]) for f in fillable_free):
                container = candidate
                break
        if container is None:
            continue
        group = groups.setdefault(id(container), {"container": container, "triggers": []})
        group["triggers"].append(el)

    for group in groups.values():
        container = group["container"]
        fields = []
        for el in free_fields:
            if _within(el, [container]):
                rec = _field_record(el, document)
                if rec is not None:
                    fields.append(rec)
        if not fields:
            continue
        records.append(FormRecord(
            css_selector=selector_of(container, document),
            input_list=fields,
            query_button_list=_button_candidates(container, document, extra=group["triggers"]),
            synthetic=True,
        ))

    analysis = FormAnalysis(url=source_url, forms=records)
    _assign_marks(analysis)
    return analysis


def _assign_marks(analysis: FormAnalysis) -> None:
    t = b = 0
    for form in analysis.forms:
        for rec in form.input_list:
            if rec.fillable:
                t += 1
                rec.ui_mark = f"T{t}"
        for btn in form.query_button_list:
            b += 1
            btn.ui_mark = f"B{b}"
