"""webwrap: convert data embedded in web pages into callable services."""

from .dom import (
    DomNode, RankedText, SelectorPath, parse_document, resolve_selector,
    selector_of, serialize_html, structural_equal, text_segments,
)
from .forms import FormAnalysis, FormRecord, detect_click_bound, extract_forms
from .invoker import (
    FilterPredicate, Invoker, PaginationLexicon, analyze_params,
    filter_records, find_next_page,
)
from .provider import FixtureProvider, LiveProvider, PageRequest
from .registry import Registry, ServiceBlock, ServiceDefinition
from .rules import ExtractionRules, FieldName, extract, generate_rules, suggest_field_names
from .segmenter import Block, BlockMetrics, block_fields, segment, similar, structure_signature
from .sorter import RankedBlock, sort_blocks

__version__ = "0.1.0"

__all__ = [
    "Block", "BlockMetrics", "DomNode", "ExtractionRules", "FieldName",
    "FilterPredicate", "FixtureProvider", "FormAnalysis", "FormRecord",
    "Invoker", "LiveProvider", "PageRequest", "PaginationLexicon",
    "RankedBlock", "RankedText", "Registry", "SelectorPath", "ServiceBlock",
    "ServiceDefinition", "analyze_params", "block_fields",
    "detect_click_bound", "extract", "extract_forms", "filter_records",
    "find_next_page", "generate_rules", "parse_document", "resolve_selector",
    "segment", "selector_of", "serialize_html", "similar", "sort_blocks",
    "structural_equal", "structure_signature", "suggest_field_names",
    "text_segments",
]
