from pathlib import Path

import pytest

from webwrap.dom import parse_document
from webwrap.forms import extract_forms
from webwrap.invoker import build_form_request
from webwrap.provider import FixtureProvider, PageRequest
from webwrap.registry import ServiceBlock, ServiceDefinition
from webwrap.rules import generate_rules, suggest_field_names
from webwrap.segmenter import segment
from webwrap.sorter import sort_blocks

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

EARTHQUAKE_QUERY_URL = "http://fixtures.test/earthquake/history"
DOUBAN_URL = "http://fixtures.test/douban/chart"
SHOP_URL = "http://fixtures.test/shop/page1"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def provider() -> FixtureProvider:
    return FixtureProvider(FIXTURES)


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def fetch_parsed(provider, url):
    data, final_url = provider.fetch(PageRequest(url=url))
    return parse_document(data, base_url=final_url,
                          iframe_loader=provider.iframe_loader), final_url


def build_earthquake_service(provider, api_key="a1f6de13") -> ServiceDefinition:
    """The dynamic-page case study assembled outside the HTTP flow."""
    doc, url = fetch_parsed(provider, EARTHQUAKE_QUERY_URL)
    analysis = extract_forms(doc, url)
    analysis.main_form_index = 0
    form = analysis.forms[0]
    form.main_btn_index = 0

    by_name = {f.name: f for f in form.input_list}
    bindings = {
        "start_time": by_name["start_time"].css_selector.serialize(),
        "end_time": by_name["end_time"].css_selector.serialize(),
    }
    examples = {"start_time": "2019-01-03", "end_time": "2019-01-19"}
    overrides = {bindings[p]: examples[p] for p in bindings}
    request = build_form_request(doc, form, overrides, url, button_index=0)
    data, result_url = provider.fetch(request)
    result_doc = parse_document(data, base_url=result_url,
                                iframe_loader=provider.iframe_loader)
    ranked = sort_blocks(segment(result_doc))
    table_block = ranked[0].block
    rules = generate_rules(table_block, result_doc)
    names = suggest_field_names(table_block, rules, result_doc)
    return ServiceDefinition(
        name="earthquake-history",
        description="seismic events by date range",
        source_url=url,
        form_analysis=analysis,
        field_bindings=bindings,
        example_values=examples,
        blocks=[ServiceBlock("seismic", table_block, rules, names)],
        id=78,
        api_key=api_key,
    )


def _static_service(provider, url, picks, name, service_id, api_key=None):
    doc, final_url = fetch_parsed(provider, url)
    ranked = sort_blocks(segment(doc))
    blocks = []
    for block_name, index in picks:
        block = ranked[index].block
        rules = generate_rules(block, doc)
        names = suggest_field_names(block, rules, doc)
        blocks.append(ServiceBlock(block_name, block, rules, names))
    return ServiceDefinition(
        name=name, source_url=final_url, blocks=blocks,
        id=service_id, api_key=api_key,
    )


def build_shop_service(provider, api_key=None) -> ServiceDefinition:
    return _static_service(provider, SHOP_URL, [("products", 0)], "shop", 11,
                           api_key=api_key)


def build_douban_service(provider, api_key=None) -> ServiceDefinition:
    doc, final_url = fetch_parsed(provider, DOUBAN_URL)
    ranked = sort_blocks(segment(doc))
    by_parent_tagclass = {}
    for rb in ranked:
        from webwrap.dom import resolve_selector

        parent = resolve_selector(doc, rb.block.parent_selector)
        by_parent_tagclass[parent.attr("class")] = rb.block
    blocks = []
    for block_name, cls in [("new_movies", "new-movies"),
                            ("weekly_picks", "weekly"),
                            ("box_office", "boxoffice")]:
        block = by_parent_tagclass[cls]
        rules = generate_rules(block, doc)
        names = suggest_field_names(block, rules, doc)
        blocks.append(ServiceBlock(block_name, block, rules, names))
    return ServiceDefinition(
        name="movie-charts", source_url=final_url, blocks=blocks,
        id=12, api_key=api_key,
    )
