"""Acceptance suite: one test per acceptance criterion, fixture- and
property-based, fully offline. Each test prints one PASS/FAIL line
(visible with ``pytest -s`` or in the captured output of failures).
"""

import json
import random
import time
from contextlib import contextmanager

import pytest
from click.testing import CliRunner
from starlette.testclient import TestClient

from webwrap.api import EngineConfig, create_app
from webwrap.cli import main as cli_main
from webwrap.dom import iter_elements, parse_document, resolve_selector, selector_of
from webwrap.invoker import FilterPredicate, filter_records
from webwrap.provider import FixtureProvider, PageRequest
from webwrap.registry import Registry
from webwrap.segmenter import segment
from webwrap.sorter import sort_blocks

from conftest import DOUBAN_URL, EARTHQUAKE_QUERY_URL, FIXTURES, read_fixture
from genpages import PageGenerator
from oracles import brute_force_filter, brute_force_sort, grouped_record
from test_api import douban_draft, earthquake_draft
from test_sorter import as_pairs, blocks_from_triples


@contextmanager
def criterion(name: str):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL ({time.monotonic() - started:.2f}s)")
        raise
    print(f"ACCEPTANCE {name}: PASS ({time.monotonic() - started:.2f}s)")


@pytest.fixture()
def client(tmp_path):
    config = EngineConfig(store_dir=tmp_path / "store", fixtures_dir=FIXTURES)
    return TestClient(create_app(config))


@pytest.fixture(scope="module")
def generated_pages():
    gen = PageGenerator(seed=20190103)
    return [gen.make_page(page_index=i) for i in range(100)]


def parse_gen(page):
    return parse_document(page.html, base_url=page.base_url,
                          iframe_loader=page.iframe_loader)


def test_earthquake_end_to_end(client):
    with criterion("earthquake end-to-end"):
        started = time.monotonic()

        analysis = client.post("/wrappers/analyze", json={
            "source": {"url": EARTHQUAKE_QUERY_URL}}).json()["analysis"]
        assert len(analysis["forms"]) == 1
        form = analysis["forms"][0]
        fillable = [f for f in form["input_list"] if f["fillable"]]
        assert len(fillable) == 10
        assert [f["ui_mark"] for f in fillable] == [f"T{i}" for i in range(1, 11)]
        buttons = form["query_button_list"]
        assert len(buttons) == 1
        assert buttons[0]["source_kind"] == "input-submit"
        assert buttons[0]["ui_mark"] == "B1"

        segmented = client.post("/wrappers/segment", json={
            "source": {"url": EARTHQUAKE_QUERY_URL},
            "form_choice": 0, "button_choice": 0,
            "field_values": {"start_time": "2019-01-03", "end_time": "2019-01-19"},
        }).json()
        assert len(segmented["blocks"]) == 3
        top = segmented["blocks"][0]
        assert top["rank"] == 1
        table_parent = top["block"]["parent_selector"]
        assert table_parent.endswith("table")

        created = client.post("/wrappers", json=earthquake_draft(client)).json()
        invoked = client.get(created["api_url"], params={
            "start_time": "2019-01-01", "end_time": "2019-01-18",
            "Magnitude": "20", "key": created["api_key"]})
        assert invoked.status_code == 200
        rows = invoked.json()["blocks"]["seismic"]
        assert len(rows) == 2
        assert all(row["Magnitude"] == "20" for row in rows)

        assert time.monotonic() - started < 5.0


def test_douban_end_to_end(client):
    with criterion("douban end-to-end"):
        started = time.monotonic()

        # skip-form path: no form on a static page, three blocks selected
        analysis = client.post("/wrappers/analyze", json={
            "source": {"url": DOUBAN_URL}}).json()["analysis"]
        assert analysis["forms"] == []

        created = client.post("/wrappers", json=douban_draft(client)).json()
        invoked = client.get(created["api_url"], params={"key": created["api_key"]})
        assert invoked.status_code == 200
        blocks = invoked.json()["blocks"]
        assert {name: len(records) for name, records in blocks.items()} == {
            "new_movies": 6, "weekly_picks": 4, "box_office": 5}

        assert time.monotonic() - started < 5.0


def test_segmentation_oracle(generated_pages):
    with criterion("segmentation oracle (100 pages, precision=recall=1.0)"):
        started = time.monotonic()
        for page in generated_pages:
            doc = parse_gen(page)
            planted = {}
            for el in iter_elements(doc):
                marker = el.attr("data-plant")
                if marker:
                    planted[id(el)] = [id(c) for c in el.element_children()]
            assert len(planted) == len(page.lists)
            found = {}
            for block in segment(doc):
                parent = resolve_selector(doc, block.parent_selector)
                found[id(parent)] = [id(resolve_selector(doc, s))
                                     for s in block.sub_block_selectors]
            assert found == planted  # exact: no misses, no extras
        assert time.monotonic() - started < 30.0


def test_rule_round_trip(generated_pages):
    with criterion("rule round-trip (100 pages exact)"):
        from webwrap.rules import extract, generate_rules

        for page in generated_pages:
            doc = parse_gen(page)
            planted = {el.attr("data-plant"): el for el in iter_elements(doc)
                       if el.attr("data-plant")}
            by_container = {}
            for block in segment(doc):
                parent = resolve_selector(doc, block.parent_selector)
                by_container[id(parent)] = block
            for listed in page.lists:
                block = by_container[id(planted[listed.marker])]
                rules = generate_rules(block, doc)
                records = extract(doc, block.sub_block_selectors, rules)
                assert [grouped_record(rules, r) for r in records] == listed.records


def test_sorter_oracle():
    with criterion("sorter oracle (500 random metric sets + invariants)"):
        rng = random.Random(41)
        for _ in range(500):
            m = rng.randint(1, 14)
            n = rng.randint(1, 5)
            triples = [(rng.randint(2, 12), rng.randint(0, 60), rng.randint(0, 90))
                       for _ in range(m)]
            blocks = blocks_from_triples(triples)
            ranked = sort_blocks(blocks, n=n)
            pairs = as_pairs(blocks, ranked)
            assert pairs == brute_force_sort(triples, n)

            # membership invariant
            keep = 2 * n
            tops = [set(sorted(range(m), key=lambda i: (-triples[i][k], i))[:keep])
                    for k in range(3)]
            for i, fallback in pairs:
                if not fallback:
                    assert all(i in top for top in tops)
            assert len(pairs) == min(n, m)

            # monotonicity: boosting a chosen block keeps it chosen
            if pairs:
                target = rng.choice(pairs)[0]
                c, w, s = triples[target]
                boosted = list(triples)
                boosted[target] = (c + rng.randint(1, 5), w + rng.randint(1, 5),
                                   s + rng.randint(1, 5))
                blocks2 = blocks_from_triples(boosted)
                chosen2 = {i for i, _ in as_pairs(blocks2, sort_blocks(blocks2, n=n))}
                assert target in chosen2


def test_filter_oracle():
    with criterion("filter oracle (1000 random cases + named cases)"):
        # named cases from the invocation-parameter design
        products = [{"price": "35", "name": "a"}, {"price": "12", "name": "b"},
                    {"price": "35", "name": "c"}]
        out = filter_records(products, [FilterPredicate("price", "eq", "35")])
        assert [r["name"] for r in out] == ["a", "c"]

        nested = [{"pc": {"href": "u", "price": "35"}},
                  {"pc": {"href": "v", "price": "12"}}]
        out = filter_records(nested, [FilterPredicate("pc.price", "eq", "35")])
        assert out == [nested[0]]

        rng = random.Random(20190118)
        paths = ["a", "b", "c", "pc.price", "pc.href", "missing"]
        ops = ["eq", "ne", "gt", "ge", "lt", "le"]
        values = ["1", "2", "35", "35.0", "x", "apple pie", "", None]
        for _ in range(1000):
            records = []
            for _ in range(rng.randint(0, 20)):
                rec = {}
                for name in ("a", "b", "c"):
                    if rng.random() < 0.8:
                        rec[name] = rng.choice(values)
                if rng.random() < 0.5:
                    rec["pc"] = {"href": rng.choice(values),
                                 "price": rng.choice(values)}
                records.append(rec)
            predicates = [(rng.choice(paths), rng.choice(ops),
                           rng.choice([v for v in values if v is not None]))
                          for _ in range(rng.randint(0, 4))]
            mine = filter_records(records, [FilterPredicate(*p) for p in predicates])
            assert mine == brute_force_filter(records, predicates)


def test_selector_round_trip(generated_pages, provider):
    with criterion("selector round-trip (all corpus elements incl. frames)"):
        corpus = []
        for name in ("earthquake_query.html", "earthquake_results.html",
                     "douban_chart.html", "sample_rules_page.html",
                     "shop_page1.html", "shop_page2.html", "shop_page3.html",
                     "shop_page4.html", "shop_page5.html"):
            corpus.append(parse_document(read_fixture(name)))
        data, url = provider.fetch(PageRequest(url="http://fixtures.test/iframe/outer"))
        corpus.append(parse_document(data, base_url=url,
                                     iframe_loader=provider.iframe_loader))
        corpus.extend(parse_gen(page) for page in generated_pages)

        depth_seen = set()
        for doc in corpus:
            for el in iter_elements(doc):
                path = selector_of(el, doc)
                assert resolve_selector(doc, path) is el
                assert path.serialize().count(">f>") == el.frame_depth
                depth_seen.add(el.frame_depth)
        assert {0, 1, 2} <= depth_seen  # nodes behind one and two frames covered


def test_pagination_budget(client):
    with criterion("pagination budget (5-page chain)"):
        segmented = client.post("/wrappers/segment", json={
            "source": {"url": "http://fixtures.test/shop/page1"}}).json()
        entry = segmented["blocks"][0]
        draft = {"name": "shop", "source_url": "http://fixtures.test/shop/page1",
                 "blocks": [{"name": "products", "block": entry["block"],
                             "rules": entry["rules"],
                             "field_names": entry["field_names"]}]}
        created = client.post("/wrappers", json=draft).json()

        three = client.get(created["api_url"], params={
            "key": created["api_key"], "__max_page": "3"}).json()
        assert three["pages_fetched"] == 3
        names = [r["name"] for r in three["blocks"]["products"]]
        assert names == [f"p1-item{i}" for i in range(1, 5)] + \
            [f"p2-item{i}" for i in range(1, 4)] + \
            [f"p3-item{i}" for i in range(1, 6)]

        one = client.get(created["api_url"], params={
            "key": created["api_key"], "__max_page": "1"}).json()
        assert one["pages_fetched"] == 1
        assert [r["name"] for r in one["blocks"]["products"]] == \
            [f"p1-item{i}" for i in range(1, 5)]


def test_cli_http_parity_and_durability(client, tmp_path):
    with criterion("cli/http parity + registry durability"):
        store = tmp_path / "store"
        runner = CliRunner()

        def cli(*args):
            result = runner.invoke(cli_main, ["--store", str(store),
                                              "--fixtures", str(FIXTURES), *args])
            assert result.exit_code == 0, result.output
            return result.output.rstrip("\n")

        analyze_http = client.post("/wrappers/analyze", json={
            "source": {"url": EARTHQUAKE_QUERY_URL}}).text.rstrip("\n")
        assert cli("analyze", EARTHQUAKE_QUERY_URL) == analyze_http

        segment_http = client.post("/wrappers/segment", json={
            "source": {"url": DOUBAN_URL}}).text.rstrip("\n")
        assert cli("segment", DOUBAN_URL) == segment_http

        created = client.post("/wrappers", json=douban_draft(client)).json()
        invoke_http = client.get(created["api_url"], params={
            "key": created["api_key"]}).text.rstrip("\n")
        assert cli("invoke", str(created["id"]),
                   f"key={created['api_key']}") == invoke_http

        # durability: restart-equivalent registry sees identical documents
        store_dir = tmp_path / "store"
        reopened = Registry(store_dir)
        doc = reopened.get(created["id"])
        original = json.loads(
            (store_dir / f"service_{created['id']}.json").read_text(encoding="utf-8"))
        assert doc == original
        response_after = TestClient(create_app(EngineConfig(
            store_dir=store_dir, fixtures_dir=FIXTURES))).get(
                created["api_url"], params={"key": created["api_key"]})
        assert response_after.text.rstrip("\n") == invoke_http
