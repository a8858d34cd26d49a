import random

import pytest
from hypothesis import given, strategies as st

from webwrap.dom import (
    DOCUMENT, ELEMENT, TEXT, SelectorPath, iter_elements, parse_document,
    resolve_selector, selector_of, serialize_html, structural_equal,
    text_segments,
)
from webwrap.errors import (
    DecodeError, FrameError, NotInDocumentError, ResolutionError,
)

from conftest import read_fixture
from genpages import random_document_html


def first_tag(root, tag):
    for el in iter_elements(root):
        if el.tag == tag:
            return el
    raise AssertionError(f"no <{tag}> in document")


def all_tags(root, tag):
    return [el for el in iter_elements(root) if el.tag == tag]


class TestParsing:
    def test_minimal_document(self):
        doc = parse_document("<html><body><p>hi</p></body></html>")
        html = doc.children[0]
        assert html.tag == "html" and html.kind == ELEMENT
        body = html.children[0]
        p = body.children[0]
        assert body.tag == "body" and p.tag == "p"
        assert [t.content for t in text_segments(p)] == ["hi"]

    def test_text_ranks_around_child_element(self):
        doc = parse_document("<div>start<p>example</p>end</div>")
        div = doc.children[0]
        assert div.tag == "div"
        assert [(t.content, t.rank) for t in text_segments(div)] == [("start", 1), ("end", 2)]
        p = div.element_children()[0]
        assert [(t.content, t.rank) for t in text_segments(p)] == [("example", 1)]

    def test_whitespace_only_segments_are_not_ranked(self):
        doc = parse_document("<div>  <b>x</b>one<b>y</b>\n\t<b>z</b>two</div>")
        div = doc.children[0]
        assert [(t.content, t.rank) for t in text_segments(div)] == [("one", 1), ("two", 2)]

    def test_attribute_last_occurrence_wins(self):
        doc = parse_document('<div class="a" class="b">x</div>')
        assert doc.children[0].attr("class") == "b"

    def test_valueless_attribute_becomes_empty_string(self):
        doc = parse_document("<input disabled>")
        assert doc.children[0].attrs == {"disabled": ""}

    def test_unclosed_and_stray_tags_are_repaired(self):
        doc = parse_document("<div><span>a</div></b><p>tail")
        div = doc.children[0]
        assert div.tag == "div"
        assert div.element_children()[0].tag == "span"
        assert doc.children[1].tag == "p"

    def test_implied_row_and_cell_closes(self):
        doc = parse_document("<table><tr><td>a<td>b<tr><td>c</table>")
        table = doc.children[0]
        rows = table.element_children()
        assert [r.tag for r in rows] == ["tr", "tr"]
        assert [len(r.element_children()) for r in rows] == [2, 1]

    def test_heading_stays_inside_paragraph(self):
        # positional selectors depend on this tree shape
        doc = parse_document("<p><h3>t</h3></p>")
        p = doc.children[0]
        assert [c.tag for c in p.element_children()] == ["h3"]

    def test_decode_error(self):
        with pytest.raises(DecodeError):
            parse_document(b"\xff\xfe\x00bad", encoding="utf-8")

    def test_bytes_with_encoding_hint(self):
        doc = parse_document("<p>olé</p>".encode("latin-1"), encoding="latin-1")
        assert text_segments(doc.children[0])[0].content == "olé"

    def test_parse_is_deterministic(self):
        html = read_fixture("douban_chart.html")
        assert structural_equal(parse_document(html), parse_document(html))

    @pytest.mark.parametrize("seed", range(100))
    def test_serialize_reparse_round_trip(self, seed):
        html = random_document_html(random.Random(seed))
        tree = parse_document(html)
        again = parse_document(serialize_html(tree))
        assert structural_equal(tree, again)


class TestSelectors:
    def test_paper_sample_h3_selector(self):
        doc = parse_document(read_fixture("sample_rules_page.html"))
        h3 = first_tag(doc, "h3")
        assert selector_of(h3, doc).serialize() == "html>p:nth-child(4)>h3"

    def test_paper_sample_img_resolution(self):
        doc = parse_document(read_fixture("sample_rules_page.html"))
        img = resolve_selector(doc, SelectorPath.parse("html>p:nth-child(4)>img"))
        assert img.tag == "img"
        assert img.attr("src") == "pic.png"

    def test_root_element_selector(self):
        doc = parse_document("<html><body></body></html>")
        assert selector_of(doc.children[0], doc).serialize() == "html"
        assert resolve_selector(doc, SelectorPath.parse("html")) is doc.children[0]

    def test_index_emitted_when_tag_repeats(self):
        doc = parse_document("<div><span>s</span><p>a</p><p>b</p></div>")
        div = doc.children[0]
        first_p, second_p = all_tags(doc, "p")
        # repeated tag: index always written, even for the first of its kind
        assert selector_of(first_p, doc).serialize() == "div>p:nth-child(2)"
        assert selector_of(second_p, doc).serialize() == "div>p:nth-child(3)"
        # unique tag: bare step regardless of position
        assert selector_of(div.element_children()[0], doc).serialize() == "div>span"
        doc2 = parse_document("<div><span>s</span><em>t</em></div>")
        em = doc2.children[0].element_children()[1]
        assert selector_of(em, doc2).serialize() == "div>em"

    def test_round_trip_over_fixture_corpus(self, provider):
        corpus = ["earthquake_query.html", "earthquake_results.html",
                  "douban_chart.html", "shop_page1.html", "sample_rules_page.html"]
        for name in corpus:
            doc = parse_document(read_fixture(name))
            for el in iter_elements(doc):
                assert resolve_selector(doc, selector_of(el, doc)) is el

    @pytest.mark.parametrize("seed", range(50))
    def test_round_trip_over_generated_corpus(self, seed):
        doc = parse_document(random_document_html(random.Random(1000 + seed)))
        for el in iter_elements(doc):
            path = selector_of(el, doc)
            assert resolve_selector(doc, path) is el
            assert SelectorPath.parse(path.serialize()) == path

    def test_resolution_error_carries_step_index(self):
        doc = parse_document("<html><body><p>x</p></body></html>")
        with pytest.raises(ResolutionError) as err:
            resolve_selector(doc, SelectorPath.parse("html>body>div"))
        assert err.value.step_index == 2

    def test_detached_node(self):
        doc = parse_document("<html><p>x</p></html>")
        other = parse_document("<html><p>y</p></html>")
        node = first_tag(other, "p")
        node.parent = None
        with pytest.raises(NotInDocumentError):
            selector_of(node, doc)


class TestIframes:
    def test_single_frame_selector(self, provider):
        from webwrap.provider import PageRequest

        data, url = provider.fetch(PageRequest(url="http://fixtures.test/iframe/outer"))
        doc = parse_document(data, base_url=url, iframe_loader=provider.iframe_loader)
        form = first_tag(doc, "form")
        path = selector_of(form, doc)
        assert path.serialize().count(">f>") == 1
        assert resolve_selector(doc, path) is form
        assert form.frame_depth == 1

    def test_two_frame_selector_and_frame_count(self, provider):
        from webwrap.provider import PageRequest

        data, url = provider.fetch(PageRequest(url="http://fixtures.test/iframe/outer"))
        doc = parse_document(data, base_url=url, iframe_loader=provider.iframe_loader)
        deep_items = [el for el in iter_elements(doc) if el.tag == "li"]
        assert len(deep_items) == 3
        for li in deep_items:
            path = selector_of(li, doc)
            assert path.serialize().count(">f>") == 2 == li.frame_depth
            assert resolve_selector(doc, path) is li

    def test_unloaded_iframe_stays_opaque(self):
        doc = parse_document('<html><body><iframe src="x.html"></iframe></body></html>')
        iframe = first_tag(doc, "iframe")
        assert iframe.inner_document() is None

    def test_frame_error_on_non_iframe(self):
        doc = parse_document("<html><body><div></div></body></html>")
        with pytest.raises(FrameError):
            resolve_selector(doc, SelectorPath.parse("html>body>div>f>html"))

    def test_frame_error_on_unloaded_iframe(self):
        doc = parse_document('<html><body><iframe src="x.html"></iframe></body></html>')
        with pytest.raises(FrameError):
            resolve_selector(doc, SelectorPath.parse("html>body>iframe>f>html"))


class TestRankProperties:
    @given(st.lists(st.sampled_from(["text", "span", "ws"]), min_size=0, max_size=12))
    def test_ranks_are_contiguous_from_one(self, parts):
        # consecutive text/whitespace parts coalesce into one segment;
        # a coalesced run gets a rank only when it contains visible text
        html = "<div>"
        for i, part in enumerate(parts):
            if part == "text":
                html += f"T{i} "
            elif part == "span":
                html += f"<span>s{i}</span>"
            else:
                html += "   "
        html += "</div>"

        expected = 0
        run_has_text = False
        for part in parts + ["span"]:  # sentinel closes the final run
            if part == "span":
                if run_has_text:
                    expected += 1
                run_has_text = False
            elif part == "text":
                run_has_text = True

        doc = parse_document(html)
        segs = text_segments(doc.children[0])
        assert [t.rank for t in segs] == list(range(1, expected + 1))

    def test_empty_element_has_no_segments(self):
        doc = parse_document("<div><span>x</span></div>")
        assert text_segments(doc.children[0]) == []
