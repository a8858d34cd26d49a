import pytest

from webwrap.errors import FixtureNotFoundError
from webwrap.provider import (
    FixtureProvider, PageRequest, canonical_fields, normalize_url,
)

from conftest import EARTHQUAKE_QUERY_URL

RESULTS_URL = "http://fixtures.test/earthquake/results"

EXAMPLE_FIELDS = [
    ("catalog", "ceic"),
    ("start_time", "2019-01-03"), ("end_time", "2019-01-19"),
    ("lat_min", ""), ("lat_max", ""),
    ("lon_min", ""), ("lon_max", ""),
    ("depth_min", ""), ("depth_max", ""),
    ("mag_min", ""), ("mag_max", ""),
]


class TestNormalization:
    @pytest.mark.parametrize("raw,expected", [
        ("HTTP://Fixtures.TEST/a", "http://fixtures.test/a"),
        ("http://h.test:80/x", "http://h.test/x"),
        ("https://h.test:443/x", "https://h.test/x"),
        ("http://h.test/x?b=2&a=1", "http://h.test/x?a=1&b=2"),
        ("http://h.test/x#frag", "http://h.test/x"),
        ("http://h.test", "http://h.test/"),
    ])
    def test_normalize_url(self, raw, expected):
        assert normalize_url(raw) == expected

    def test_canonical_fields_sorts(self):
        assert canonical_fields([("b", "2"), ("a", "1")]) == (("a", "1"), ("b", "2"))


class TestFixtureProvider:
    def test_plain_get(self, provider):
        data, url = provider.fetch(PageRequest(url=EARTHQUAKE_QUERY_URL))
        assert b"history-query" in data
        assert url == EARTHQUAKE_QUERY_URL

    def test_form_submission_lookup(self, provider):
        request = PageRequest(url=RESULTS_URL, method="GET",
                              form_target="html>body>form",
                              field_values=list(EXAMPLE_FIELDS))
        data, _ = provider.fetch(request)
        assert b"seismic" in data

    def test_permuted_field_order_hits_same_page(self, provider):
        shuffled = list(reversed(EXAMPLE_FIELDS))
        request = PageRequest(url=RESULTS_URL, method="GET",
                              form_target="html>body>form",
                              field_values=shuffled)
        data, _ = provider.fetch(request)
        canonical, _ = provider.fetch(PageRequest(
            url=RESULTS_URL, method="GET", form_target="html>body>form",
            field_values=list(EXAMPLE_FIELDS)))
        assert data == canonical

    def test_fixture_miss_is_an_error(self, provider):
        with pytest.raises(FixtureNotFoundError):
            provider.fetch(PageRequest(url="http://fixtures.test/nowhere"))
        with pytest.raises(FixtureNotFoundError):
            provider.fetch(PageRequest(
                url=RESULTS_URL, method="GET", form_target="html>body>form",
                field_values=[("start_time", "1999-01-01")]))

    def test_iframe_loading_and_nesting(self, provider):
        loaded = provider.load_iframe("http://fixtures.test/iframe/outer",
                                      "inner_form.html")
        assert loaded is not None
        data, resolved = loaded
        assert resolved == "http://fixtures.test/iframe/inner_form.html"
        assert b"<form" in data
        nested = provider.load_iframe(resolved, "deep.html")
        assert nested is not None and b"recent" in nested[0]

    def test_missing_iframe_stays_opaque(self, provider):
        assert provider.load_iframe("http://fixtures.test/iframe/outer",
                                    "absent.html") is None

    def test_request_invariant(self):
        with pytest.raises(ValueError):
            PageRequest(url="http://x.test/", field_values=[("a", "1")])
        with pytest.raises(ValueError):
            PageRequest(url="http://x.test/", form_target="html>body>form")
