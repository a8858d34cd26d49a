"""Page acquisition behind one interface: offline fixtures or live HTTP.

Fixture mode keys pages on (normalized url, canonicalized field values)
so tests and the acceptance suite run fully offline and deterministically.
Live mode issues plain GET/POST requests with percent-encoded fields
(method and action come from the page's form; no scripts ever run).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.parse import urlencode, urljoin, urlsplit, urlunsplit

from .errors import FixtureNotFoundError, UpstreamError

GET = "GET"
POST = "POST"


@dataclass
class PageRequest:
    url: str
    method: str = GET
    form_target: Optional[str] = None
    field_values: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if bool(self.form_target) != bool(self.field_values):
            raise ValueError("form_target must be present exactly when field_values is nonempty")


def normalize_url(url: str) -> str:
    parts = urlsplit(url.strip())
    scheme = parts.scheme.lower()
    netloc = parts.netloc.lower()
    if scheme == "http" and netloc.endswith(":80"):
        netloc = netloc[:-3]
    elif scheme == "https" and netloc.endswith(":443"):
        netloc = netloc[:-4]
    query = "&".join(sorted(parts.query.split("&"))) if parts.query else ""
    return urlunsplit((scheme, netloc, parts.path or "/", query, ""))


def canonical_fields(pairs: list[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(pairs))


class FixtureProvider:
    """Serves pages from a directory of HTML files plus a manifest.

    Manifest layout (``manifest.json``)::

        {
          "pages": [
            {"url": "http://host/query", "file": "query.html"},
            {"url": "http://host/results",
             "fields": {"q": "term"},
             "file": "results.html"}
          ],
          "iframes": {"http://host/inner.html": "inner.html"}
        }

    Lookups are exact matches; a miss raises, because in fixture mode a
    miss is a bug in the test corpus, not a runtime condition.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        manifest_path = self.root / "manifest.json"
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        self._pages: dict[tuple[str, tuple[tuple[str, str], ...]], Path] = {}
        for entry in manifest.get("pages", []):
            fields = entry.get("fields", {})
            key = (normalize_url(entry["url"]), canonical_fields(list(fields.items())))
            self._pages[key] = self.root / entry["file"]
        self._iframes: dict[str, Path] = {
            normalize_url(url): self.root / fname
            for url, fname in manifest.get("iframes", {}).items()
        }

    def fetch(self, request: PageRequest) -> tuple[bytes, str]:
        key = (normalize_url(request.url), canonical_fields(request.field_values))
        path = self._pages.get(key)
        if path is None:
            raise FixtureNotFoundError(
                f"no fixture for {request.method} {request.url} with fields "
                f"{dict(request.field_values)!r}",
                details={"url": request.url, "fields": dict(request.field_values)},
            )
        return path.read_bytes(), request.url

    def load_iframe(self, base_url: str, src: str) -> Optional[tuple[bytes, str]]:
        resolved = urljoin(base_url, src)
        path = self._iframes.get(normalize_url(resolved))
        if path is None:
            key = (normalize_url(resolved), ())
            path = self._pages.get(key)
        if path is None:
            return None
        return path.read_bytes(), resolved

    @property
    def iframe_loader(self):
        return self.load_iframe


class LiveProvider:
    """Plain HTTP page acquisition (no script execution, <= 5 redirects)."""

    def __init__(self, timeout: float = 20.0):
        import httpx

        self._client = httpx.Client(follow_redirects=True, timeout=timeout,
                                    max_redirects=5)

    def fetch(self, request: PageRequest) -> tuple[bytes, str]:
        import httpx

        try:
            if request.method.upper() == POST:
                resp = self._client.post(request.url, data=dict(request.field_values))
            else:
                url = request.url
                if request.field_values:
                    sep = "&" if urlsplit(url).query else "?"
                    url = f"{url}{sep}{urlencode(request.field_values)}"
                resp = self._client.get(url)
            resp.raise_for_status()
        except httpx.HTTPStatusError as exc:
            raise UpstreamError(f"upstream returned {exc.response.status_code} for {request.url}",
                                details={"status": exc.response.status_code}) from exc
        except httpx.HTTPError as exc:
            raise UpstreamError(f"fetch failed for {request.url}: {exc}") from exc
        return resp.content, str(resp.url)

    def load_iframe(self, base_url: str, src: str) -> Optional[tuple[bytes, str]]:
        resolved = urljoin(base_url, src)
        try:
            content, final = self.fetch(PageRequest(url=resolved))
        except UpstreamError:
            return None
        return content, final

    @property
    def iframe_loader(self):
        return self.load_iframe

    def close(self):
        self._client.close()
