"""Shared test infrastructure: independent oracles (deliberately naive, no
production indexes) and a mock paginated hub server."""

import json
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

from lineage_mdi.ingest import format_timestamp, parse_timestamp
from lineage_mdi.lineage import LineageGraph


class MockHub:
    """Paginated model API stub with per-cursor fault injection."""

    def __init__(self, records, fail=None, malformed=None):
        self.records = records
        self.fail = dict(fail or {})  # cursor -> remaining 500 responses
        self.malformed = set(malformed or ())
        self.requests = []
        handler = self._make_handler()
        self.server = HTTPServer(("127.0.0.1", 0), handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/models"

    def close(self):
        self.server.shutdown()
        self.server.server_close()

    def _make_handler(hub_self):
        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                query = parse_qs(urlparse(self.path).query)
                limit = int(query.get("limit", ["100"])[0])
                cursor = query.get("cursor", ["0"])[0]
                hub_self.requests.append(cursor)

                if hub_self.fail.get(cursor, 0) > 0:
                    hub_self.fail[cursor] -= 1
                    self.send_response(500)
                    self.end_headers()
                    return

                if cursor in hub_self.malformed:
                    body = b"{not json"
                else:
                    offset = int(cursor)
                    items = hub_self.records[offset : offset + limit]
                    next_cursor = (
                        str(offset + len(items))
                        if offset + len(items) < len(hub_self.records)
                        else None
                    )
                    body = json.dumps(
                        {"items": items, "next_cursor": next_cursor}
                    ).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.end_headers()
                self.wfile.write(body)

        return Handler


def raw_api_records(n, start="2023-01-01T00:00:00Z"):
    base = parse_timestamp(start)
    return [
        {
            "model_id": f"mock/model-{i:03d}",
            "created_at": format_timestamp(base + i * 3600),
            "tags": [],
        }
        for i in range(n)
    ]


def bfs_component_partition(graph: LineageGraph) -> frozenset:
    """Brute-force BFS labeling over the undirected edge view."""
    neighbours: dict[str, set] = {node: set() for node in graph.nodes}
    for child, parent, _ in graph.edges():
        neighbours[child].add(parent)
        neighbours[parent].add(child)

    unvisited = set(graph.nodes)
    components = []
    while unvisited:
        start = unvisited.pop()
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for other in neighbours[node]:
                if other not in seen:
                    seen.add(other)
                    unvisited.discard(other)
                    queue.append(other)
        components.append(frozenset(seen))
    return frozenset(components)


def has_topological_order(graph: LineageGraph) -> bool:
    """Kahn's algorithm over child -> parent edges; True iff acyclic."""
    out_count = {node: graph.out_degree(node) for node in graph.nodes}
    ready = [node for node, count in out_count.items() if count == 0]
    visited = 0
    while ready:
        node = ready.pop()
        visited += 1
        for child, _ in graph.in_edges(node):
            out_count[child] -= 1
            if out_count[child] == 0:
                ready.append(child)
    return visited == len(graph.nodes)
