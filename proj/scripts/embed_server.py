#!/usr/bin/env python3
"""Minimal embedding endpoint for the remote provider and the golden
acceptance fixtures.

Serves POST /embed with body {"text": "..."} and replies
{"embedding": [...]} using a sentence-transformers model (default
all-mpnet-base-v2, 768 dimensions).

Usage:
    python3 scripts/embed_server.py [--port 8750] [--model NAME]
    WIM_EMBED_ENDPOINT=127.0.0.1:8750 ./build/tests/acceptance
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8750)
    parser.add_argument("--model",
                        default="sentence-transformers/all-mpnet-base-v2")
    args = parser.parse_args()

    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(args.model)

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self) -> None:  # noqa: N802 (http.server API)
            if self.path != "/embed":
                self.send_error(404)
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                body = json.loads(self.rfile.read(length))
                text = body["text"]
            except (json.JSONDecodeError, KeyError):
                self.send_error(400, "expected JSON body with a text field")
                return
            vec = model.encode(text, normalize_embeddings=False)
            payload = json.dumps({"embedding": vec.tolist()}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, fmt: str, *fmt_args: object) -> None:
            pass  # keep the test output clean

    server = ThreadingHTTPServer((args.host, args.port), Handler)
    print(f"serving {args.model} on {args.host}:{args.port}/embed")
    server.serve_forever()


if __name__ == "__main__":
    main()
