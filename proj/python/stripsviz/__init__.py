"""Ground, measure, embed and plan over STRIPS domains.

Every function takes PDDL text and returns decoded JSON in the same shapes
the CLI and the HTTP server emit.
"""

import json

from . import _core

__all__ = [
    "StripsVizError",
    "Server",
    "ground",
    "graph",
    "metrics",
    "embed",
    "plan",
    "validate",
    "generate_logistics",
    "generate_barman",
]


class StripsVizError(Exception):
    """Raised for every core error; `code` and `payload` mirror the error JSON."""

    def __init__(self, payload):
        self.payload = payload
        self.code = payload["error"]["code"]
        super().__init__(payload["error"]["message"])


def _call(fn, *args, **kwargs):
    try:
        return json.loads(fn(*args, **kwargs))
    except _core.StripsVizError as exc:
        raise StripsVizError(json.loads(str(exc))) from None


def _options(max_actions=None, pruning="reachable", include_static=False):
    opts = {"pruning": pruning, "include_static": include_static}
    if max_actions is not None:
        opts["max_actions"] = max_actions
    return json.dumps(opts)


def ground(domain, problem, **options):
    """{"domain": grounded domain export, "problem": canonical problem}."""
    return _call(_core.ground, domain, problem, _options(**options))


def graph(domain, problem, **options):
    return _call(_core.graph, domain, problem, _options(**options))


def metrics(domain, problem, threads=1, **options):
    return _call(_core.metrics, domain, problem, _options(**options), threads)


def embed(domain, problem, seed=0, config=None, **options):
    """`config` holds EmbedConfig fields, e.g. {"iterations": 500, "dimension": 3}."""
    return _call(_core.embed, domain, problem, _options(**options), seed, json.dumps(config or {}))


def plan(domain, problem, goal=None, heuristic="blind", budget=1_000_000, seed=0, heuristic_dimension=10, **options):
    """{"plan", "trace", "ipc"}; `goal` defaults to the problem's goal."""
    if isinstance(goal, str):
        goal = [goal]
    return _call(_core.plan, domain, problem, _options(**options), list(goal or []), heuristic, budget, seed,
                 heuristic_dimension)


def validate(domain, problem, plan_text):
    return _call(_core.validate, domain, problem, plan_text)


def generate_logistics(seed=0, **params):
    """{"name", "domain", "problem"} with PDDL text."""
    return _call(_core.generate_logistics, json.dumps(params), seed)


def generate_barman(seed=0, **params):
    return _call(_core.generate_barman, json.dumps(params), seed)


class Server:
    """The HTTP/JSON session server on a background thread.

    Port 0 picks a free port; read it back from `.port`. STRIPSVIZ_* environment
    variables apply first, explicit keyword arguments override them.
    """

    def __init__(self, **config):
        config.setdefault("port", 0)
        try:
            self._server = _core.Server(json.dumps(config))
        except _core.StripsVizError as exc:
            raise StripsVizError(json.loads(str(exc))) from None
        self.port = self._server.port

    @property
    def url(self):
        return f"http://127.0.0.1:{self.port}"

    def stop(self):
        self._server.stop()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()
