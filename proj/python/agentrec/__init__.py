"""agentrec: calling-tree construction and two-stage agent/system recommendation."""

try:
    from . import _core as _c  # installed wheel layout
except ImportError:  # pragma: no cover - build-tree layout puts _core on sys.path
    import _core as _c

encode_text = _c.encode_text
cosine = _c.cosine
fnv1a64 = _c.fnv1a64
token_cost = _c.token_cost
token_cost_expected = _c.token_cost_expected
synth = _c.synth
ingest = _c.ingest
train = _c.train
recommend = _c.recommend
evaluate = _c.evaluate

__version__ = _c.__version__
__all__ = [
    "encode_text",
    "cosine",
    "fnv1a64",
    "token_cost",
    "token_cost_expected",
    "synth",
    "ingest",
    "train",
    "recommend",
    "evaluate",
]
