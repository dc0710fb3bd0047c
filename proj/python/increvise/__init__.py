"""Incremental sentence generation with certainty-gated assumptions.

Thin wrapper around the C++ extension. All heavy lifting (scenario replay,
assumption gating, repair, metrics) happens in the native module; this layer
adds asset discovery and file-based conveniences.
"""

import os
from pathlib import Path

try:
    from ._increvise import (
        batch,
        compute_metrics,
        effective_content,
        equivalent_content,
        generate,
    )
except ImportError:  # development tree: module next to the package on sys.path
    from _increvise import (
        batch,
        compute_metrics,
        effective_content,
        equivalent_content,
        generate,
    )

__all__ = [
    "assets_dir",
    "batch",
    "batch_file",
    "compute_metrics",
    "effective_content",
    "equivalent_content",
    "generate",
    "generate_file",
]


def assets_dir() -> Path:
    """Bundled scenarios, rules and lexicons.

    The INCREVISE_ASSETS environment variable overrides the packaged copy.
    """
    env = os.environ.get("INCREVISE_ASSETS")
    if env:
        return Path(env)
    packaged = Path(__file__).parent / "assets"
    if packaged.is_dir():
        return packaged
    raise FileNotFoundError(
        "no bundled assets found; set INCREVISE_ASSETS to the assets directory"
    )


def _detect_lang(scenario_text: str, fallback: str) -> str:
    for line in scenario_text.splitlines():
        stripped = line.strip()
        if not stripped.startswith(";"):
            break
        if "lang:" in stripped:
            lang = stripped.split("lang:", 1)[1].strip().split()[0]
            if lang in ("de", "en"):
                return lang
    return fallback


def generate_file(scenario_path, lang=None, threshold=0.7, time_limit=200,
                  max_defaults=3, fluency=0.0, rules_path=None, lexicon_path=None):
    """Incremental run over a scenario file, using bundled rules and lexicon."""
    scenario = Path(scenario_path).read_text(encoding="utf-8")
    lang = lang or _detect_lang(scenario, "en")
    rules = Path(rules_path or assets_dir() / "rules" / "core.drl").read_text(encoding="utf-8")
    lexicon = Path(lexicon_path or assets_dir() / "lexicon" / f"{lang}.lex").read_text(
        encoding="utf-8"
    )
    return generate(scenario, rules, lexicon, lang=lang, threshold=threshold,
                    time_limit=time_limit, max_defaults=max_defaults, fluency=fluency)


def batch_file(scenario_path, lang=None, lexicon_path=None):
    """Oracle run over a scenario file: everything consumed at t=0."""
    scenario = Path(scenario_path).read_text(encoding="utf-8")
    lang = lang or _detect_lang(scenario, "en")
    lexicon = Path(lexicon_path or assets_dir() / "lexicon" / f"{lang}.lex").read_text(
        encoding="utf-8"
    )
    return batch(scenario, lexicon, lang=lang)
