"""Prompt templates: editable text files with {named} placeholders.

Templates ship inside the package but can be overridden by pointing a
TemplateSet at any directory with the same file names. The set's version
(a content hash) is recorded in build manifests so artifacts can be tied
to the exact prompt wording that produced them.
"""

from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path

TEMPLATE_NAMES = (
    "extraction",
    "gleaning_check",
    "gleaning_continue",
    "element_summary",
    "community_report",
    "local_answer",
    "global_map",
    "global_reduce",
    "mcq_instructions",
)


class TemplateSet:
    def __init__(self, texts: dict[str, str]):
        missing = set(TEMPLATE_NAMES) - set(texts)
        if missing:
            raise ValueError(f"missing templates: {sorted(missing)}")
        self._texts = dict(texts)

    @staticmethod
    def from_dir(path: str | Path) -> "TemplateSet":
        base = Path(path)
        texts = {
            name: (base / f"{name}.txt").read_text(encoding="utf-8")
            for name in TEMPLATE_NAMES
        }
        return TemplateSet(texts)

    def render(self, name: str, **values: str) -> str:
        """Fill {placeholder} slots; unknown braces (e.g. code) left alone."""
        text = self._texts[name]
        for key, value in values.items():
            text = text.replace("{" + key + "}", str(value))
        return text

    def raw(self, name: str) -> str:
        return self._texts[name]

    @property
    def version(self) -> str:
        digest = hashlib.sha256()
        for name in TEMPLATE_NAMES:
            digest.update(name.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(self._texts[name].encode("utf-8"))
        return digest.hexdigest()[:12]


_DEFAULT: TemplateSet | None = None


def default_templates() -> TemplateSet:
    global _DEFAULT
    if _DEFAULT is None:
        base = resources.files("graphchat").joinpath("templates")
        texts = {
            name: base.joinpath(f"{name}.txt").read_text(encoding="utf-8")
            for name in TEMPLATE_NAMES
        }
        _DEFAULT = TemplateSet(texts)
    return _DEFAULT
