"""Prompt construction and parsing.

Every model task travels through one generate() channel; the task is
identified by a [task: ...] tag on the first line of the prompt. The
templates ship as editable text files next to this module, so wording can
be tuned for a remote model without touching code. The deterministic
provider parses the structured fields back out of the same prompts.
"""

from __future__ import annotations

import re
from importlib import resources

from ..errors import ProviderError

_TASK_RE = re.compile(r"^\[task:\s*(?P<tag>[a-z_]+)\]\s*$", re.MULTILINE)
_FIELD_RE = re.compile(r"^(?P<key>[a-z_-]+):\s*(?P<value>.*)$")


def load_template(name: str) -> str:
    ref = resources.files("redgraph.providers").joinpath(f"templates/{name}.txt")
    return ref.read_text(encoding="utf-8")


def task_tag(prompt: str) -> str:
    match = _TASK_RE.search(prompt)
    if not match:
        raise ProviderError("prompt carries no [task: ...] tag")
    return match.group("tag")


def text_block(prompt: str) -> str:
    """The payload between the first <<< line and the last >>> line."""
    lines = prompt.splitlines()
    try:
        start = lines.index("<<<")
        end = len(lines) - 1 - lines[::-1].index(">>>")
    except ValueError as exc:
        raise ProviderError("prompt carries no <<< ... >>> text block") from exc
    if end <= start:
        raise ProviderError("malformed <<< ... >>> text block")
    return "\n".join(lines[start + 1 : end])


def field_value(prompt: str, key: str, default: str | None = None) -> str:
    for line in prompt.splitlines():
        match = _FIELD_RE.match(line)
        if match and match.group("key") == key:
            return match.group("value").strip()
    if default is not None:
        return default
    raise ProviderError(f"prompt is missing required field {key!r}")


def list_items(prompt: str, section: str) -> list[str]:
    """Items of a '- ' bulleted section introduced by '<section>:'."""
    items: list[str] = []
    collecting = False
    for line in prompt.splitlines():
        if line.strip() == f"{section}:":
            collecting = True
            continue
        if collecting:
            if line.startswith("- "):
                items.append(line[2:].strip())
            elif line.strip() and not line.startswith(" "):
                break
    return items


def _bullets(items) -> str:
    rendered = "\n".join(f"- {item}" for item in items)
    return rendered if rendered else "- (none)"


def build_summary_prompt(entity_lines: list[str], relation_descriptions: list[str]) -> str:
    return load_template("summarize").format(
        entities=_bullets(entity_lines),
        relations=_bullets(relation_descriptions),
    )


def build_rewrite_prompt(
    text: str,
    goal: str,
    target: str,
    substitutions: dict[str, str] | None = None,
) -> str:
    subs = substitutions or {}
    rendered = [f"{old} => {new}" for old, new in sorted(subs.items())]
    return load_template("rewrite").format(
        goal=goal,
        target=target,
        substitutions=_bullets(rendered),
        text=text,
    )


def parse_substitutions(prompt: str) -> dict[str, str]:
    table: dict[str, str] = {}
    for item in list_items(prompt, "substitutions"):
        if "=>" in item:
            old, new = item.split("=>", 1)
            table[old.strip()] = new.strip()
    return table


def build_answer_prompt(question: str, context_texts: list[str]) -> str:
    return load_template("answer").format(
        question=question,
        context="\n\n".join(context_texts),
    )


def build_classify_prompt(text: str, examples: str = "", flag_substring: str = "") -> str:
    return load_template("classify").format(
        examples=examples or "(none)",
        flag_substring=flag_substring,
        text=text,
    )


def build_judge_prompt(claim: str, answer: str) -> str:
    return load_template("judge").format(claim=claim, answer=answer)


def build_extract_prompt(text: str) -> str:
    return load_template("extract").format(text=text)


def build_coref_prompt(text: str) -> str:
    return load_template("coref").format(text=text)


def build_sentiment_prompt(text: str) -> str:
    return load_template("sentiment").format(text=text)


def build_query_entities_prompt(question: str) -> str:
    return load_template("query_entities").format(question=question)


def build_perturb_prompt(
    text: str,
    mode: str,
    entity: str,
    pronoun: str = "",
    pronoun_offset: int = -1,
    replacement: str = "",
) -> str:
    return load_template("perturb").format(
        mode=mode,
        entity=entity,
        pronoun=pronoun,
        pronoun_offset=pronoun_offset,
        replacement=replacement,
        text=text,
    )
