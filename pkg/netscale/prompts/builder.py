"""Generation specs and prompt assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from netscale.core.errors import InputError
from netscale.core.types import AttributeSpec, Item, ValidationReport, Violation

STRUCTURED_OUTPUT_INSTRUCTION = (
    "Output format: write exactly one item per line as\n"
    "attribute | statement\n"
    "where attribute is copied exactly from the attribute list above. "
    "Do not number the lines, do not add headings, commentary or blank lines."
)

STRICT_FORMAT_REMINDER = (
    "IMPORTANT: your previous answer could not be read. Reply ONLY with lines of the form "
    "'attribute | statement', one item per line, using the attribute names exactly as given."
)


@dataclass
class GenerationSpec:
    """Everything needed to prompt a model for items.

    Custom mode is active when main_prompts is set.
    """
    attribute_spec: AttributeSpec
    target_n: int = 60
    domain: Optional[str] = None
    scale_title: Optional[str] = None
    audience: Optional[str] = None
    item_type_definitions: Dict[str, str] = field(default_factory=dict)
    response_options: List[str] = field(default_factory=list)
    item_examples: List[Item] = field(default_factory=list)
    prompt_notes: Optional[str] = None
    system_role: Optional[str] = None
    main_prompts: Optional[Dict[str, str]] = None
    adaptive: bool = True

    @property
    def custom_mode(self) -> bool:
        return self.main_prompts is not None

    def effective_system_role(self) -> Optional[str]:
        """Explicit system role, or a persona assembled for the built-in prompt."""
        if self.system_role:
            return self.system_role
        if self.custom_mode:
            return None
        return default_persona(self.domain, self.scale_title, self.audience)


def default_persona(
    domain: Optional[str], scale_title: Optional[str], audience: Optional[str]
) -> str:
    persona = "You are an expert psychometrician and test developer"
    if domain:
        persona += f" specializing in {domain}"
    persona += "."
    if scale_title:
        persona += f" You are writing items for the {scale_title}."
    if audience:
        persona += f" The items are intended for {audience}."
    return persona


def allocate(batch_n: int, attributes: Sequence[str]) -> Dict[str, int]:
    """Split batch_n evenly over attributes; the remainder goes round-robin in declaration order."""
    base, extra = divmod(batch_n, len(attributes))
    return {attr: base + (1 if k < extra else 0) for k, attr in enumerate(attributes)}


def build_builtin_prompt(
    spec: GenerationSpec,
    item_type: str,
    prior_items: Sequence[str],
    batch_n: int,
) -> str:
    """Assemble the built-in prompt for one batch of one item type.

    Sections, in order: framing, type definition, attribute list, count
    instructions, response options, examples, output format, prompt notes,
    then the do-not-repeat block when prior_items is non-empty.

    Raises:
        InputError: unknown item type or batch_n < 1
    """
    if item_type not in spec.attribute_spec.types:
        raise InputError(f"unknown item type {item_type!r}")
    if batch_n < 1:
        raise InputError(f"batch_n must be >= 1, got {batch_n}")
    attributes = spec.attribute_spec.types[item_type]
    label = item_type.replace("_", " ")

    framing = f"You are generating novel, high-quality items targeting {label}"
    if spec.scale_title:
        framing += f" for the {spec.scale_title}"
    framing += "."
    if spec.domain:
        framing += f" The research domain is {spec.domain}."
    if spec.audience:
        framing += f" The intended respondents are {spec.audience}."
    sections = [framing]

    definition = spec.item_type_definitions.get(item_type)
    if definition:
        sections.append(f"Definition of {label}: {' '.join(definition.split())}")

    sections.append(
        f"The attributes of {label} are: "
        + ", ".join(f"{k}) {a}" for k, a in enumerate(attributes, start=1))
        + ". Do NOT add or remove any attributes; use the attributes EXACTLY as provided."
    )

    counts = allocate(batch_n, attributes)
    sections.append(
        f"Generate EXACTLY {batch_n} items in total: "
        + "; ".join(f"{n} for {a}" for a, n in counts.items() if n > 0)
        + "."
    )

    if spec.response_options:
        sections.append(
            "Respondents will answer each item on this scale: "
            + ", ".join(spec.response_options) + "."
        )

    examples = [e for e in spec.item_examples if e.item_type in ("", item_type)]
    if examples:
        sections.append(
            "Examples of well-written items (match their style, do not copy them):\n"
            + "\n".join(f"{e.attribute} | {e.statement}" for e in examples)
        )

    sections.append(STRUCTURED_OUTPUT_INSTRUCTION)

    if spec.prompt_notes:
        sections.append(" ".join(spec.prompt_notes.split()))

    if prior_items:
        sections.append(
            "Do not repeat or rephrase any of these previously generated items:\n"
            + "\n".join(f"- {s}" for s in prior_items)
        )

    return "\n\n".join(sections)


def build_custom_prompt(spec: GenerationSpec, item_type: str, prior_items: Sequence[str]) -> str:
    """The user's prompt for item_type plus the output format and do-not-repeat block."""
    if not spec.main_prompts or item_type not in spec.main_prompts:
        raise InputError(f"no custom prompt for item type {item_type!r}")
    sections = [" ".join(spec.main_prompts[item_type].split()), STRUCTURED_OUTPUT_INSTRUCTION]
    if prior_items:
        sections.append(
            "Do not repeat or rephrase any of these previously generated items:\n"
            + "\n".join(f"- {s}" for s in prior_items)
        )
    return "\n\n".join(sections)


def validate_custom_prompts(spec: GenerationSpec) -> ValidationReport:
    """Check custom prompts cover every type exactly and mention every attribute verbatim."""
    report = ValidationReport()
    prompts: Mapping[str, str] = spec.main_prompts or {}
    types = spec.attribute_spec.types

    for item_type in types:
        if item_type not in prompts:
            report.violations.append(Violation(
                "missing_type", f"no custom prompt for item type {item_type!r}",
            ))
    for item_type in prompts:
        if item_type not in types:
            report.violations.append(Violation(
                "extra_type", f"custom prompt {item_type!r} matches no item type",
            ))

    for item_type, attributes in types.items():
        prompt = prompts.get(item_type)
        if prompt is None:
            continue
        for attribute in attributes:
            if attribute not in prompt:
                report.violations.append(Violation(
                    "missing_attribute",
                    f"custom prompt for {item_type!r} does not mention attribute {attribute!r}",
                ))
    return report
