"""Prompt assembly, response parsing and the generation loop."""

from netscale.prompts.builder import GenerationSpec, build_builtin_prompt, validate_custom_prompts
from netscale.prompts.generation import generate_item_pool
from netscale.prompts.parser import parse_generated_items

__all__ = [
    "GenerationSpec",
    "build_builtin_prompt",
    "validate_custom_prompts",
    "generate_item_pool",
    "parse_generated_items",
]
