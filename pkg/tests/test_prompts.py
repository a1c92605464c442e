"""Tests for prompt assembly, response parsing and the generation loop."""

import itertools
import threading
from types import SimpleNamespace

import pytest

from netscale.core.errors import GenerationError, InputError, ParseError
from netscale.core.types import AttributeSpec, Item
from netscale.llm.providers import ChatParams
from netscale.presets import BIG_FIVE_ATTRIBUTES, BIG_FIVE_CUSTOM_PROMPTS, get_preset
from netscale.prompts.builder import (
    STRICT_FORMAT_REMINDER,
    STRUCTURED_OUTPUT_INSTRUCTION,
    GenerationSpec,
    allocate,
    build_builtin_prompt,
    build_custom_prompt,
    validate_custom_prompts,
)
from netscale.prompts.generation import check_generation_spec, generate_item_pool
from netscale.prompts.parser import parse_generated_items


class ScriptedClient:
    """Chat stand-in answering from a per-type script; the last answer repeats."""

    def __init__(self, scripts):
        self.scripts = {t: list(r) for t, r in scripts.items()}
        self.prompts = {t: [] for t in scripts}
        self.params = []
        self._lock = threading.Lock()

    def chat(self, prompts, params, provider=None):
        (prompt,) = prompts
        item_type = next(t for t in self.scripts if f"targeting {t}" in prompt)
        with self._lock:
            self.prompts[item_type].append(prompt)
            self.params.append(params)
            queue = self.scripts[item_type]
            text = queue.pop(0) if len(queue) > 1 else queue[0]
        return SimpleNamespace(texts=[text])


@pytest.fixture
def spec(small_spec):
    return GenerationSpec(attribute_spec=small_spec, target_n=4, domain="personality")


OPENNESS = "1. curious | I ask a lot of questions\n2. creative | I paint\n- curious | I read widely\ncreative | I write songs"
CONSCIENTIOUSNESS = "organized | I plan my week\ndisciplined | I keep promises\norganized | I label things\ndisciplined | I train daily"


class TestBuiltinPrompt:
    """Test built-in prompt sections."""

    def test_section_order(self, small_spec):
        spec = GenerationSpec(
            attribute_spec=small_spec,
            scale_title="Trait Scale",
            item_type_definitions={"openness": "Openness is   curiosity."},
            response_options=["no", "yes"],
            item_examples=[Item("x", "I like museums", "curious", "openness")],
            prompt_notes="Keep items short.",
        )
        prompt = build_builtin_prompt(spec, "openness", ["I paint"], 4)
        markers = [
            "targeting openness for the Trait Scale",
            "Definition of openness: Openness is curiosity.",
            "1) curious, 2) creative",
            "Generate EXACTLY 4 items in total: 2 for curious; 2 for creative.",
            "answer each item on this scale: no, yes",
            "curious | I like museums",
            STRUCTURED_OUTPUT_INSTRUCTION,
            "Keep items short.",
            "- I paint",
        ]
        positions = [prompt.index(m) for m in markers]
        assert positions == sorted(positions)

    def test_examples_filtered_by_type(self, small_spec):
        spec = GenerationSpec(
            attribute_spec=small_spec,
            item_examples=[Item("x", "I tidy up", "organized", "conscientiousness")],
        )
        assert "I tidy up" not in build_builtin_prompt(spec, "openness", [], 2)

    def test_no_prior_block_when_empty(self, spec):
        assert "Do not repeat" not in build_builtin_prompt(spec, "openness", [], 2)

    def test_allocation_remainder_goes_first(self):
        assert allocate(5, ["a", "b"]) == {"a": 3, "b": 2}
        assert allocate(1, ["a", "b", "c"]) == {"a": 1, "b": 0, "c": 0}

    def test_invalid_arguments(self, spec):
        with pytest.raises(InputError):
            build_builtin_prompt(spec, "extraversion", [], 2)
        with pytest.raises(InputError):
            build_builtin_prompt(spec, "openness", [], 0)


class TestPersona:
    """Test the system role sent with generation calls."""

    def test_default_persona_uses_context(self, small_spec):
        spec = GenerationSpec(attribute_spec=small_spec, domain="personality", audience="students")
        role = spec.effective_system_role()
        assert "specializing in personality" in role
        assert "intended for students" in role

    def test_explicit_role_wins(self, small_spec):
        spec = GenerationSpec(attribute_spec=small_spec, system_role="Be brief.")
        assert spec.effective_system_role() == "Be brief."

    def test_custom_mode_has_no_default_role(self, small_spec):
        spec = GenerationSpec(attribute_spec=small_spec, main_prompts={"openness": "x"})
        assert spec.effective_system_role() is None


class TestCustomPrompts:
    """Test custom prompt validation and assembly."""

    def test_big_five_prompts_pass(self):
        spec = GenerationSpec(
            attribute_spec=AttributeSpec(BIG_FIVE_ATTRIBUTES),
            main_prompts=dict(BIG_FIVE_CUSTOM_PROMPTS),
        )
        assert validate_custom_prompts(spec).ok

    def test_missing_attribute_is_named(self):
        prompts = dict(BIG_FIVE_CUSTOM_PROMPTS)
        prompts["agreeableness"] = prompts["agreeableness"].replace("humble", "modest")
        spec = GenerationSpec(attribute_spec=AttributeSpec(BIG_FIVE_ATTRIBUTES), main_prompts=prompts)
        report = validate_custom_prompts(spec)
        assert report.kinds() == ["missing_attribute"]
        assert "'humble'" in report.violations[0].message

    def test_type_coverage(self, small_spec):
        spec = GenerationSpec(
            attribute_spec=small_spec,
            main_prompts={"openness": "curious creative", "grit": "x"},
        )
        kinds = validate_custom_prompts(spec).kinds()
        assert "missing_type" in kinds
        assert "extra_type" in kinds

    def test_custom_prompt_gets_output_format(self, small_spec):
        spec = GenerationSpec(attribute_spec=small_spec, main_prompts={"openness": "Write   items."})
        prompt = build_custom_prompt(spec, "openness", [])
        assert prompt.startswith("Write items.")
        assert STRUCTURED_OUTPUT_INSTRUCTION in prompt

    def test_preset_custom_spec(self):
        spec = get_preset("big_five").generation_spec(target_n=8, custom=True)
        assert spec.custom_mode
        check_generation_spec(spec)


class TestParser:
    """Test the 'attribute | statement' line grammar."""

    def test_list_markers_stripped(self):
        response = "1. curious | A\n- creative | B\n(a) curious | C\n* creative | D\n3) curious | E"
        result = parse_generated_items(response, "openness", ["curious", "creative"])
        assert [i.statement for i in result.items] == ["A", "B", "C", "D", "E"]
        assert [i.id for i in result.items] == ["1", "2", "3", "4", "5"]
        assert result.skipped == 0

    def test_attributes_are_case_sensitive(self):
        result = parse_generated_items(
            "Curious | A\ncurious | B", "openness", ["curious", "creative"]
        )
        assert [i.statement for i in result.items] == ["B"]
        assert result.skipped == 1

    def test_quotes_and_blank_lines(self):
        result = parse_generated_items(
            '\n**curious** | "I like it"\n\n', "openness", ["curious"]
        )
        assert result.items[0].attribute == "curious"
        assert result.items[0].statement == "I like it"

    def test_ids_continue_from_counter(self):
        counter = itertools.count(7)
        result = parse_generated_items("curious | A\ncurious | B", "openness", ["curious"], counter)
        assert [i.id for i in result.items] == ["7", "8"]

    def test_nothing_parsable(self):
        with pytest.raises(ParseError) as err:
            parse_generated_items("Here are your items!\nfriendly | A", "openness", ["curious"])
        assert err.value.skipped == 2


class TestGeneration:
    """Test the batch loop against scripted responses."""

    PARAMS = ChatParams(model="gpt-4o")

    def test_fills_every_type(self, spec):
        client = ScriptedClient({"openness": [OPENNESS], "conscientiousness": [CONSCIENTIOUSNESS]})
        pool = generate_item_pool(spec, client, self.PARAMS)
        assert pool.ids == [str(k) for k in range(1, 9)]
        assert pool.types == ["openness", "conscientiousness"]
        assert pool.provenance.value == "generated"
        assert all("specializing in personality" in p.system_role for p in client.params)

    def test_duplicates_dropped_and_prior_items_sent(self, spec):
        client = ScriptedClient({
            "openness": [
                "curious | I ask a lot of questions\ncreative | I paint",
                "curious | i ask a lot of questions\ncreative | I write songs\ncurious | I read widely",
            ],
            "conscientiousness": [CONSCIENTIOUSNESS],
        })
        pool = generate_item_pool(spec, client, self.PARAMS)
        statements = [i.statement for i in pool.of_type("openness")]
        assert statements == ["I ask a lot of questions", "I paint", "I write songs", "I read widely"]
        second = client.prompts["openness"][1]
        assert "- I ask a lot of questions" in second
        assert "Generate EXACTLY 2 items" in second

    def test_non_adaptive_sends_no_prior_items(self, spec):
        spec.adaptive = False
        client = ScriptedClient({
            "openness": ["curious | A\ncreative | B", OPENNESS],
            "conscientiousness": [CONSCIENTIOUSNESS],
        })
        generate_item_pool(spec, client, self.PARAMS)
        assert all("Do not repeat" not in p for p in client.prompts["openness"])

    def test_failure_budget_raises_with_partial_pool(self, spec):
        client = ScriptedClient({
            "openness": ["Sorry, I cannot help with that."],
            "conscientiousness": [CONSCIENTIOUSNESS],
        })
        with pytest.raises(GenerationError) as err:
            generate_item_pool(spec, client, self.PARAMS)
        assert err.value.shortfall == {"openness": 4}
        assert err.value.partial.types == ["conscientiousness"]
        assert len(client.prompts["openness"]) == 5
        assert STRICT_FORMAT_REMINDER not in client.prompts["openness"][0]
        assert STRICT_FORMAT_REMINDER in client.prompts["openness"][1]

    def test_repeat_only_batches_count_as_failures(self, spec):
        client = ScriptedClient({
            "openness": ["curious | A\ncreative | B"],
            "conscientiousness": [CONSCIENTIOUSNESS],
        })
        with pytest.raises(GenerationError) as err:
            generate_item_pool(spec, client, self.PARAMS, workers=2)
        assert err.value.shortfall == {"openness": 2}
        assert len(client.prompts["openness"]) == 6

    def test_invalid_spec_rejected_before_calls(self):
        spec = GenerationSpec(attribute_spec=AttributeSpec({"solo": ["one"]}), target_n=2)
        client = ScriptedClient({"solo": ["one | A"]})
        with pytest.raises(InputError):
            generate_item_pool(spec, client, self.PARAMS)
        assert client.prompts["solo"] == []
