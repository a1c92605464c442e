"""Ready-made attribute sets, definitions and item pools."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from netscale.core.errors import InputError
from netscale.core.types import AttributeSpec, Item, ItemPool, Provenance
from netscale.prompts.builder import GenerationSpec

BIG_FIVE_ATTRIBUTES: Dict[str, List[str]] = {
    "openness": ["creative", "perceptual", "curious", "philosophical"],
    "conscientiousness": ["organized", "responsible", "disciplined", "prudent"],
    "extraversion": ["friendly", "positive", "assertive", "energetic"],
    "agreeableness": ["cooperative", "compassionate", "trustworthy", "humble"],
    "neuroticism": ["anxious", "depressed", "insecure", "emotional"],
}

BIG_FIVE_DEFINITIONS: Dict[str, str] = {
    "openness": "Openness reflects intellectual curiosity, aesthetic sensitivity, "
    "and a preference for novelty and variety.",
    "conscientiousness": "Conscientiousness reflects a tendency toward self-discipline, "
    "goal-directed behavior, and organization.",
    "extraversion": "Extraversion reflects sociability, assertiveness, and the tendency "
    "to seek stimulation in the company of others.",
    "agreeableness": "Agreeableness reflects a tendency to be cooperative, compassionate, "
    "and trusting toward others.",
    "neuroticism": "Neuroticism reflects emotional instability, including proneness to "
    "anxiety, sadness, and mood swings.",
}

_TRAIT_DESCRIPTIONS = {
    "openness": (
        "openness to experience",
        "Openness to experience is a personality trait that describes how open-minded, "
        "creative, and imaginative a person is.",
    ),
    "conscientiousness": (
        "conscientiousness",
        "Conscientiousness is a personality trait that describes one's tendency toward "
        "self-discipline, goal-directed behavior, and organization.",
    ),
    "extraversion": (
        "extraversion",
        "Extraversion is a personality trait that describes people who are more focused "
        "on the external world than their internal experience.",
    ),
    "agreeableness": (
        "agreeableness",
        "Agreeableness is a personality trait that describes one's tendency to be "
        "cooperative, compassionate, and trusting toward others.",
    ),
    "neuroticism": (
        "neuroticism",
        "Neuroticism is a personality trait that describes one's tendency to experience "
        "negative emotions like anxiety, depression, irritability, anger, and "
        "self-consciousness.",
    ),
}


def _custom_prompt(trait: str) -> str:
    name, description = _TRAIT_DESCRIPTIONS[trait]
    a, b, c, d = BIG_FIVE_ATTRIBUTES[trait]
    return (
        f"You are generating novel items targeting the Big Five personality trait {name}. "
        f"{description} Generate EXACTLY eight items total for {name}; generate two items "
        f"per attribute of {name}. These attributes are as follows: 1) {a}, 2) {b}, "
        f"3) {c}, and 4) {d}. Do NOT add or remove any attributes; use the attributes "
        "EXACTLY as provided. All items should be first-person self-report statements "
        "beginning with 'I am someone who'. Do NOT look for items that already exist in "
        "the literature; all items should be novel. Don't be afraid to push the bounds "
        "of the construct."
    )


BIG_FIVE_CUSTOM_PROMPTS: Dict[str, str] = {t: _custom_prompt(t) for t in BIG_FIVE_ATTRIBUTES}

AI_ANXIETY_ATTRIBUTES: Dict[str, List[str]] = {
    "learning_anxiety": ["overwhelmed", "inadequacy", "intimidated"],
    "job_replacement": ["threatened", "replaceable", "insecure"],
    "sociotechnical_blindness": ["powerless", "overly dependent", "surveilled"],
    "ai_configuration": ["distrustful", "uncertain", "vulnerable"],
}

AI_ANXIETY_DEFINITIONS: Dict[str, str] = {
    "learning_anxiety": "Learning anxiety refers to cognitive overwhelm in the face of AI "
    "complexity. It includes perceiving one's knowledge as insufficient for AI demands and "
    "feeling daunted by the pace of AI advancement.",
    "job_replacement": "Job replacement anxiety refers to fear of professional obsolescence. "
    "It includes fearing that AI will eliminate one's professional role, believing one's "
    "skills can be automated, and experiencing uncertainty about career stability.",
    "sociotechnical_blindness": "Sociotechnical blindness refers to concern about societal "
    "AI impacts. It includes loss of autonomy to AI systems, concerns about AI-enabled "
    "privacy violations, and worrying about over-reliance on AI technology.",
    "ai_configuration": "AI configuration anxiety refers to anxiety about AI system opacity. "
    "It includes lacking confidence in AI decision-making, confusion about how AI systems "
    "operate, and doubting AI's reliability and safety.",
}

_AI_ANXIETY_ROWS = [
    ("I feel overwhelmed by how quickly AI technology is advancing", "overwhelmed", "learning_anxiety"),
    ("I worry that my knowledge is not enough to keep up with AI", "overwhelmed", "learning_anxiety"),
    ("The complexity of AI systems makes me feel inadequate", "inadequacy", "learning_anxiety"),
    ("I am intimidated by the amount I would need to learn about AI", "inadequacy", "learning_anxiety"),
    ("I feel daunted when I try to understand how AI works", "intimidated", "learning_anxiety"),
    ("I worry that AI will make my job obsolete", "threatened", "job_replacement"),
    ("The thought of AI replacing human workers makes me anxious", "threatened", "job_replacement"),
    ("I am concerned that AI will take over my career field", "replaceable", "job_replacement"),
    ("I feel insecure about my professional future because of AI", "replaceable", "job_replacement"),
    ("I fear that my skills will become irrelevant as AI improves", "insecure", "job_replacement"),
    ("I feel powerless in the face of AI-driven decisions that affect me", "powerless", "sociotechnical_blindness"),
    ("I worry about becoming too dependent on AI technology", "overly dependent", "sociotechnical_blindness"),
    ("It bothers me that AI can track and predict my behavior", "surveilled", "sociotechnical_blindness"),
    ("I worry about losing my privacy to AI-powered surveillance", "surveilled", "sociotechnical_blindness"),
    ("I am concerned about how much autonomy I am giving up to AI", "powerless", "sociotechnical_blindness"),
    ("I do not trust AI systems to make important decisions", "distrustful", "ai_configuration"),
    ("I am uncertain about how AI systems actually arrive at their answers", "uncertain", "ai_configuration"),
    ("It concerns me that I cannot verify whether AI output is reliable", "uncertain", "ai_configuration"),
    ("I feel vulnerable when I have to rely on AI I do not understand", "vulnerable", "ai_configuration"),
    ("I doubt that AI systems are safe enough to be widely deployed", "distrustful", "ai_configuration"),
]


def ai_anxiety_pool() -> ItemPool:
    """The 20-item AI-Anxiety demonstration pool (ids AI_1..AI_20).

    Too small for reduction; it shows the expected table layout.
    """
    return ItemPool(
        [
            Item(f"AI_{k}", statement, attribute, item_type)
            for k, (statement, attribute, item_type) in enumerate(_AI_ANXIETY_ROWS, start=1)
        ],
        Provenance.USER_SUPPLIED,
    )


@dataclass
class Preset:
    """A named generation setup."""
    name: str
    attributes: Dict[str, List[str]]
    definitions: Dict[str, str] = field(default_factory=dict)
    domain: Optional[str] = None
    scale_title: Optional[str] = None
    audience: Optional[str] = None
    response_options: List[str] = field(default_factory=list)
    prompt_notes: Optional[str] = None
    system_role: Optional[str] = None

    def generation_spec(self, target_n: int = 60, custom: bool = False) -> GenerationSpec:
        """GenerationSpec for this preset; custom=True uses the preset's custom prompts."""
        if custom and self.name not in CUSTOM_PROMPTS:
            raise InputError(f"preset {self.name!r} has no custom prompts")
        return GenerationSpec(
            attribute_spec=AttributeSpec(self.attributes),
            target_n=target_n,
            domain=self.domain,
            scale_title=self.scale_title,
            audience=self.audience,
            item_type_definitions=dict(self.definitions),
            response_options=list(self.response_options),
            prompt_notes=self.prompt_notes,
            system_role=self.system_role,
            main_prompts=dict(CUSTOM_PROMPTS[self.name]) if custom else None,
        )

    @classmethod
    def big_five(cls) -> "Preset":
        """Big Five personality inventory, first-person 'I am someone who' stems."""
        return cls(
            name="big_five",
            attributes=BIG_FIVE_ATTRIBUTES,
            definitions=BIG_FIVE_DEFINITIONS,
            domain="personality measurement",
            scale_title="Big Five Personality Inventory",
            audience="college-educated adults in the United States",
            response_options=["strongly disagree", "disagree", "neutral", "agree", "strongly agree"],
            prompt_notes="All items should be written as first-person self-report statements "
            "beginning with 'I am someone who'.",
            system_role="You are an expert psychometrician and test developer specializing "
            "in personality assessment.",
        )

    @classmethod
    def ai_anxiety(cls) -> "Preset":
        """Four-factor anxiety about AI technologies."""
        return cls(
            name="ai_anxiety",
            attributes=AI_ANXIETY_ATTRIBUTES,
            definitions=AI_ANXIETY_DEFINITIONS,
            domain="technology-related psychological assessment",
            scale_title="AI Anxiety Scale",
            audience="adults who use or are exposed to AI technologies in daily life",
            response_options=[
                "strongly disagree", "disagree", "slightly disagree",
                "slightly agree", "agree", "strongly agree",
            ],
        )


CUSTOM_PROMPTS: Dict[str, Dict[str, str]] = {"big_five": BIG_FIVE_CUSTOM_PROMPTS}

PRESETS = {"big_five": Preset.big_five, "ai_anxiety": Preset.ai_anxiety}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
