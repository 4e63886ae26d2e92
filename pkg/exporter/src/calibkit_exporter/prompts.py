"""Prompt suites used for cross-prompt evaluation.

The CIFAR suite pairs nine templates with both articles ("a"/"the"); the
SUN397 suite varies only the article. AUXILIARY_PROMPT is the template used
when fitting the reusable temperature on the auxiliary dataset.
"""

CIFAR_PROMPTS = [
    "a photo of a {}",
    "a blurry photo of a {}",
    "a black and white photo of a {}",
    "a low contrast photo of a {}",
    "a high contrast photo of a {}",
    "a bad photo of a {}",
    "a good photo of a {}",
    "a photo of a small {}",
    "a photo of a big {}",
    "a photo of the {}",
    "a blurry photo of the {}",
    "a black and white photo of the {}",
    "a low contrast photo of the {}",
    "a high contrast photo of the {}",
    "a bad photo of the {}",
    "a good photo of the {}",
    "a photo of the small {}",
    "a photo of the big {}",
]

SUN397_PROMPTS = [
    "a photo of {}",
    "a photo of the {}",
]

AUXILIARY_PROMPT = "a photo of {}"

PROMPT_SUITES = {
    "cifar10": CIFAR_PROMPTS,
    "cifar100": CIFAR_PROMPTS,
    "sun397": SUN397_PROMPTS,
}
