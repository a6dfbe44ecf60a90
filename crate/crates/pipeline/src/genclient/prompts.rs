//! Prompt templates for concept extraction, task generation and assertion
//! generation.
//!
//! The few-shot exemplars below were written for this crate; they are
//! deliberately plain so they do not steer the model toward any benchmark.

pub const CONCEPT_INSTRUCTION: &str = "Extract key programming concepts from a given code snippet collected from the open source repositories. Present the concepts as a comma separated list.";

pub const TASK_INSTRUCTION: &str = "Create a set of independent code instructions that are original, different, diverse, and high-quality, where the properties control an instruction's category, language, concepts, and difficulty.";

pub const TEST_INSTRUCTION: &str =
    "Generate only assertion statements based on the following description. Do not generate any other code:";

const CONCEPT_EXAMPLE: &str = "## Example 1

### Snippet

```
def merge(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] <= b[j]:
            out.append(a[i]); i += 1
        else:
            out.append(b[j]); j += 1
    return out + a[i:] + b[j:]
```

### Concepts

list merging, two-pointer technique, sorted sequences, slicing";

const TASK_EXAMPLE: &str = "## Example 1

### Property
```
category: function implementation
language: python
concepts: dictionary counting, string iteration
difficulty: easy
```

### Instruction

Write a Python function `char_counts(s)` that returns a dictionary mapping each character of the string `s` to the number of times it occurs.";

pub fn concept_prompt(snippet: &str) -> String {
    format!(
        "{CONCEPT_INSTRUCTION}\n\n{CONCEPT_EXAMPLE}\n\n## Example 2\n\n### Snippet\n\n```\n{}\n```\n\n### Concepts\n\n",
        snippet.trim_end()
    )
}

pub fn task_prompt(concepts: &[String], language: &str) -> String {
    format!(
        "{TASK_INSTRUCTION}\n\n{TASK_EXAMPLE}\n\n## Example 2\n\n### Property\n```\ncategory: function implementation\nlanguage: {language}\nconcepts: {}\ndifficulty: medium\n```\n\n### Instruction\n\n",
        concepts.join(", ")
    )
}

pub fn test_prompt(instruction: &str) -> String {
    format!(
        "{TEST_INSTRUCTION}\n\n```\n{}\n```\n\nGenerated Assertions:\n",
        instruction.trim()
    )
}

/// Candidate solutions get the bare instruction.
pub fn code_prompt(instruction: &str) -> String {
    instruction.trim().to_owned()
}
