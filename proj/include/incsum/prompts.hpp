#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace incsum {

enum class TemplateId {
  GenerateEntity,
  UpdateEntity,
  Dedup,
  Cok,
  Compress,
  GenerateBook,
  UpdateBook,
  JsonInstruction,
  TextInstruction,
  // Plumbing prompts, not part of the summarization protocol proper.
  Finalize,
  Coherence,
};

enum class Task { Entity, Book };

inline const char* template_name(TemplateId id) {
  switch (id) {
    case TemplateId::GenerateEntity: return "generate-entity";
    case TemplateId::UpdateEntity: return "update-entity";
    case TemplateId::Dedup: return "dedup";
    case TemplateId::Cok: return "cok";
    case TemplateId::Compress: return "compress";
    case TemplateId::GenerateBook: return "generate-book";
    case TemplateId::UpdateBook: return "update-book";
    case TemplateId::JsonInstruction: return "json-instruction";
    case TemplateId::TextInstruction: return "text-instruction";
    case TemplateId::Finalize: return "finalize";
    case TemplateId::Coherence: return "coherence";
  }
  return "?";
}

struct MissingPlaceholderError : std::runtime_error {
  explicit MissingPlaceholderError(const std::string& name)
      : std::runtime_error("missing placeholder binding: " + name) {}
};

using Bindings = std::map<std::string, std::string>;

namespace prompts {

inline constexpr std::string_view kGenerateEntity =
    R"(Task Overview:
Your task involves synthesizing information from detailed descriptive paragraphs about a specific entity into a summary table.
This Json will highlight key attributes of the entity along with their detailed descriptions derived from the given texts.

Instructions:
* Extract Descriptive Values: Focus on extracting specific, detailed information rather than general or vague adjectives like "good" or "bad." Ensure that descriptions are precise and informative.
* Present a Balanced View: The table should reflect a balanced perspective, including positive, negative, and neutral attributes. For attributes with mixed reviews, indicate the sources supporting each viewpoint.
* Attribute Selection:
 - Commonly Interested Attributes: Include attributes that are generally of interest for the type of entity being described.
 - Unique Attributes: Also identify and include unique attributes that are specifically mentioned in the provided descriptions.
* Do not include irrelevant sentences about the given entity in the summary. Irrelevant sentences include entity names (HOTEL1, HUMAN) that are different from the given entity (HOTEL0).

Structure of the Summary Table:
* The Json should contain a dictionary format data, where keys are attributes and values are detailed descriptions of their corresponding attributes.
* List attributes with their corresponding values, indicating the source paragraph and relevant excerpts for substantiation.
* If an attribute has multiple values, include all values as a list of the attribute.
* Each value should contain sufficient evidence extracted from the paragraph related to the entity.

Example:
Entity: HOTEL0

Paragraphs:
P1. Great room and service, but breakfast was lacking. We loved the spacious room and friendly staff, but the breakfast options were limited. There are two pools.
P2. Poor customer service overshadowed the beautiful location. The beachfront view was amazing, but dealing with unhelpful staff was frustrating. Room is comfortable.
P3. Exceptional dining and comfortable beds, but noisy at night. The restaurant was five-star, and the beds were very cozy, but there was a lot of street noise.
P4. HOTEL1 offers great room service and breakfast was amazing. (Irrelevant sentence for the given entity "HOTEL0")
P5. HUMAN's creativity looks like a great room service offered by the hotel. (Irrelevant sentence for the given entity "HOTEL0")

Summary JSON:
{
  "Room Quality": ["Spacious and comfortable rooms"],
  "Amenities": ["There are two pools"],
  "Service": ["Friendly staff", "overshadowed by unhelpful staff"],
  "Location": ["Beautiful beachfront view"],
  "Food & Beverage": ["Exceptional dining experience", "limited breakfast options"],
  "Noise Level": ["Notable street noise at night"]
}

Your Task:
Generate a similar table based on the following descriptions of the specified entity.
Entity: {entity_name}

Paragraphs:
{paragraph}

Proceed to generate the summary Json.
)";

inline constexpr std::string_view kUpdateEntity =
    R"(Task Overview:
You are tasked with refining and expanding an existing summary table based on new descriptive paragraphs about an entity.
This involves updating the table to include new information, modify existing details without removing any, and ensuring all entries are supported by evidence from the text.

Instructions:
* Update Descriptive Values: Carefully read the new paragraph(s) and identify any information that should be added to the current table entries or modify them. Focus on specific, descriptive details, avoiding vague adjectives. **Do not remove any existing attributes or values**, but rather add to or revise them as necessary.
* Maintain a Balanced View: Ensure the updated table continues to present a balanced perspective, incorporating positive, negative, and neutral values. For any attribute with mixed evidence, update the count of sources supporting each view. All original attributes and values must be preserved in the table, with modifications only to reflect new insights or corrections based on the latest information.
* Attribute Revision and Addition:
 - Commonly Interested Attributes: Update or add attributes that are of general interest for the type of entity being described, based on the new information.
 - Unique Attributes: Identify and incorporate any unique attributes mentioned in the new paragraphs that were not previously included in the table.

Structure of the Updated Summary Table:
* Retain the two-column format: Attribute and Value.
* For each attribute, list the updated or new evidence indicating the source paragraph and relevant excerpts. Original attributes and values should remain listed, with additional information appended as necessary.
* If an attribute has multiple values, include all values as a list of the attribute.
* Each value should contain sufficient evidence extracted from the paragraph related to the entity.

Example
Entity: Hotel0
New Paragraph:
P4. The hotel has recently renovated its lobby, which now features a modern design.  Guests have also noted improvements in breakfast variety and quality.
P5. The hotel boasts impeccably designed rooms, featuring luxurious furnishings.

Given Existing Summary Table:
{
  "Room Quality": ["Spacious and comfortable rooms"],
  "Amenities": ["two pools"],
  "Service": ["Friendly staff", "overshadowed by unhelpful staff"],
}

Updated Summary Json:
{
  "Room Quality": ["Spacious and comfortable rooms", "Impeccably designed", "luxurious furnishings"],
  "Amenities": ["Two pools"],
  "Service": ["Friendly staff", "overshadowed by unhelpful staff"],
  "Food & Beverage": ["Exceptional dining experience", "limited breakfast options", "improved breakfast variety and quality"],
  "Lobby Design": ["Modern design"],
}

Your Task:
Update the summary Json with the given new descriptions of the specified entity.
Entity: {entity_name}
New Paragraph:
{paragraph}

Given Existing Summary Json:
{existing_summary}

Proceed to update the summary Json.
)";

inline constexpr std::string_view kDedup =
    R"(Task Overview:
Your task involves removing duplicate information from a detailed summary json about a specific entity. This summary will highlight key attributes of the entity along with their detailed descriptions derived from the given texts.

Instructions:
1. Eliminate repetitive information to ensure the summary is concise.
2. In the given summary json, the keys are attributes of the entity and each attribute has its corresponding values.
3. If one attribute encompasses most of the details in another attribute, merge them together.
4. If one value encompasses most of the details in another value, merge them together.

Here is an example of merging attributes:

Given Existing Summary:
{
    "Views": ["beautiful views of the Eiffel tower"],
    "views from hotel": ["visible Eiffel tower"],
}

New Summary after removing duplicates and merging:
{
    "View": ["beautiful views of the Eiffel tower"]
}

===

Here is an example of merging values:

Given Existing Summary:
{
    "Views": ["beautiful views of the Eiffel tower", "view of the Eiffel tower"],
    "views from hotel": ["visible Eiffel tower"],
}

New Summary after removing duplicates and merging:
{
    "View": ["beautiful views of the Eiffel tower"]
}

===

Your Task:
Remove duplicates from the following summary json.

Given Existing Summary:
{existing_summary}

New Summary after removing duplicates and merging:
)";

// The chain-of-key prompt opens with the shared preamble, then the
// per-operation instructions, then the four input sections.
inline constexpr std::string_view kCokPreamble =
    R"(I will provide a JSON format summary in a section called [NEW SUMMARY], and a class definition [CLASS], which define some fields that need to be generated, and an instantiation of that class under [PARTIAL SUMMARY] that is a response to the question in [QUESTION]. Your task is to propose updates to [PARTIAL SUMMARY] gathered from the information in [NEW SUMMARY].

There are two types of revisions that you can suggest: ADD and UPDATE.

For UPDATE, follow these instructions:
1. Your proposed updates must be for valid JSONPaths that already exist in [PARTIAL SUMMARY]. If the JSONPath does not exist, you should not propose an update for that JSONPath.
2. Updates can be made by modifying an existing value using content from [NEW SUMMARY].
3. Updates should never reduce the amount of information in [PARTIAL SUMMARY].
4. Never remove existing information from the [PARTIAL SUMMARY].
4. Proposed update must be a `dict[str, ProposedUpdate]` where the key is a valid JSONPath in [CLASS] and `ProposedUpdate` is defined as follows:
```
class ProposedUpdate(TypedDict):
  update: Any  # The type must be the same type as at the JSONPath in [CLASS].
```

For ADD, follow these instructions:
1. Proposed additions must be for valid JSONPaths that adhere to the definition in [CLASS]. They are allowed to increase the size of lists in the definition, but they must not define new fields which are not defined in the class definition.
2. It is OK to add partial objects. Leave fields unset if [NEW SUMMARY] does not contain a value for one of the fields in [PARTIAL SUMMARY].
3. Proposed additions must be a `dict[str, ProposedAdd]` where the key is a valid JSONPath in [CLASS] and `ProposedAdd` is defined as follows:
```
class ProposedAdd(TypedDict):
  add: Any  # The type must be the same type as at the JSONPath in [CLASS].
```

)";

inline constexpr std::string_view kCokEntityShared =
    R"(For both operations, follow these instructions:
1. Values have sufficient context: the values of the [PARTIAL SUMMARY] should have enough context so a reader can understand what it means.
2. No redundant keys: If information from [NEW SUMMARY] can be incorporated by updating an existing key in [PARTIAL SUMMARY], then do not introduce a new redundant key.
3. No redundant values under the same key: If one value encompasses most of the details in another value, merge them together.

)";

inline constexpr std::string_view kCokBookShared =
    R"(For both operations, follow these instructions:
1. Values have a short and concise information: the values of the [PARTIAL SUMMARY] should have a short, concise, and summarized information.
2. No redundant keys: If information from [NEW SUMMARY] can be incorporated by updating an existing key in [PARTIAL SUMMARY], then do not introduce a new redundant key. For example, if there's already a field for 'activities' do not introduce a new key for 'other activities' or 'water activities', 'hiking'. Update the existing key for 'activities'.
3. No redundant values under the same key: If one value encompasses most of the details in another value, merge them together. For instance, "beautiful views of the Eiffel tower" and "view of the Eiffel tower" should be merged into a single value like "beautiful views of the Eiffel tower
4. Do not include trivial information or redundant information as a value for its corresponding key.
5. Content Focus: Values should highlight the most important information relevant to the main story.
6. Exclude Ancillary Content: Disregard sections that are not directly part of the main narrative, such as: Title, Acknowledgments, Dedication, Chapter titles, Glossary entries, Timelines, Forewords, Prologues, Epilogues, Appendices, Author notes.

)";

inline constexpr std::string_view kCokSections =
    R"([QUESTION]
{question}

[NEW SUMMARY]
{new_summary}

[CLASS]
{class_text}

[PARTIAL SUMMARY]
{partial_summary}
)";

inline constexpr std::string_view kCompress =
    R"(Task Overview:
Your task involves compressing information from a detailed summary JSON about a book. This summary will highlight key details of the book that are important when summarizing the whole story of the book.

Instructions:
- Compress the summary to the specified number of tokens below.
- The condensed summary should retain key details about characters, events, backgrounds, motivations, objectives, and other important information.
- If the key has multiple values, merge them into a short summarized description.

Criteria:
- Redundancy: Eliminate repetitive information to ensure the summary is concise.
- Frequency: Emphasize the most frequently mentioned attributes or values, as they are likely the most important.
- Relevance: Focus on the information that is most pertinent to the main story of the book or the overall context of the summary.
- Remove trivial information that does not frequently appear in the other contexts or not relevant to the main story of the book based on the overall context of the summary.

Token Limit: {token_budget}

Given Existing Summary:
{existing_summary}

Proceed to generate the compressed summary Json.
)";

inline constexpr std::string_view kGenerateBook =
    R"(Task Overview:
We are analyzing segments of a story sequentially to progressively build a comprehensive summary of the entire plot. Your task is to generate a new summary by integrating vital information from the current story segment with the existing summary stored in memory. The summary can be provided in either text format or JSON format.

Instructions:
1. Integrate Key Information: Incorporate new information related to key events, backgrounds, settings, characters, their objectives, and motivations from the current segment into the existing summary.
2. Introduction of New Elements: Briefly introduce any new characters, places, or major elements mentioned for the first time in the current segment if they are not already included in the memory.
3. Handling Non-Linear Narratives: Account for non-linear narratives, including flashbacks, and switches between alternate worlds or viewpoints, ensuring the summary maintains a consistent and chronological narrative.
4. Cohesive Summary: Create a summary that reads as though it was written in one go, despite the step-by-step process of updating it with each new segment.
5. Exclude Ancillary Content: Disregard sections that are not directly part of the main narrative, such as: Title, Acknowledgments, Dedication, Chapter titles, Glossary entries, Timelines, Forewords, Prologues, Epilogues, Appendices, Author notes.

{special_instruction}

Your Task:
Generate a summary based on the following segment from a story and the memory of the story up until this point. Ensure the output follows the specified format.

A segment from a story:

---

{book_chunk}

---

Generated summary in {output_format}:
)";

inline constexpr std::string_view kUpdateBook =
    R"(Your Task:
Generate a summary based on the following segment from a story and the memory of the story up until this point. Ensure the output follows the specified format.

A segment from a story:

---

{book_chunk}

---

A memory of the story up until this point:

---

{memory}

---

Output Type: {output_format}

Updated summary in {output_format}:
)";

inline constexpr std::string_view kJsonInstruction =
    R"(Structure of the JSON Summary:
- Fields to Generate: Characters, Events, Backgrounds, Motivations, Objectives, Other.
- Field Format: Each field should be a dictionary where keys are the names of elements and values are their short descriptions.
- Each key should include a short and concise information as values that explain the key.
- Content Focus: Values should highlight the most important information relevant to the main story.
- Do not include trivial information or redundant information as a value for its corresponding key.

Here is an example of the JSON Summary:
{
  "characters": {
    "a character's name": [a list of short and summarized descriptions]
  },
  "events": {
    "an event's name": [a list of short and summarized descriptions]
  },
  "objectives": {
    "an objective's name": [a list of short and summarized descriptions]
  },
  "motivations": {
    "a motivation's name": [a list of short and summarized descriptions]
  },
  "background": {
    "a background's name": [a list of short and summarized descriptions]
  },
  "other": {
    "other information's name": [a list of short and summarized descriptions]
  }
}
)";

inline constexpr std::string_view kTextInstruction =
    R"(Structure of the Text Summary:
- Key Elements to Include: Incorporate key events, characters, backgrounds, motivations, objectives, and other relevant details.
- Narrative Flow: Ensure the summary flows seamlessly as a cohesive and comprehensive narrative.

Here is an example of the Text Summary format:
A summary that reads as though it was written in one go. It can consist of multiple paragraphs.
)";

inline constexpr std::string_view kFinalize =
    R"(Task Overview:
Convert the following structured summary into a cohesive plain text summary. Preserve every attribute and its values; do not invent new information.

Structured Summary:
{existing_summary}

Plain text summary:
)";

inline constexpr std::string_view kCoherence =
    R"(Task Overview:
You are evaluating one sentence of a summary for coherence problems. Consider the full summary for context and decide whether the sentence is confusing under any of the following error dimensions:
- Entity omission: an entity, real or abstract (person, object, place, concept, etc.) is mentioned, but key details are missing or unclear
- Event omission: an event is mentioned, but key details are missing or unclear
- Causal omission: the reason or motivation for something is missing or unclear
- Salience: inclusion of trivial details that do not contribute to the main storyline
- Discontinuity: an interruption in the flow of the narrative, including but not restricted to: sudden jumps between perspectives, time periods, or settings; poor transition between sentences or paragraphs; sentences or paragraphs that seem out of place; illogical sentence order or summary structure
- Duplication: redundant repetition of similar information
- Inconsistency: two parts of the summary contain contradicting information
- Language: grammar issues; confusing wording or phrasing; etc.

Full summary:
{existing_summary}

Sentence under review:
{question}

Reply with a JSON object: {"confusing": true|false, "dimensions": [names of the error dimensions that apply]}.
)";

}  // namespace prompts

inline std::string template_body(TemplateId id, Task task = Task::Entity) {
  switch (id) {
    case TemplateId::GenerateEntity: return std::string(prompts::kGenerateEntity);
    case TemplateId::UpdateEntity: return std::string(prompts::kUpdateEntity);
    case TemplateId::Dedup: return std::string(prompts::kDedup);
    case TemplateId::Cok: {
      std::string body(prompts::kCokPreamble);
      body += task == Task::Book ? prompts::kCokBookShared : prompts::kCokEntityShared;
      body += prompts::kCokSections;
      return body;
    }
    case TemplateId::Compress: return std::string(prompts::kCompress);
    case TemplateId::GenerateBook: return std::string(prompts::kGenerateBook);
    case TemplateId::UpdateBook: return std::string(prompts::kUpdateBook);
    case TemplateId::JsonInstruction: return std::string(prompts::kJsonInstruction);
    case TemplateId::TextInstruction: return std::string(prompts::kTextInstruction);
    case TemplateId::Finalize: return std::string(prompts::kFinalize);
    case TemplateId::Coherence: return std::string(prompts::kCoherence);
  }
  throw std::logic_error("unknown template id");
}

namespace detail {

inline constexpr const char* kPlaceholderNames[] = {
    "entity_name",    "paragraph",      "existing_summary", "book_chunk",
    "memory",         "output_format",  "special_instruction",
    "new_summary",    "partial_summary", "class_text",      "question",
    "token_budget",
};

}  // namespace detail

// Deterministic substitution of {name} placeholders. Every placeholder
// present in the body must be bound; literal braces elsewhere (JSON
// examples) pass through untouched.
inline std::string render_prompt(TemplateId id, const Bindings& bindings,
                                 Task task = Task::Entity) {
  const std::string body = template_body(id, task);
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      bool substituted = false;
      for (const char* name : detail::kPlaceholderNames) {
        const std::size_t len = std::char_traits<char>::length(name);
        if (body.compare(i + 1, len, name) == 0 && i + 1 + len < body.size() &&
            body[i + 1 + len] == '}') {
          auto it = bindings.find(name);
          if (it == bindings.end()) throw MissingPlaceholderError(name);
          out += it->second;
          i += len + 2;
          substituted = true;
          break;
        }
      }
      if (substituted) continue;
    }
    out.push_back(body[i]);
    ++i;
  }
  return out;
}

}  // namespace incsum
