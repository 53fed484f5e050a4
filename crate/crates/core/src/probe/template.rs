//! Prompt template loading and rendering.

use sha2::{Digest, Sha256};

use crate::dataset::NormDataset;
use crate::probe::{Probe, ProbeError};

/// The stock few-shot template. `{feature}` and `{concept}` are
/// substituted at render time; everything else goes to the endpoint
/// verbatim.
pub const DEFAULT_TEMPLATE_TEXT: &str = "\
Q: Is the property [is_female] true for the concept [book]?
A: False
Q: Is the property [can_be_digital] true for the concept [book]
A: True
In one word True/False, answer the following question
Q: Is the property [{feature}] true for {concept}?
A:";

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template has no line containing both {{feature}} and {{concept}}")]
    MissingPlaceholder,
    #[error("placeholder {placeholder} must appear exactly once, found {count}")]
    PlaceholderCount {
        placeholder: &'static str,
        count: usize,
    },
}

/// A validated prompt template: a few-shot block, a question line with
/// one `{feature}` and one `{concept}` placeholder, and a trailing answer
/// cue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
    few_shot_block: String,
    question_pattern: String,
    answer_cue: String,
    content_hash: String,
}

impl PromptTemplate {
    /// Parses template text. The question pattern is the line holding
    /// both placeholders; preceding lines form the few-shot block and
    /// following lines the answer cue.
    pub fn from_text(text: &str) -> Result<Self, TemplateError> {
        for (placeholder, what) in [("{feature}", "{feature}"), ("{concept}", "{concept}")] {
            let count = text.matches(placeholder).count();
            if count != 1 {
                if count == 0 {
                    return Err(TemplateError::MissingPlaceholder);
                }
                return Err(TemplateError::PlaceholderCount {
                    placeholder: what,
                    count,
                });
            }
        }
        let lines: Vec<&str> = text.split('\n').collect();
        let question_idx = lines
            .iter()
            .position(|l| l.contains("{feature}") && l.contains("{concept}"))
            .ok_or(TemplateError::MissingPlaceholder)?;
        let few_shot_block = lines[..question_idx].join("\n");
        let question_pattern = lines[question_idx].to_string();
        let answer_cue = lines[question_idx + 1..].join("\n");
        let content_hash = hex_digest(text.as_bytes());
        Ok(PromptTemplate {
            text: text.to_string(),
            few_shot_block,
            question_pattern,
            answer_cue,
            content_hash,
        })
    }

    /// The stock template.
    pub fn stock() -> Self {
        PromptTemplate::from_text(DEFAULT_TEMPLATE_TEXT).expect("stock template is valid")
    }

    pub fn few_shot_block(&self) -> &str {
        &self.few_shot_block
    }

    pub fn question_pattern(&self) -> &str {
        &self.question_pattern
    }

    pub fn answer_cue(&self) -> &str {
        &self.answer_cue
    }

    /// Hex SHA-256 of the raw template text. Cache keys include this, so
    /// editing the template invalidates cached answers by construction.
    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }

    /// Substitutes the two placeholders. Byte-deterministic for fixed
    /// inputs.
    pub fn render(&self, feature_name: &str, concept_name: &str) -> String {
        self.text
            .replace("{feature}", feature_name)
            .replace("{concept}", concept_name)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(digest.len() * 2);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Renders the prompt for one probe against a dataset.
pub fn render_prompt(
    probe: &Probe,
    template: &PromptTemplate,
    dataset: &NormDataset,
) -> Result<String, ProbeError> {
    if probe.concept.0 >= dataset.n_concepts() {
        return Err(ProbeError::UnknownId {
            what: "concept",
            index: probe.concept.0,
        });
    }
    if probe.feature.0 >= dataset.n_features() {
        return Err(ProbeError::UnknownId {
            what: "feature",
            index: probe.feature.0,
        });
    }
    let concept = dataset.concept(probe.concept);
    let feature = dataset.feature(probe.feature);
    Ok(template.render(&feature.name, &concept.name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_norms, LoadOptions};
    use crate::probe::{build_probe_plan, PlanScope};

    #[test]
    fn stock_template_renders_the_expected_question() {
        let t = PromptTemplate::stock();
        let rendered = t.render("has_two_eyes", "Dolphins");
        assert!(rendered.contains("Q: Is the property [has_two_eyes] true for Dolphins?"));
        assert!(rendered.starts_with("Q: Is the property [is_female] true for the concept [book]?"));
        assert!(rendered.ends_with("A:"));
        assert!(!rendered.contains("{feature}"));
        assert!(!rendered.contains("{concept}"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = PromptTemplate::stock();
        assert_eq!(t.render("x", "y"), t.render("x", "y"));
    }

    #[test]
    fn missing_placeholder_is_rejected() {
        let err = PromptTemplate::from_text("Q: is {feature} true?\nA:").unwrap_err();
        assert!(matches!(err, TemplateError::MissingPlaceholder));
        let err = PromptTemplate::from_text("Q: about {concept}\nA:").unwrap_err();
        assert!(matches!(err, TemplateError::MissingPlaceholder));
    }

    #[test]
    fn repeated_placeholder_is_rejected() {
        let err =
            PromptTemplate::from_text("{concept} {feature} {feature}\nA:").unwrap_err();
        assert!(matches!(
            err,
            TemplateError::PlaceholderCount {
                placeholder: "{feature}",
                ..
            }
        ));
    }

    #[test]
    fn template_splits_into_block_question_and_cue() {
        let t = PromptTemplate::from_text("intro\nQ: {feature} of {concept}?\nA:").unwrap();
        assert_eq!(t.few_shot_block(), "intro");
        assert_eq!(t.question_pattern(), "Q: {feature} of {concept}?");
        assert_eq!(t.answer_cue(), "A:");
    }

    #[test]
    fn content_hash_tracks_text() {
        let a = PromptTemplate::from_text("Q: {feature} {concept}\nA:").unwrap();
        let b = PromptTemplate::from_text("Q: {feature} {concept}\nAnswer:").unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn render_prompt_resolves_probe_ids() {
        let concepts = "name,domain,category\nDolphins,animal,mammals\n";
        let cells = "concept,feature,feature_domain,raters_yes,raters_total\n\
                     Dolphins,has_two_eyes,animal,4,4\n";
        let ds = load_norms(concepts.as_bytes(), cells.as_bytes(), LoadOptions::default()).unwrap();
        let plan = build_probe_plan(&ds, PlanScope::All).unwrap();
        let t = PromptTemplate::stock();
        let rendered = render_prompt(&plan[0], &t, &ds).unwrap();
        assert!(rendered.contains("[has_two_eyes] true for Dolphins?"));
        assert_eq!(rendered, render_prompt(&plan[0], &t, &ds).unwrap());
    }
}
