use super::{count_sequence, Counts, FeatureError, FeaturePts};

/// Tag that marks the sentence-final punctuation token.
pub const END_TAG: &str = ".";

/// `(surface, tag)` tokens of one sentence, ending in exactly one end token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    tokens: Vec<(String, String)>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<(String, String)>) -> Result<Self, FeatureError> {
        let Some((last, body)) = tokens.split_last() else {
            return Err(FeatureError::EmptyInput);
        };
        if last.1 != END_TAG {
            return Err(FeatureError::Sentence(
                "sentence does not end with an end token",
            ));
        }
        if body.is_empty() {
            return Err(FeatureError::Sentence(
                "sentence has no tokens before its end token",
            ));
        }
        if body.iter().any(|(_, tag)| tag == END_TAG) {
            return Err(FeatureError::Sentence(
                "end token before the end of the sentence",
            ));
        }
        Ok(TaggedSentence { tokens })
    }

    pub fn tokens(&self) -> &[(String, String)] {
        &self.tokens
    }

    /// Tags of all tokens before the end token.
    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tokens[..self.tokens.len() - 1]
            .iter()
            .map(|(_, t)| t.as_str())
    }
}

/// Reads `surface<TAB>tag` lines with blank lines between sentences.
pub fn parse_tagged_tsv(text: &str) -> Result<Vec<TaggedSentence>, FeatureError> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut first_line = 0;

    let mut finish = |tokens: &mut Vec<(String, String)>, first: usize, last: usize| {
        if tokens.is_empty() {
            return Ok(());
        }
        match TaggedSentence::new(std::mem::take(tokens)) {
            Ok(s) => {
                sentences.push(s);
                Ok(())
            }
            Err(FeatureError::Sentence(message)) => Err(FeatureError::parse(
                last,
                format!("{message} (sentence starting at line {first})"),
            )),
            Err(e) => Err(e),
        }
    };

    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            finish(&mut tokens, first_line, last_line)?;
            continue;
        }
        let Some((surface, tag)) = line.split_once('\t') else {
            return Err(FeatureError::parse(line_no, "expected surface<TAB>tag"));
        };
        let tag = tag.trim();
        if tag.is_empty() || tag.contains('\t') {
            return Err(FeatureError::parse(
                line_no,
                "expected a single non-empty tag",
            ));
        }
        if tokens.is_empty() {
            first_line = line_no;
        }
        last_line = line_no;
        tokens.push((surface.to_string(), tag.to_string()));
    }
    finish(&mut tokens, first_line, last_line)?;

    if sentences.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    Ok(sentences)
}

/// Tag-bigram system: start -> first tag, tag -> next tag, last tag -> end.
pub fn build_pos_pts(sentences: &[TaggedSentence]) -> Result<FeaturePts, FeatureError> {
    if sentences.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut counts = Counts::default();
    for sentence in sentences {
        count_sequence(&mut counts, sentence.tags().map(str::to_string));
    }
    counts.into_feature_pts()
}
