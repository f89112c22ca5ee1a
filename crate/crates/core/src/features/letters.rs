use super::{count_sequence, Counts, FeatureError, FeaturePts};

pub const DEFAULT_TERMINATORS: &[char] = &['.', '!', '?'];

/// Letter-bigram system of raw text with `.`, `!` and `?` ending sentences.
pub fn build_letter_pts(text: &str) -> Result<FeaturePts, FeatureError> {
    build_letter_pts_with(text, DEFAULT_TERMINATORS)
}

/// Letters are case-folded and every other character except the given
/// terminators is dropped, so bigrams run across word boundaries but never
/// across sentences. Text after the last terminator is ignored.
pub fn build_letter_pts_with(text: &str, terminators: &[char]) -> Result<FeaturePts, FeatureError> {
    if text.trim().is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut counts = Counts::default();
    let mut sentences = 0usize;
    let mut current: Vec<String> = Vec::new();
    for ch in text.chars() {
        if terminators.contains(&ch) {
            if !current.is_empty() {
                count_sequence(&mut counts, current.drain(..));
                sentences += 1;
            }
        } else if ch.is_alphabetic() {
            current.extend(ch.to_lowercase().map(String::from));
        }
    }
    if sentences == 0 {
        return Err(FeatureError::NoSentence);
    }
    counts.into_feature_pts()
}
