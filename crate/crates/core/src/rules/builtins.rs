use crate::error::RuleError;

/// Prefix of `input` before the first `separator`.
///
/// Unlike XPath, an absent separator yields the whole input, so a one-word
/// goal description still produces its first word.
pub fn substring_before<'a>(input: &'a str, separator: &str) -> Result<&'a str, RuleError> {
    if separator.is_empty() {
        return Err(RuleError::EmptySeparator);
    }
    Ok(input.find(separator).map_or(input, |at| &input[..at]))
}

/// Case-insensitive substring test.
pub fn contains_ignore_case(haystack: &str, needle: &str) -> Result<bool, RuleError> {
    if needle.is_empty() {
        return Err(RuleError::EmptyNeedle);
    }
    Ok(haystack.to_lowercase().contains(&needle.to_lowercase()))
}
