#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizeOptions {
    pub keep_cjk_punctuation: bool,
}

/// Full-width and CJK punctuation: the CJK Symbols and Punctuation block,
/// the punctuation parts of the half/full-width forms block, general
/// punctuation (dashes, curly quotes, ellipsis), CJK compatibility forms and
/// the middle dot.
pub fn is_cjk_punctuation(c: char) -> bool {
    matches!(c,
        '\u{3001}'..='\u{303F}'
        | '\u{FF01}'..='\u{FF0F}'
        | '\u{FF1A}'..='\u{FF20}'
        | '\u{FF3B}'..='\u{FF40}'
        | '\u{FF5B}'..='\u{FF65}'
        | '\u{2010}'..='\u{2027}'
        | '\u{FE30}'..='\u{FE4F}'
        | '\u{00B7}')
}

/// One token per Unicode scalar value, dropping whitespace, ASCII
/// punctuation and CJK punctuation.
pub fn tokenize_chars(text: &str) -> Vec<char> {
    tokenize_chars_with(text, TokenizeOptions::default())
}

pub fn tokenize_chars_with(text: &str, opts: TokenizeOptions) -> Vec<char> {
    text.chars()
        .filter(|c| !c.is_whitespace() && !c.is_ascii_punctuation())
        .filter(|&c| opts.keep_cjk_punctuation || !is_cjk_punctuation(c))
        .collect()
}
