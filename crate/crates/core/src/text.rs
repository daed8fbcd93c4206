//! Tokenization and the punctuation inventory used by tokenization and by the
//! punctuation-count features.

/// Full-width and CJK marks counted as punctuation in addition to ASCII
/// punctuation.
pub const CJK_PUNCTUATION: &[char] = &[
    '，', '。', '、', '；', '：', '？', '！', '“', '”', '‘', '’', '（', '）', '《', '》', '【', '】', '「', '」', '『',
    '』', '…', '—', '～', '·', '〈', '〉', '．',
];

/// Punctuation set: the 32 ASCII punctuation characters plus [`CJK_PUNCTUATION`].
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || CJK_PUNCTUATION.contains(&c)
}

/// Splits on whitespace and emits every punctuation character as its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut current = String::new();
        for c in chunk.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

pub fn punctuation_count<S: AsRef<str>>(tokens: &[S]) -> usize {
    tokens
        .iter()
        .map(|t| t.as_ref().chars().filter(|&c| is_punctuation(c)).count())
        .sum()
}
