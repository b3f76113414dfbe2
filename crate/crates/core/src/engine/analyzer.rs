/// Identifies the tokenization rules below; recorded in index snapshots.
pub const ANALYZER_VERSION: &str = "lowercase-alnum/1";

/// Splits on every non-alphanumeric character and lowercases each token.
/// No stemming, no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            tokenize("Social Survey 2018!"),
            ["social", "survey", "2018"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("ALLBUS–Daten"), ["allbus", "daten"]);
    }

    #[test]
    fn unicode_letters_survive() {
        assert_eq!(tokenize("Größe/ÉTUDE_x"), ["größe", "étude", "x"]);
        assert!(tokenize(" \t--!! ").is_empty());
    }
}
