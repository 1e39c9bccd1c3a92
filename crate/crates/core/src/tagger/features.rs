//! Contextual extraction features for the built-in tagger.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Longest prefix/suffix length, in characters.
    pub max_affix: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { max_affix: 3 }
    }
}

impl FeatureConfig {
    /// Features of each token that do not depend on earlier predictions.
    pub fn static_features(&self, forms: &[&str]) -> Vec<Vec<String>> {
        let n = forms.len();
        (0..n)
            .map(|i| {
                let form = forms[i];
                let mut out = Vec::with_capacity(8 + 2 * self.max_affix);
                out.push(String::from("bias"));
                out.push(format!("w={form}"));
                out.push(format!("l={}", form.to_lowercase()));
                let chars: Vec<char> = form.chars().collect();
                for k in 1..=self.max_affix.min(chars.len()) {
                    let pre: String = chars[..k].iter().collect();
                    let suf: String = chars[chars.len() - k..].iter().collect();
                    out.push(format!("p{k}={pre}"));
                    out.push(format!("s{k}={suf}"));
                }
                let prev = if i == 0 { SENTENCE_START } else { forms[i - 1] };
                let next = if i + 1 == n { SENTENCE_END } else { forms[i + 1] };
                out.push(format!("pw={prev}"));
                out.push(format!("nw={next}"));
                if i == 0 {
                    out.push(String::from("first"));
                }
                if i + 1 == n {
                    out.push(String::from("last"));
                }
                out
            })
            .collect()
    }
}

/// Feature carrying the previous token's predicted core tag.
pub fn previous_tag_feature(tag: &str) -> String {
    format!("pt={tag}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affixes_respect_char_boundaries() {
        let f = FeatureConfig::default().static_features(&["\u{0643}\u{062A}"]);
        assert!(f[0].contains(&String::from("p1=\u{0643}")));
        assert!(f[0].contains(&String::from("s2=\u{0643}\u{062A}")));
        assert!(!f[0].iter().any(|x| x.starts_with("p3=")));
        assert!(f[0].contains(&String::from("first")) && f[0].contains(&String::from("last")));
    }

    #[test]
    fn context_words() {
        let f = FeatureConfig::default().static_features(&["a", "b", "c"]);
        assert!(f[1].contains(&String::from("pw=a")));
        assert!(f[1].contains(&String::from("nw=c")));
        assert!(f[0].contains(&String::from("pw=<s>")));
        assert!(f[2].contains(&String::from("nw=</s>")));
    }
}
