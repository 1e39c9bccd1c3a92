//! Built-in schemas and schema documents.

use std::path::Path;

use morphdis_core::FeatureSchema;

use crate::{read_text, Error, Result};

pub const BUILTIN: [(&str, &str); 4] = [
    ("msa", include_str!("../schemas/msa.json")),
    ("glf", include_str!("../schemas/glf.json")),
    ("egy", include_str!("../schemas/egy.json")),
    ("lev", include_str!("../schemas/lev.json")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn parse_schema(text: &str, origin: &str) -> Result<FeatureSchema> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        origin: origin.into(),
        line: e.line(),
        reason: e.to_string(),
    })
}

pub fn builtin(name: &str) -> Option<FeatureSchema> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_schema(text, n).expect("built-in schema is valid"))
}

/// A built-in schema name or the path of a schema document.
pub fn resolve(spec: &str) -> Result<FeatureSchema> {
    if let Some(s) = builtin(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Usage(format!(
            "unknown schema {spec:?}: not a built-in ({}) or an existing file",
            builtin_names().collect::<Vec<_>>().join(", ")
        )));
    }
    parse_schema(&read_text(path)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_with_expected_sizes() {
        for (name, n) in [("msa", 14), ("glf", 16), ("egy", 16), ("lev", 16)] {
            let s = builtin(name).unwrap();
            assert_eq!(s.variant(), name);
            assert_eq!(s.len(), n);
        }
    }

    #[test]
    fn msa_value_counts() {
        let s = builtin("msa").unwrap();
        let counts: Vec<usize> = s.features().iter().map(|f| f.values.len()).collect();
        assert_eq!(counts, [34, 4, 3, 5, 4, 4, 5, 5, 5, 3, 9, 17, 7, 48]);
    }

    #[test]
    fn unknown_schema_is_a_usage_error() {
        assert!(matches!(resolve("no-such-schema"), Err(Error::Usage(_))));
    }
}
