//! Harmonization settings and POS category maps.

use std::path::Path;

use morphdis_core::eval::CategoryMap;
use morphdis_core::harmonizer::HarmonizationConfig;

use crate::{load_json, Error, Result};

const DEFAULT_HARMONIZATION: &str = include_str!("../config/harmonize_default.json");
const DEFAULT_CATEGORIES: &str = include_str!("../config/pos_categories.json");

pub fn default_harmonization() -> HarmonizationConfig {
    serde_json::from_str(DEFAULT_HARMONIZATION).expect("bundled harmonization config is valid")
}

pub fn default_categories() -> CategoryMap {
    serde_json::from_str(DEFAULT_CATEGORIES).expect("bundled category map is valid")
}

pub fn load_harmonization(path: Option<&Path>) -> Result<HarmonizationConfig> {
    path.map_or_else(|| Ok(default_harmonization()), load_json)
}

pub fn load_categories(path: Option<&Path>) -> Result<CategoryMap> {
    path.map_or_else(|| Ok(default_categories()), load_json)
}

/// Parses `a,b,c` into strictly increasing token budgets.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let sizes = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad size {s:?} in {text:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::Usage(format!(
            "sizes must be positive and strictly increasing: {text:?}"
        )));
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphdis_core::harmonizer::Harmonizer;

    #[test]
    fn bundled_config_matches_builtin_default() {
        assert_eq!(default_harmonization(), HarmonizationConfig::default());
        let lev = crate::schemas::builtin("lev").unwrap();
        let h = Harmonizer::new(default_harmonization(), &lev).unwrap();
        assert_eq!(h.reduced_schema().len(), 10);
    }

    #[test]
    fn categories_cover_msa_pos() {
        let cats = default_categories();
        let msa = crate::schemas::builtin("msa").unwrap();
        for v in &msa.feature("pos").unwrap().values {
            assert!(cats.0.contains_key(v), "{v}");
        }
        assert_eq!(cats.category("adj"), "nominal");
        assert_eq!(cats.category("verb"), "verb");
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("5, 10,20").unwrap(), [5, 10, 20]);
        assert!(parse_sizes("10,5").is_err());
        assert!(parse_sizes("x").is_err());
    }
}
