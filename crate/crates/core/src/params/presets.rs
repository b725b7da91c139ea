//! Built-in configuration presets.

use super::config::Config;
use crate::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("canonical", include_str!("../../presets/canonical.toml")),
    ("membrane", include_str!("../../presets/membrane.toml")),
    ("torque", include_str!("../../presets/torque.toml")),
    ("fig2", include_str!("../../presets/fig2.toml")),
    ("fig4a", include_str!("../../presets/fig4a.toml")),
    ("fig4b", include_str!("../../presets/fig4b.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6", include_str!("../../presets/fig6.toml")),
    ("table1", include_str!("../../presets/table1.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Raw preset text.
pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<Config> {
    let text = source(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    Config::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in names() {
            let c = load(name).unwrap();
            assert_eq!(c.preset.id, name);
            c.check().unwrap();
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(load("nope").is_err());
    }
}
