//! Flat `key = value` configuration files.
//!
//! The format is deliberately small: one assignment per line, `#` starts
//! a comment (names and labels never contain `#`, so stripping it first
//! is safe), blank lines are ignored. Keys must be unique. Values keep
//! internal whitespace; lists use commas. Interpretation of the values is
//! left to the caller, so this module stays free of schema knowledge.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Parsed key/value pairs, with keys kept in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: Vec<(String, String, usize)>,
    index: BTreeMap<String, usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigFileError> {
        let mut file = ConfigFile::default();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigFileError::Syntax {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigFileError::Syntax {
                    line,
                    message: "empty key before `=`".to_owned(),
                });
            }
            if file.index.contains_key(key) {
                return Err(ConfigFileError::Syntax {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            file.index.insert(key.to_owned(), file.entries.len());
            file.entries.push((key.to_owned(), value.to_owned(), line));
        }
        Ok(file)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.index.get(key).map(|&i| self.entries[i].1.as_str())
    }

    /// Line the key was assigned on, for diagnostics.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).map(|&i| self.entries[i].2)
    }

    /// Keys in the order they appeared in the file.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
