//! Flat dotted-key JSON run configuration. Resolution order is defaults,
//! then config file, then command-line flags; the resolved map is echoed
//! next to every artifact so a run can be reproduced from its own output.

use std::collections::BTreeMap;
use std::path::Path;

use mfising::{Error, Result};
use serde_json::Value;

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    values: BTreeMap<String, Value>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let parsed: Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let Value::Object(object) = parsed else {
            return Err(Error::InvalidConfig(format!(
                "{}: config must be a JSON object with dotted keys",
                path.display()
            )));
        };
        Ok(ConfigMap {
            values: object.into_iter().collect(),
        })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                Error::InvalidConfig(format!("config key `{key}` must be a number"))
            }),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| {
                Error::InvalidConfig(format!("config key `{key}` must be a nonnegative integer"))
            }),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_bool().map(Some).ok_or_else(|| {
                Error::InvalidConfig(format!("config key `{key}` must be a boolean"))
            }),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(|s| Some(s.to_string())).ok_or_else(|| {
                Error::InvalidConfig(format!("config key `{key}` must be a string"))
            }),
        }
    }
}

/// Builder for the resolved-config echo.
#[derive(Debug, Default)]
pub struct ConfigEcho {
    values: BTreeMap<String, Value>,
}

impl ConfigEcho {
    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.values.insert(key.to_string(), value.into());
        self
    }

    pub fn into_map(self) -> BTreeMap<String, Value> {
        self.values
    }
}
