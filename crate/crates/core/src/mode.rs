use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a transportation mode (`ffes`, `metro`, `personal-car`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeId(String);

impl ModeId {
    pub fn new(id: impl Into<String>) -> Self {
        ModeId(id.into().trim().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for ModeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ModeId {
    fn from(s: &str) -> Self {
        ModeId::new(s)
    }
}

/// A group of modes reported as one line of a traffic table.
///
/// Traffic statistics often pool modes that share a vehicle type
/// (`personal-car+taxi+ride-hailing`). Every member of a class gets the class
/// allocation share and per-pkt factor. Written with `+` separators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrafficClass(Vec<ModeId>);

impl TrafficClass {
    pub fn parse(s: &str) -> Self {
        TrafficClass(
            s.split('+')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(ModeId::new)
                .collect(),
        )
    }

    pub fn single(mode: ModeId) -> Self {
        TrafficClass(vec![mode])
    }

    pub fn members(&self) -> &[ModeId] {
        &self.0
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        self.0.contains(mode)
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(ModeId::as_str).collect();
        f.write_str(&names.join("+"))
    }
}

impl Serialize for TrafficClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TrafficClass {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let class = TrafficClass::parse(&s);
        if class.0.is_empty() {
            return Err(serde::de::Error::custom("empty traffic class"));
        }
        Ok(class)
    }
}
