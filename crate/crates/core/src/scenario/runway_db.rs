use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{GeodeticPoint, RunwayGeometry};

/// One runway end as stored in the JSON database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunwayEntry {
    /// `[lat, lon, alt]` for threshold-left, threshold-right, far-right, far-left.
    pub corners: [[f64; 3]; 4],
    pub has_piano: bool,
    #[serde(default)]
    pub source: String,
}

impl RunwayEntry {
    pub fn from_geometry(rw: &RunwayGeometry, source: impl Into<String>) -> Self {
        Self {
            corners: rw.corners.map(|c| [c.latitude, c.longitude, c.altitude]),
            has_piano: rw.has_piano,
            source: source.into(),
        }
    }

    fn to_geometry(&self, airport: &str, runway: &str) -> Result<RunwayGeometry> {
        let mut corners = [GeodeticPoint {
            latitude: 0.0,
            longitude: 0.0,
            altitude: 0.0,
        }; 4];
        for (dst, c) in corners.iter_mut().zip(self.corners.iter()) {
            *dst = GeodeticPoint::new(c[0], c[1], c[2])
                .map_err(|e| Error::validation(format!("{airport}/{runway}: malformed corner: {e}")))?;
        }
        RunwayGeometry::new(airport, runway, corners, self.has_piano)
    }
}

/// Map that rejects repeated keys instead of keeping the last one.
struct Unique<V>(BTreeMap<String, V>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for Unique<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Vis<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for Vis<V> {
            type Value = Unique<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Unique<V>, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    if out.contains_key(&key) {
                        return Err(de::Error::custom(format!("duplicate key `{key}`")));
                    }
                    let value = map.next_value()?;
                    out.insert(key, value);
                }
                Ok(Unique(out))
            }
        }
        d.deserialize_map(Vis(PhantomData))
    }
}

/// Runway ends keyed by airport ICAO code then runway designator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunwayDatabase {
    airports: BTreeMap<String, BTreeMap<String, (RunwayGeometry, String)>>,
}

impl RunwayDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces any existing entry with the same airport and designator.
    pub fn insert(&mut self, rw: RunwayGeometry, source: impl Into<String>) {
        self.airports
            .entry(rw.airport_icao.clone())
            .or_default()
            .insert(rw.runway_id.clone(), (rw, source.into()));
    }

    pub fn get(&self, airport: &str, runway: &str) -> Option<&RunwayGeometry> {
        self.airports.get(airport)?.get(runway).map(|(rw, _)| rw)
    }

    pub fn source(&self, airport: &str, runway: &str) -> Option<&str> {
        self.airports.get(airport)?.get(runway).map(|(_, s)| s.as_str())
    }

    pub fn airports(&self) -> impl Iterator<Item = &str> {
        self.airports.keys().map(String::as_str)
    }

    pub fn runways_of(&self, airport: &str) -> impl Iterator<Item = &RunwayGeometry> {
        self.airports
            .get(airport)
            .into_iter()
            .flat_map(|m| m.values().map(|(rw, _)| rw))
    }

    /// All runway ends, ordered by airport then designator.
    pub fn iter(&self) -> impl Iterator<Item = &RunwayGeometry> {
        self.airports.values().flat_map(|m| m.values().map(|(rw, _)| rw))
    }

    pub fn len(&self) -> usize {
        self.airports.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> String {
        let doc: BTreeMap<&str, BTreeMap<&str, RunwayEntry>> = self
            .airports
            .iter()
            .map(|(icao, rws)| {
                let inner = rws
                    .iter()
                    .map(|(id, (rw, src))| (id.as_str(), RunwayEntry::from_geometry(rw, src.clone())))
                    .collect();
                (icao.as_str(), inner)
            })
            .collect();
        serde_json::to_string_pretty(&doc).expect("database serializes")
    }
}

pub fn parse_runway_db(document: &str) -> Result<RunwayDatabase> {
    if document.trim().is_empty() {
        return Ok(RunwayDatabase::new());
    }
    let raw: Unique<Unique<RunwayEntry>> = serde_json::from_str(document)?;
    let mut db = RunwayDatabase::new();
    for (icao, runways) in raw.0 {
        for (id, entry) in runways.0 {
            let rw = entry.to_geometry(&icao, &id)?;
            db.insert(rw, entry.source);
        }
    }
    Ok(db)
}
