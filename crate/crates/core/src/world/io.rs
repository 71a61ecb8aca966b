//! Line-oriented world files.
//!
//! ```text
//! # comment
//! LOC;W1;0.5;2.25
//! LOC;STA1;1.5;2.25
//! EDGE;W1;STA1;1.0
//! ```

use std::fmt::Write as _;

use super::{Location, LocationId, Road, World, WorldError};

pub fn parse_world(text: &str) -> Result<World, WorldError> {
    let mut locations = Vec::new();
    let mut roads = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let err = |reason: String| WorldError::Import { line: line_no, reason };
        let fields: Vec<&str> = line.split(';').collect();
        let id = |s: &str| {
            s.parse::<LocationId>()
                .map_err(|_| err(format!("bad location id {s:?}")))
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number {s:?}")))
        };
        match fields.as_slice() {
            ["LOC", loc, x, y] => locations.push(Location {
                id: id(loc)?,
                x: num(x)?,
                y: num(y)?,
            }),
            ["EDGE", a, b, miles] => {
                let miles = num(miles)?;
                if miles <= 0.0 {
                    return Err(err(format!("edge length must be positive, got {miles}")));
                }
                roads.push(Road {
                    a: id(a)?,
                    b: id(b)?,
                    miles,
                });
            }
            [kind, ..] if *kind == "LOC" || *kind == "EDGE" => {
                return Err(err(format!("{kind} expects 3 fields")));
            }
            _ => return Err(err(format!("unknown record {:?}", fields[0]))),
        }
    }
    World::from_parts(locations, roads)
}

/// Renders a world in the import format; `parse_world` reproduces it exactly.
pub fn write_world(world: &World) -> String {
    let mut out = String::new();
    for loc in world.locations() {
        let _ = writeln!(out, "LOC;{};{};{}", loc.id, loc.x, loc.y);
    }
    for road in world.roads() {
        let _ = writeln!(out, "EDGE;{};{};{}", road.a, road.b, road.miles);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_world, WorldConfig};

    #[test]
    fn round_trips_generated_world() {
        let w = build_world(&WorldConfig::default(), 5).unwrap();
        let text = write_world(&w);
        let back = parse_world(&text).unwrap();
        assert_eq!(back.locations(), w.locations());
        assert_eq!(back.roads(), w.roads());
        assert_eq!(write_world(&back), text);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# demo\n\nLOC;R1;0;0\nLOC;STA1;3;0\n  # indented\nEDGE;R1;STA1;3.0\n";
        let w = parse_world(text).unwrap();
        assert_eq!(w.locations().len(), 2);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_world("LOC;R1;0;0\nLOC;X1;0;0\n").unwrap_err();
        assert!(matches!(e, WorldError::Import { line: 2, .. }), "{e}");
        let e = parse_world("LOC;R1;0;0\nLOC;STA1;1;0\nEDGE;R1;STA1;-1\n").unwrap_err();
        assert!(matches!(e, WorldError::Import { line: 3, .. }), "{e}");
        let e = parse_world("ROAD;R1\n").unwrap_err();
        assert!(matches!(e, WorldError::Import { line: 1, .. }), "{e}");
    }
}
