//! Geographic environment: typed locations, the road graph and routing.
//!
//! A [`World`] is immutable once built. All-pairs shortest distances and the
//! predecessor trees are computed up front so route queries during a
//! simulation are table lookups.

mod graph;
pub mod io;
pub mod prices;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::rng::{self, Purpose};

pub use prices::{generate_prices, load_base_curve_csv, BaseCurve, PriceParams, PriceTable};

/// Distances closer than this are treated as equal (floating-point slack in
/// summed shortest paths).
pub const DISTANCE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("unknown location {0}")]
    UnknownLocation(LocationId),
    #[error("duplicate location {0}")]
    DuplicateLocation(LocationId),
    #[error("route has no waypoints")]
    EmptyRoute,
    #[error("world has no gas stations")]
    NoStations,
    #[error("road graph is not connected")]
    Disconnected,
    #[error("edge {0}-{1} has non-positive length {2}")]
    NonPositiveEdge(LocationId, LocationId, f64),
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {reason}")]
    Import { line: usize, reason: String },
    #[error("invalid location id {0:?}")]
    BadLocationId(String),
    #[error("price data: {0}")]
    Prices(String),
    #[error("day {day} outside price horizon of {horizon} days")]
    DayOutOfHorizon { day: usize, horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocationKind {
    Work,
    Shopping,
    Residential,
    Station,
}

impl LocationKind {
    pub const ALL: [LocationKind; 4] = [
        LocationKind::Work,
        LocationKind::Shopping,
        LocationKind::Residential,
        LocationKind::Station,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            LocationKind::Work => "W",
            LocationKind::Shopping => "S",
            LocationKind::Residential => "R",
            LocationKind::Station => "STA",
        }
    }
}

/// A typed location identifier, written as prefix + index (`W3`, `STA7`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocationId {
    pub kind: LocationKind,
    pub index: u32,
}

impl LocationId {
    pub const fn new(kind: LocationKind, index: u32) -> Self {
        Self { kind, index }
    }

    pub fn is_station(&self) -> bool {
        self.kind == LocationKind::Station
    }
}

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

impl FromStr for LocationId {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorldError::BadLocationId(s.to_string());
        // STA must be tried before S.
        let (kind, digits) = if let Some(rest) = s.strip_prefix("STA") {
            (LocationKind::Station, rest)
        } else if let Some(rest) = s.strip_prefix('W') {
            (LocationKind::Work, rest)
        } else if let Some(rest) = s.strip_prefix('S') {
            (LocationKind::Shopping, rest)
        } else if let Some(rest) = s.strip_prefix('R') {
            (LocationKind::Residential, rest)
        } else {
            return Err(bad());
        };
        let canonical = !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && (digits == "0" || !digits.starts_with('0'));
        if !canonical {
            return Err(bad());
        }
        let index = digits.parse().map_err(|_| bad())?;
        Ok(LocationId { kind, index })
    }
}

/// A location with planar coordinates in miles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub id: LocationId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Road {
    pub a: LocationId,
    pub b: LocationId,
    pub miles: f64,
}

/// Parameters of the synthetic road network.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub work: u32,
    pub shopping: u32,
    pub residential: u32,
    pub stations: u32,
    pub width_miles: f64,
    pub height_miles: f64,
    /// Each location is joined to this many nearest neighbours.
    pub k_nearest: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            work: 20,
            shopping: 15,
            residential: 200,
            stations: 12,
            width_miles: 16.0,
            height_miles: 12.0,
            k_nearest: 4,
        }
    }
}

/// An ordered list of waypoints; legs follow graph shortest paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub waypoints: Vec<LocationId>,
    pub length_miles: f64,
}

/// A station reachable from a route with a bounded insertion detour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearStation {
    pub station: LocationId,
    pub detour_miles: f64,
    /// Index of the leg the station is best inserted into.
    pub leg: usize,
    /// Miles from the start of that leg to the station.
    pub along_miles: f64,
}

/// A station passed within sight of a travelled path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sighting {
    pub station: LocationId,
    /// Planar distance from the path, in miles.
    pub offset_miles: f64,
    /// Position along the path (miles from its start) where it is seen.
    pub position_miles: f64,
}

#[derive(Debug, Clone)]
pub struct World {
    locations: Vec<Location>,
    index: HashMap<LocationId, usize>,
    roads: Vec<Road>,
    stations: Vec<usize>,
    paths: graph::AllPairs,
}

impl World {
    /// Assembles and validates a world from explicit locations and roads.
    pub fn from_parts(locations: Vec<Location>, roads: Vec<Road>) -> Result<Self, WorldError> {
        let mut index = HashMap::with_capacity(locations.len());
        for (i, loc) in locations.iter().enumerate() {
            if index.insert(loc.id, i).is_some() {
                return Err(WorldError::DuplicateLocation(loc.id));
            }
        }
        let mut adjacency = vec![Vec::new(); locations.len()];
        for road in &roads {
            if !(road.miles > 0.0 && road.miles.is_finite()) {
                return Err(WorldError::NonPositiveEdge(road.a, road.b, road.miles));
            }
            let a = *index.get(&road.a).ok_or(WorldError::UnknownLocation(road.a))?;
            let b = *index.get(&road.b).ok_or(WorldError::UnknownLocation(road.b))?;
            adjacency[a].push((b, road.miles));
            adjacency[b].push((a, road.miles));
        }
        let stations: Vec<usize> = locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.id.is_station())
            .map(|(i, _)| i)
            .collect();
        if stations.is_empty() {
            return Err(WorldError::NoStations);
        }
        let paths = graph::AllPairs::compute(&adjacency);
        if !paths.connected() {
            return Err(WorldError::Disconnected);
        }
        Ok(Self {
            locations,
            index,
            roads,
            stations,
            paths,
        })
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn roads(&self) -> &[Road] {
        &self.roads
    }

    pub fn location(&self, id: LocationId) -> Result<&Location, WorldError> {
        Ok(&self.locations[self.idx(id)?])
    }

    pub fn contains(&self, id: LocationId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn stations(&self) -> impl Iterator<Item = LocationId> + '_ {
        self.stations.iter().map(move |&i| self.locations[i].id)
    }

    pub fn station_ids(&self) -> Vec<LocationId> {
        self.stations().collect()
    }

    /// All locations of one kind, in id order.
    pub fn of_kind(&self, kind: LocationKind) -> Vec<LocationId> {
        let mut ids: Vec<_> = self
            .locations
            .iter()
            .filter(|l| l.id.kind == kind)
            .map(|l| l.id)
            .collect();
        ids.sort();
        ids
    }

    fn idx(&self, id: LocationId) -> Result<usize, WorldError> {
        self.index.get(&id).copied().ok_or(WorldError::UnknownLocation(id))
    }

    pub fn shortest_distance(&self, a: LocationId, b: LocationId) -> Result<f64, WorldError> {
        Ok(self.paths.distance(self.idx(a)?, self.idx(b)?))
    }

    /// Node sequence of the shortest path from `a` to `b`, inclusive.
    pub fn shortest_path(&self, a: LocationId, b: LocationId) -> Result<Vec<LocationId>, WorldError> {
        let path = self.paths.path(self.idx(a)?, self.idx(b)?);
        Ok(path.into_iter().map(|i| self.locations[i].id).collect())
    }

    pub fn route(&self, waypoints: &[LocationId]) -> Result<Route, WorldError> {
        if waypoints.is_empty() {
            return Err(WorldError::EmptyRoute);
        }
        let mut length = 0.0;
        for w in waypoints {
            self.idx(*w)?;
        }
        for leg in waypoints.windows(2) {
            length += self.shortest_distance(leg[0], leg[1])?;
        }
        Ok(Route {
            waypoints: waypoints.to_vec(),
            length_miles: length,
        })
    }

    /// Extra miles needed to visit `station` from `route`, inserted into the
    /// cheapest leg. A single-waypoint route is treated as an out-and-back.
    pub fn insertion_detour(&self, route: &Route, station: LocationId) -> Result<NearStation, WorldError> {
        if route.waypoints.is_empty() {
            return Err(WorldError::EmptyRoute);
        }
        let s = self.idx(station)?;
        let legs: Vec<(usize, usize)> = if route.waypoints.len() == 1 {
            let w = self.idx(route.waypoints[0])?;
            vec![(w, w)]
        } else {
            route
                .waypoints
                .windows(2)
                .map(|p| Ok((self.idx(p[0])?, self.idx(p[1])?)))
                .collect::<Result<_, WorldError>>()?
        };
        let mut best: Option<NearStation> = None;
        for (leg, &(a, b)) in legs.iter().enumerate() {
            let to = self.paths.distance(a, s);
            let mut detour = to + self.paths.distance(s, b) - self.paths.distance(a, b);
            if detour < DISTANCE_EPS {
                detour = 0.0;
            }
            if best.is_none_or(|cur| detour < cur.detour_miles - DISTANCE_EPS) {
                best = Some(NearStation {
                    station,
                    detour_miles: detour,
                    leg,
                    along_miles: to,
                });
            }
        }
        Ok(best.expect("route has at least one leg"))
    }

    /// Every station whose insertion detour is at most `detour_radius`,
    /// ordered by position along the route, then id.
    pub fn stations_near_path(&self, route: &Route, detour_radius: f64) -> Result<Vec<NearStation>, WorldError> {
        if route.waypoints.is_empty() {
            return Err(WorldError::EmptyRoute);
        }
        let mut out = Vec::new();
        for station in self.stations() {
            let near = self.insertion_detour(route, station)?;
            if near.detour_miles <= detour_radius + DISTANCE_EPS {
                out.push(near);
            }
        }
        out.sort_by(|a, b| {
            (a.leg, a.along_miles, a.station)
                .partial_cmp(&(b.leg, b.along_miles, b.station))
                .expect("finite distances")
        });
        Ok(out)
    }

    /// Planar polyline of the route as driven (shortest-path node sequence).
    pub fn route_polyline(&self, route: &Route) -> Result<Vec<LocationId>, WorldError> {
        let first = *route.waypoints.first().ok_or(WorldError::EmptyRoute)?;
        let mut nodes = vec![first];
        for leg in route.waypoints.windows(2) {
            let path = self.shortest_path(leg[0], leg[1])?;
            nodes.extend_from_slice(&path[1..]);
        }
        Ok(nodes)
    }

    /// Stations within `radius` miles (planar) of the driven route, in
    /// travel order.
    pub fn stations_seen(&self, route: &Route, radius: f64) -> Result<Vec<Sighting>, WorldError> {
        let nodes = self.route_polyline(route)?;
        let points: Vec<(f64, f64)> = nodes
            .iter()
            .map(|id| {
                let l = &self.locations[self.index[id]];
                (l.x, l.y)
            })
            .collect();
        let mut seen = Vec::new();
        for &si in &self.stations {
            let st = self.locations[si];
            let mut best: Option<(f64, f64)> = None;
            let mut travelled = 0.0;
            let consider = |offset: f64, pos: f64, best: &mut Option<(f64, f64)>| {
                if best.is_none_or(|(o, _)| offset < o - DISTANCE_EPS) {
                    *best = Some((offset, pos));
                }
            };
            if points.len() == 1 {
                let offset = (st.x - points[0].0).hypot(st.y - points[0].1);
                consider(offset, 0.0, &mut best);
            }
            for seg in points.windows(2) {
                let (offset, t, len) = point_segment(st.x, st.y, seg[0], seg[1]);
                consider(offset, travelled + t * len, &mut best);
                travelled += len;
            }
            if let Some((offset, pos)) = best {
                if offset <= radius + DISTANCE_EPS {
                    seen.push(Sighting {
                        station: st.id,
                        offset_miles: offset,
                        position_miles: pos,
                    });
                }
            }
        }
        seen.sort_by(|a, b| {
            (a.position_miles, a.station)
                .partial_cmp(&(b.position_miles, b.station))
                .expect("finite positions")
        });
        Ok(seen)
    }

    /// Station closest to `from` by road distance (ties by id).
    pub fn nearest_station(&self, from: LocationId) -> Result<(LocationId, f64), WorldError> {
        let mut best: Option<(LocationId, f64)> = None;
        for s in self.stations() {
            let d = self.shortest_distance(from, s)?;
            if best.is_none_or(|(_, bd)| d < bd - DISTANCE_EPS) {
                best = Some((s, d));
            }
        }
        best.ok_or(WorldError::NoStations)
    }
}

/// Distance from a point to a segment, the projection parameter in [0, 1],
/// and the segment length.
fn point_segment(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> (f64, f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((px - cx).hypot(py - cy), t, len2.sqrt())
}

/// Builds a random geometric road graph over typed points.
///
/// Each location is connected to its `k_nearest` neighbours by straight
/// roads; remaining components are then bridged by their closest pair of
/// nodes until the graph is connected.
pub fn build_world(config: &WorldConfig, seed: u64) -> Result<World, WorldError> {
    if config.stations == 0 {
        return Err(WorldError::NoStations);
    }
    if !(config.width_miles > 0.0 && config.height_miles > 0.0) {
        return Err(WorldError::InvalidConfig("area dimensions must be positive".into()));
    }
    if config.k_nearest == 0 {
        return Err(WorldError::InvalidConfig("k_nearest must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, Purpose::World, 0);
    let mut locations = Vec::new();
    for (kind, count) in [
        (LocationKind::Work, config.work),
        (LocationKind::Shopping, config.shopping),
        (LocationKind::Residential, config.residential),
        (LocationKind::Station, config.stations),
    ] {
        for i in 1..=count {
            locations.push(Location {
                id: LocationId::new(kind, i),
                x: rng.random_range(0.0..config.width_miles),
                y: rng.random_range(0.0..config.height_miles),
            });
        }
    }

    let n = locations.len();
    let dist = |a: usize, b: usize| {
        let (p, q) = (&locations[a], &locations[b]);
        (p.x - q.x).hypot(p.y - q.y)
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&b| b != a).collect();
        others.sort_by(|&p, &q| dist(a, p).total_cmp(&dist(a, q)).then(p.cmp(&q)));
        for &b in others.iter().take(config.k_nearest) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let mut uf = graph::UnionFind::new(n);
    for &(a, b) in &edges {
        uf.union(a, b);
    }
    while uf.components() > 1 {
        let root0 = uf.find(0);
        let mut bridge: Option<(f64, usize, usize)> = None;
        let inside: Vec<bool> = (0..n).map(|i| uf.find(i) == root0).collect();
        for a in (0..n).filter(|&a| inside[a]) {
            for b in (0..n).filter(|&b| !inside[b]) {
                let d = dist(a, b);
                if bridge.is_none_or(|(bd, _, _)| d < bd) {
                    bridge = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = bridge.expect("more than one component");
        uf.union(a, b);
        edges.push((a.min(b), a.max(b)));
    }

    let roads = edges
        .into_iter()
        .map(|(a, b)| Road {
            a: locations[a].id,
            b: locations[b].id,
            // Coincident points still get a positive road length.
            miles: dist(a, b).max(0.01),
        })
        .collect();
    World::from_parts(locations, roads)
}
