use gpit_core::world::io::{parse_world, write_world};
use gpit_core::world::{
    build_world, generate_prices, load_base_curve_csv, BaseCurve, Location, LocationId, LocationKind, PriceParams,
    Road, World, WorldConfig,
};
use proptest::prelude::*;

/// Random connected graph: a random spanning tree plus extra edges.
fn arb_world() -> impl Strategy<Value = World> {
    (4usize..=12)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), n),
                prop::collection::vec((any::<prop::sample::Index>(), 0.1f64..5.0), n - 1),
                prop::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..n * 2),
                1usize..=3,
            )
        })
        .prop_map(|(n, coords, tree, extra, n_stations)| {
            let kind = |i: usize| {
                if i < n_stations {
                    LocationKind::Station
                } else {
                    [LocationKind::Work, LocationKind::Shopping, LocationKind::Residential][i % 3]
                }
            };
            let ids: Vec<LocationId> = (0..n).map(|i| LocationId::new(kind(i), i as u32 + 1)).collect();
            let locations = ids
                .iter()
                .zip(&coords)
                .map(|(&id, &(x, y))| Location { id, x, y })
                .collect();
            let mut roads = Vec::new();
            for (i, (parent, miles)) in tree.into_iter().enumerate() {
                let child = i + 1;
                roads.push(Road {
                    a: ids[parent.index(child)],
                    b: ids[child],
                    miles,
                });
            }
            for (a, b, miles) in extra {
                if a != b {
                    roads.push(Road {
                        a: ids[a],
                        b: ids[b],
                        miles,
                    });
                }
            }
            World::from_parts(locations, roads).expect("spanning tree keeps it connected")
        })
}

fn floyd_warshall(world: &World) -> (Vec<LocationId>, Vec<Vec<f64>>) {
    let ids: Vec<LocationId> = world.locations().iter().map(|l| l.id).collect();
    let n = ids.len();
    let pos = |id: LocationId| ids.iter().position(|&x| x == id).unwrap();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for r in world.roads() {
        let (a, b) = (pos(r.a), pos(r.b));
        d[a][b] = d[a][b].min(r.miles);
        d[b][a] = d[b][a].min(r.miles);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    (ids, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shortest_distances_match_floyd_warshall(world in arb_world()) {
        let (ids, d) = floyd_warshall(&world);
        for (i, &a) in ids.iter().enumerate() {
            for (j, &b) in ids.iter().enumerate() {
                let got = world.shortest_distance(a, b).unwrap();
                prop_assert!((got - d[i][j]).abs() < 1e-9, "{a}->{b}: {got} vs {}", d[i][j]);
            }
        }
    }

    #[test]
    fn distances_form_a_metric(world in arb_world()) {
        let ids: Vec<LocationId> = world.locations().iter().map(|l| l.id).collect();
        for &a in &ids {
            prop_assert_eq!(world.shortest_distance(a, a).unwrap(), 0.0);
            for &b in &ids {
                let ab = world.shortest_distance(a, b).unwrap();
                prop_assert!((ab - world.shortest_distance(b, a).unwrap()).abs() < 1e-9);
                if a != b {
                    prop_assert!(ab > 0.0);
                }
                for &c in &ids {
                    let via = ab + world.shortest_distance(b, c).unwrap();
                    prop_assert!(world.shortest_distance(a, c).unwrap() <= via + 1e-9);
                }
            }
        }
    }

    #[test]
    fn path_lengths_agree_with_distance(world in arb_world()) {
        let ids: Vec<LocationId> = world.locations().iter().map(|l| l.id).collect();
        for &a in &ids {
            for &b in &ids {
                let path = world.shortest_path(a, b).unwrap();
                prop_assert_eq!(path[0], a);
                prop_assert_eq!(*path.last().unwrap(), b);
                let len: f64 = path
                    .windows(2)
                    .map(|p| {
                        world
                            .roads()
                            .iter()
                            .filter(|r| (r.a == p[0] && r.b == p[1]) || (r.a == p[1] && r.b == p[0]))
                            .map(|r| r.miles)
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                prop_assert!((len - world.shortest_distance(a, b).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn near_stations_match_exhaustive_insertion(
        world in arb_world(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4),
        radius in 0.0f64..6.0,
    ) {
        let (ids, d) = floyd_warshall(&world);
        let waypoints: Vec<LocationId> = picks.iter().map(|p| ids[p.index(ids.len())]).collect();
        let route = world.route(&waypoints).unwrap();
        let pos = |id: LocationId| ids.iter().position(|&x| x == id).unwrap();
        let legs: Vec<(usize, usize)> = if waypoints.len() == 1 {
            vec![(pos(waypoints[0]), pos(waypoints[0]))]
        } else {
            waypoints.windows(2).map(|w| (pos(w[0]), pos(w[1]))).collect()
        };
        let mut expected: Vec<(LocationId, f64)> = Vec::new();
        for s in world.station_ids() {
            let si = pos(s);
            let best = legs
                .iter()
                .map(|&(a, b)| d[a][si] + d[si][b] - d[a][b])
                .fold(f64::INFINITY, f64::min);
            if best <= radius + 1e-9 {
                expected.push((s, best));
            }
        }
        let got = world.stations_near_path(&route, radius).unwrap();
        let mut got_ids: Vec<LocationId> = got.iter().map(|n| n.station).collect();
        got_ids.sort();
        let mut want_ids: Vec<LocationId> = expected.iter().map(|e| e.0).collect();
        want_ids.sort();
        // Stations within rounding of the radius may land on either side.
        let borderline = |s: &LocationId| {
            expected
                .iter()
                .find(|e| e.0 == *s)
                .map_or(true, |e| (e.1 - radius).abs() < 1e-6)
        };
        for s in got_ids.iter().filter(|s| !want_ids.contains(s)) {
            prop_assert!(borderline(s), "unexpected {s}");
        }
        for s in want_ids.iter().filter(|s| !got_ids.contains(s)) {
            prop_assert!(borderline(s), "missing {s}");
        }
        for n in &got {
            if let Some(e) = expected.iter().find(|e| e.0 == n.station) {
                prop_assert!((n.detour_miles - e.1.max(0.0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn world_file_round_trips(world in arb_world()) {
        let text = write_world(&world);
        let back = parse_world(&text).unwrap();
        prop_assert_eq!(write_world(&back), text);
        let ids: Vec<LocationId> = world.locations().iter().map(|l| l.id).collect();
        for &a in &ids {
            for &b in &ids {
                let (x, y) = (world.shortest_distance(a, b).unwrap(), back.shortest_distance(a, b).unwrap());
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn generated_world_has_requested_composition() {
    let cfg = WorldConfig::default();
    let w = build_world(&cfg, 11).unwrap();
    let count = |k| w.of_kind(k).len() as u32;
    assert_eq!(count(LocationKind::Work), cfg.work);
    assert_eq!(count(LocationKind::Shopping), cfg.shopping);
    assert_eq!(count(LocationKind::Residential), cfg.residential);
    assert_eq!(count(LocationKind::Station), cfg.stations);
    for l in w.locations() {
        assert!((0.0..=cfg.width_miles).contains(&l.x) && (0.0..=cfg.height_miles).contains(&l.y));
    }
    // Roads are at least as long as the straight line between their ends.
    for r in w.roads() {
        let a = w.location(r.a).unwrap();
        let b = w.location(r.b).unwrap();
        assert!(r.miles + 1e-9 >= (a.x - b.x).hypot(a.y - b.y));
    }
    assert_eq!(write_world(&w), write_world(&build_world(&cfg, 11).unwrap()));
}

fn cross_station_std(lambda: f64) -> Vec<f64> {
    let w = build_world(&WorldConfig::default(), 5).unwrap();
    let params = PriceParams {
        variance_scale: lambda,
        noise_sigma: 0.0,
        price_floor: 0.0,
        ..PriceParams::default()
    };
    let table = generate_prices(&w.station_ids(), 60, &params, 9).unwrap();
    (0..60)
        .map(|day| {
            let p = table.day_prices(day).unwrap();
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            (p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / p.len() as f64).sqrt()
        })
        .collect()
}

#[test]
fn doubling_lambda_doubles_cross_station_spread() {
    let one = cross_station_std(1.0);
    let two = cross_station_std(2.0);
    for (a, b) in one.iter().zip(&two) {
        assert!(*a > 0.0);
        assert!((b - 2.0 * a).abs() < 1e-9, "{b} vs 2·{a}");
    }
}

#[test]
fn prices_decompose_into_base_offset_and_noise() {
    let w = build_world(&WorldConfig::default(), 2).unwrap();
    let stations = w.station_ids();
    let params = PriceParams {
        variance_scale: 3.0,
        noise_sigma: 0.2,
        ..PriceParams::default()
    };
    let table = generate_prices(&stations, 90, &params, 4).unwrap();
    for day in 0..90 {
        for &s in &stations {
            let raw = table.base_curve()[day] + 3.0 * table.offset(s).unwrap() + table.noise(s, day).unwrap();
            let want = raw.max(params.price_floor);
            assert!((table.price_at(s, day).unwrap() - want).abs() < 1e-12);
        }
    }
    if let BaseCurve::RandomWalk { min, max, .. } = params.base {
        assert!(table.base_curve().iter().all(|b| (min..=max).contains(b)));
    }
}

#[test]
fn imported_base_curve_is_reproduced() {
    let curve: Vec<f64> = (0..30).map(|d| 2.5 + 0.01 * f64::from(d)).collect();
    let mut csv = String::from("day,price\n");
    for (d, p) in curve.iter().enumerate() {
        csv.push_str(&format!("{d},{p}\n"));
    }
    let loaded = load_base_curve_csv(csv.as_bytes()).unwrap();
    assert_eq!(loaded, curve);

    let w = build_world(&WorldConfig::default(), 3).unwrap();
    let params = PriceParams {
        base: BaseCurve::Imported(loaded),
        variance_scale: 0.0,
        noise_sigma: 0.0,
        ..PriceParams::default()
    };
    let table = generate_prices(&w.station_ids(), 30, &params, 1).unwrap();
    for (day, want) in curve.iter().enumerate() {
        for p in table.day_prices(day).unwrap() {
            assert_eq!(p, *want);
        }
    }
    assert!(generate_prices(&w.station_ids(), 31, &params, 1).is_err());
    assert!(load_base_curve_csv("day,price\n0,2.5\n2,2.6\n".as_bytes()).is_err());
    assert!(load_base_curve_csv("d,p\n0,2.5\n".as_bytes()).is_err());
}
