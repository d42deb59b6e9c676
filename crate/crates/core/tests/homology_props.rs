use proptest::prelude::*;
use tdarobust_core::diagram::bottleneck;
use tdarobust_core::grid::{Direction, GridSpec, ScalarField};
use tdarobust_core::homology::oracle::h0_oracle_with;
use tdarobust_core::homology::{
    h0_oracle, persistence, persistence_with, Construction, PersistenceDiagram, PersistenceOptions,
};

fn plane(rows: usize, cols: usize, values: Vec<f64>, direction: Direction) -> ScalarField {
    let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![rows, cols]).unwrap();
    ScalarField::new(g, values, direction, false).unwrap()
}

fn line(values: Vec<f64>, direction: Direction) -> ScalarField {
    let g = GridSpec::cube(1, 0.0, 1.0, values.len()).unwrap();
    ScalarField::new(g, values, direction, false).unwrap()
}

/// Rows × cols field with values drawn from a small integer palette so that
/// ties are frequent.
fn tied_plane() -> impl Strategy<Value = ScalarField> {
    (2usize..=12, 2usize..=12, 2u32..12).prop_flat_map(|(r, c, levels)| {
        (
            prop::collection::vec(0..levels, r * c),
            prop::bool::ANY,
        )
            .prop_map(move |(v, sub)| {
                let dir = if sub {
                    Direction::Sublevel
                } else {
                    Direction::Superlevel
                };
                plane(r, c, v.into_iter().map(f64::from).collect(), dir)
            })
    })
}

fn continuous_plane() -> impl Strategy<Value = ScalarField> {
    (2usize..=10, 2usize..=10).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1.0f64..1.0, r * c)
            .prop_map(move |v| plane(r, c, v, Direction::Superlevel))
    })
}

fn construction() -> impl Strategy<Value = Construction> {
    prop_oneof![Just(Construction::Top), Just(Construction::Vertex)]
}

fn opts(construction: Construction) -> PersistenceOptions {
    PersistenceOptions {
        construction,
        ..Default::default()
    }
}

/// Components of `{i : mask[i]}` in a rows × cols grid, under 4- or
/// 8-connectivity; also reports how many of them avoid the border.
fn components(rows: usize, cols: usize, mask: &[bool], eight: bool) -> (i64, i64) {
    let mut seen = vec![false; mask.len()];
    let (mut total, mut interior) = (0i64, 0i64);
    for s in 0..mask.len() {
        if !mask[s] || seen[s] {
            continue;
        }
        total += 1;
        let mut touches = false;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            let (i, j) = ((x / cols) as i64, (x % cols) as i64);
            if i == 0 || j == 0 || i as usize == rows - 1 || j as usize == cols - 1 {
                touches = true;
            }
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if (di == 0 && dj == 0) || (!eight && di != 0 && dj != 0) {
                        continue;
                    }
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a as usize >= rows || b as usize >= cols {
                        continue;
                    }
                    let y = a as usize * cols + b as usize;
                    if mask[y] && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        if !touches {
            interior += 1;
        }
    }
    (total, interior)
}

/// Betti numbers of the superlevel set at `t` by digital topology: the
/// foreground is connected with the construction's adjacency, holes are
/// bounded background components under the complementary adjacency.
fn superlevel_betti(f: &ScalarField, t: f64, construction: Construction) -> (i64, i64) {
    let g = f.grid();
    let (rows, cols) = (g.resolution[0], g.resolution[1]);
    let fg: Vec<bool> = f.values().iter().map(|&v| v >= t).collect();
    let bg: Vec<bool> = fg.iter().map(|b| !b).collect();
    let top = construction == Construction::Top;
    let (b0, _) = components(rows, cols, &fg, top);
    let (_, b1) = components(rows, cols, &bg, !top);
    (b0, b1)
}

fn alive(d: &PersistenceDiagram, t: f64) -> i64 {
    d.pairs.iter().filter(|p| p.lower < t && t <= p.upper).count() as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn h0_matches_the_sweep_oracle_on_grids(f in tied_plane(), c in construction()) {
        let d = persistence_with(&f, 0, &opts(c)).unwrap().remove(0);
        prop_assert_eq!(d, h0_oracle_with(&f, &opts(c)));
    }

    #[test]
    fn h0_matches_the_sweep_oracle_on_lines(
        v in prop::collection::vec(0u32..15, 2..=50),
        sub in prop::bool::ANY,
    ) {
        let dir = if sub { Direction::Sublevel } else { Direction::Superlevel };
        let f = line(v.into_iter().map(f64::from).collect(), dir);
        prop_assert_eq!(persistence(&f, 0).unwrap().remove(0), h0_oracle(&f));
    }

    #[test]
    fn betti_numbers_match_alive_pairs(f in tied_plane(), c in construction()) {
        let f = ScalarField::new(f.grid().clone(), f.values().to_vec(), Direction::Superlevel, false).unwrap();
        let ds = persistence_with(&f, 1, &opts(c)).unwrap();
        let mut levels: Vec<f64> = f.values().to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        // thresholds strictly between consecutive values
        let ts: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        for t in ts {
            let (b0, b1) = superlevel_betti(&f, t, c);
            prop_assert_eq!(alive(&ds[0], t), b0, "H0 at t = {}", t);
            prop_assert_eq!(alive(&ds[1], t), b1, "H1 at t = {}", t);
        }
    }

    #[test]
    fn negation_mirrors_the_diagram(f in tied_plane(), c in construction()) {
        let a = persistence_with(&f, 1, &opts(c)).unwrap();
        let b = persistence_with(&f.negated(), 1, &opts(c)).unwrap();
        for k in 0..2 {
            prop_assert_eq!(&b[k], &a[k].mirrored());
        }
    }

    #[test]
    fn stability_per_dimension(
        f in continuous_plane(),
        noise in prop::collection::vec(-0.3f64..0.3, 100),
    ) {
        let vals: Vec<f64> = f.values().iter().zip(noise.iter().cycle()).map(|(a, b)| a + b).collect();
        let g = ScalarField::new(f.grid().clone(), vals, Direction::Superlevel, false).unwrap();
        let sup = f.sup_distance(&g).unwrap();
        let (df, dg) = (persistence(&f, 1).unwrap(), persistence(&g, 1).unwrap());
        for k in 0..2 {
            let w = bottleneck(&df[k], &dg[k]).unwrap();
            prop_assert!(w <= sup + 1e-12, "dim {}: {} > {}", k, w, sup);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn h0_pair_count_is_the_number_of_local_maxima(
        v in prop::collection::hash_set(-1000i32..1000, 2..=40)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>())
            .prop_shuffle()
    ) {
        let vals: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let n = vals.len();
        let maxima = (0..n)
            .filter(|&i| {
                (i == 0 || vals[i] > vals[i - 1]) && (i + 1 == n || vals[i] > vals[i + 1])
            })
            .count();
        let d = persistence(&line(vals, Direction::Superlevel), 0).unwrap().remove(0);
        prop_assert_eq!(d.len(), maxima);
    }
}

#[test]
fn annulus_bump_has_one_loop() {
    let g = GridSpec::cube(2, -2.0, 2.0, 101).unwrap();
    let f = ScalarField::from_fn(g, Direction::Superlevel, true, |x| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        (-(r - 1.0) * (r - 1.0) / 0.02).exp()
    })
    .unwrap();
    let ds = persistence(&f, 1).unwrap();
    assert_eq!(ds[1].len(), 1, "{:?}", ds[1]);
    let p = ds[1].pairs[0];
    assert!((p.persistence() - 1.0).abs() < 0.02, "{p:?}");
    assert!(p.lower < 1e-6);
    // cross-check against direct Betti counts at 20 thresholds
    for k in 1..=20 {
        let t = k as f64 / 21.0;
        let (b0, b1) = superlevel_betti(&f, t, Construction::Top);
        assert_eq!(b1, alive(&ds[1], t));
        assert_eq!(b0, alive(&ds[0], t));
    }
}
