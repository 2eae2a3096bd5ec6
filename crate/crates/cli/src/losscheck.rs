use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csl_core::losses::{imos_mae, mos_ae, pmos_mae, AxialSymmetry, SymmetryAction, Theta};
use csl_core::Vec3d;

use crate::Failure;

type Map = Vec<Option<Vec3d>>;

struct Trial {
    sym: AxialSymmetry<f64>,
    fold: u32,
    y: Map,
    y_hat: Map,
}

fn random_point(rng: &mut ChaCha8Rng) -> Vec3d {
    Vec3d::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_trial(rng: &mut ChaCha8Rng) -> Trial {
    let fold = rng.random_range(1..=12);
    let theta = Theta::from_fold(fold).unwrap();
    let axis = loop {
        let a = random_point(rng);
        if a.norm() > 0.1 {
            break a;
        }
    };
    let sym = AxialSymmetry::new(&theta, &axis).unwrap();
    let len = rng.random_range(1..=32);
    let mut y = Vec::with_capacity(len);
    let mut y_hat = Vec::with_capacity(len);
    for i in 0..len {
        // the first pixel is always valid so every map has one
        if i > 0 && rng.random_bool(0.2) {
            y.push(None);
            y_hat.push(rng.random_bool(0.5).then(|| random_point(rng)));
        } else {
            y.push(Some(random_point(rng)));
            y_hat.push(Some(random_point(rng)));
        }
    }
    Trial { sym, fold, y, y_hat }
}

/// Every valid pixel replaced by the equivalent chosen by `pick`.
fn equivalent_map(t: &Trial, mut pick: impl FnMut(usize) -> u32) -> Map {
    t.y.iter()
        .enumerate()
        .map(|(i, p)| p.map(|p| t.sym.apply(&p, pick(i))))
        .collect()
}

struct Check {
    name: &'static str,
    failures: usize,
    first: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: 0,
            first: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures += 1;
            self.first.get_or_insert_with(detail);
        }
    }
}

pub fn run(trials: usize, seed: u64) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::Config("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Check::new("pmos-mae <= imos-mae");
    let mut nonneg = Check::new("losses are non-negative");
    let mut exact = Check::new("exact equivalent scores zero");
    let mut mixed = Check::new("mixed equivalents: pmos-mae < imos-mae");
    let mut bound = Check::new("mos-ae <= theta/2");
    let mut mixed_cases = 0;

    for trial in 0..trials {
        let t = random_trial(&mut rng);
        let p = pmos_mae(&t.y, &t.y_hat, &t.sym).map_err(|e| Failure::Other(e.to_string()))?;
        let i = imos_mae(&t.y, &t.y_hat, &t.sym).map_err(|e| Failure::Other(e.to_string()))?;
        order.record(p <= i, || format!("trial {trial}: {p} > {i}"));
        nonneg.record(p >= 0.0 && i >= 0.0, || format!("trial {trial}: {p}, {i}"));

        let k = rng.random_range(0..t.fold);
        let same = equivalent_map(&t, |_| k);
        let (pz, iz) = (
            pmos_mae(&t.y, &same, &t.sym).unwrap(),
            imos_mae(&t.y, &same, &t.sym).unwrap(),
        );
        exact.record(pz == 0.0 && iz == 0.0, || format!("trial {trial}: {pz}, {iz}"));

        if t.fold > 1 {
            // alternate two equivalents over the valid pixels
            let mut flip = false;
            let mix = equivalent_map(&t, |_| {
                flip = !flip;
                if flip {
                    0
                } else {
                    1
                }
            });
            let valid = t.y.iter().flatten().count();
            let off_axis = t
                .y
                .iter()
                .flatten()
                .all(|q| (t.sym.apply(q, 1) - q).norm() > 1e-6);
            if valid >= 2 && off_axis {
                mixed_cases += 1;
                let (pm, im) = (
                    pmos_mae(&t.y, &mix, &t.sym).unwrap(),
                    imos_mae(&t.y, &mix, &t.sym).unwrap(),
                );
                mixed.record(pm < im, || format!("trial {trial}: {pm} >= {im}"));
            }
        }

        let theta = Theta::<f64>::from_fold(t.fold).unwrap();
        let (a, b) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let e = mos_ae(a, b, &theta);
        bound.record(e <= theta.radians() / 2.0, || format!("trial {trial}: mos_ae({a}, {b}) = {e}"));
    }

    let checks = [order, nonneg, exact, mixed, bound];
    for c in &checks {
        match &c.first {
            None => println!("pass {} ({trials} trials)", c.name),
            Some(d) => println!("FAIL {} ({} of {trials}; first {d})", c.name, c.failures),
        }
    }
    println!("mixed-equivalent cases: {mixed_cases}");
    let failed = checks.iter().filter(|c| c.failures > 0).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} invariant(s) violated")));
    }
    Ok(())
}
