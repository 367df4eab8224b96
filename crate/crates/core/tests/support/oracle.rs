// Brute-force references for the selection geometry.
//
// The segment oracle walks the segment in fixed 1e-4° steps and reports the
// first sample outside the circle; the sector of a direction is the item
// direction with the largest dot product. Cases closer than `BAND` to a
// decision boundary are reported as ambiguous and skipped.

#![allow(dead_code)]

use lattice_core::geometry::{crust_contains, item_direction, segment_circle_crossing, LayoutParams, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type P = Point2<f64>;

pub const STEP: f64 = 1e-4;
pub const BAND: f64 = 1e-6;

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub agree: usize,
    pub disagree: usize,
    pub ambiguous: usize,
}

/// Nearest item direction and the angular gap (degrees) to the runner-up.
pub fn brute_sector(offset: P, breadth: usize) -> (usize, f64) {
    let u = offset * (1.0 / offset.norm());
    let mut scored: Vec<(f64, usize)> =
        (0..breadth).map(|i| (u.dot(item_direction(i, breadth).unwrap()).clamp(-1.0, 1.0).acos(), i)).collect();
    scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (scored[0].1, (scored[1].0 - scored[0].0).to_degrees() / 2.0)
}

pub enum Dense {
    None,
    Crossing { inside: P, outside: P },
}

pub fn dense_crossing(p0: P, p1: P, center: P, radius: f64) -> Dense {
    if p0.distance(center) > radius {
        return Dense::None;
    }
    let len = p0.distance(p1);
    let steps = (len / STEP).ceil().max(1.0) as usize;
    let mut prev = p0;
    for k in 1..=steps {
        let q = p0.lerp(p1, k as f64 / steps as f64);
        if q.distance(center) > radius {
            return Dense::Crossing { inside: prev, outside: q };
        }
        prev = q;
    }
    Dense::None
}

fn random_case(rng: &mut ChaCha8Rng) -> (P, P, P, f64, usize) {
    let center = P::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
    let radius = rng.random_range(2.0..15.0);
    let breadth = rng.random_range(2..=12);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let r0 = if rng.random_bool(0.85) { radius * rng.random::<f64>().sqrt() } else { radius * rng.random_range(1.0..2.0) };
    let p0 = center + P::new(theta.cos(), theta.sin()) * r0;
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let p1 = center + P::new(phi.cos(), phi.sin()) * radius * rng.random_range(0.2..2.5);
    (p0, p1, center, radius, breadth)
}

pub fn crossing_agreement(cases: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for _ in 0..cases {
        let (p0, p1, center, radius, breadth) = random_case(&mut rng);
        if (p0.distance(center) - radius).abs() < BAND || (p1.distance(center) - radius).abs() < BAND {
            tally.ambiguous += 1;
            continue;
        }
        let got = segment_circle_crossing(p0, p1, center, radius, breadth);
        let ok = match (dense_crossing(p0, p1, center, radius), got) {
            (Dense::None, None) => true,
            (Dense::Crossing { inside, outside }, Some((point, sector))) => {
                let (s_in, gap_in) = brute_sector(inside - center, breadth);
                let (s_out, gap_out) = brute_sector(outside - center, breadth);
                if s_in != s_out || gap_in.min(gap_out) < BAND {
                    tally.ambiguous += 1;
                    continue;
                }
                let on_circle = (point.distance(center) - radius).abs() < 1e-9;
                let bracketed = point.distance(inside) <= STEP * 1.01 && point.distance(outside) <= STEP * 1.01;
                on_circle && bracketed && sector == s_in
            }
            _ => false,
        };
        if ok {
            tally.agree += 1;
        } else {
            tally.disagree += 1;
        }
    }
    tally
}

pub fn crust_agreement(cases: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for _ in 0..cases {
        let d3 = rng.random_range(6.0..14.0);
        let params = LayoutParams::for_size(d3);
        let breadth = rng.random_range(2..=12);
        let center = P::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let r = rng.random_range(0.0..d3 + params.crust_width + 4.0);
        let p = center + P::new(theta.cos(), theta.sin()) * r;
        let rr = p.distance(center);
        let (inner, outer) = (d3, d3 + params.crust_width);
        // radial membership by dense sampling of the ray out to p
        let steps = (rr / STEP).ceil() as usize;
        let mut entered = false;
        let mut left = false;
        for k in 0..=steps {
            let q = rr * k as f64 / steps.max(1) as f64;
            if q >= inner && q <= outer {
                entered = true;
            } else if entered {
                left = true;
            }
        }
        let (sector, gap) = brute_sector(p - center, breadth);
        if (rr - inner).abs() < BAND || (rr - outer).abs() < BAND || gap < BAND {
            tally.ambiguous += 1;
            continue;
        }
        let expected = (entered && !left).then_some(sector);
        if crust_contains(p, center, breadth, &params) == expected {
            tally.agree += 1;
        } else {
            tally.disagree += 1;
        }
    }
    tally
}
