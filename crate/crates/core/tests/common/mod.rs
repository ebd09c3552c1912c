//! Shared helpers for the integration suites: an independent
//! reimplementation of single-bounce path finding over plain arrays,
//! used to cross-check the library's tracer, plus small generators.

#![allow(dead_code)]

use rand::Rng;

pub const C0: f64 = 299_792_458.0;
pub const ENDPOINT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct OBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub refl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OKind {
    Los,
    Bounce,
}

#[derive(Debug, Clone)]
pub struct OPath {
    pub kind: OKind,
    pub bounce: Option<[f64; 3]>,
    pub length: f64,
    pub refl: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(sub(a, b))
}

/// Closed-interval slab test of a raw segment against a box.
fn seg_hits_box(a: [f64; 3], b: [f64; 3], bx: &OBox) -> bool {
    let mut tmin = 0.0f64;
    let mut tmax = 1.0f64;
    for ax in 0..3 {
        let d = b[ax] - a[ax];
        if d == 0.0 {
            if a[ax] < bx.min[ax] || a[ax] > bx.max[ax] {
                return false;
            }
        } else {
            let inv = 1.0 / d;
            let mut t1 = (bx.min[ax] - a[ax]) * inv;
            let mut t2 = (bx.max[ax] - a[ax]) * inv;
            if t1 > t2 {
                std::mem::swap(&mut t1, &mut t2);
            }
            tmin = tmin.max(t1);
            tmax = tmax.min(t2);
            if tmin > tmax {
                return false;
            }
        }
    }
    true
}

/// Open line of sight with endpoints pulled inward, mirroring the
/// library's contract: touching a face at either end does not occlude.
pub fn oracle_clear(boxes: &[OBox], a: [f64; 3], b: [f64; 3]) -> bool {
    let d = sub(b, a);
    let len = norm(d);
    assert!(len > 0.0, "degenerate segment in oracle");
    let eps = ENDPOINT_EPS.min(len * 0.25);
    let unit = scale(d, 1.0 / len);
    let a2 = add(a, scale(unit, eps));
    let b2 = sub(b, scale(unit, eps));
    let (a2, b2) = if a2 == b2 { (a, b) } else { (a2, b2) };
    boxes.iter().all(|bx| !seg_hits_box(a2, b2, bx))
}

/// Every zero- and one-bounce specular path from `tx` to `rx`, found by
/// mirroring the transmitter across each of the six face planes of each
/// box and intersecting the image-to-receiver line with the face
/// rectangle. Order: LOS first, then boxes in slice order, faces in
/// (-x, +x, -y, +y, -z, +z) order.
pub fn oracle_paths(boxes: &[OBox], tx: [f64; 3], rx: [f64; 3]) -> Vec<OPath> {
    let mut out = Vec::new();
    if oracle_clear(boxes, tx, rx) {
        out.push(OPath { kind: OKind::Los, bounce: None, length: dist(tx, rx), refl: 1.0 });
    }
    for bx in boxes {
        if bx.refl <= 0.0 {
            continue;
        }
        for ax in 0..3 {
            for (side, coord) in [(0.0, bx.min[ax]), (1.0, bx.max[ax])] {
                // Degenerate slab: the two faces coincide, keep only one.
                if side == 1.0 && bx.min[ax] == bx.max[ax] {
                    continue;
                }
                let dt = tx[ax] - coord;
                let dr = rx[ax] - coord;
                if dt * dr <= 0.0 {
                    continue;
                }
                let mut image = tx;
                image[ax] = 2.0 * coord - tx[ax];
                let denom = rx[ax] - image[ax];
                let s = (coord - image[ax]) / denom;
                let q = add(image, scale(sub(rx, image), s));
                let on_face = (0..3).all(|k| {
                    k == ax || (bx.min[k] <= q[k] && q[k] <= bx.max[k])
                });
                if !on_face || q == tx || q == rx {
                    continue;
                }
                if !oracle_clear(boxes, tx, q) || !oracle_clear(boxes, q, rx) {
                    continue;
                }
                out.push(OPath {
                    kind: OKind::Bounce,
                    bounce: Some(q),
                    length: dist(tx, q) + dist(q, rx),
                    refl: bx.refl,
                });
            }
        }
    }
    out
}

/// Expected complex gain of a path: free-space amplitude scaled by the
/// bounce coefficient, phase from the electrical length.
pub fn oracle_gain(length: f64, refl: f64, frequency_hz: f64) -> (f64, f64) {
    let lambda = C0 / frequency_hz;
    let amp = lambda / (4.0 * std::f64::consts::PI * length) * refl;
    let phase = -2.0 * std::f64::consts::PI * length / lambda;
    (amp, phase)
}

pub fn point_in_box(p: [f64; 3], bx: &OBox) -> bool {
    (0..3).all(|ax| bx.min[ax] <= p[ax] && p[ax] <= bx.max[ax])
}

/// Random box with comfortable dimensions inside the given footprint.
/// Large faces make reflections common enough to exercise the tracer.
pub fn random_box(rng: &mut impl Rng, span: f64) -> OBox {
    let cx = rng.gen_range(5.0..span - 5.0);
    let cy = rng.gen_range(5.0..span - 5.0);
    let cz: f64 = rng.gen_range(0.5..3.0);
    let hx = rng.gen_range(0.3..4.0);
    let hy = rng.gen_range(0.3..4.0);
    let hz: f64 = rng.gen_range(0.3..2.5);
    let refl = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.1..1.0) };
    OBox {
        min: [cx - hx, cy - hy, (cz - hz).max(0.0)],
        max: [cx + hx, cy + hy, cz + hz],
        refl,
    }
}

/// Random point inside the footprint but outside every box.
pub fn random_free_point(rng: &mut impl Rng, span: f64, boxes: &[OBox]) -> [f64; 3] {
    loop {
        let p = [
            rng.gen_range(1.0..span - 1.0),
            rng.gen_range(1.0..span - 1.0),
            rng.gen_range(0.3..4.5),
        ];
        if boxes.iter().all(|b| !point_in_box(p, b)) {
            return p;
        }
    }
}
