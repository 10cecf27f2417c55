//! Solovay-Kitaev approximation of single-qubit unitaries.
//!
//! A net of short words over a finite alphabet covers SU(2); `sk_decompose`
//! refines the nearest net word recursively using balanced group
//! commutators. Words are in application order: `letters[0]` acts first.

mod cache;
mod kdtree;

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gates::NamedGate;
use crate::numerics::{
    distance, haar_su2, su2_from_quaternion, su2_to_quaternion, to_special_unitary, Matrix,
};

pub use cache::{cache_dir, load_or_build, NET_CACHE_ENV};
pub use kdtree::KdTree;

/// Residual distance below which the recursion stops refining.
pub const TERMINATION_TOL: f64 = 1e-10;
/// Candidates fetched from the index before exact re-ranking.
pub const CANDIDATES: usize = 16;
const COVERING_SAMPLES: usize = 10_000;
const COVERING_SEED: u64 = 0x5eed_0e75;

#[derive(Debug, Error)]
pub enum SkError {
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("net length must be at least 1")]
    ZeroLength,
    #[error("residual is too far from identity for a group commutator (distance {0:.3})")]
    TooFar(f64),
    #[error("net cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SkError>;

/// A gate sequence with its cached product matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GateWord {
    letters: Vec<NamedGate>,
    matrix: Matrix,
}

impl GateWord {
    pub fn identity() -> Self {
        GateWord {
            letters: Vec::new(),
            matrix: Matrix::identity(2),
        }
    }

    pub fn from_letters(letters: Vec<NamedGate>) -> Self {
        let mut matrix = Matrix::identity(2);
        for g in &letters {
            matrix = &g.matrix() * &matrix;
        }
        GateWord { letters, matrix }
    }

    pub fn letters(&self) -> &[NamedGate] {
        &self.letters
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Inverse word: letters reversed and inverted.
    pub fn herm(&self) -> GateWord {
        GateWord {
            letters: self.letters.iter().rev().map(|g| g.inverse()).collect(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GateWord) -> GateWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&next.letters);
        GateWord {
            letters,
            matrix: &next.matrix * &self.matrix,
        }
    }

    /// Cancels adjacent inverse pairs and recomputes the literal product.
    pub fn reduced(&self) -> GateWord {
        let mut out: Vec<NamedGate> = Vec::with_capacity(self.letters.len());
        for &g in &self.letters {
            if out.last() == Some(&g.inverse()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        GateWord::from_letters(out)
    }

    pub fn extend_with(&self, g: NamedGate) -> GateWord {
        let mut letters = self.letters.clone();
        letters.push(g);
        GateWord {
            letters,
            matrix: &g.matrix() * &self.matrix,
        }
    }
}

impl fmt::Display for GateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("ε");
        }
        let names: Vec<&str> = self.letters.iter().map(|g| g.name()).collect();
        f.write_str(&names.join(" "))
    }
}

/// Unit quaternion of the phase-normalized matrix, sign fixed so the first
/// component above `1e-9` in magnitude is positive.
pub fn canonical_quaternion(u: &Matrix) -> [f64; 4] {
    let q = su2_to_quaternion(&to_special_unitary(u));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let q = q.map(|x| x / norm);
    match q.iter().find(|x| x.abs() > 1e-9) {
        Some(&x) if x < 0.0 => q.map(|v| -v),
        _ => q,
    }
}

fn hash_key(q: &[f64; 4]) -> [i64; 4] {
    q.map(|x| (x * 1e9).round() as i64)
}

/// ε-net over SU(2) with a k-d tree on canonical quaternions.
#[derive(Debug, Clone)]
pub struct SU2Net {
    alphabet: Vec<NamedGate>,
    max_length: usize,
    entries: Vec<GateWord>,
    index: KdTree,
    epsilon0: f64,
}

impl SU2Net {
    /// Enumerates reduced words up to `max_length`, keeping the shortest
    /// (then lexicographically first) word per element modulo phase.
    pub fn build(alphabet: &[NamedGate], max_length: usize) -> Result<SU2Net> {
        if alphabet.is_empty() {
            return Err(SkError::EmptyAlphabet);
        }
        if max_length == 0 {
            return Err(SkError::ZeroLength);
        }
        let mut alphabet = alphabet.to_vec();
        alphabet.sort();
        alphabet.dedup();
        let mut seen: HashMap<[i64; 4], usize> = HashMap::new();
        let mut entries = vec![GateWord::identity()];
        seen.insert(hash_key(&canonical_quaternion(entries[0].matrix())), 0);
        let mut frontier = vec![0usize];
        for _ in 0..max_length {
            let mut next = Vec::new();
            for &e in &frontier {
                for &g in &alphabet {
                    if entries[e].letters.last() == Some(&g.inverse()) {
                        continue;
                    }
                    let w = entries[e].extend_with(g);
                    let key = hash_key(&canonical_quaternion(w.matrix()));
                    if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
                        slot.insert(entries.len());
                        next.push(entries.len());
                        entries.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(Self::from_entries(alphabet, max_length, entries))
    }

    fn from_entries(alphabet: Vec<NamedGate>, max_length: usize, entries: Vec<GateWord>) -> SU2Net {
        let points = entries
            .iter()
            .map(|w| canonical_quaternion(w.matrix()))
            .collect();
        let mut net = SU2Net {
            alphabet,
            max_length,
            entries,
            index: KdTree::build(points),
            epsilon0: 0.0,
        };
        net.epsilon0 = net.covering_radius(COVERING_SAMPLES, COVERING_SEED);
        net
    }

    pub fn alphabet(&self) -> &[NamedGate] {
        &self.alphabet
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn entries(&self) -> &[GateWord] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Monte-Carlo covering radius: the largest nearest-entry distance over
    /// Haar samples.
    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    /// Longest word in the net.
    pub fn longest_word(&self) -> usize {
        self.entries.iter().map(GateWord::len).max().unwrap_or(0)
    }

    pub fn covering_radius(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let u = haar_su2(&mut rng);
                self.nearest_with_distance(&u).1
            })
            .fold(0.0, f64::max)
    }

    /// Index of the entry nearest to `u` modulo phase, with its distance.
    ///
    /// Both quaternion signs are queried, so the Euclidean search is exact
    /// for the phase-invariant metric; the candidates are re-ranked with
    /// [`distance`] anyway.
    pub fn nearest_with_distance(&self, u: &Matrix) -> (usize, f64) {
        let q = canonical_quaternion(u);
        let neg = q.map(|x| -x);
        let mut best = (0usize, f64::INFINITY);
        for query in [q, neg] {
            for (id, _) in self.index.nearest_k(&query, CANDIDATES) {
                let d = distance(self.entries[id].matrix(), u).expect("2x2");
                if d < best.1 || (d == best.1 && id < best.0) {
                    best = (id, d);
                }
            }
        }
        best
    }

    pub fn nearest(&self, u: &Matrix) -> &GateWord {
        &self.entries[self.nearest_with_distance(u).0]
    }

    /// Exhaustive search, for checking the index.
    pub fn nearest_brute_force(&self, u: &Matrix) -> (usize, f64) {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, w)| (i, distance(w.matrix(), u).expect("2x2")))
            .fold(
                (0, f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            )
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(v, v).sqrt();
    (n > 1e-15).then(|| v.map(|x| x / n))
}

fn rotation(axis: [f64; 3], angle: f64) -> Matrix {
    let (s, c) = (angle / 2.0).sin_cos();
    su2_from_quaternion([c, axis[0] * s, axis[1] * s, axis[2] * s])
}

/// Axis and angle in [0, π] of an SU(2) element taken with nonnegative trace.
fn axis_angle(u: &Matrix) -> ([f64; 3], f64) {
    let mut q = su2_to_quaternion(&to_special_unitary(u));
    if q[0] < 0.0 {
        q = q.map(|x| -x);
    }
    let v = [q[1], q[2], q[3]];
    let angle = 2.0 * dot(v, v).sqrt().atan2(q[0]);
    (normalize(v).unwrap_or([0.0, 0.0, 1.0]), angle)
}

/// Balanced commutator factors: `V·W·V†·W† = Δ` modulo phase, with `V`
/// and `W` rotations by the same angle.
pub fn group_factor(delta: &Matrix) -> Result<(Matrix, Matrix)> {
    group_factor_twisted(delta, 0.0)
}

/// As [`group_factor`], with both factors further rotated by `twist` about
/// Δ's axis. Any twist gives a valid factorization.
pub fn group_factor_twisted(delta: &Matrix, twist: f64) -> Result<(Matrix, Matrix)> {
    let d = distance(delta, &Matrix::identity(2)).expect("2x2");
    if d >= 0.5 {
        return Err(SkError::TooFar(d));
    }
    let (n, theta) = axis_angle(delta);
    if theta < 1e-15 {
        return Ok((Matrix::identity(2), Matrix::identity(2)));
    }
    // sin(θ/2) = 2 sin²(φ/2) √(1 − sin⁴(φ/2))
    let s = ((1.0 - (theta / 2.0).cos()) / 2.0).powf(0.25);
    let phi = 2.0 * s.asin();
    let v = rotation([1.0, 0.0, 0.0], phi);
    let w = rotation([0.0, 1.0, 0.0], phi);
    let comm = &(&(&v * &w) * &v.adjoint()) * &w.adjoint();
    let (m, _) = axis_angle(&comm);
    // S maps the commutator's axis onto Δ's.
    let s_rot = match normalize(cross(m, n)) {
        Some(axis) => rotation(axis, dot(m, n).clamp(-1.0, 1.0).acos()),
        None if dot(m, n) > 0.0 => Matrix::identity(2),
        None => {
            let perp = normalize(cross(m, [1.0, 0.0, 0.0]))
                .or_else(|| normalize(cross(m, [0.0, 1.0, 0.0])))
                .unwrap();
            rotation(perp, std::f64::consts::PI)
        }
    };
    let frame = &rotation(n, twist) * &s_rot;
    let conj = |x: &Matrix| &(&frame * x) * &frame.adjoint();
    Ok((conj(&v), conj(&w)))
}

/// Twists about Δ's axis tried in turn until a candidate improves on `A`.
const TWISTS: [f64; 4] = [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4];

/// Approximates `u` by a word over the net's alphabet.
///
/// Depth 0 is the nearest net entry. Depth `d` refines the depth `d − 1`
/// answer `A` by the commutator factors of `Δ = u·A†`, producing
/// `A, W̃†, Ṽ†, W̃, Ṽ` in application order. When the approximations of the
/// factors happen to leave that no better than `A`, the factorization is
/// retried in a few other frames; the best word found, possibly `A`, is
/// kept, so the error never increases with depth.
pub fn sk_decompose(net: &SU2Net, u: &Matrix, depth: usize) -> GateWord {
    if depth == 0 {
        return net.nearest(u).clone();
    }
    let a = sk_decompose(net, u, depth - 1);
    let delta = u * &a.matrix().adjoint();
    let err_a = distance(&delta, &Matrix::identity(2)).expect("2x2");
    if err_a < TERMINATION_TOL {
        return a;
    }
    let (mut best, mut best_err) = (None, err_a);
    for twist in TWISTS {
        let Ok((v, w)) = group_factor_twisted(&delta, twist) else {
            break;
        };
        let vw = sk_decompose(net, &v, depth - 1);
        let ww = sk_decompose(net, &w, depth - 1);
        let cand = a
            .then(&ww.herm())
            .then(&vw.herm())
            .then(&ww)
            .then(&vw)
            .reduced();
        let err = distance(cand.matrix(), u).expect("2x2");
        if err <= best_err {
            (best, best_err) = (Some(cand), err);
        }
        if best_err < err_a {
            break;
        }
    }
    best.unwrap_or(a)
}
