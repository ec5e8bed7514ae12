//! Random spherical codes with a keyed partition, minimum-distance decoding
//! and list decoding.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist_sq, dot, fill_uniform_sphere, norm_sq};
use crate::rng::{domain, stream};

pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Squared-distance tolerance below which two candidates count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

const GEN_CHUNK: usize = 1024;

/// Codewords `x(m, k)` drawn uniformly from the sphere of radius `√(nP)`.
///
/// Storage is row-major with row index `m·K + k`, which is the
/// lexicographic order of `(m, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCodebook {
    n: usize,
    msg_bits: u32,
    key_bits: u32,
    power: f64,
    seed: u64,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOutcome {
    pub m_hat: usize,
    pub distance: f64,
    pub tie: bool,
}

fn integral_bits(n: usize, rate: f64, name: &'static str) -> Result<u32> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(invalid(name, format!("{rate} must be nonnegative and finite")));
    }
    let bits = (n as f64 * rate + 1e-9).floor();
    if bits > 126.0 {
        return Err(Error::Budget { requested: u128::MAX, budget: 0 });
    }
    Ok(bits as u32)
}

impl SphericalCodebook {
    pub fn generate(seed: u64, n: usize, rate: f64, key_rate: f64, power: f64) -> Result<Self> {
        Self::generate_with_budget(seed, n, rate, key_rate, power, DEFAULT_BUDGET)
    }

    /// Draws `2^{⌊nR⌋ + ⌊nR_key⌋}` codewords. Rates are rounded down to whole
    /// bits; [`rate`](Self::rate) reports the value actually used.
    pub fn generate_with_budget(
        seed: u64,
        n: usize,
        rate: f64,
        key_rate: f64,
        power: f64,
        budget: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "blocklength must be positive"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("P", format!("{power} must be positive")));
        }
        let msg_bits = integral_bits(n, rate, "R")?;
        let key_bits = integral_bits(n, key_rate, "R_key")?;
        let total_bits = msg_bits + key_bits;
        let requested: u128 = if total_bits >= 127 { u128::MAX } else { 1u128 << total_bits };
        if requested > budget as u128 {
            return Err(Error::Budget { requested, budget });
        }
        let count = requested as usize;
        let radius = (n as f64 * power).sqrt();
        let mut data = vec![0.0; count * n];
        data.par_chunks_mut(GEN_CHUNK * n).enumerate().for_each(|(chunk, block)| {
            let mut rng = stream(seed, domain::CODEBOOK, chunk as u64);
            for row in block.chunks_mut(n) {
                fill_uniform_sphere(&mut rng, row, radius);
            }
        });
        Ok(SphericalCodebook { n, msg_bits, key_bits, power, seed, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Message rate actually used, `⌊nR⌋/n`.
    pub fn rate(&self) -> f64 {
        self.msg_bits as f64 / self.n as f64
    }

    pub fn key_rate(&self) -> f64 {
        self.key_bits as f64 / self.n as f64
    }

    pub fn messages(&self) -> usize {
        1usize << self.msg_bits
    }

    pub fn keys(&self) -> usize {
        1usize << self.key_bits
    }

    pub fn len(&self) -> usize {
        self.messages() * self.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row index of `(m, k)`.
    pub fn index(&self, m: usize, k: usize) -> usize {
        m * self.keys() + k
    }

    /// `(m, k)` of a row index.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.keys(), index % self.keys())
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.n..(index + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn encode(&self, m: usize, k: usize) -> Result<&[f64]> {
        if m >= self.messages() {
            return Err(Error::OutOfRange { what: "m", index: m, limit: self.messages() });
        }
        if k >= self.keys() {
            return Err(Error::OutOfRange { what: "k", index: k, limit: self.keys() });
        }
        Ok(self.row(self.index(m, k)))
    }

    /// Exhaustive nearest-codeword search over the key-`k` subcode.
    pub fn min_distance_decode(&self, y: &[f64], k: usize) -> DecodeOutcome {
        assert_eq!(y.len(), self.n, "received vector has wrong length");
        let base = self.n as f64 * self.power + norm_sq(y);
        let mut best = DecodeOutcome { m_hat: 0, distance: f64::INFINITY, tie: false };
        let mut best_d2 = f64::INFINITY;
        for m in 0..self.messages() {
            let d2 = base - 2.0 * dot(self.row(self.index(m, k)), y);
            if d2 < best_d2 - TIE_TOLERANCE {
                best_d2 = d2;
                best = DecodeOutcome { m_hat: m, distance: 0.0, tie: false };
            } else if (d2 - best_d2).abs() <= TIE_TOLERANCE {
                best.tie = true;
            }
        }
        best.distance = best_d2.max(0.0).sqrt();
        best
    }

    /// Messages `w` with `‖x(w, k) - center‖ ≤ radius`, ascending.
    pub fn list_decode(&self, center: &[f64], k: usize, radius: f64) -> Vec<usize> {
        assert_eq!(center.len(), self.n, "center has wrong length");
        let r2 = radius * radius;
        (0..self.messages())
            .filter(|&m| dist_sq(self.row(self.index(m, k)), center) <= r2)
            .collect()
    }

    /// Size of [`list_decode`](Self::list_decode) without allocating.
    pub fn list_size(&self, center: &[f64], k: usize, radius: f64) -> usize {
        let r2 = radius * radius;
        (0..self.messages())
            .filter(|&m| dist_sq(self.row(self.index(m, k)), center) <= r2)
            .count()
    }

    /// Writes the container: a 40-byte little-endian header
    /// `n: u64, R: f64, R_key: f64, P: f64, seed: u64` followed by all
    /// coordinates as little-endian `f64`, rows in index order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.rate().to_le_bytes())?;
        w.write_all(&self.key_rate().to_le_bytes())?;
        w.write_all(&self.power.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 40];
        r.read_exact(&mut head).map_err(|e| Error::Format(format!("short header: {e}")))?;
        let word = |i: usize| -> [u8; 8] { head[i * 8..i * 8 + 8].try_into().unwrap() };
        let n = u64::from_le_bytes(word(0)) as usize;
        let rate = f64::from_le_bytes(word(1));
        let key_rate = f64::from_le_bytes(word(2));
        let power = f64::from_le_bytes(word(3));
        let seed = u64::from_le_bytes(word(4));
        if n == 0 {
            return Err(Error::Format("zero blocklength".into()));
        }
        let msg_bits = (rate * n as f64).round();
        let key_bits = (key_rate * n as f64).round();
        if !(0.0..=40.0).contains(&(msg_bits + key_bits)) {
            return Err(Error::Format(format!("implausible size 2^{}", msg_bits + key_bits)));
        }
        let (msg_bits, key_bits) = (msg_bits as u32, key_bits as u32);
        let count = 1usize << (msg_bits + key_bits);
        let mut raw = vec![0u8; count * n * 8];
        r.read_exact(&mut raw).map_err(|e| Error::Format(format!("truncated body: {e}")))?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after codewords".into()));
        }
        Ok(SphericalCodebook { n, msg_bits, key_bits, power, seed, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{norm, uniform_sphere_sample};
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn sizes_and_norms() {
        let cb = SphericalCodebook::generate(1, 10, 0.5, 0.0, 2.0).unwrap();
        assert_eq!(cb.len(), 32);
        assert_eq!(cb.messages(), 32);
        assert_eq!(cb.keys(), 1);
        for row in cb.rows() {
            assert!((norm(row) - 20f64.sqrt()).abs() <= 1e-9 * 20f64.sqrt());
        }
    }

    #[test]
    fn rates_round_down() {
        let cb = SphericalCodebook::generate(1, 7, 0.5, 0.3, 1.0).unwrap();
        assert_eq!(cb.messages(), 8);
        assert_eq!(cb.keys(), 4);
        assert!((cb.rate() - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn budget_enforced() {
        match SphericalCodebook::generate_with_budget(1, 20, 1.0, 0.0, 1.0, 1 << 19) {
            Err(Error::Budget { requested, budget }) => {
                assert_eq!(requested, 1 << 20);
                assert_eq!(budget, 1 << 19);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let a = SphericalCodebook::generate(99, 12, 0.75, 0.25, 1.0).unwrap();
        let b = SphericalCodebook::generate(99, 12, 0.75, 0.25, 1.0).unwrap();
        assert_eq!(a, b);
        let c = SphericalCodebook::generate(100, 12, 0.75, 0.25, 1.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn inner_products_centered() {
        let n = 10;
        let cb = SphericalCodebook::generate(5, n, 0.5, 0.0, 1.0).unwrap();
        // disjoint pairs are independent; each inner product has variance n
        let ips: Vec<f64> = (0..cb.len() / 2).map(|i| dot(cb.row(2 * i), cb.row(2 * i + 1))).collect();
        let mean = ips.iter().sum::<f64>() / ips.len() as f64;
        let sd = (n as f64).sqrt() / (ips.len() as f64).sqrt();
        assert!(mean.abs() <= 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn encode_lookup() {
        let cb = SphericalCodebook::generate(2, 8, 0.5, 0.25, 1.0).unwrap();
        assert_eq!(cb.encode(0, 0).unwrap(), cb.row(0));
        assert_eq!(cb.encode(3, 1).unwrap(), cb.row(3 * 4 + 1));
        assert!(cb.encode(16, 0).is_err());
        assert!(cb.encode(0, 4).is_err());
    }

    #[test]
    fn decode_examples() {
        let cb = SphericalCodebook::generate(3, 16, 0.5, 0.0, 1.0).unwrap();
        let x = cb.encode(5, 0).unwrap();
        let out = cb.min_distance_decode(x, 0);
        assert_eq!(out.m_hat, 5);
        assert!(out.distance < 1e-6);

        let x2 = cb.encode(9, 0).unwrap();
        let mid: Vec<f64> = x.iter().zip(x2).map(|(a, b)| 0.5 * (a + b)).collect();
        let out = cb.min_distance_decode(&mid, 0);
        assert!(out.tie);
        assert!(out.m_hat == 5 || out.m_hat == 9);

        let mut min_d = f64::INFINITY;
        for i in 0..cb.len() {
            for j in i + 1..cb.len() {
                min_d = min_d.min(dist_sq(cb.row(i), cb.row(j)).sqrt());
            }
        }
        let mut rng = stream(4, 0, 0);
        let s = uniform_sphere_sample(&mut rng, 16, 0.49 * min_d);
        let y: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        assert_eq!(cb.min_distance_decode(&y, 0).m_hat, 5);
    }

    #[test]
    fn list_decode_examples() {
        let n = 12;
        let cb = SphericalCodebook::generate(6, n, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(cb.list_decode(cb.encode(7, 0).unwrap(), 0, 0.0), vec![7]);
        let origin = vec![0.0; n];
        let all = cb.list_decode(&origin, 0, 2.0 * (n as f64).sqrt());
        assert_eq!(all, (0..cb.messages()).collect::<Vec<_>>());
    }

    #[test]
    fn container_round_trip() {
        let cb = SphericalCodebook::generate(8, 9, 0.5, 0.25, 1.5).unwrap();
        let mut buf = Vec::new();
        cb.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 40 + cb.len() * 9 * 8);
        assert_eq!(&buf[0..8], &9u64.to_le_bytes());
        assert_eq!(&buf[32..40], &8u64.to_le_bytes());
        assert_eq!(&buf[40..48], &cb.row(0)[0].to_le_bytes());
        let back = SphericalCodebook::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, cb);
        assert!(SphericalCodebook::read_from(&buf[..buf.len() - 1]).is_err());
        let mut longer = buf.clone();
        longer.push(0);
        assert!(SphericalCodebook::read_from(longer.as_slice()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn noiseless_round_trip(seed in any::<u64>(), n in 4usize..14) {
            let cb = SphericalCodebook::generate(seed, n, 0.5, 0.25, 1.0).unwrap();
            for idx in 0..cb.len() {
                let (m, k) = cb.split(idx);
                prop_assert_eq!(cb.min_distance_decode(cb.row(idx), k).m_hat, m);
            }
        }

        #[test]
        fn list_monotone_and_contains_decode(seed in any::<u64>(), r1 in 0.0f64..6.0, dr in 0.0f64..3.0) {
            let n = 10;
            let cb = SphericalCodebook::generate(seed, n, 0.6, 0.0, 1.0).unwrap();
            let mut rng = stream(seed, 9, 0);
            let y = uniform_sphere_sample(&mut rng, n, 2.5);
            let small = cb.list_decode(&y, 0, r1);
            let big = cb.list_decode(&y, 0, r1 + dr);
            prop_assert!(small.iter().all(|m| big.contains(m)));
            prop_assert!(small.windows(2).all(|w| w[0] < w[1]));
            let out = cb.min_distance_decode(&y, 0);
            let list = cb.list_decode(&y, 0, out.distance * (1.0 + 1e-9) + 1e-9);
            prop_assert!(list.contains(&out.m_hat));
        }
    }
}
