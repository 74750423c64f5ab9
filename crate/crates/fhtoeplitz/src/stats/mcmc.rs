use crate::error::{Error, Result};
use crate::trig::{equilibrium_density, TrigPolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

const TWO_PI: f64 = 2.0 * PI;
const HEADER_LEN: usize = 64;
const MAGIC: &str = "FHSB1";

/// Kept samples of the log-gas. Each sample is stored with its angles sorted
/// increasingly, so sample k gives (ξ_1, …, ξ_n) directly.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub n: usize,
    pub chains: usize,
    pub samples: usize,
    pub seed: u64,
    /// chain-major: angles[((c · samples) + s) · n + j]
    pub angles: Vec<f64>,
    /// final tuned proposal scale per chain (empty when loaded from disk)
    pub proposal_scale: Vec<f64>,
    /// acceptance over the kept sweeps (None when loaded from disk)
    pub acceptance_rate: Option<f64>,
}

impl SampleBatch {
    pub fn sample(&self, chain: usize, s: usize) -> &[f64] {
        let start = (chain * self.samples + s) * self.n;
        &self.angles[start..start + self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.angles.chunks(self.n)
    }

    pub fn header(&self) -> Result<Vec<u8>> {
        let text = format!("{MAGIC} n={} chains={} samples={} seed={}", self.n, self.chains, self.samples, self.seed);
        if text.len() >= HEADER_LEN {
            return Err(Error::domain("sample header does not fit in 64 bytes"));
        }
        let mut h = text.into_bytes();
        h.resize(HEADER_LEN - 1, b' ');
        h.push(b'\n');
        Ok(h)
    }

    /// 64-byte text header, then the angles as little-endian f64.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut buf = self.header()?;
        buf.reserve(self.angles.len() * 8);
        for a in &self.angles {
            buf.extend_from_slice(&a.to_le_bytes());
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(&buf))
            .map_err(|e| Error::domain(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read_from(path: &Path) -> Result<SampleBatch> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
        if buf.len() < HEADER_LEN {
            return Err(Error::parse("file shorter than the sample header"));
        }
        let header = std::str::from_utf8(&buf[..HEADER_LEN]).map_err(|_| Error::parse("header is not text"))?;
        let mut words = header.split_whitespace();
        if words.next() != Some(MAGIC) {
            return Err(Error::parse("bad magic in sample header"));
        }
        let mut field = |name: &str| -> Result<u64> {
            let w = words.next().ok_or_else(|| Error::parse(format!("header lacks {name}")))?;
            w.strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(format!("bad header field {w:?}")))
        };
        let n = field("n")? as usize;
        let chains = field("chains")? as usize;
        let samples = field("samples")? as usize;
        let seed = field("seed")?;
        let body = &buf[HEADER_LEN..];
        if body.len() != n * chains * samples * 8 {
            return Err(Error::parse("sample payload length does not match the header"));
        }
        let angles = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(SampleBatch { n, chains, samples, seed, angles, proposal_scale: vec![], acceptance_rate: None })
    }
}

/// Σ_{j<k} log|e^{iφ_k} − e^{iφ_j}|² − n Σ_j V(e^{iφ_j}) (unnormalized).
pub fn log_density(v: &TrigPolynomial, n: usize, phis: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..phis.len() {
        for j in 0..k {
            s += (2.0 - 2.0 * (phis[k] - phis[j]).cos()).ln();
        }
        s -= n as f64 * v.eval(phis[k]).re;
    }
    s
}

/// Metropolis acceptance for a log-density change `delta`.
pub fn accept_probability(delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else {
        delta.exp()
    }
}

struct Chain<'a> {
    v: &'a TrigPolynomial,
    n: usize,
    phi: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    pot: Vec<f64>,
    scale: f64,
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    fn new(v: &'a TrigPolynomial, n: usize, seed: u64, chain: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain as u64);
        let phi: Vec<f64> = (0..n)
            .map(|j| (TWO_PI * (j as f64 + rng.random::<f64>()) / n as f64).rem_euclid(TWO_PI))
            .collect();
        let x = phi.iter().map(|p| p.cos()).collect();
        let y = phi.iter().map(|p| p.sin()).collect();
        let pot = phi.iter().map(|p| n as f64 * v.eval(*p).re).collect();
        Chain { v, n, phi, x, y, pot, scale: PI / n as f64, rng }
    }

    /// Log-density change when site j moves to (nx, ny); −∞ on a collision.
    fn delta(&self, j: usize, nx: f64, ny: f64, new_pot: f64) -> f64 {
        let (ox, oy) = (self.x[j], self.y[j]);
        let mut log_sum = 0.0;
        let mut prod = 1.0;
        for k in 0..self.n {
            if k == j {
                continue;
            }
            let dn = (nx - self.x[k]).powi(2) + (ny - self.y[k]).powi(2);
            let d_old = (ox - self.x[k]).powi(2) + (oy - self.y[k]).powi(2);
            if dn == 0.0 {
                return f64::NEG_INFINITY;
            }
            prod *= dn / d_old;
            if !(1e-100..=1e100).contains(&prod) {
                log_sum += prod.ln();
                prod = 1.0;
            }
        }
        log_sum + prod.ln() - (new_pot - self.pot[j])
    }

    /// One sweep of n single-site moves; returns the number accepted.
    fn sweep(&mut self) -> usize {
        let mut accepted = 0;
        for j in 0..self.n {
            let z: f64 = self.rng.sample(StandardNormal);
            let p = (self.phi[j] + self.scale * z).rem_euclid(TWO_PI);
            let (nx, ny) = (p.cos(), p.sin());
            let new_pot = self.n as f64 * self.v.eval(p).re;
            let d = self.delta(j, nx, ny, new_pot);
            let u: f64 = self.rng.random();
            if u < accept_probability(d) {
                self.phi[j] = p;
                self.x[j] = nx;
                self.y[j] = ny;
                self.pot[j] = new_pot;
                accepted += 1;
            }
        }
        accepted
    }
}

struct ChainRun {
    angles: Vec<f64>,
    scale: f64,
    accepted: usize,
}

/// Chain c uses stream c of the master seed, so results do not depend on scheduling.
fn run_chain(v: &TrigPolynomial, n: usize, seed: u64, c: usize, burn: usize, kept: usize) -> ChainRun {
    let mut ch = Chain::new(v, n, seed, c);
    let mut window = 0usize;
    for s in 0..burn {
        window += ch.sweep();
        if (s + 1) % 10 == 0 {
            let rate = window as f64 / (10 * n) as f64;
            if rate > 0.5 {
                ch.scale = (ch.scale * 1.2).min(PI);
            } else if rate < 0.3 {
                ch.scale /= 1.2;
            }
            window = 0;
        }
    }
    let mut angles = Vec::with_capacity(kept * n);
    let mut accepted = 0;
    for _ in 0..kept {
        accepted += ch.sweep();
        let mut sorted = ch.phi.clone();
        sorted.sort_by(f64::total_cmp);
        angles.extend_from_slice(&sorted);
    }
    ChainRun { angles, scale: ch.scale, accepted }
}

/// Metropolis random walk for the density ∝ Π|e^{iφ_k} − e^{iφ_j}|² Π e^{−nV}.
/// `steps` sweeps per chain; the first steps/5 are burn-in, during which the
/// proposal scale is tuned every 10 sweeps towards acceptance in [0.3, 0.5].
pub fn mcmc_sample(v: &TrigPolynomial, n: usize, chains: usize, steps: usize, seed: u64) -> Result<SampleBatch> {
    if n < 2 {
        return Err(Error::domain("sampler needs n ≥ 2"));
    }
    if chains == 0 || steps < 5 {
        return Err(Error::domain("need at least one chain and five sweeps"));
    }
    if !v.is_real_on_circle(1e-13) {
        return Err(Error::domain("V must be real on the circle"));
    }
    if !equilibrium_density(v).regular {
        return Err(Error::domain("V is not one-cut regular"));
    }
    let burn = steps / 5;
    let kept = steps - burn;
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(chains);
    let runs: Vec<ChainRun> = if workers <= 1 {
        (0..chains).map(|c| run_chain(v, n, seed, c, burn, kept)).collect()
    } else {
        let mut slots: Vec<Option<ChainRun>> = (0..chains).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..chains).step_by(workers).map(|c| (c, run_chain(v, n, seed, c, burn, kept))).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (c, run) in h.join().expect("sampler thread panicked") {
                    slots[c] = Some(run);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every chain ran")).collect()
    };
    let mut angles = Vec::with_capacity(chains * kept * n);
    let mut scales = Vec::with_capacity(chains);
    let mut acc_total = 0usize;
    for run in runs {
        angles.extend_from_slice(&run.angles);
        scales.push(run.scale);
        acc_total += run.accepted;
    }
    Ok(SampleBatch {
        n,
        chains,
        samples: kept,
        seed,
        angles,
        proposal_scale: scales,
        acceptance_rate: Some(acc_total as f64 / (chains * kept * n) as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic_given_seed() {
        let v = TrigPolynomial::cosine(0.2);
        let a = mcmc_sample(&v, 5, 2, 20, 7).unwrap();
        let b = mcmc_sample(&v, 5, 2, 20, 7).unwrap();
        assert_eq!(a, b);
        let c = mcmc_sample(&v, 5, 2, 20, 8).unwrap();
        assert_ne!(a.angles, c.angles);
        assert!(a.angles.iter().all(|x| (0.0..TWO_PI).contains(x)));
        let r = a.acceptance_rate.unwrap();
        assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn incremental_update_matches_full_density() {
        let v = TrigPolynomial::from_pairs(&[(1, num_complex::Complex64::new(0.1, 0.05)), (-1, num_complex::Complex64::new(0.1, -0.05))]);
        let ch = Chain::new(&v, 6, 3, 0);
        let p: f64 = 1.234;
        let d = ch.delta(2, p.cos(), p.sin(), 6.0 * v.eval(p).re);
        let mut moved = ch.phi.clone();
        moved[2] = p;
        assert_abs_diff_eq!(d, log_density(&v, 6, &moved) - log_density(&v, 6, &ch.phi), epsilon = 1e-11);
    }

    #[test]
    fn detailed_balance_on_a_grid() {
        // n = 2 on an M-point grid with a symmetric discretized Gaussian proposal
        let v = TrigPolynomial::cosine(0.25);
        let m = 12;
        let grid: Vec<f64> = (0..m).map(|i| TWO_PI * (i as f64 + 0.5) / m as f64).collect();
        let q = |a: usize, b: usize| {
            let d = ((a as i64 - b as i64).rem_euclid(m as i64)).min((b as i64 - a as i64).rem_euclid(m as i64)) as f64;
            (-d * d / 2.0).exp()
        };
        let states: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
        let logp = |s: &(usize, usize)| log_density(&v, 2, &[grid[s.0], grid[s.1]]);
        for x in &states {
            for y in &states {
                // single-site moves only
                let kxy = if x.0 == y.0 && x.1 != y.1 {
                    q(x.1, y.1) * accept_probability(logp(y) - logp(x))
                } else if x.1 == y.1 && x.0 != y.0 {
                    q(x.0, y.0) * accept_probability(logp(y) - logp(x))
                } else {
                    continue;
                };
                let kyx = if x.0 == y.0 {
                    q(y.1, x.1) * accept_probability(logp(x) - logp(y))
                } else {
                    q(y.0, x.0) * accept_probability(logp(x) - logp(y))
                };
                let lhs = logp(x).exp() * kxy;
                let rhs = logp(y).exp() * kyx;
                assert!((lhs - rhs).abs() <= 1e-14 * lhs.max(rhs), "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn two_particle_moment_against_quadrature() {
        let v = TrigPolynomial::cosine(0.25);
        // oracle: E|e^{iφ1} − e^{iφ2}|² by a tensor trapezoid rule (periodic, smooth)
        let m = 256;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let (a, b) = (TWO_PI * i as f64 / m as f64, TWO_PI * j as f64 / m as f64);
                let d2 = 2.0 - 2.0 * (a - b).cos();
                let w = d2 * (-2.0 * (v.eval(a).re + v.eval(b).re)).exp();
                num += w * d2;
                den += w;
            }
        }
        let exact = num / den;
        let batch = mcmc_sample(&v, 2, 40, 2500, 99).unwrap();
        let per_chain: Vec<f64> = (0..batch.chains)
            .map(|c| {
                (0..batch.samples)
                    .map(|s| {
                        let p = batch.sample(c, s);
                        2.0 - 2.0 * (p[0] - p[1]).cos()
                    })
                    .sum::<f64>()
                    / batch.samples as f64
            })
            .collect();
        let mean = per_chain.iter().sum::<f64>() / per_chain.len() as f64;
        let var = per_chain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (per_chain.len() - 1) as f64;
        let se = (var / per_chain.len() as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "mean {mean} exact {exact} se {se}");
    }

    #[test]
    fn binary_roundtrip() {
        let batch = mcmc_sample(&TrigPolynomial::zero(), 4, 2, 10, 5).unwrap();
        let dir = std::env::temp_dir().join(format!("fhsb-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("batch.bin");
        batch.write_to(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 64 + batch.angles.len() * 8);
        assert!(bytes.starts_with(b"FHSB1 n=4 chains=2 samples=8 seed=5"));
        let back = SampleBatch::read_from(&path).unwrap();
        assert_eq!(back.angles, batch.angles);
        assert_eq!((back.n, back.chains, back.samples, back.seed), (4, 2, 8, 5));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
