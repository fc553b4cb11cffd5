//! Seeded synthetic account generator with a separability dial.
//!
//! Every account is drawn from one posting-profile family. Genuine
//! accounts use the family's baseline parameterization (long active
//! window ending near the present, many wide clusters, circadian
//! time-of-day structure, heavier-tailed metadata). Each bot provider
//! gets an extreme parameterization (tight bursts, scheduled uniform
//! blocks, or near-periodic grids, all ending well before the present),
//! and `separability` linearly interpolates every parameter between the
//! genuine baseline and the provider's extreme. At 0 both classes sample
//! from the identical distribution; at 1 the profiles are maximally
//! separated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::account::{AccountRecord, Dataset, Label};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_bots: usize,
    pub n_genuine: usize,
    pub n_providers: usize,
    /// 0 = classes indistinguishable, 1 = maximal profile separation.
    pub separability: f64,
    /// Epoch seconds of the observation window start.
    pub time_origin: i64,
    /// Window length in seconds.
    pub time_span: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_bots: 1000,
            n_genuine: 1000,
            n_providers: 5,
            separability: 0.8,
            time_origin: 1_577_836_800, // 2020-01-01T00:00:00Z
            time_span: 63_072_000,      // two years
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bots == 0 || self.n_genuine == 0 {
            return Err(Error::InvalidArgument(
                "n_bots and n_genuine must be positive".into(),
            ));
        }
        if self.n_providers == 0 || self.n_providers > self.n_bots {
            return Err(Error::InvalidArgument(format!(
                "n_providers must be in [1, n_bots], got {}",
                self.n_providers
            )));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(Error::InvalidArgument(format!(
                "separability must be in [0, 1], got {}",
                self.separability
            )));
        }
        if self.time_span < 1 || self.time_origin < 0 {
            return Err(Error::InvalidArgument(
                "time_origin must be >= 0 and time_span >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One point in the shared posting-profile family. All fields are
/// continuous so profiles interpolate componentwise.
#[derive(Debug, Clone, Copy)]
struct Profile {
    username_len: (f64, f64),
    full_name_len: (f64, f64),
    bio_len_mean: f64,
    followers_ln: (f64, f64),
    followings_ln: (f64, f64),
    posts_mean: f64,
    /// Active-window start drawn from U(0, this), as a span fraction.
    win_start_max: f64,
    /// Active-window length range, as span fractions.
    win_len: (f64, f64),
    /// Number of posting clusters in the window.
    clusters: (f64, f64),
    /// Cluster width (sigma) as a fraction of the window.
    cluster_width: f64,
    /// 0 = cluster centers uniform at random, 1 = evenly spaced.
    cluster_evenness: f64,
    /// Weight of the two-peak time-of-day structure.
    circadian: f64,
}

fn genuine_profile() -> Profile {
    Profile {
        username_len: (11.0, 3.0),
        full_name_len: (14.0, 6.0),
        bio_len_mean: 60.0,
        followers_ln: (6.0, 1.2),
        followings_ln: (5.8, 1.0),
        posts_mean: 90.0,
        win_start_max: 0.15,
        win_len: (0.80, 1.0),
        clusters: (24.0, 48.0),
        cluster_width: 0.20,
        cluster_evenness: 0.0,
        circadian: 1.0,
    }
}

/// Extreme profile for a provider. Three regime families (tight-burst /
/// scheduled-uniform / near-periodic) rotate across providers, with a
/// mild per-provider offset so no two providers are identical.
fn provider_extreme(provider_idx: usize, n_providers: usize) -> Profile {
    let base = Profile {
        username_len: (13.0, 3.2),
        full_name_len: (8.0, 5.0),
        bio_len_mean: 14.0,
        followers_ln: (5.2, 1.15),
        followings_ln: (6.7, 0.85),
        posts_mean: 110.0,
        win_start_max: 0.50,
        win_len: (0.002, 0.03),
        clusters: (1.0, 3.0),
        cluster_width: 0.04,
        cluster_evenness: 0.0,
        circadian: 0.0,
    };
    let mut p = match provider_idx % 3 {
        0 => base, // tight burst
        1 => Profile {
            // scheduled-uniform block
            win_start_max: 0.45,
            win_len: (0.15, 0.35),
            clusters: (40.0, 60.0),
            cluster_width: 0.50,
            posts_mean: 95.0,
            ..base
        },
        _ => Profile {
            // near-periodic grid
            win_start_max: 0.48,
            win_len: (0.10, 0.30),
            clusters: (10.0, 14.0),
            cluster_width: 0.005,
            cluster_evenness: 1.0,
            posts_mean: 80.0,
            ..base
        },
    };
    // small deterministic offset per provider
    let jitter = (provider_idx as f64 / n_providers as f64 - 0.5) * 0.2;
    p.win_start_max = (p.win_start_max * (1.0 + jitter)).clamp(0.0, 0.9);
    p.posts_mean = (p.posts_mean * (1.0 + jitter)).max(6.0);
    p
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn lerp_profile(a: &Profile, b: &Profile, t: f64) -> Profile {
    Profile {
        username_len: (lerp(a.username_len.0, b.username_len.0, t), lerp(a.username_len.1, b.username_len.1, t)),
        full_name_len: (lerp(a.full_name_len.0, b.full_name_len.0, t), lerp(a.full_name_len.1, b.full_name_len.1, t)),
        bio_len_mean: lerp(a.bio_len_mean, b.bio_len_mean, t),
        followers_ln: (lerp(a.followers_ln.0, b.followers_ln.0, t), lerp(a.followers_ln.1, b.followers_ln.1, t)),
        followings_ln: (lerp(a.followings_ln.0, b.followings_ln.0, t), lerp(a.followings_ln.1, b.followings_ln.1, t)),
        posts_mean: lerp(a.posts_mean, b.posts_mean, t),
        win_start_max: lerp(a.win_start_max, b.win_start_max, t),
        win_len: (lerp(a.win_len.0, b.win_len.0, t), lerp(a.win_len.1, b.win_len.1, t)),
        clusters: (lerp(a.clusters.0, b.clusters.0, t), lerp(a.clusters.1, b.clusters.1, t)),
        cluster_width: lerp(a.cluster_width, b.cluster_width, t),
        cluster_evenness: lerp(a.cluster_evenness, b.cluster_evenness, t),
        circadian: lerp(a.circadian, b.circadian, t),
    }
}

const SECONDS_PER_DAY: f64 = 86_400.0;
/// Fraction of barely active accounts (2-5 posts), independent of class.
const LOW_ACTIVITY_PROB: f64 = 0.01;

fn sample_post_times(profile: &Profile, config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let n_posts = if rng.gen_bool(LOW_ACTIVITY_PROB) {
        2 + rng.gen_range(0..4)
    } else {
        let mean_extra = (profile.posts_mean - 2.0).max(1.0);
        let exp = Exp::new(1.0 / mean_extra).expect("positive rate");
        2 + (exp.sample(rng) as usize).min(398)
    };

    let span = config.time_span as f64;
    let w0 = rng.gen_range(0.0..=profile.win_start_max.max(1e-9)) * span;
    let len = rng.gen_range(profile.win_len.0..=profile.win_len.1) * span;
    let w1 = (w0 + len).min(span);
    let window = (w1 - w0).max(1.0);

    let k = (rng
        .gen_range(profile.clusters.0..=profile.clusters.1)
        .round() as usize)
        .max(1);
    let mut centers: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    centers.sort_by(f64::total_cmp);
    let e = profile.cluster_evenness;
    for (i, c) in centers.iter_mut().enumerate() {
        let even = (i as f64 + 0.5) / k as f64;
        *c = (1.0 - e) * *c + e * even;
    }

    let width = Normal::new(0.0, profile.cluster_width.max(1e-6)).expect("positive sigma");
    let tod_early = Normal::new(12.5 * 3600.0, 2.2 * 3600.0).unwrap();
    let tod_late = Normal::new(20.5 * 3600.0, 1.8 * 3600.0).unwrap();

    let mut times = Vec::with_capacity(n_posts);
    for _ in 0..n_posts {
        let c = centers[rng.gen_range(0..k)];
        let f = (c + width.sample(rng)).clamp(0.0, 1.0);
        let t = w0 + f * window;

        let day = (t / SECONDS_PER_DAY).floor();
        let tod_raw: f64 = if rng.gen_bool(0.45) {
            tod_early.sample(rng)
        } else {
            tod_late.sample(rng)
        };
        let tod = tod_raw.clamp(0.0, SECONDS_PER_DAY - 1.0);
        let t_circadian = day * SECONDS_PER_DAY + tod;

        let blended = lerp(t, t_circadian, profile.circadian).clamp(0.0, span);
        times.push(config.time_origin + blended.round() as i64);
    }
    times.sort_unstable();
    times
}

fn sample_record(
    id: String,
    label: Label,
    provider: Option<String>,
    profile: &Profile,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> AccountRecord {
    let normal_len = |rng: &mut ChaCha8Rng, (mean, std): (f64, f64), lo: i64, hi: i64| {
        let n = Normal::new(mean, std.max(1e-6)).expect("positive sigma");
        (n.sample(rng).round() as i64).clamp(lo, hi)
    };
    let username_length = normal_len(rng, profile.username_len, 1, 40);
    let full_name_length = normal_len(rng, profile.full_name_len, 0, 60);
    let bio = Exp::new(1.0 / profile.bio_len_mean.max(0.5)).expect("positive rate");
    let biography_length = (bio.sample(rng) as i64).clamp(0, 200);
    let followers = LogNormal::new(profile.followers_ln.0, profile.followers_ln.1.max(1e-6)).unwrap();
    let followings = LogNormal::new(profile.followings_ln.0, profile.followings_ln.1.max(1e-6)).unwrap();
    let followers_count = (followers.sample(rng) as i64).clamp(0, 5_000_000);
    let followings_count = (followings.sample(rng) as i64).clamp(0, 100_000);

    AccountRecord {
        id,
        label,
        provider,
        username_length,
        full_name_length,
        biography_length,
        followers_count,
        followings_count,
        post_times: sample_post_times(profile, config, rng),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generates `n_bots` bot records (providers assigned round-robin as
/// p1..pK) followed by `n_genuine` genuine records. Deterministic per
/// seed: every record draws from its own derived rng.
pub fn generate_dataset(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let genuine = genuine_profile();
    let s = config.separability;

    let bot_profiles: Vec<Profile> = (0..config.n_providers)
        .map(|p| lerp_profile(&genuine, &provider_extreme(p, config.n_providers), s))
        .collect();

    let mut records = Vec::with_capacity(config.n_bots + config.n_genuine);
    for i in 0..config.n_bots {
        let provider_idx = i % config.n_providers;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ splitmix64(i as u64 + 1));
        records.push(sample_record(
            format!("b{:06}", i + 1),
            Label::Bot,
            Some(format!("p{}", provider_idx + 1)),
            &bot_profiles[provider_idx],
            config,
            &mut rng,
        ));
    }
    for i in 0..config.n_genuine {
        let mut rng = ChaCha8Rng::seed_from_u64(
            config.seed ^ splitmix64((config.n_bots + i) as u64 + 1),
        );
        records.push(sample_record(
            format!("g{:06}", i + 1),
            Label::Genuine,
            None,
            &genuine,
            config,
            &mut rng,
        ));
    }

    Dataset::new(records, format!("synth:seed={}", config.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::account::validate_record;

    #[test]
    fn default_config_counts_and_round_robin() {
        let config = SynthConfig {
            n_bots: 50,
            n_genuine: 30,
            n_providers: 5,
            ..Default::default()
        };
        let ds = generate_dataset(&config).unwrap();
        assert_eq!(ds.len(), 80);
        let mut per_provider = std::collections::BTreeMap::new();
        for r in &ds.records {
            if let Some(p) = r.provider_tag() {
                *per_provider.entry(p.to_string()).or_insert(0usize) += 1;
            }
        }
        assert_eq!(per_provider.len(), 5);
        assert!(per_provider.values().all(|&c| c == 10));
    }

    #[test]
    fn providers_only_on_bots_and_records_validate() {
        let config = SynthConfig {
            n_bots: 40,
            n_genuine: 40,
            ..Default::default()
        };
        let ds = generate_dataset(&config).unwrap();
        for r in &ds.records {
            assert!(validate_record(r).is_empty(), "record {} invalid", r.id);
            match r.label {
                Label::Bot => assert!(r.provider_tag().is_some()),
                _ => assert!(r.provider_tag().is_none()),
            }
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let config = SynthConfig {
            n_bots: 25,
            n_genuine: 25,
            ..Default::default()
        };
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        crate::account::write_records(&a, &mut buf_a).unwrap();
        crate::account::write_records(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_dataset(&SynthConfig {
            n_bots: 25,
            n_genuine: 25,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let b = generate_dataset(&SynthConfig {
            n_bots: 25,
            n_genuine: 25,
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_separability_uses_one_shared_profile() {
        // the bot profile collapses onto the genuine parameterization
        let genuine = genuine_profile();
        let bot = lerp_profile(&genuine, &provider_extreme(0, 5), 0.0);
        assert_eq!(format!("{bot:?}"), format!("{genuine:?}"));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let c = SynthConfig { separability: 1.5, ..Default::default() };
        assert!(generate_dataset(&c).is_err());
        let c = SynthConfig { n_providers: 0, ..Default::default() };
        assert!(generate_dataset(&c).is_err());
        let c = SynthConfig { n_providers: 1001, n_bots: 1000, ..Default::default() };
        assert!(generate_dataset(&c).is_err());
    }
}
