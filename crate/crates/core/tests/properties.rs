use proptest::prelude::*;

use shortpacket::channel::{sample_block, CodewordLaw};
use shortpacket::cli::parse_f64_list;
use shortpacket::config::log_competitors;
use shortpacket::density::{block_density, kappa, log_mean_exp, round_increment};
use shortpacket::fbl::{rcus_summand, DensityBank};
use shortpacket::harq::{sample_trajectories, stopping_stats, undetected_bound, TrialTrajectory};
use shortpacket::rng::Streams;
use shortpacket::{SnnParam, SystemConfig};

fn small_config(snr_db: f64, pilots: usize, branches: usize) -> SystemConfig {
    SystemConfig {
        subcarriers: 4,
        ofdm_symbols: 3,
        available_branches: 12,
        ..SystemConfig::default()
    }
    .with_snr_db(snr_db)
    .with_pilots(pilots)
    .with_branches(branches)
}

fn config_strategy() -> impl Strategy<Value = SystemConfig> {
    (-10.0..20.0f64, 1usize..8, 1usize..5).prop_map(|(db, p, l)| small_config(db, p, l))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn zero_scale_density_vanishes(cfg in config_strategy(), seed in any::<u64>(), law in prop_oneof![Just(CodewordLaw::Transmitted), Just(CodewordLaw::Mismatched)]) {
        let streams = Streams::new(seed);
        for t in 0..20 {
            let b = sample_block(&cfg, law, &mut streams.block(t, 0)).unwrap();
            prop_assert_eq!(block_density(&b, SnnParam::new(0.0).unwrap()), 0.0);
        }
    }

    #[test]
    fn summand_is_a_probability(density in -1e4..1e4f64, bits in 0u32..600) {
        let z = rcus_summand(density, log_competitors(bits));
        prop_assert!((0.0..=1.0).contains(&z));
    }

    #[test]
    fn bound_grows_with_message_size(cfg in config_strategy(), s in 0.1..3.0f64, seed in any::<u64>(), v in 1usize..4) {
        let mut bank = DensityBank::new(&cfg, SnnParam::new(s).unwrap(), 64, seed).unwrap();
        for _ in 0..v.min(cfg.max_rounds()) {
            bank.advance();
        }
        for &a in bank.densities() {
            let mut prev = 0.0;
            for k in 1..=64 {
                let z = rcus_summand(a, log_competitors(k));
                prop_assert!(z >= prev);
                prev = z;
            }
        }
        let mut prev = 0.0;
        for k in [1, 2, 8, 30, 64, 200] {
            let b = bank.bound(log_competitors(k)).mean;
            prop_assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn accumulated_density_is_the_sum_of_increments(cfg in config_strategy(), s in 0.1..3.0f64, seed in any::<u64>()) {
        let sp = SnnParam::new(s).unwrap();
        let n = 40;
        let mut bank = DensityBank::new(&cfg, sp, n, seed).unwrap();
        for _ in 0..cfg.max_rounds() {
            bank.advance();
        }
        let set = sample_trajectories(&cfg, sp, n, seed, CodewordLaw::Transmitted, f64::INFINITY).unwrap();
        for (a, t) in bank.densities().iter().zip(&set.trajectories) {
            let sum = t.increments().iter().fold(0.0, |acc, z| acc + z);
            prop_assert_eq!(*a, sum);
        }
    }

    #[test]
    fn streamed_increments_match_materialized_blocks(cfg in config_strategy(), s in 0.1..3.0f64, seed in any::<u64>()) {
        let sp = SnnParam::new(s).unwrap();
        let set = sample_trajectories(&cfg, sp, 8, seed, CodewordLaw::Transmitted, f64::INFINITY).unwrap();
        let streams = Streams::new(seed);
        let l = cfg.branches;
        for (t, traj) in set.trajectories.iter().enumerate() {
            for (r, &z) in traj.increments().iter().enumerate() {
                let blocks: Vec<_> = (0..l)
                    .map(|b| sample_block(&cfg, CodewordLaw::Transmitted, &mut streams.block(t as u64, (r * l + b) as u32)).unwrap())
                    .collect();
                let direct = round_increment(&blocks, sp, l).unwrap();
                prop_assert!((direct - z).abs() <= 1e-9 * (1.0 + z.abs()), "{} vs {}", direct, z);
            }
        }
    }

    #[test]
    fn stopping_round_is_the_first_crossing(incs in prop::collection::vec(-20.0..20.0f64, 1..16), gamma in -30.0..60.0f64) {
        let t = TrialTrajectory::from_increments(incs.clone());
        let mut sum = 0.0;
        let mut first = None;
        for (i, z) in incs.iter().enumerate() {
            sum += z;
            if sum >= gamma {
                first = Some(i + 1);
                break;
            }
        }
        prop_assert_eq!(t.stopping_round(gamma), first);
    }

    #[test]
    fn stopping_distribution_is_proper(cfg in config_strategy(), seed in any::<u64>(), gamma in 0.0..40.0f64) {
        let set = sample_trajectories(&cfg, SnnParam::new(1.0).unwrap(), 200, seed, CodewordLaw::Transmitted, f64::INFINITY).unwrap();
        let st = stopping_stats(&set, gamma).unwrap();
        prop_assert_eq!(st.round_counts.iter().sum::<usize>(), 200);
        let cdf = st.cdf();
        prop_assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*cdf.last().unwrap(), 1.0);
        prop_assert!(st.mean_rounds.mean >= 1.0 && st.mean_rounds.mean <= cfg.max_rounds() as f64);
        prop_assert!((0.0..=1.0).contains(&st.timeout.mean));
    }

    #[test]
    fn undetected_term_is_monotone(bits in 1u32..512, gamma in 0.0..400.0f64, dg in 0.0..10.0f64) {
        let u = undetected_bound(bits, gamma);
        prop_assert!((0.0..=1.0).contains(&u));
        prop_assert!(undetected_bound(bits, gamma + dg) <= u);
        prop_assert!(undetected_bound(bits + 1, gamma) >= u);
    }

    #[test]
    fn tilted_moment_vanishes_at_zero_and_one(cfg in config_strategy(), s in 0.1..3.0f64, seed in any::<u64>()) {
        let sp = SnnParam::new(s).unwrap();
        prop_assert_eq!(kappa(0.0, &cfg, sp, 50, seed).unwrap().mean, 0.0);
        prop_assert_eq!(kappa(1.0, &cfg, sp, 50, seed).unwrap().mean, 0.0);
    }

    #[test]
    fn log_mean_exp_lies_between_extremes(xs in prop::collection::vec(-700.0..700.0f64, 1..10)) {
        let m = log_mean_exp(&xs);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
    }

    #[test]
    fn round_budget_is_the_floor(l_c in 1usize..60, l in 1usize..60) {
        prop_assume!(l <= l_c);
        let cfg = SystemConfig { available_branches: l_c, ..SystemConfig::default() }.with_branches(l);
        prop_assert_eq!(cfg.max_rounds(), l_c / l);
    }

    #[test]
    fn ranges_have_the_expected_length(start in -20i32..20, steps in 0usize..50, step_tenths in 1i32..20) {
        let step = step_tenths as f64 / 10.0;
        let stop = start as f64 + steps as f64 * step;
        let xs = parse_f64_list("x", &format!("{start}:{step}:{stop}")).unwrap();
        prop_assert_eq!(xs.len(), steps + 1);
        prop_assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
