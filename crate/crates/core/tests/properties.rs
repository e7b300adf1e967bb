mod common;

use chaoscrypt::analysis::{measure_sensitivity, BitPosition};
use chaoscrypt::chaos::{
    iterate_f0, iterate_f1, quantize_byte, quantize_col_shift, quantize_row_shift,
    CompoundGenerator,
};
use chaoscrypt::cipher::{encrypt_staged, read_keystream_dump, write_keystream_dump};
use chaoscrypt::randomness::fips::{fips_monobit, fips_poker, fips_runs, BLOCK_BITS};
use chaoscrypt::randomness::BitSequence;
use chaoscrypt::{decrypt, derive_keystreams, encrypt, Branch, Image, Keystreams, SecretKey};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1.0f64..=1.0,
        Just(-1.0),
        Just(1.0),
        Just(0.0),
        Just(-0.5),
        Just(0.5),
        Just(1.0 - f64::EPSILON / 2.0),
    ]
}

fn key() -> impl Strategy<Value = SecretKey> {
    (unit(), unit()).prop_map(|(x, y)| SecretKey::new(x, y).unwrap())
}

fn image() -> impl Strategy<Value = Image> {
    (1usize..=16, 1usize..=16).prop_flat_map(|(m, n)| {
        prop::collection::vec(any::<u8>(), m * n).prop_map(move |p| Image::new(m, n, p).unwrap())
    })
}

fn block() -> impl Strategy<Value = BitSequence> {
    prop::collection::vec(any::<u8>(), BLOCK_BITS / 8)
        .prop_map(|b| BitSequence::from_bytes_msb_first(&b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn maps_preserve_unit_interval(v in unit()) {
        let a = iterate_f0(v).unwrap();
        let b = iterate_f1(v).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert!((-1.0..=1.0).contains(&b));
    }

    #[test]
    fn f0_is_even_and_f1_is_odd(v in unit()) {
        prop_assert_eq!(iterate_f0(-v).unwrap().to_bits(), iterate_f0(v).unwrap().to_bits());
        prop_assert_eq!(iterate_f1(-v).unwrap(), -iterate_f1(v).unwrap());
    }

    #[test]
    fn branch_counts_add_up(k in key(), n in 0usize..500) {
        let mut g = CompoundGenerator::new(&k);
        let f0 = g.by_ref().take(n).filter(|s| s.branch == Branch::F0).count();
        let st = g.state();
        prop_assert_eq!(st.steps(), n as u64);
        prop_assert_eq!(st.k0, f0 as u64);
    }

    #[test]
    fn quantizers_stay_in_range(v in unit(), m in 1usize..1000) {
        quantize_byte(v).unwrap();
        prop_assert!(quantize_row_shift(v, m).unwrap() < m);
        prop_assert!(quantize_col_shift(v, m).unwrap() < m);
    }

    #[test]
    fn decrypt_inverts_encrypt(k in key(), p in image()) {
        let ks = derive_keystreams(&k, p.width(), p.height()).unwrap();
        prop_assert_eq!(decrypt(&encrypt(&p, &ks).unwrap(), &ks).unwrap(), p);
    }

    #[test]
    fn compact_and_staged_pipelines_agree(k in key(), p in image()) {
        let ks = derive_keystreams(&k, p.width(), p.height()).unwrap();
        let c = encrypt(&p, &ks).unwrap();
        prop_assert_eq!(&c, &encrypt_staged(&p, &ks).unwrap());
        prop_assert_eq!(c, common::staged_encrypt(&p, &ks));
    }

    #[test]
    fn zero_substitution_only_permutes(k in key(), p in image()) {
        let ks = derive_keystreams(&k, p.width(), p.height()).unwrap();
        let bare = Keystreams::from_parts(
            p.width(), p.height(), vec![0; p.len()], ks.s2.clone(), ks.s3.clone(),
        ).unwrap();
        let mut a = encrypt(&p, &bare).unwrap().into_pixels();
        let mut b = p.pixels().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn keystreams_are_deterministic(k in key(), m in 1usize..40, n in 1usize..40) {
        let a = derive_keystreams(&k, m, n).unwrap();
        let b = derive_keystreams(&k.clone(), m, n).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn substitution_cancels_in_differentials(k in key(), pair in image().prop_flat_map(|a| {
        let (m, n) = (a.width(), a.height());
        (Just(a), prop::collection::vec(any::<u8>(), m * n).prop_map(move |p| Image::new(m, n, p).unwrap()))
    })) {
        let (a, b) = pair;
        let ks = derive_keystreams(&k, a.width(), a.height()).unwrap();
        let bare = Keystreams::from_parts(
            a.width(), a.height(), vec![0; a.len()], ks.s2.clone(), ks.s3.clone(),
        ).unwrap();
        let lhs = encrypt(&a, &ks).unwrap().xor(&encrypt(&b, &ks).unwrap()).unwrap();
        prop_assert_eq!(lhs, encrypt(&a.xor(&b).unwrap(), &bare).unwrap());
    }

    #[test]
    fn one_bit_in_one_bit_out(k in key(), p in image(), pick in any::<prop::sample::Index>(), bit in 0u8..8) {
        let pixel = pick.index(p.len());
        let r = measure_sensitivity(&k, &p, BitPosition { pixel, bit }).unwrap();
        prop_assert_eq!(r.hamming, 1);
        prop_assert_eq!(r.differing[0].bit, bit);
    }

    #[test]
    fn keystream_dump_round_trips(k in key(), m in 1usize..30, n in 1usize..30) {
        let ks = derive_keystreams(&k, m, n).unwrap();
        let mut buf = Vec::new();
        write_keystream_dump(&ks, &mut buf).unwrap();
        prop_assert_eq!(buf.len(), 16 + m * n + 4 * (m + n));
        prop_assert_eq!(read_keystream_dump(buf.as_slice()).unwrap(), ks);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monobit_counts_complement(b in block()) {
        let a = fips_monobit(&b).unwrap();
        let c = fips_monobit(&b.complement()).unwrap();
        prop_assert_eq!(a.ones + c.ones, BLOCK_BITS);
        prop_assert_eq!(a.pass, c.pass);
    }

    #[test]
    fn runs_swap_under_complement(b in block()) {
        let a = fips_runs(&b).unwrap();
        let c = fips_runs(&b.complement()).unwrap();
        prop_assert_eq!(a.zeros, c.ones);
        prop_assert_eq!(a.ones, c.zeros);
        prop_assert_eq!(a.pass, c.pass);
    }

    #[test]
    fn poker_ignores_nibble_relabelling(b in block(), mask in 0u8..16) {
        // xor-ing every nibble with the same mask permutes the 16 labels
        let relabelled = BitSequence::from_bits(
            b.as_slice().iter().enumerate().map(|(i, &v)| (v ^ (mask >> (3 - i % 4) & 1)) == 1),
        );
        let x = fips_poker(&b).unwrap();
        let y = fips_poker(&relabelled).unwrap();
        prop_assert_eq!(x.statistic, y.statistic);
        prop_assert_eq!(x.pass, y.pass);
    }
}
