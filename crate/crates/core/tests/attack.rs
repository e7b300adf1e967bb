mod common;

use chaoscrypt::attack::{attack_end_to_end, build_chosen_images, KeyedOracle};
use chaoscrypt::experiment::random_key;
use chaoscrypt::AttackError;
use chaoscrypt::{derive_keystreams, encrypt, Image};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recovers_keystreams_for_random_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..60 {
        let (m, n) = (rng.gen_range(1..=40), rng.gen_range(1..=40));
        let key = random_key(&mut rng);
        let i1 = random_image(&mut rng, m, n);
        let mut oracle = KeyedOracle::new(key);
        let rec = attack_end_to_end(&mut oracle, &i1).unwrap();
        assert_eq!(rec.oracle_queries, 3);
        assert_eq!(oracle.queries(), 3);
        assert_eq!(
            rec.keystreams,
            derive_keystreams(&key, m, n).unwrap(),
            "{m}x{n}"
        );
    }
}

#[test]
fn recovered_streams_open_an_unseen_ciphertext() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let key = random_key(&mut rng);
    let ks = derive_keystreams(&key, 256, 256).unwrap();
    // the closure holds the keystreams; the attack only sees its outputs
    let mut oracle = |img: &Image| -> Result<Image, AttackError> { Ok(encrypt(img, &ks)?) };
    let rec = attack_end_to_end(&mut oracle, &peppers_like()).unwrap();
    let secret = random_image(&mut rng, 256, 256);
    let c = staged_encrypt(&secret, &ks);
    assert_eq!(rec.decrypt(&c).unwrap(), secret);
}

#[test]
fn chosen_images_share_i1_outside_markers() {
    let i1 = peppers_like();
    let set = build_chosen_images(&i1);
    let d12 = set.d12();
    let d13 = set.d13();
    for j in 0..256 {
        for i in 0..256 {
            assert_eq!(d12.get(i, j), if j == 0 { 0 } else { 255 });
            assert_eq!(d13.get(i, j), if i == 0 { 0 } else { 255 });
        }
    }
}

#[test]
fn oracle_errors_propagate() {
    let mut calls = 0;
    let mut oracle = |_: &Image| -> Result<Image, AttackError> {
        calls += 1;
        Err(AttackError::Oracle("offline".into()))
    };
    let err = attack_end_to_end(&mut oracle, &Image::filled(4, 4, 9).unwrap()).unwrap_err();
    assert!(matches!(err, AttackError::Oracle(_)));
    assert_eq!(calls, 1);
}
