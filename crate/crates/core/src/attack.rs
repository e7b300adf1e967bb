//! Differential chosen-plaintext attack.
//!
//! XORing two ciphertexts produced under the same key cancels the
//! substitution layer and leaves the plaintext difference, permuted by the
//! row and column rotations. Two differentials with a single zero per
//! column (resp. per row) in a field of 255 reveal every column shift and
//! every row shift. With the permutation known, one plaintext/ciphertext
//! pair gives the XOR keystream directly. Three chosen plaintexts in total.
//!
//! Nothing in this module sees a [`SecretKey`](crate::SecretKey); the only
//! access to the cipher is through [`EncryptionOracle`].

use crate::cipher::{self, Image, Keystreams};
use crate::error::{AttackError, CipherError};

const MARKER: u8 = 0;
const FIELD: u8 = 255;

/// Something that encrypts images under a fixed, hidden key.
pub trait EncryptionOracle {
    fn encrypt(&mut self, plain: &Image) -> Result<Image, AttackError>;
}

impl<F> EncryptionOracle for F
where
    F: FnMut(&Image) -> Result<Image, AttackError>,
{
    fn encrypt(&mut self, plain: &Image) -> Result<Image, AttackError> {
        self(plain)
    }
}

/// The three chosen plaintexts. `i2 = i1 ^ d12` where `d12` is zero on row
/// 0 and 255 elsewhere; `i3 = i1 ^ d13` where `d13` is zero on column 0 and
/// 255 elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChosenImageSet {
    pub i1: Image,
    pub i2: Image,
    pub i3: Image,
}

impl ChosenImageSet {
    pub fn d12(&self) -> Image {
        self.i1.xor(&self.i2).expect("chosen images share a shape")
    }

    pub fn d13(&self) -> Image {
        self.i1.xor(&self.i3).expect("chosen images share a shape")
    }
}

/// Row-marker differential: row 0 is 0, all other rows 255.
pub fn row_marker(width: usize, height: usize) -> Result<Image, CipherError> {
    Image::from_fn(width, height, |_, j| if j == 0 { MARKER } else { FIELD })
}

/// Column-marker differential: column 0 is 0, all other columns 255.
pub fn column_marker(width: usize, height: usize) -> Result<Image, CipherError> {
    Image::from_fn(width, height, |i, _| if i == 0 { MARKER } else { FIELD })
}

pub fn build_chosen_images(i1: &Image) -> ChosenImageSet {
    let (m, n) = (i1.width(), i1.height());
    let i2 = Image::from_fn(m, n, |i, j| {
        i1.get(i, j) ^ if j == 0 { MARKER } else { FIELD }
    })
    .expect("same shape as i1");
    let i3 = Image::from_fn(m, n, |i, j| {
        i1.get(i, j) ^ if i == 0 { MARKER } else { FIELD }
    })
    .expect("same shape as i1");
    ChosenImageSet {
        i1: i1.clone(),
        i2,
        i3,
    }
}

/// Finds the single marker in `values`, checking that everything else is
/// the field value.
fn locate_marker(
    values: impl Iterator<Item = (usize, u8)>,
    stage: &'static str,
    line: &'static str,
    index: usize,
    coords: impl Fn(usize) -> (usize, usize),
) -> Result<usize, AttackError> {
    let mut found = None;
    let mut zeros = 0;
    for (pos, v) in values {
        match v {
            MARKER => {
                zeros += 1;
                found = Some(pos);
            }
            FIELD => {}
            value => {
                let (i, j) = coords(pos);
                return Err(AttackError::UnexpectedValue { stage, i, j, value });
            }
        }
    }
    match (zeros, found) {
        (1, Some(pos)) => Ok(pos),
        _ => Err(AttackError::Marker {
            stage,
            line,
            index,
            zeros,
        }),
    }
}

/// Recovers the column shifts from the ciphertexts of `i1` and `i2`.
pub fn recover_s3(c1: &Image, c2: &Image) -> Result<Vec<usize>, AttackError> {
    let d = c1.xor(c2)?;
    let (m, n) = (d.width(), d.height());
    if n == 1 {
        return Ok(vec![0; m]);
    }
    (0..m)
        .map(|i| {
            // the marker started on row 0, so its row is the shift
            locate_marker(
                (0..n).map(|j| (j, d.get(i, j))),
                "recover_s3",
                "column",
                i,
                |j| (i, j),
            )
        })
        .collect()
}

/// Recovers the row shifts from the ciphertexts of `i1` and `i3`, given
/// the column shifts.
pub fn recover_s2(c1: &Image, c3: &Image, s3: &[usize]) -> Result<Vec<usize>, AttackError> {
    let d = c1.xor(c3)?;
    let (m, n) = (d.width(), d.height());
    if s3.len() != m {
        return Err(
            CipherError::Keystreams(format!("{} column shifts for width {m}", s3.len())).into(),
        );
    }
    if m == 1 {
        return Ok(vec![0; n]);
    }
    (0..n)
        .map(|j| {
            // undo the column rotation, then the marker column is the shift
            locate_marker(
                (0..m).map(|i| (i, d.get(i, (j + s3[i]) % n))),
                "recover_s2",
                "row",
                j,
                |i| (i, (j + s3[i]) % n),
            )
        })
        .collect()
}

/// Recovers the XOR keystream from one known pair once both shift
/// sequences are known.
pub fn recover_s1(
    i1: &Image,
    c1: &Image,
    s2: &[usize],
    s3: &[usize],
) -> Result<Vec<u8>, AttackError> {
    let (m, n) = (i1.width(), i1.height());
    c1.check_shape(m, n)?;
    if s2.len() != n || s3.len() != m {
        return Err(CipherError::Keystreams(format!(
            "shift lengths ({}, {}) do not match {m}x{n}",
            s2.len(),
            s3.len()
        ))
        .into());
    }
    let mut s1 = vec![0u8; m * n];
    for j in 0..n {
        for i in 0..m {
            let ic = (i + s2[j]) % m;
            let jc = (j + s3[ic]) % n;
            s1[j * m + i] = i1.get(i, j) ^ c1.get(ic, jc);
        }
    }
    Ok(s1)
}

/// Keystreams obtained by the attack rather than from a key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredKeystreams {
    pub keystreams: Keystreams,
    pub oracle_queries: usize,
    pub chosen: ChosenImageSet,
    pub ciphertexts: [Image; 3],
}

impl RecoveredKeystreams {
    pub fn decrypt(&self, cipher_image: &Image) -> Result<Image, CipherError> {
        cipher::decrypt(cipher_image, &self.keystreams)
    }
}

/// Runs the full attack: three oracle queries, then S3, S2 and S1 in that
/// order.
pub fn attack_end_to_end<O: EncryptionOracle + ?Sized>(
    oracle: &mut O,
    i1: &Image,
) -> Result<RecoveredKeystreams, AttackError> {
    let chosen = build_chosen_images(i1);
    let mut queries = 0;
    let mut query = |img: &Image| {
        queries += 1;
        let c = oracle.encrypt(img)?;
        c.check_shape(img.width(), img.height())?;
        Ok::<_, AttackError>(c)
    };
    let c1 = query(&chosen.i1)?;
    let c2 = query(&chosen.i2)?;
    let c3 = query(&chosen.i3)?;

    let s3 = recover_s3(&c1, &c2)?;
    let s2 = recover_s2(&c1, &c3, &s3)?;
    let s1 = recover_s1(&chosen.i1, &c1, &s2, &s3)?;
    let keystreams = Keystreams::from_parts(i1.width(), i1.height(), s1, s2, s3)?;
    Ok(RecoveredKeystreams {
        keystreams,
        oracle_queries: queries,
        chosen,
        ciphertexts: [c1, c2, c3],
    })
}

/// An oracle backed by a key it never reveals. Counts queries.
pub struct KeyedOracle {
    key: crate::SecretKey,
    cache: Option<Keystreams>,
    queries: usize,
}

impl KeyedOracle {
    pub fn new(key: crate::SecretKey) -> Self {
        Self {
            key,
            cache: None,
            queries: 0,
        }
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

impl EncryptionOracle for KeyedOracle {
    fn encrypt(&mut self, plain: &Image) -> Result<Image, AttackError> {
        self.queries += 1;
        let (m, n) = (plain.width(), plain.height());
        let stale = self
            .cache
            .as_ref()
            .is_none_or(|ks| ks.width() != m || ks.height() != n);
        if stale {
            self.cache = Some(cipher::derive_keystreams(&self.key, m, n)?);
        }
        Ok(cipher::encrypt(plain, self.cache.as_ref().unwrap())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{derive_keystreams, SecretKey};

    #[test]
    fn chosen_images_from_zero() {
        let set = build_chosen_images(&Image::filled(2, 2, 0).unwrap());
        assert_eq!(set.i2.pixels(), &[0, 0, 255, 255]);
        assert_eq!(set.i3.pixels(), &[0, 255, 0, 255]);
    }

    #[test]
    fn chosen_images_from_white() {
        let set = build_chosen_images(&Image::filled(4, 4, 255).unwrap());
        for i in 0..4 {
            assert_eq!(set.i2.get(i, 0), 255);
            for j in 1..4 {
                assert_eq!(set.i2.get(i, j), 0);
            }
        }
        assert_eq!(set.d12(), row_marker(4, 4).unwrap());
        assert_eq!(set.d13(), column_marker(4, 4).unwrap());
    }

    #[test]
    fn marker_column_displacement() {
        let c1 = Image::filled(1, 8, 0).unwrap();
        let c2 = Image::from_fn(1, 8, |_, j| if j == 5 { 0 } else { 255 }).unwrap();
        assert_eq!(recover_s3(&c1, &c2).unwrap(), vec![5]);
    }

    #[test]
    fn marker_row_displacement() {
        let c1 = Image::filled(5, 1, 7).unwrap();
        let c3 = Image::from_fn(5, 1, |i, _| 7 ^ if i == 3 { 0 } else { 255 }).unwrap();
        assert_eq!(recover_s2(&c1, &c3, &[0; 5]).unwrap(), vec![3]);
    }

    #[test]
    fn ambiguous_markers_are_rejected() {
        let c1 = Image::filled(2, 3, 0).unwrap();
        let two = Image::from_fn(2, 3, |_, j| if j < 2 { 0 } else { 255 }).unwrap();
        assert!(matches!(
            recover_s3(&c1, &two),
            Err(AttackError::Marker { zeros: 2, .. })
        ));
        let none = Image::filled(2, 3, 255).unwrap();
        assert!(matches!(
            recover_s3(&c1, &none),
            Err(AttackError::Marker { zeros: 0, .. })
        ));
        let noisy = Image::from_fn(2, 3, |_, j| if j == 0 { 0 } else { 17 }).unwrap();
        assert!(matches!(
            recover_s3(&c1, &noisy),
            Err(AttackError::UnexpectedValue { value: 17, .. })
        ));
        assert!(matches!(
            recover_s2(&c1, &two, &[0, 0]),
            Err(AttackError::Marker { .. }) | Err(AttackError::UnexpectedValue { .. })
        ));
    }

    #[test]
    fn weak_key_shifts() {
        let mut oracle = KeyedOracle::new(SecretKey::new(1.0, 1.0).unwrap());
        let r = attack_end_to_end(&mut oracle, &Image::filled(6, 9, 0).unwrap()).unwrap();
        assert_eq!(r.keystreams.s3, vec![8; 6]);
        assert_eq!(r.keystreams.s2, vec![5; 9]);
        assert!(r.keystreams.s1.iter().all(|&b| b == 255));

        let mut oracle = KeyedOracle::new(SecretKey::new(1.0, -1.0).unwrap());
        let r = attack_end_to_end(&mut oracle, &Image::filled(6, 9, 3).unwrap()).unwrap();
        assert_eq!(r.keystreams.s2, vec![5; 9]);
        assert_eq!(r.keystreams.s3, vec![0; 6]);
        assert!(r.keystreams.s1.iter().all(|&b| b == 0));

        let mut oracle = KeyedOracle::new(SecretKey::new(0.0, 0.0).unwrap());
        let r = attack_end_to_end(&mut oracle, &Image::filled(4, 4, 0).unwrap()).unwrap();
        assert!(r.keystreams.s1.iter().all(|&b| b == 128));
        assert_eq!(oracle.queries(), 3);
    }

    #[test]
    fn degenerate_sizes() {
        let key = SecretKey::new(0.2718, -0.3141).unwrap();
        for (m, n) in [(1, 1), (1, 7), (5, 1)] {
            let mut oracle = KeyedOracle::new(key);
            let i1 = Image::from_fn(m, n, |i, j| (i * 31 + j * 7) as u8).unwrap();
            let r = attack_end_to_end(&mut oracle, &i1).unwrap();
            assert_eq!(r.keystreams, derive_keystreams(&key, m, n).unwrap());
            assert_eq!(r.oracle_queries, 3);
        }
    }

    #[test]
    fn closure_oracle() {
        let ks = derive_keystreams(&SecretKey::new(-0.61, 0.05).unwrap(), 5, 7).unwrap();
        let mut oracle = |p: &Image| Ok(cipher::encrypt(p, &ks)?);
        let i1 = Image::from_fn(5, 7, |i, j| (i ^ (j << 3)) as u8).unwrap();
        let r = attack_end_to_end(&mut oracle, &i1).unwrap();
        assert_eq!(r.keystreams, ks);
    }
}
