use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chaoscrypt::analysis::{
    check_equivalent_keys, default_horizon, detect_weak_key, measure_sensitivity, BitPosition,
};
use chaoscrypt::attack::{attack_end_to_end, build_chosen_images, EncryptionOracle, KeyedOracle};
use chaoscrypt::chaos::divergence_demo;
use chaoscrypt::cipher::{read_keystream_dump, write_keystream_dump};
use chaoscrypt::experiment::{reference_sequences, sample_keys};
use chaoscrypt::randomness::fips::fips_battery;
use chaoscrypt::randomness::nist::nist_battery;
use chaoscrypt::randomness::{keystream_bits, BitSequence};
use chaoscrypt::{decrypt, derive_keystreams, encrypt, AttackError, Image, SecretKey};
use clap::{Args, Parser, Subcommand};

use crate::pgm::{self, Channels};
use crate::synthetic;
use crate::{CliError, Stage};

#[derive(Debug, Parser)]
#[command(
    name = "chaoscrypt",
    version,
    about = "Chaos-based image cipher workbench"
)]
pub struct Cli {
    /// Write the text report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct KeyArg {
    /// Secret key as two decimal strings, at most 14 fractional digits each.
    #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true, required = true)]
    pub key: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ImageIo {
    #[arg(short, long, value_name = "PGM")]
    pub input: PathBuf,
    #[arg(short, long, value_name = "PGM")]
    pub output: PathBuf,
    /// Read and write binary PPM (P6); the three channels form one 3M-wide grid.
    #[arg(long)]
    pub rgb: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encrypt a PGM image.
    Encrypt {
        #[command(flatten)]
        key: KeyArg,
        #[command(flatten)]
        io: ImageIo,
    },
    /// Decrypt a PGM image.
    Decrypt {
        #[command(flatten)]
        key: KeyArg,
        #[command(flatten)]
        io: ImageIo,
    },
    /// Write the keystreams for a key and size to a binary dump.
    Keystream {
        #[command(flatten)]
        key: KeyArg,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(short, long, value_name = "PATH")]
        output: PathBuf,
    },
    /// Write the three chosen plain-images built from I1.
    Chosen {
        /// I1; a synthetic picture of --width x --height when omitted.
        #[arg(short, long, value_name = "PGM")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Recover the keystreams with three chosen plain-images and decrypt a
    /// fourth cipher-image.
    ///
    /// The encryption oracle is either an in-process service holding a
    /// hidden key, or the three cipher-images of I1, I2, I3 given with
    /// --ciphertexts. The recovery itself never sees a key.
    Attack {
        /// I1; a synthetic picture of --width x --height when omitted.
        #[arg(short, long, value_name = "PGM")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        /// Key held by the oracle. Drawn from --seed when omitted.
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true, conflicts_with = "ciphertexts")]
        hidden_key: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Cipher-images of I1, I2, I3 produced elsewhere.
        #[arg(long, num_args = 3, value_names = ["C1", "C2", "C3"])]
        ciphertexts: Option<Vec<PathBuf>>,
        /// Cipher-image to decrypt with the recovered keystreams.
        #[arg(long, value_name = "PGM")]
        target: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Decrypt with a keystream dump instead of a key.
    Apply {
        #[arg(long, value_name = "PATH")]
        keystreams: PathBuf,
        #[arg(short, long, value_name = "PGM")]
        input: PathBuf,
        #[arg(short, long, value_name = "PGM")]
        output: PathBuf,
    },
    /// Classify a key, or a grid of keys, as weak or not.
    Weakscan {
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true, required_unless_present = "grid")]
        key: Option<Vec<String>>,
        /// Sweep a GRID x GRID lattice over [-1, 1]^2 instead.
        #[arg(long, conflicts_with = "key")]
        grid: Option<usize>,
        /// With --grid, list only the weak keys.
        #[arg(long)]
        weak_only: bool,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        height: usize,
        /// Trajectory steps to follow; one full derivation by default.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Compare the keystreams of two keys.
    Equiv {
        #[command(flatten)]
        key: KeyArg,
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true, required = true)]
        other: Vec<String>,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Flip one plaintext bit and report which ciphertext bits change.
    Sensitivity {
        #[command(flatten)]
        key: KeyArg,
        #[arg(short, long, value_name = "PGM")]
        input: PathBuf,
        /// Raster index of the pixel.
        #[arg(long)]
        pixel: usize,
        /// Bit within the byte, 0 = least significant.
        #[arg(long)]
        bit: u8,
    },
    /// FIPS 140-2 monobit, runs, long-run and poker tests.
    Fips {
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true, required_unless_present = "bits")]
        key: Option<Vec<String>>,
        /// Read bits from a file of ASCII 0/1 (or raw bytes with --binary).
        #[arg(long, value_name = "PATH", conflicts_with = "key")]
        bits: Option<PathBuf>,
        #[arg(long)]
        binary: bool,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Nine SP 800-22 tests over many sequences.
    Nist {
        /// Number of random keys (or reference sequences).
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 20240101)]
        seed: u64,
        /// Test a single key instead of random ones.
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_negative_numbers = true)]
        key: Option<Vec<String>>,
        /// Read bits from a file and cut it into --sequence-length pieces.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["key", "reference"])]
        bits: Option<PathBuf>,
        #[arg(long)]
        binary: bool,
        #[arg(long, default_value_t = 524_288)]
        sequence_length: usize,
        /// Use ChaCha20 output instead of the cipher, to calibrate the tests.
        #[arg(long, conflicts_with = "key")]
        reference: bool,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Compare the compound stream with the iterated piecewise map.
    Diverge {
        #[command(flatten)]
        key: KeyArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// How many leading samples to print.
        #[arg(long, default_value_t = 10)]
        show: usize,
    },
}

fn parse_key(parts: &[String]) -> Result<SecretKey, CliError> {
    SecretKey::parse(&parts[0], &parts[1]).stage("key")
}

fn read_image(path: &Path, rgb: bool) -> Result<Image, CliError> {
    let ch = if rgb { Channels::Rgb } else { Channels::Gray };
    pgm::read(path, ch).stage("read input")
}

fn write_image(img: &Image, path: &Path, rgb: bool) -> Result<(), CliError> {
    let ch = if rgb { Channels::Rgb } else { Channels::Gray };
    pgm::write(img, path, ch).stage("write output")
}

fn read_bits(path: &Path, binary: bool) -> Result<BitSequence, CliError> {
    let data = fs::read(path).map_err(|e| CliError {
        stage: "read bits",
        message: format!("{}: {e}", path.display()),
    })?;
    if binary {
        Ok(BitSequence::from_bytes_msb_first(&data))
    } else {
        let text = String::from_utf8(data).stage("read bits")?;
        BitSequence::from_ascii(&text).stage("read bits")
    }
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError {
        stage: "output directory",
        message: format!("{}: {e}", dir.display()),
    })
}

fn first_image(input: &Option<PathBuf>, width: usize, height: usize) -> Result<Image, CliError> {
    match input {
        Some(p) => read_image(p, false),
        None if width == 0 || height == 0 => Err(CliError {
            stage: "arguments",
            message: "--width and --height must be positive".into(),
        }),
        None => Ok(synthetic::peppers_like(width, height)),
    }
}

/// Hands out previously recorded cipher-images in query order.
struct ReplayOracle {
    images: std::vec::IntoIter<Image>,
}

impl EncryptionOracle for ReplayOracle {
    fn encrypt(&mut self, _plain: &Image) -> Result<Image, AttackError> {
        self.images
            .next()
            .ok_or_else(|| AttackError::Oracle("no recorded cipher-image left".into()))
    }
}

/// Runs one command and returns its text report.
pub fn execute(command: &Command) -> Result<String, CliError> {
    let mut out = String::new();
    match command {
        Command::Encrypt { key, io } | Command::Decrypt { key, io } => {
            let key = parse_key(&key.key)?;
            let img = read_image(&io.input, io.rgb)?;
            let ks = derive_keystreams(&key, img.width(), img.height()).stage("keystreams")?;
            let res = if matches!(command, Command::Encrypt { .. }) {
                encrypt(&img, &ks).stage("encrypt")?
            } else {
                decrypt(&img, &ks).stage("decrypt")?
            };
            write_image(&res, &io.output, io.rgb)?;
        }
        Command::Keystream {
            key,
            width,
            height,
            output,
        } => {
            let key = parse_key(&key.key)?;
            let ks = derive_keystreams(&key, *width, *height).stage("keystreams")?;
            let mut buf = Vec::new();
            write_keystream_dump(&ks, &mut buf).stage("write dump")?;
            fs::write(output, buf).stage("write dump")?;
        }
        Command::Chosen {
            input,
            width,
            height,
            out_dir,
        } => {
            let set = build_chosen_images(&first_image(input, *width, *height)?);
            make_dir(out_dir)?;
            for (name, img) in [("i1", &set.i1), ("i2", &set.i2), ("i3", &set.i3)] {
                write_image(img, &out_dir.join(format!("{name}.pgm")), false)?;
            }
        }
        Command::Attack {
            input,
            width,
            height,
            hidden_key,
            seed,
            ciphertexts,
            target,
            out_dir,
        } => {
            let i1 = first_image(input, *width, *height)?;
            let (m, n) = (i1.width(), i1.height());
            make_dir(out_dir)?;

            // The oracle owns whatever key there is; the attacker below only
            // gets `&mut dyn EncryptionOracle`.
            let mut service: Option<KeyedOracle> = None;
            let mut replay: Option<ReplayOracle> = None;
            let oracle: &mut dyn EncryptionOracle = match ciphertexts {
                Some(paths) => {
                    let images = paths
                        .iter()
                        .map(|p| read_image(p, false))
                        .collect::<Result<Vec<_>, _>>()?;
                    replay.insert(ReplayOracle {
                        images: images.into_iter(),
                    })
                }
                None => {
                    let key = match hidden_key {
                        Some(k) => parse_key(k)?,
                        None => sample_keys(*seed, 1, m, n)[0],
                    };
                    service.insert(KeyedOracle::new(key))
                }
            };

            let rec = attack_end_to_end(oracle, &i1).stage("attack")?;
            let names = ["i1", "i2", "i3"];
            let chosen = [&rec.chosen.i1, &rec.chosen.i2, &rec.chosen.i3];
            for (k, name) in names.iter().enumerate() {
                write_image(chosen[k], &out_dir.join(format!("{name}.pgm")), false)?;
                write_image(
                    &rec.ciphertexts[k],
                    &out_dir.join(format!("c{}.pgm", k + 1)),
                    false,
                )?;
            }
            let mut dump = Vec::new();
            write_keystream_dump(&rec.keystreams, &mut dump).stage("write dump")?;
            fs::write(out_dir.join("recovered.ccks"), dump).stage("write dump")?;
            writeln!(out, "size: {m}x{n}").unwrap();
            writeln!(out, "oracle_queries: {}", rec.oracle_queries).unwrap();
            writeln!(
                out,
                "recovered: {}",
                out_dir.join("recovered.ccks").display()
            )
            .unwrap();

            match (target, service.as_mut()) {
                (Some(path), _) => {
                    let c4 = read_image(path, false)?;
                    let p4 = rec.decrypt(&c4).stage("decrypt target")?;
                    write_image(&p4, &out_dir.join("decrypted.pgm"), false)?;
                    writeln!(
                        out,
                        "decrypted: {}",
                        out_dir.join("decrypted.pgm").display()
                    )
                    .unwrap();
                }
                (None, Some(service)) => {
                    // a victim message encrypted by the same service
                    let p4 = synthetic::rings(m, n);
                    let c4 = service.encrypt(&p4).stage("encrypt fourth image")?;
                    let d4 = rec.decrypt(&c4).stage("decrypt fourth image")?;
                    write_image(&p4, &out_dir.join("p4.pgm"), false)?;
                    write_image(&c4, &out_dir.join("c4.pgm"), false)?;
                    write_image(&d4, &out_dir.join("decrypted.pgm"), false)?;
                    writeln!(
                        out,
                        "decrypted: {}",
                        out_dir.join("decrypted.pgm").display()
                    )
                    .unwrap();
                    writeln!(out, "fourth_image_recovered: {}", d4 == p4).unwrap();
                }
                (None, None) => {}
            }
        }
        Command::Apply {
            keystreams,
            input,
            output,
        } => {
            let data = fs::read(keystreams).stage("read dump")?;
            let ks = read_keystream_dump(data.as_slice()).stage("read dump")?;
            let c = read_image(input, false)?;
            write_image(&decrypt(&c, &ks).stage("decrypt")?, output, false)?;
        }
        Command::Weakscan {
            key,
            grid,
            weak_only,
            width,
            height,
            horizon,
        } => {
            let horizon = horizon.unwrap_or(default_horizon(*width, *height));
            let keys = match (key, grid) {
                (Some(k), _) => vec![parse_key(k)?],
                (None, Some(g)) if *g >= 2 => {
                    let at = |k: usize| -1.0 + 2.0 * k as f64 / (*g - 1) as f64;
                    (0..*g)
                        .flat_map(|a| (0..*g).map(move |b| (at(a), at(b))))
                        .map(|(x, y)| SecretKey::new(x, y).stage("key"))
                        .collect::<Result<Vec<_>, _>>()?
                }
                _ => {
                    return Err(CliError {
                        stage: "arguments",
                        message: "--grid needs at least 2 points per axis".into(),
                    })
                }
            };
            let mut weak = 0;
            for k in &keys {
                let r = detect_weak_key(k, *width, *height, horizon).stage("weakscan")?;
                weak += r.is_weak() as usize;
                if r.is_weak() || !*weak_only || grid.is_none() {
                    writeln!(out, "{r}").unwrap();
                }
            }
            if grid.is_some() {
                writeln!(out, "scanned: {} weak: {weak}", keys.len()).unwrap();
            }
        }
        Command::Equiv {
            key,
            other,
            width,
            height,
        } => {
            let a = parse_key(&key.key)?;
            let b = parse_key(other)?;
            let eq = check_equivalent_keys(&a, &b, *width, *height).stage("equiv")?;
            write!(out, "{eq}").unwrap();
        }
        Command::Sensitivity {
            key,
            input,
            pixel,
            bit,
        } => {
            let key = parse_key(&key.key)?;
            let img = read_image(input, false)?;
            let pos = BitPosition {
                pixel: *pixel,
                bit: *bit,
            };
            let r = measure_sensitivity(&key, &img, pos).stage("sensitivity")?;
            write!(out, "{r}").unwrap();
        }
        Command::Fips {
            key,
            bits,
            binary,
            width,
            height,
        } => {
            let seq = match (key, bits) {
                (_, Some(path)) => read_bits(path, *binary)?,
                (Some(k), None) => {
                    keystream_bits(&parse_key(k)?, *width, *height).stage("keystreams")?
                }
                (None, None) => unreachable!("clap requires --key or --bits"),
            };
            let r = fips_battery(&seq).stage("fips")?;
            write!(out, "{r}").unwrap();
            writeln!(out, "overall={}", if r.pass() { "PASS" } else { "FAIL" }).unwrap();
        }
        Command::Nist {
            count,
            seed,
            key,
            bits,
            binary,
            sequence_length,
            reference,
            width,
            height,
        } => {
            let seqs = if let Some(path) = bits {
                let all = read_bits(path, *binary)?;
                let len = *sequence_length;
                if len == 0 || all.len() < len {
                    return Err(CliError {
                        stage: "read bits",
                        message: format!("file holds {} bits, need {len} per sequence", all.len()),
                    });
                }
                all.as_slice()
                    .chunks_exact(len)
                    .map(|c| BitSequence::from_bits(c.iter().map(|&b| b == 1)))
                    .collect()
            } else if *reference {
                reference_sequences(*seed, *count, *sequence_length)
            } else {
                let keys = match key {
                    Some(k) => vec![parse_key(k)?],
                    None => sample_keys(*seed, *count, *width, *height),
                };
                keys.iter()
                    .map(|k| keystream_bits(k, *width, *height))
                    .collect::<Result<Vec<_>, _>>()
                    .stage("keystreams")?
            };
            write!(out, "{}", nist_battery(&seqs)).unwrap();
        }
        Command::Diverge { key, samples, show } => {
            let key = parse_key(&key.key)?;
            let d = divergence_demo(&key, *samples);
            writeln!(out, "key: {key}").unwrap();
            writeln!(out, "samples: {samples}").unwrap();
            match d.first_difference {
                Some(k) => writeln!(out, "first_diff_index: {k}").unwrap(),
                None => writeln!(out, "first_diff_index: none").unwrap(),
            }
            writeln!(out, "index compound piecewise").unwrap();
            for k in 0..(*show).min(*samples) {
                writeln!(out, "{k} {:e} {:e}", d.compound[k], d.piecewise[k]).unwrap();
            }
        }
    }
    Ok(out)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = execute(&cli.command)?;
    match &cli.report {
        Some(path) => fs::write(path, text).map_err(|e| CliError {
            stage: "write report",
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
