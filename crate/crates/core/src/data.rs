//! IDX ingestion, image preprocessing, amplitude encoding, and a synthetic
//! fallback dataset.
//!
//! The IDX container is parsed strictly: big-endian magic and dimension
//! words, payload length exactly matching the dimension product, no
//! trailing bytes. Images are 28x28 grayscale; preprocessing zero-pads them
//! to 32x32 (a 2-pixel border), flattens row-major to 1024 amplitudes and
//! normalizes to unit length, so the encoded states live on 10 qubits.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Magic word of an IDX image file (ubyte payload, 3 dimensions).
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
/// Magic word of an IDX label file (ubyte payload, 1 dimension).
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw images from an IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    /// `count * height * width` bytes, image-major, rows within an image.
    pub pixels: Vec<u8>,
}

/// Images joined with their labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl ImageSet {
    pub fn from_parts(images: IdxImages, labels: Vec<u8>) -> Result<Self> {
        if images.count != labels.len() {
            return Err(Error::CountMismatch {
                images: images.count,
                labels: labels.len(),
            });
        }
        Ok(Self {
            count: images.count,
            height: images.height,
            width: images.width,
            pixels: images.pixels,
            labels,
        })
    }

    /// Pixel rows of image `i`.
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.height * self.width;
        &self.pixels[i * size..(i + 1) * size]
    }

    pub fn to_idx_bytes(&self) -> (Vec<u8>, Vec<u8>) {
        let images = IdxImages {
            count: self.count,
            height: self.height,
            width: self.width,
            pixels: self.pixels.clone(),
        };
        (idx_images_bytes(&images), idx_labels_bytes(&self.labels))
    }
}

/// An amplitude-encoded example with its binary label (1 = even digit).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExample {
    pub state: StateVector,
    pub label: u8,
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Truncated {
            expected: end,
            found: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parse an IDX image stream.
pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let height = read_u32_be(bytes, 8)? as usize;
    let width = read_u32_be(bytes, 12)? as usize;
    let payload = count
        .checked_mul(height)
        .and_then(|v| v.checked_mul(width))
        .ok_or(Error::InvalidSize {
            what: "image payload",
            value: usize::MAX,
        })?;
    let expected = 16 + payload;
    match bytes.len() {
        len if len < expected => Err(Error::Truncated {
            expected,
            found: len,
        }),
        len if len > expected => Err(Error::TrailingBytes {
            extra: len - expected,
        }),
        _ => Ok(IdxImages {
            count,
            height,
            width,
            pixels: bytes[16..].to_vec(),
        }),
    }
}

/// Parse an IDX label stream.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let expected = 8 + count;
    match bytes.len() {
        len if len < expected => Err(Error::Truncated {
            expected,
            found: len,
        }),
        len if len > expected => Err(Error::TrailingBytes {
            extra: len - expected,
        }),
        _ => Ok(bytes[8..].to_vec()),
    }
}

/// Serialize images back to IDX bytes (inverse of [`parse_idx_images`]).
pub fn idx_images_bytes(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.count as u32).to_be_bytes());
    out.extend_from_slice(&(images.height as u32).to_be_bytes());
    out.extend_from_slice(&(images.width as u32).to_be_bytes());
    out.extend_from_slice(&images.pixels);
    out
}

/// Serialize labels back to IDX bytes (inverse of [`parse_idx_labels`]).
pub fn idx_labels_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Side length after zero-padding.
pub const PADDED_SIDE: usize = 32;
/// Input image side length.
pub const IMAGE_SIDE: usize = 28;

/// Encode one 28x28 image: embed into 32x32 with a symmetric 2-pixel zero
/// border, flatten row-major, reject all-zero images, L2-normalize. The
/// label is 1 for even digits, 0 for odd.
pub fn preprocess_example(image: &[u8], digit: u8) -> Result<EncodedExample> {
    if image.len() != IMAGE_SIDE * IMAGE_SIDE {
        return Err(Error::InvalidSize {
            what: "image pixel count",
            value: image.len(),
        });
    }
    if digit > 9 {
        return Err(Error::InvalidSize {
            what: "digit",
            value: digit as usize,
        });
    }
    let mut padded = vec![0.0f64; PADDED_SIDE * PADDED_SIDE];
    for r in 0..IMAGE_SIDE {
        for c in 0..IMAGE_SIDE {
            padded[(r + 2) * PADDED_SIDE + (c + 2)] = f64::from(image[r * IMAGE_SIDE + c]);
        }
    }
    let norm_sq: f64 = padded.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroImage);
    }
    let norm = norm_sq.sqrt();
    let amps: Vec<Complex64> = padded
        .iter()
        .map(|v| Complex64::new(v / norm, 0.0))
        .collect();
    Ok(EncodedExample {
        state: StateVector::from_amplitudes(amps)?,
        label: u8::from(digit % 2 == 0),
    })
}

/// Encode a seeded random subset of an image set (without replacement).
/// All-zero images are skipped.
pub fn encode_subset(set: &ImageSet, n: usize, seed: u64) -> Result<Vec<EncodedExample>> {
    if set.height != IMAGE_SIDE || set.width != IMAGE_SIDE {
        return Err(Error::InvalidSize {
            what: "image side",
            value: set.height,
        });
    }
    let mut order: Vec<usize> = (0..set.count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut out = Vec::with_capacity(n);
    for &idx in &order {
        if out.len() == n {
            break;
        }
        match preprocess_example(set.image(idx), set.labels[idx]) {
            Ok(example) => out.push(example),
            Err(Error::ZeroImage) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.len() < n {
        return Err(Error::InvalidSize {
            what: "usable image count",
            value: out.len(),
        });
    }
    Ok(out)
}

/// Overlap between the two synthetic class centers. High by design: real
/// image classes (such as even and odd digits) share most of their
/// amplitude mass, and the classifier has to carve out the small
/// orthogonal component.
pub const CENTER_OVERLAP: f64 = 0.98;

/// Isotropic within-class noise (total norm scale).
pub const ISO_NOISE: f64 = 0.3;

/// Extra noise along the class-separating direction. Roughly a third of
/// the center separation, so the classes genuinely overlap and the task
/// keeps a noise floor, like digit parity does.
pub const SEPARATING_NOISE: f64 = 0.08;

/// Synthetic fallback dataset: two Gaussian blobs in amplitude space.
///
/// Both class centers are built from random real product states (so local
/// observables keep size-independent statistics, like natural image data).
/// The odd-class center is the even-class center tilted by a fixed angle
/// towards an orthogonalized second product state, giving the two classes
/// an overlap of [`CENTER_OVERLAP`]; within-class noise has an extra
/// component along that separating direction. Examples alternate labels,
/// keeping the class balance within one.
pub fn synth_dataset(n_examples: usize, n_qubits: usize, seed: u64) -> Result<Vec<EncodedExample>> {
    if n_examples < 2 {
        return Err(Error::InvalidSize {
            what: "n_examples",
            value: n_examples,
        });
    }
    if n_qubits == 0 {
        return Err(Error::InvalidSize {
            what: "n_qubits",
            value: 0,
        });
    }
    let dim = 1usize << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let product_state = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut amps = vec![1.0f64];
        for _ in 0..n_qubits {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let mut next = Vec::with_capacity(amps.len() * 2);
            // qubit factor (cos, sin); the new qubit is the high bit
            for &half in &[c, s] {
                next.extend(amps.iter().map(|a| a * half));
            }
            amps = next;
        }
        amps
    };

    let center_even = product_state(&mut rng);
    // structured direction orthogonal to the even center
    let mut perp: Option<Vec<f64>> = None;
    for _ in 0..100 {
        let candidate = product_state(&mut rng);
        let overlap: f64 = center_even
            .iter()
            .zip(&candidate)
            .map(|(a, b)| a * b)
            .sum();
        let residual: Vec<f64> = candidate
            .iter()
            .zip(&center_even)
            .map(|(c, m)| c - overlap * m)
            .collect();
        let norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.1 {
            perp = Some(residual.iter().map(|v| v / norm).collect());
            break;
        }
    }
    let perp = perp.ok_or(Error::InvalidSize {
        what: "orthogonal direction draws",
        value: 100,
    })?;
    let tilt = (1.0 - CENTER_OVERLAP * CENTER_OVERLAP).sqrt();
    let center_odd: Vec<f64> = center_even
        .iter()
        .zip(&perp)
        .map(|(m, p)| CENTER_OVERLAP * m + tilt * p)
        .collect();

    let sigma = ISO_NOISE / (dim as f64).sqrt();
    let mut out = Vec::with_capacity(n_examples);
    for i in 0..n_examples {
        let label = u8::from(i % 2 == 0);
        let center = if label == 1 { &center_even } else { &center_odd };
        let along: f64 = SEPARATING_NOISE * rng.sample::<f64, _>(StandardNormal);
        let raw: Vec<f64> = center
            .iter()
            .zip(&perp)
            .map(|(&c, &p)| c + along * p + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroImage);
        }
        let amps: Vec<Complex64> = raw.iter().map(|v| Complex64::new(v / norm, 0.0)).collect();
        out.push(EncodedExample {
            state: StateVector::from_amplitudes(amps)?,
            label,
        });
    }
    Ok(out)
}
