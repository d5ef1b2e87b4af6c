//! SIG1 binary waveform dump.
//!
//! Layout (little-endian, 24-byte header):
//!   bytes  0..4   magic "SIG1"
//!   bytes  4..8   u32 format version (1)
//!   bytes  8..16  u64 sample count
//!   bytes 16..24  f64 sample rate in Hz
//!   bytes 24..    f64 samples

use anyhow::{bail, Context};
use sicsim_core::SampledSignal;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SIG1";
const VERSION: u32 = 1;

pub fn write_signal(path: &Path, sig: &SampledSignal) -> anyhow::Result<()> {
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    file.write_all(MAGIC)?;
    file.write_all(&VERSION.to_le_bytes())?;
    file.write_all(&(sig.len() as u64).to_le_bytes())?;
    file.write_all(&sig.sample_rate().to_le_bytes())?;
    for s in sig.samples() {
        file.write_all(&s.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_signal(path: &Path) -> anyhow::Result<SampledSignal> {
    let mut file = std::io::BufReader::new(
        std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?,
    );
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        bail!("{}: not a SIG1 file", path.display());
    }
    let mut u32buf = [0u8; 4];
    file.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        bail!("{}: unsupported SIG1 version {version}", path.display());
    }
    let mut u64buf = [0u8; 8];
    file.read_exact(&mut u64buf)?;
    let count = u64::from_le_bytes(u64buf) as usize;
    let mut f64buf = [0u8; 8];
    file.read_exact(&mut f64buf)?;
    let rate = f64::from_le_bytes(f64buf);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        file.read_exact(&mut f64buf)?;
        samples.push(f64::from_le_bytes(f64buf));
    }
    SampledSignal::new(samples, rate).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
