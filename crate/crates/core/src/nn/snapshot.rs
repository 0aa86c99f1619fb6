//! Binary network snapshots.
//!
//! Layout (little endian): magic `AYSNET`, format version `u16`, head kind
//! `u8`, layer count `u32`, then per layer `input_width u32`,
//! `output_width u32`, activation `u8`; after all specs, per layer the
//! row-major weight matrix followed by the bias vector as raw `f64` bits.

use super::network::{Activation, Dense, HeadKind, LayerSpec, MlpNetwork};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8] = b"AYSNET";
pub const FORMAT_VERSION: u16 = 1;

pub fn save(net: &MlpNetwork) -> Vec<u8> {
    let mut w = Writer::new();
    write(net, &mut w);
    w.into_inner()
}

pub fn load(bytes: &[u8]) -> Result<MlpNetwork> {
    let mut r = Reader::new(bytes);
    let net = read(&mut r)?;
    if !r.is_empty() {
        return Err(Error::Format("trailing bytes after network snapshot".into()));
    }
    Ok(net)
}

pub(crate) fn write(net: &MlpNetwork, w: &mut Writer) {
    w.bytes(MAGIC);
    w.u16(FORMAT_VERSION);
    w.u8(net.head().code());
    w.u32(net.layers().len() as u32);
    for l in net.layers() {
        w.u32(l.spec.input_width as u32);
        w.u32(l.spec.output_width as u32);
        w.u8(match l.spec.activation {
            Activation::Relu => 0,
            Activation::Identity => 1,
        });
    }
    for l in net.layers() {
        for &v in l.weights.iter().chain(&l.bias) {
            w.f64(v);
        }
    }
}

pub(crate) fn read(r: &mut Reader<'_>) -> Result<MlpNetwork> {
    r.expect(MAGIC)?;
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported network snapshot version {version}"
        )));
    }
    let head = HeadKind::from_code(r.u8()?)?;
    let n = r.u32()? as usize;
    let mut specs = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let input_width = r.u32()? as usize;
        let output_width = r.u32()? as usize;
        let activation = match r.u8()? {
            0 => Activation::Relu,
            1 => Activation::Identity,
            other => return Err(Error::Format(format!("unknown activation {other}"))),
        };
        specs.push(LayerSpec {
            input_width,
            output_width,
            activation,
        });
    }
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        let nw = spec.input_width * spec.output_width;
        let weights = (0..nw).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let bias = (0..spec.output_width)
            .map(|_| r.f64())
            .collect::<Result<Vec<_>>>()?;
        layers.push(Dense::new(spec, weights, bias)?);
    }
    MlpNetwork::from_layers(head, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for head in [
            HeadKind::ScalarValue,
            HeadKind::ActionValues,
            HeadKind::ActionPreferences,
            HeadKind::Dueling,
        ] {
            let net = MlpNetwork::new(6, &[7, 5], head, 4, &mut rng).unwrap();
            let back = load(&save(&net)).unwrap();
            assert_eq!(back.head(), head);
            for (a, b) in net.layers().iter().zip(back.layers()) {
                assert_eq!(a.spec, b.spec);
                assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
                assert!(a.bias.iter().zip(&b.bias).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = MlpNetwork::new(3, &[2], HeadKind::ScalarValue, 4, &mut rng).unwrap();
        let mut bytes = save(&net);
        bytes[0] = b'X';
        assert!(matches!(load(&bytes), Err(Error::Format(_))));
        assert!(load(&save(&net)[..10]).is_err());
    }
}
