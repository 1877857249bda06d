//! Field dumps: an ASCII header terminated by `end\n`, followed by the raw
//! little-endian `f64` payload in the order u_1..u_m, w_1..w_m, rho_1..rho_m,
//! each field row-major with x fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::model::NetworkState;

const MAGIC: &str = "memfhn-snapshot v1";

pub fn encode_snapshot(state: &NetworkState<f64>) -> Vec<u8> {
    let g = state.grid();
    let m = state.neurons();
    let count = 3 * m * g.len();
    // `{:?}` prints the shortest representation that parses back to the same bits.
    let header = format!(
        "{MAGIC}\nm={m}\nnx={}\nny={}\ndx={:?}\nt={:?}\norder=u1..u{m},w1..w{m},rho1..rho{m}\nlayout=row-major-x-fastest,f64-le\nvalues={count}\nend\n",
        g.nx(),
        g.ny(),
        g.dx(),
        state.t,
    );
    let mut out = header.into_bytes();
    out.reserve(count * 8);
    for stack in [state.u_stack(), state.w_stack(), state.rho_stack()] {
        for v in stack {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<NetworkState<f64>> {
    let bad = |msg: &str| Error::Snapshot(msg.to_string());
    let marker = b"\nend\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("header terminator not found"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let payload = &bytes[end + marker.len()..];

    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("unrecognised magic line"));
    }
    let mut fields = std::collections::HashMap::new();
    for line in lines {
        let (k, v) = line.split_once('=').ok_or_else(|| bad("header line without '='"))?;
        fields.insert(k, v);
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::Snapshot(format!("missing `{k}`")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::Snapshot(format!("`{k}` is not an integer")))
    };
    let real = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| Error::Snapshot(format!("`{k}` is not a number")))
    };
    let m = int("m")?;
    let nx = int("nx")?;
    let ny = int("ny")?;
    let dx = real("dx")?;
    let t = real("t")?;
    let count = int("values")?;
    let grid = Grid2D::new(nx, ny, dx).map_err(|e| Error::Snapshot(e.to_string()))?;
    let n = grid.len() * m;
    if count != 3 * n {
        return Err(Error::Snapshot(format!(
            "header declares {count} values, shape implies {}",
            3 * n
        )));
    }
    if payload.len() != count * 8 {
        return Err(Error::Snapshot(format!(
            "payload holds {} bytes, header implies {}",
            payload.len(),
            count * 8
        )));
    }
    let mut values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut take = || values.by_ref().take(n).collect::<Vec<_>>();
    let u = take();
    let w = take();
    let rho = take();
    NetworkState::from_stacks(grid, m, u, w, rho, t)
}

pub fn write_snapshot(state: &NetworkState<f64>, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(state))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<NetworkState<f64>> {
    decode_snapshot(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_random;

    #[test]
    fn round_trip_bit_exact() {
        let g = Grid2D::new(32, 32, 1.0).unwrap();
        let mut s = init_random(g, 4, 0.05, 99).unwrap();
        s.t = 2.5000000000000004;
        s.u_mut(2)[17] = -0.0;
        s.w_mut(0)[3] = f64::MIN_POSITIVE / 3.0;
        let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
        assert_eq!(back.neurons(), 4);
        assert_eq!((back.grid().nx(), back.grid().ny(), back.grid().dx()), (32, 32, 1.0));
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        for (a, b) in s
            .u_stack()
            .iter()
            .chain(s.w_stack())
            .chain(s.rho_stack())
            .zip(back.u_stack().iter().chain(back.w_stack()).chain(back.rho_stack()))
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_payload_rejected() {
        let g = Grid2D::new(4, 4, 0.5).unwrap();
        let s = init_random(g, 2, 1.0, 1).unwrap();
        let mut bytes = encode_snapshot(&s);
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(decode_snapshot(&bytes), Err(Error::Snapshot(_))));
    }

    #[test]
    fn header_shape_mismatch_rejected() {
        let g = Grid2D::new(4, 4, 0.5).unwrap();
        let s = init_random(g, 2, 1.0, 1).unwrap();
        let bytes = encode_snapshot(&s);
        let text = String::from_utf8_lossy(&bytes[..40]).to_string();
        assert!(text.starts_with(MAGIC));
        let patched: Vec<u8> = {
            let pos = bytes.windows(4).position(|w| w == b"m=2\n").unwrap();
            let mut b = bytes.clone();
            b[pos + 2] = b'3';
            b
        };
        assert!(decode_snapshot(&patched).is_err());
        assert!(decode_snapshot(b"garbage").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.snap");
        let s = init_random(Grid2D::new(5, 6, 1.0).unwrap(), 3, 1.0, 4).unwrap();
        write_snapshot(&s, &p).unwrap();
        assert_eq!(read_snapshot(&p).unwrap(), s);
    }
}
