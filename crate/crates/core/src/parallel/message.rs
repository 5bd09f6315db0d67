use crate::error::{Error, Result};
use crate::model::State;

/// One boundary state in transit.
///
/// Wire layout, all little-endian: `u32` level, `u32` time index, then
/// `f64` values `a_0 .. a_N, i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub level: u32,
    pub index: u32,
    pub state: State,
}

const HEADER: usize = 8;

impl Message {
    pub fn encoded_len(nodes: usize) -> usize {
        HEADER + 8 * (nodes + 1)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.state.nodes()));
        self.write_to(&mut out);
        out
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.level.to_le_bytes());
        out.extend_from_slice(&self.index.to_le_bytes());
        for v in self.state.a.iter().chain(std::iter::once(&self.state.i)) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    /// Decodes one payload. With `nodes` given, the potential vector must
    /// have exactly that length.
    pub fn decode(bytes: &[u8], nodes: Option<usize>) -> Result<Message> {
        if bytes.len() < HEADER {
            return Err(Error::Message(format!(
                "{} bytes, shorter than the header",
                bytes.len()
            )));
        }
        let body = &bytes[HEADER..];
        if !body.len().is_multiple_of(8) {
            return Err(Error::Message(format!(
                "body of {} bytes is not a whole number of f64",
                body.len()
            )));
        }
        let count = body.len() / 8;
        if count < 2 {
            return Err(Error::Message(format!(
                "{count} values, need a potential and a current"
            )));
        }
        if let Some(n) = nodes {
            if count != n + 1 {
                return Err(Error::Message(format!("{count} values, expected {}", n + 1)));
            }
        }
        let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
        let mut values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let i = values.pop().unwrap();
        Ok(Message {
            level: word(0),
            index: word(4),
            state: State { a: values, i },
        })
    }

    /// Splits a concatenation of fixed-size payloads.
    pub fn decode_all(bytes: &[u8], nodes: usize) -> Result<Vec<Message>> {
        let len = Self::encoded_len(nodes);
        if !bytes.len().is_multiple_of(len) {
            return Err(Error::Message(format!(
                "{} bytes is not a multiple of the record size {len}",
                bytes.len()
            )));
        }
        bytes.chunks_exact(len).map(|c| Self::decode(c, Some(nodes))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_little_endian() {
        let m = Message {
            level: 2,
            index: 7,
            state: State {
                a: vec![1.0, -0.5],
                i: 3.0,
            },
        };
        let b = m.encode();
        assert_eq!(b.len(), Message::encoded_len(2));
        assert_eq!(&b[..8], &[2, 0, 0, 0, 7, 0, 0, 0]);
        assert_eq!(&b[8..16], &1.0f64.to_le_bytes());
        assert_eq!(&b[24..32], &3.0f64.to_le_bytes());
        assert_eq!(Message::decode(&b, Some(2)).unwrap(), m);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Message::decode(&[0; 7], None).is_err());
        assert!(Message::decode(&[0; 8 + 12], None).is_err());
        assert!(Message::decode(&[0; 8 + 8], None).is_err());
        assert!(Message::decode(&[0; 8 + 24], Some(3)).is_err());
        assert!(Message::decode_all(&[0; 33], 2).is_err());
    }
}
