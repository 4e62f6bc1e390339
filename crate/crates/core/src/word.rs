//! Unsigned table words used for stored costs.
//!
//! A pattern database is generic over the integer width of its entries.
//! Costs are always exact integers in scaled units; the width only bounds
//! the largest value a table can hold. The maximum value of each width is
//! reserved as the "unreachable" sentinel.

use num_traits::{Bounded, NumCast, PrimInt, Unsigned};
use std::fmt::Debug;

pub trait PdbWord: PrimInt + Unsigned + Bounded + NumCast + Debug + Send + Sync + 'static {
    /// Bytes per entry in the on-disk payload.
    const BYTES: usize;

    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;

    #[inline]
    fn infinity() -> Self {
        Self::max_value()
    }

    #[inline]
    fn is_infinite(self) -> bool {
        self == Self::max_value()
    }

    /// Narrow a finite cost into this width. `None` if it would collide with
    /// the sentinel or overflow.
    #[inline]
    fn from_cost(v: u64) -> Option<Self> {
        let w: Self = NumCast::from(v)?;
        (!w.is_infinite()).then_some(w)
    }

    /// Widen to a `u64` cost, mapping the sentinel to `u64::MAX`.
    #[inline]
    fn to_cost(self) -> u64 {
        if self.is_infinite() {
            u64::MAX
        } else {
            self.to_u64().unwrap_or(u64::MAX)
        }
    }
}

macro_rules! impl_word {
    ($t:ty) => {
        impl PdbWord for $t {
            const BYTES: usize = std::mem::size_of::<$t>();

            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }

            fn read_le(bytes: &[u8]) -> Self {
                let mut buf = [0u8; std::mem::size_of::<$t>()];
                buf.copy_from_slice(&bytes[..Self::BYTES]);
                <$t>::from_le_bytes(buf)
            }
        }
    };
}

impl_word!(u16);
impl_word!(u32);
impl_word!(u64);
