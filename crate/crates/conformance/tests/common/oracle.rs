//! Reference validators written directly from the wire formats, without
//! any use of the derived parsers.

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

/// Ethernet II, IEEE 802.3 and 802.1Q tagged frames, without FCS.
pub fn ethernet(b: &[u8]) -> bool {
    if b.len() < 14 {
        return false;
    }
    let outer = be16(b, 12);
    if outer < 46 {
        return false;
    }
    let (type_length, header) = if outer == 0x8100 {
        if b.len() < 18 {
            return false;
        }
        (be16(b, 16), 18)
    } else {
        (outer, 14)
    };
    if type_length < 46 {
        return false;
    }
    let payload = if type_length <= 1500 {
        // Length field; trailing bytes after the payload are tolerated.
        let n = type_length as usize;
        if header + n > b.len() {
            return false;
        }
        n
    } else if type_length >= 1536 {
        b.len() - header
    } else {
        return false;
    };
    (46..=1500).contains(&payload)
}

pub mod heartbeat {
    pub const REQUEST: u8 = 1;
    pub const RESPONSE: u8 = 2;
    pub const MAX_PAYLOAD_LENGTH: u16 = 16384 - 20;
    pub const MAX_RECORD: usize = 16384;
    pub const MIN_PADDING: usize = 16;
}

/// TLS heartbeat message: type, 16-bit payload length, payload, padding.
pub fn heartbeat(b: &[u8]) -> bool {
    use heartbeat::*;
    if b.len() < 3 {
        return false;
    }
    if b[0] != REQUEST && b[0] != RESPONSE {
        return false;
    }
    let length = be16(b, 1);
    if length > MAX_PAYLOAD_LENGTH {
        return false;
    }
    let end = 3 + length as usize;
    if end > b.len() || b.len() > MAX_RECORD {
        return false;
    }
    b.len() - end >= MIN_PADDING
}

/// IPv4 header with options kept opaque; the payload ends at Total_Length
/// and anything after it is ignored.
pub fn ipv4(b: &[u8]) -> bool {
    if b.len() < 20 {
        return false;
    }
    let version = b[0] >> 4;
    let ihl = (b[0] & 0x0F) as usize;
    let total = be16(b, 2) as usize;
    let reserved = b[6] >> 7;
    version == 4 && ihl >= 5 && total >= 20 && total >= ihl * 4 && reserved == 0 && ihl * 4 <= b.len() && total <= b.len()
}
