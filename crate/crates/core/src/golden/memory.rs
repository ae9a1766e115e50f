use std::collections::BTreeMap;

pub const PAGE_BYTES: u64 = 4096;

/// Sparse byte-addressable memory over the full 64-bit space.
///
/// Unwritten bytes read as zero. Pages are kept in address order so that
/// digests are deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Memory {
    pages: BTreeMap<u64, Box<[u8; PAGE_BYTES as usize]>>,
}

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    fn page_mut(&mut self, addr: u64) -> &mut [u8; PAGE_BYTES as usize] {
        self.pages
            .entry(addr / PAGE_BYTES)
            .or_insert_with(|| Box::new([0; PAGE_BYTES as usize]))
    }

    pub fn read_u8(&self, addr: u64) -> u8 {
        self.pages
            .get(&(addr / PAGE_BYTES))
            .map_or(0, |p| p[(addr % PAGE_BYTES) as usize])
    }

    pub fn write_u8(&mut self, addr: u64, v: u8) {
        self.page_mut(addr)[(addr % PAGE_BYTES) as usize] = v;
    }

    /// Little-endian read of `bytes` (1..=8) bytes.
    pub fn read(&self, addr: u64, bytes: u8) -> u64 {
        (0..bytes as u64).fold(0u64, |acc, i| {
            acc | (self.read_u8(addr.wrapping_add(i)) as u64) << (8 * i)
        })
    }

    /// Little-endian write of the low `bytes` bytes of `value`.
    pub fn write(&mut self, addr: u64, bytes: u8, value: u64) {
        for i in 0..bytes as u64 {
            self.write_u8(addr.wrapping_add(i), (value >> (8 * i)) as u8);
        }
    }

    pub fn write_bytes(&mut self, addr: u64, data: &[u8]) {
        for (i, b) in data.iter().enumerate() {
            self.write_u8(addr + i as u64, *b);
        }
    }

    pub fn read_bytes(&self, addr: u64, len: usize) -> Vec<u8> {
        (0..len as u64).map(|i| self.read_u8(addr + i)).collect()
    }

    /// FNV-1a over every non-zero page and its number. All-zero pages are
    /// skipped so that touched-but-zero memory equals untouched memory.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for (n, page) in &self.pages {
            if page.iter().all(|&b| b == 0) {
                continue;
            }
            h.write(&n.to_le_bytes());
            h.write(&page[..]);
        }
        h.finish()
    }
}

/// 64-bit FNV-1a.
#[derive(Debug, Clone, Copy)]
pub struct Fnv(u64);

impl Fnv {
    pub fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv {
    fn default() -> Self {
        Fnv::new()
    }
}
