//! Binary chunk format (`chunk-%06d.dpi`).
//!
//! Little-endian throughout, versioned by a header field. One chunk is
//! self-contained: a sorted symbol table (all strings, ids are rank+1 with 0
//! reserved for the lemma wildcard), an SSTable-style run of key blocks with
//! an in-memory block index for binary search, delta-encoded posting lists,
//! and an embedded compact sentence store so search and expansion never need
//! the original corpus files. Every byte is a pure function of (sentences,
//! chunk id, depth): builds are reproducible bit-for-bit.
//!
//! Layout: `header | symbols | block index | key blocks | sentence offsets |
//! sentence store`. Readers use positioned reads, so a lookup touches only
//! the handful of blocks and sentences it needs.

use std::collections::HashMap;
use std::fs::File;
use std::io;
use std::path::Path;

use crate::conllu::{ParsedSentence, Token};
use crate::error::IndexError;

use super::{chains_for_token, ChainKey, StepSyms};

pub const MAGIC: &[u8; 4] = b"DPIX";
pub const FORMAT_VERSION: u32 = 1;
pub const KEYS_PER_BLOCK: usize = 256;
const HEADER_LEN: usize = 80;

/// Canonical deprel for a chain step whose token is the sentence root.
pub const ROOT_STEP: &str = "root";

pub(crate) fn write_varint(buf: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            buf.push(byte);
            break;
        }
        buf.push(byte | 0x80);
    }
}

pub(crate) fn read_varint(buf: &[u8], pos: &mut usize) -> Result<u64, ()> {
    let mut v = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *buf.get(*pos).ok_or(())?;
        *pos += 1;
        v |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
        if shift >= 64 {
            return Err(());
        }
    }
}

pub(crate) fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub(crate) fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn put_u32(buf: &mut [u8], at: usize, v: u32) {
    buf[at..at + 4].copy_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut [u8], at: usize, v: u64) {
    buf[at..at + 8].copy_from_slice(&v.to_le_bytes());
}

fn get_u32(buf: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(buf[at..at + 4].try_into().unwrap())
}

fn get_u64(buf: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(buf[at..at + 8].try_into().unwrap())
}

#[derive(Debug, Clone, Copy)]
struct Header {
    max_depth: u32,
    chunk_id: u32,
    sentence_count: u32,
    symbol_count: u32,
    block_count: u32,
    symbols_off: u64,
    block_index_off: u64,
    key_blocks_off: u64,
    sent_offsets_off: u64,
    sent_store_off: u64,
    file_len: u64,
}

/// Encode one chunk to its full file bytes.
pub fn encode_chunk(
    chunk_id: u32,
    sentences: &[ParsedSentence],
    max_depth: u32,
) -> Result<Vec<u8>, IndexError> {
    // Intern every string; final ids are assigned by sorted rank afterwards
    // so the output is independent of encounter order.
    let mut intern: HashMap<String, u32> = HashMap::new();
    let mut strings: Vec<String> = Vec::new();
    let id_of = |s: &str, strings: &mut Vec<String>, intern: &mut HashMap<String, u32>| -> u32 {
        if let Some(&id) = intern.get(s) {
            return id;
        }
        let id = strings.len() as u32;
        strings.push(s.to_string());
        intern.insert(s.to_string(), id);
        id
    };
    let root_sym = id_of(ROOT_STEP, &mut strings, &mut intern);

    struct PackedSentence {
        doc: u32,
        sent_index: u32,
        // per token: form, lemma, xpos, deprel, head
        toks: Vec<[u32; 5]>,
    }
    let mut packed: Vec<PackedSentence> = Vec::with_capacity(sentences.len());
    for s in sentences {
        let doc = id_of(&s.doc_id, &mut strings, &mut intern);
        let toks = s
            .tokens
            .iter()
            .map(|t| {
                [
                    id_of(&t.form, &mut strings, &mut intern),
                    id_of(&t.lemma, &mut strings, &mut intern),
                    id_of(&t.xpos, &mut strings, &mut intern),
                    id_of(&t.deprel, &mut strings, &mut intern),
                    t.head,
                ]
            })
            .collect();
        packed.push(PackedSentence {
            doc,
            sent_index: s.sent_index,
            toks,
        });
    }

    // Chain-key records. Keys are interned too: they repeat heavily across
    // tokens and the dedup keeps the sort cheap.
    let mut key_intern: HashMap<Box<[u32]>, u32> = HashMap::new();
    let mut keys: Vec<Box<[u32]>> = Vec::new();
    let mut records: Vec<(u32, u32, u32)> = Vec::new(); // (key ix, ordinal, token id)
    for (ordinal, ps) in packed.iter().enumerate() {
        let heads: Vec<u32> = ps.toks.iter().map(|t| t[4]).collect();
        for token_ix in 0..ps.toks.len() {
            chains_for_token(
                token_ix,
                &heads,
                |ix| {
                    let t = &ps.toks[ix];
                    StepSyms {
                        deprel: if heads[ix] == 0 { root_sym } else { t[3] },
                        deprel_alt: if heads[ix] == 0 && t[3] != root_sym {
                            Some(t[3])
                        } else {
                            None
                        },
                        xpos: t[2],
                        lemma: t[1],
                    }
                },
                max_depth,
                |key: &[u32]| {
                    let ix = match key_intern.get(key) {
                        Some(&ix) => ix,
                        None => {
                            let ix = keys.len() as u32;
                            keys.push(key.into());
                            key_intern.insert(key.into(), ix);
                            ix
                        }
                    };
                    records.push((ix, ordinal as u32, token_ix as u32 + 1));
                },
            );
        }
    }
    drop(key_intern);

    // Final symbol ids: sorted rank + 1 (0 = wildcard). Rank order equals
    // string order, so posting sort by doc symbol is sort by doc_id.
    let mut sorted = strings.clone();
    sorted.sort_unstable();
    let rank: HashMap<&str, u32> = sorted
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as u32 + 1))
        .collect();
    let remap: Vec<u32> = strings.iter().map(|s| rank[s.as_str()]).collect();

    for key in &mut keys {
        for (i, v) in key.iter_mut().enumerate() {
            // Triples of (deprel, xpos, lemma); lemma 0 is the wildcard.
            if i % 3 == 2 && *v == super::WILD {
                *v = 0;
            } else {
                *v = remap[*v as usize];
            }
        }
    }
    let mut key_order: Vec<u32> = (0..keys.len() as u32).collect();
    key_order.sort_unstable_by(|&a, &b| keys[a as usize].cmp(&keys[b as usize]));
    let mut key_rank = vec![0u32; keys.len()];
    for (r, &ix) in key_order.iter().enumerate() {
        key_rank[ix as usize] = r as u32;
    }
    records.sort_unstable_by_key(|&(key_ix, ordinal, token)| {
        let ps = &packed[ordinal as usize];
        (
            key_rank[key_ix as usize],
            remap[ps.doc as usize],
            ps.sent_index,
            token,
        )
    });

    // Assemble the file.
    let mut buf = vec![0u8; HEADER_LEN];
    let symbols_off = buf.len() as u64;
    for s in &sorted {
        write_varint(&mut buf, s.len() as u64);
        buf.extend_from_slice(s.as_bytes());
    }

    // Key blocks, then the index over them.
    let mut blocks: Vec<Vec<u8>> = Vec::new();
    let mut block_meta: Vec<(Vec<u8>, u32)> = Vec::new(); // (first key encoding, entry count)
    {
        let mut at = 0usize;
        let mut block = Vec::new();
        let mut entries_in_block = 0u32;
        let mut first_key_enc: Vec<u8> = Vec::new();
        while at < records.len() {
            let key_ix = records[at].0;
            let mut end = at + 1;
            while end < records.len() && records[end].0 == key_ix {
                end += 1;
            }
            let key = &keys[key_ix as usize];
            let mut enc = Vec::new();
            write_varint(&mut enc, (key.len() / 3) as u64);
            for &v in key.iter() {
                write_varint(&mut enc, u64::from(v));
            }
            if entries_in_block == 0 {
                first_key_enc = enc.clone();
            }
            block.extend_from_slice(&enc);
            write_varint(&mut block, (end - at) as u64);
            let mut prev = 0i64;
            for &(_, ordinal, token) in &records[at..end] {
                write_varint(&mut block, zigzag(i64::from(ordinal) - prev));
                prev = i64::from(ordinal);
                write_varint(&mut block, u64::from(token));
            }
            entries_in_block += 1;
            if entries_in_block as usize >= KEYS_PER_BLOCK || end >= records.len() {
                blocks.push(std::mem::take(&mut block));
                block_meta.push((std::mem::take(&mut first_key_enc), entries_in_block));
                entries_in_block = 0;
            }
            at = end;
        }
    }

    let block_index_off = buf.len() as u64;
    let mut block_off = 0u64;
    for (meta, block) in block_meta.iter().zip(&blocks) {
        write_varint(&mut buf, meta.0.len() as u64);
        buf.extend_from_slice(&meta.0);
        write_varint(&mut buf, block_off);
        write_varint(&mut buf, block.len() as u64);
        write_varint(&mut buf, u64::from(meta.1));
        block_off += block.len() as u64;
    }
    let key_blocks_off = buf.len() as u64;
    for block in &blocks {
        buf.extend_from_slice(block);
    }

    // Sentence store, offsets first for O(1) access.
    let mut store = Vec::new();
    let mut offsets = Vec::with_capacity(packed.len());
    for ps in &packed {
        offsets.push(store.len() as u64);
        write_varint(&mut store, u64::from(remap[ps.doc as usize]));
        write_varint(&mut store, u64::from(ps.sent_index));
        write_varint(&mut store, ps.toks.len() as u64);
        for t in &ps.toks {
            for &v in &t[..4] {
                write_varint(&mut store, u64::from(remap[v as usize]));
            }
            write_varint(&mut store, u64::from(t[4]));
        }
    }
    let sent_offsets_off = buf.len() as u64;
    for off in &offsets {
        buf.extend_from_slice(&off.to_le_bytes());
    }
    let sent_store_off = buf.len() as u64;
    buf.extend_from_slice(&store);

    let file_len = buf.len() as u64;
    buf[0..4].copy_from_slice(MAGIC);
    put_u32(&mut buf, 4, FORMAT_VERSION);
    put_u32(&mut buf, 8, max_depth);
    put_u32(&mut buf, 12, chunk_id);
    put_u32(&mut buf, 16, sentences.len() as u32);
    put_u32(&mut buf, 20, sorted.len() as u32);
    put_u32(&mut buf, 24, blocks.len() as u32);
    put_u32(&mut buf, 28, 0);
    put_u64(&mut buf, 32, symbols_off);
    put_u64(&mut buf, 40, block_index_off);
    put_u64(&mut buf, 48, key_blocks_off);
    put_u64(&mut buf, 56, sent_offsets_off);
    put_u64(&mut buf, 64, sent_store_off);
    put_u64(&mut buf, 72, file_len);
    Ok(buf)
}

#[derive(Debug)]
struct BlockMeta {
    first_key: Vec<u32>,
    offset: u64,
    len: u64,
    entries: u32,
}

/// Read side of one chunk file. Symbol table and block index live in
/// memory; key blocks and sentences are fetched with positioned reads.
#[derive(Debug)]
pub struct ChunkReader {
    file: File,
    pub chunk_id: u32,
    pub max_depth: u32,
    sentence_count: u32,
    header: Header,
    symbols: Vec<String>,
    block_index: Vec<BlockMeta>,
}

fn read_at(file: &File, chunk_id: u32, off: u64, len: usize) -> Result<Vec<u8>, IndexError> {
    let mut buf = vec![0u8; len];
    positioned_read(file, &mut buf, off).map_err(|e| IndexError::CorruptChunk {
        chunk_id,
        reason: format!("short read at offset {off}: {e}"),
    })?;
    Ok(buf)
}

#[cfg(unix)]
fn positioned_read(file: &File, buf: &mut [u8], off: u64) -> io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, off)
}

#[cfg(windows)]
fn positioned_read(file: &File, buf: &mut [u8], off: u64) -> io::Result<()> {
    use std::os::windows::fs::FileExt;
    let mut done = 0;
    while done < buf.len() {
        let n = file.seek_read(&mut buf[done..], off + done as u64)?;
        if n == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "eof"));
        }
        done += n;
    }
    Ok(())
}

impl ChunkReader {
    pub fn open(path: &Path, expect_chunk_id: u32) -> Result<ChunkReader, IndexError> {
        let corrupt = |reason: String| IndexError::CorruptChunk {
            chunk_id: expect_chunk_id,
            reason,
        };
        let file = File::open(path)?;
        let head = read_at(&file, expect_chunk_id, 0, HEADER_LEN)?;
        if &head[0..4] != MAGIC {
            return Err(corrupt("bad magic".to_string()));
        }
        let version = get_u32(&head, 4);
        if version != FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let header = Header {
            max_depth: get_u32(&head, 8),
            chunk_id: get_u32(&head, 12),
            sentence_count: get_u32(&head, 16),
            symbol_count: get_u32(&head, 20),
            block_count: get_u32(&head, 24),
            symbols_off: get_u64(&head, 32),
            block_index_off: get_u64(&head, 40),
            key_blocks_off: get_u64(&head, 48),
            sent_offsets_off: get_u64(&head, 56),
            sent_store_off: get_u64(&head, 64),
            file_len: get_u64(&head, 72),
        };
        if header.chunk_id != expect_chunk_id {
            return Err(corrupt(format!(
                "file says chunk {} where {} was expected",
                header.chunk_id, expect_chunk_id
            )));
        }
        let actual_len = file.metadata()?.len();
        if actual_len != header.file_len {
            return Err(corrupt(format!(
                "file length {actual_len} does not match header {}",
                header.file_len
            )));
        }
        let ordered = [
            HEADER_LEN as u64,
            header.symbols_off,
            header.block_index_off,
            header.key_blocks_off,
            header.sent_offsets_off,
            header.sent_store_off,
            header.file_len,
        ];
        if ordered.windows(2).any(|w| w[0] > w[1]) {
            return Err(corrupt("section offsets out of order".to_string()));
        }

        let sym_bytes = read_at(
            &file,
            expect_chunk_id,
            header.symbols_off,
            (header.block_index_off - header.symbols_off) as usize,
        )?;
        let mut symbols = Vec::with_capacity(header.symbol_count as usize);
        let mut pos = 0usize;
        for _ in 0..header.symbol_count {
            let len = read_varint(&sym_bytes, &mut pos)
                .map_err(|_| corrupt("truncated symbol table".to_string()))?
                as usize;
            let end = pos
                .checked_add(len)
                .filter(|&e| e <= sym_bytes.len())
                .ok_or_else(|| corrupt("symbol overruns table".to_string()))?;
            let s = std::str::from_utf8(&sym_bytes[pos..end])
                .map_err(|_| corrupt("symbol is not utf-8".to_string()))?;
            symbols.push(s.to_string());
            pos = end;
        }

        let idx_bytes = read_at(
            &file,
            expect_chunk_id,
            header.block_index_off,
            (header.key_blocks_off - header.block_index_off) as usize,
        )?;
        let mut block_index = Vec::with_capacity(header.block_count as usize);
        let mut pos = 0usize;
        let trunc = || corrupt("truncated block index".to_string());
        for _ in 0..header.block_count {
            let enc_len = read_varint(&idx_bytes, &mut pos).map_err(|_| trunc())? as usize;
            let end = pos
                .checked_add(enc_len)
                .filter(|&e| e <= idx_bytes.len())
                .ok_or_else(trunc)?;
            let mut kpos = pos;
            let first_key = decode_key(&idx_bytes[..end], &mut kpos).ok_or_else(trunc)?;
            pos = end;
            let offset = read_varint(&idx_bytes, &mut pos).map_err(|_| trunc())?;
            let len = read_varint(&idx_bytes, &mut pos).map_err(|_| trunc())?;
            let entries = read_varint(&idx_bytes, &mut pos).map_err(|_| trunc())? as u32;
            block_index.push(BlockMeta {
                first_key,
                offset,
                len,
                entries,
            });
        }

        Ok(ChunkReader {
            file,
            chunk_id: expect_chunk_id,
            max_depth: header.max_depth,
            sentence_count: header.sentence_count,
            header,
            symbols,
            block_index,
        })
    }

    pub fn sentence_count(&self) -> u32 {
        self.sentence_count
    }

    /// Resolve a string to its symbol id; None means the chunk never saw it.
    pub fn symbol(&self, s: &str) -> Option<u32> {
        self.symbols
            .binary_search_by(|probe| probe.as_str().cmp(s))
            .ok()
            .map(|rank| rank as u32 + 1)
    }

    fn sym_str(&self, id: u64) -> Result<&str, IndexError> {
        if id == 0 || id as usize > self.symbols.len() {
            return Err(IndexError::CorruptChunk {
                chunk_id: self.chunk_id,
                reason: format!("symbol id {id} out of range"),
            });
        }
        Ok(&self.symbols[id as usize - 1])
    }

    /// Postings for one key: (sentence ordinal, token id), sorted.
    pub fn lookup(&self, key: &ChainKey) -> Result<Vec<(u32, u32)>, IndexError> {
        let mut ids = Vec::with_capacity(key.steps.len() * 3);
        for step in &key.steps {
            let (Some(d), Some(x)) = (self.symbol(&step.deprel), self.symbol(&step.xpos)) else {
                return Ok(Vec::new());
            };
            let l = match &step.lemma {
                None => 0,
                Some(lemma) => match self.symbol(lemma) {
                    Some(id) => id,
                    None => return Ok(Vec::new()),
                },
            };
            ids.extend_from_slice(&[d, x, l]);
        }
        // Last block whose first key is <= the probe.
        let block_at = self
            .block_index
            .partition_point(|b| b.first_key.as_slice() <= ids.as_slice());
        if block_at == 0 {
            return Ok(Vec::new());
        }
        let meta = &self.block_index[block_at - 1];
        let block = read_at(
            &self.file,
            self.chunk_id,
            self.header.key_blocks_off + meta.offset,
            meta.len as usize,
        )?;
        let corrupt = || IndexError::CorruptChunk {
            chunk_id: self.chunk_id,
            reason: "truncated key block".to_string(),
        };
        let mut pos = 0usize;
        for _ in 0..meta.entries {
            let entry_key = decode_key(&block, &mut pos).ok_or_else(corrupt)?;
            let count = read_varint(&block, &mut pos).map_err(|_| corrupt())?;
            if entry_key.as_slice() == ids.as_slice() {
                let mut out = Vec::with_capacity(count as usize);
                let mut prev = 0i64;
                for _ in 0..count {
                    let delta = unzigzag(read_varint(&block, &mut pos).map_err(|_| corrupt())?);
                    let ordinal = prev + delta;
                    prev = ordinal;
                    let token = read_varint(&block, &mut pos).map_err(|_| corrupt())?;
                    out.push((ordinal as u32, token as u32));
                }
                return Ok(out);
            }
            if entry_key.as_slice() > ids.as_slice() {
                break;
            }
            for _ in 0..count {
                read_varint(&block, &mut pos).map_err(|_| corrupt())?;
                read_varint(&block, &mut pos).map_err(|_| corrupt())?;
            }
        }
        Ok(Vec::new())
    }

    /// (doc_id, sent_index) of a stored sentence without decoding its tokens.
    pub fn sentence_ref(&self, ordinal: u32) -> Result<(String, u32), IndexError> {
        let bytes = self.sentence_bytes(ordinal)?;
        let corrupt = || IndexError::CorruptChunk {
            chunk_id: self.chunk_id,
            reason: format!("truncated sentence {ordinal}"),
        };
        let mut pos = 0usize;
        let doc = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
        let sent_index = read_varint(&bytes, &mut pos).map_err(|_| corrupt())? as u32;
        Ok((self.sym_str(doc)?.to_string(), sent_index))
    }

    /// Decode one stored sentence.
    pub fn sentence(&self, ordinal: u32) -> Result<ParsedSentence, IndexError> {
        let bytes = self.sentence_bytes(ordinal)?;
        let corrupt = || IndexError::CorruptChunk {
            chunk_id: self.chunk_id,
            reason: format!("truncated sentence {ordinal}"),
        };
        let mut pos = 0usize;
        let doc = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
        let sent_index = read_varint(&bytes, &mut pos).map_err(|_| corrupt())? as u32;
        let n = read_varint(&bytes, &mut pos).map_err(|_| corrupt())? as usize;
        let mut tokens = Vec::with_capacity(n);
        let mut root_id = 0u32;
        for i in 0..n {
            let form = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
            let lemma = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
            let xpos = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
            let deprel = read_varint(&bytes, &mut pos).map_err(|_| corrupt())?;
            let head = read_varint(&bytes, &mut pos).map_err(|_| corrupt())? as u32;
            let id = i as u32 + 1;
            if head == 0 {
                root_id = id;
            }
            tokens.push(Token {
                id,
                form: self.sym_str(form)?.to_string(),
                lemma: self.sym_str(lemma)?.to_string(),
                xpos: self.sym_str(xpos)?.to_string(),
                head,
                deprel: self.sym_str(deprel)?.to_string(),
            });
        }
        Ok(ParsedSentence {
            doc_id: self.sym_str(doc)?.to_string(),
            sent_index,
            tokens,
            root_id,
        })
    }

    fn sentence_bytes(&self, ordinal: u32) -> Result<Vec<u8>, IndexError> {
        if ordinal >= self.sentence_count {
            return Err(IndexError::CorruptChunk {
                chunk_id: self.chunk_id,
                reason: format!("sentence ordinal {ordinal} out of range"),
            });
        }
        let at = self.header.sent_offsets_off + u64::from(ordinal) * 8;
        let start = get_u64(&read_at(&self.file, self.chunk_id, at, 8)?, 0);
        let end = if u64::from(ordinal) + 1 < u64::from(self.sentence_count) {
            get_u64(&read_at(&self.file, self.chunk_id, at + 8, 8)?, 0)
        } else {
            self.header.file_len - self.header.sent_store_off
        };
        if end < start {
            return Err(IndexError::CorruptChunk {
                chunk_id: self.chunk_id,
                reason: "sentence offsets out of order".to_string(),
            });
        }
        read_at(
            &self.file,
            self.chunk_id,
            self.header.sent_store_off + start,
            (end - start) as usize,
        )
    }
}

fn decode_key(buf: &[u8], pos: &mut usize) -> Option<Vec<u32>> {
    let steps = read_varint(buf, pos).ok()?;
    let mut key = Vec::with_capacity(steps as usize * 3);
    for _ in 0..steps * 3 {
        key.push(read_varint(buf, pos).ok()? as u32);
    }
    Some(key)
}
