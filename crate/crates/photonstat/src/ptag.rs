//! PTAG time-tag file format.
//!
//! Little-endian layout:
//!
//! ```text
//! magic    5 bytes  "PTAG1"
//! version  u8       1
//! resolution_ps u64
//! count    u64
//! records  count x { timestamp: u64 (ticks), channel: u8 (1 or 2) }  9 bytes each
//! ```
//!
//! No padding anywhere; records are trivially seekable at
//! `HEADER_LEN + 9 * index`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::simulate::{self, BinnedCountStream, TagRecord, TimeTagStream};

pub const MAGIC: &[u8; 5] = b"PTAG1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: u64 = 5 + 1 + 8 + 8;
pub const RECORD_LEN: u64 = 9;

const COUNT_OFFSET: u64 = 5 + 1 + 8;

/// Streaming record writer; patches the record count into the header on
/// [`PtagWriter::finish`].
pub struct PtagWriter<W: Write + Seek> {
    inner: BufWriter<W>,
    count: u64,
}

impl<W: Write + Seek> PtagWriter<W> {
    pub fn new(w: W, resolution_ps: u64) -> Result<Self> {
        let mut inner = BufWriter::new(w);
        inner.write_all(MAGIC)?;
        inner.write_all(&[VERSION])?;
        inner.write_all(&resolution_ps.to_le_bytes())?;
        inner.write_all(&0u64.to_le_bytes())?;
        Ok(Self { inner, count: 0 })
    }

    pub fn push(&mut self, timestamp: u64, channel: u8) -> Result<()> {
        debug_assert!(channel == 1 || channel == 2);
        let mut rec = [0u8; RECORD_LEN as usize];
        rec[..8].copy_from_slice(&timestamp.to_le_bytes());
        rec[8] = channel;
        self.inner.write_all(&rec)?;
        self.count += 1;
        Ok(())
    }

    /// Patch the header count and flush. Returns the record count.
    pub fn finish(mut self) -> Result<u64> {
        self.inner.flush()?;
        let w = self.inner.get_mut();
        w.seek(SeekFrom::Start(COUNT_OFFSET))?;
        w.write_all(&self.count.to_le_bytes())?;
        w.flush()?;
        Ok(self.count)
    }
}

/// Write a fully materialized tag stream.
pub fn write_stream<W: Write + Seek>(w: W, stream: &TimeTagStream) -> Result<u64> {
    let mut writer = PtagWriter::new(w, stream.resolution_ps)?;
    for r in &stream.records {
        writer.push(r.timestamp, r.channel)?;
    }
    writer.finish()
}

/// Expand binned counts into tags and stream them to `w` without
/// materializing the tag list.
pub fn write_counts<W: Write + Seek>(
    w: W,
    stream: &BinnedCountStream,
    resolution_ps: u64,
    seed: u64,
) -> Result<u64> {
    let mut writer = PtagWriter::new(w, resolution_ps)?;
    let mut io_err = None;
    simulate::emit_timetags(stream, resolution_ps, seed, |ts, ch| {
        if io_err.is_none() {
            if let Err(e) = writer.push(ts, ch) {
                io_err = Some(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(e);
    }
    writer.finish()
}

pub fn write_stream_to_path(path: &Path, stream: &TimeTagStream) -> Result<u64> {
    write_stream(File::create(path)?, stream)
}

/// Buffered streaming reader over the records of a PTAG file.
#[derive(Debug)]
pub struct PtagReader<R: Read> {
    inner: BufReader<R>,
    path: PathBuf,
    resolution_ps: u64,
    count: u64,
    read: u64,
}

impl PtagReader<File> {
    pub fn open(path: &Path) -> Result<Self> {
        Self::new(File::open(path)?, path.to_path_buf())
    }
}

impl<R: Read> PtagReader<R> {
    pub fn new(r: R, path: PathBuf) -> Result<Self> {
        let mut inner = BufReader::with_capacity(1 << 16, r);
        let mut header = [0u8; HEADER_LEN as usize];
        inner.read_exact(&mut header).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format {
                    path: path.clone(),
                    offset: 0,
                    msg: "file shorter than PTAG header".into(),
                }
            } else {
                Error::Io(e)
            }
        })?;
        if &header[..5] != MAGIC {
            return Err(Error::Format {
                path,
                offset: 0,
                msg: format!("bad magic {:?}, expected {:?}", &header[..5], MAGIC),
            });
        }
        if header[5] != VERSION {
            return Err(Error::Format {
                path,
                offset: 5,
                msg: format!("unsupported version {}", header[5]),
            });
        }
        let resolution_ps = u64::from_le_bytes(header[6..14].try_into().unwrap());
        let count = u64::from_le_bytes(header[14..22].try_into().unwrap());
        if resolution_ps == 0 {
            return Err(Error::Format {
                path,
                offset: 6,
                msg: "resolution must be nonzero".into(),
            });
        }
        Ok(Self {
            inner,
            path,
            resolution_ps,
            count,
            read: 0,
        })
    }

    pub fn resolution_ps(&self) -> u64 {
        self.resolution_ps
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Next record, or `None` after the declared count has been read.
    pub fn next_record(&mut self) -> Result<Option<TagRecord>> {
        if self.read == self.count {
            return Ok(None);
        }
        let offset = HEADER_LEN + self.read * RECORD_LEN;
        let mut rec = [0u8; RECORD_LEN as usize];
        self.inner.read_exact(&mut rec).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format {
                    path: self.path.clone(),
                    offset,
                    msg: format!(
                        "truncated record {} of {} declared",
                        self.read, self.count
                    ),
                }
            } else {
                Error::Io(e)
            }
        })?;
        let timestamp = u64::from_le_bytes(rec[..8].try_into().unwrap());
        let channel = rec[8];
        if channel != 1 && channel != 2 {
            return Err(Error::Format {
                path: self.path.clone(),
                offset: offset + 8,
                msg: format!("invalid channel {channel}"),
            });
        }
        self.read += 1;
        Ok(Some(TagRecord { timestamp, channel }))
    }
}

/// Load a whole PTAG file into memory.
pub fn read_stream(path: &Path) -> Result<TimeTagStream> {
    let mut reader = PtagReader::open(path)?;
    let mut records = Vec::with_capacity(reader.count() as usize);
    while let Some(rec) = reader.next_record()? {
        records.push(rec);
    }
    Ok(TimeTagStream {
        resolution_ps: reader.resolution_ps(),
        records,
    })
}
