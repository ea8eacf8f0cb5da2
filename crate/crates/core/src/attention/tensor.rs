use std::fmt::Write as _;

use crate::{Error, Result};

/// A `C x H x W` feature map stored row-major in `(c, h, w)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Upper bound on elements accepted from text, so a hostile header cannot
/// force a huge allocation.
const MAX_TEXT_ELEMENTS: usize = 1 << 26;

impl Tensor3 {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        let n = channels
            .checked_mul(height)
            .and_then(|x| x.checked_mul(width))
            .ok_or_else(|| Error::domain("tensor shape overflows"))?;
        if n == 0 {
            return Err(Error::domain("tensor shape has a zero dimension"));
        }
        if data.len() != n {
            return Err(Error::domain(format!(
                "tensor data has {} values, shape {channels}x{height}x{width} needs {n}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("tensor value at {i} is not finite")));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(channels, height, width, vec![value; channels * height * width])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn spatial_len(&self) -> usize {
        self.height * self.width
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.spatial_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub(crate) fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.spatial_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, h: usize, w: usize) -> f64 {
        self.data[(c * self.height + h) * self.width + w]
    }

    /// Reorders channels so that output channel `i` is input channel `perm[i]`.
    pub fn permute_channels(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.channels];
        if perm.len() != self.channels || perm.iter().any(|&p| p >= self.channels || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::domain("not a permutation of the channel axis"));
        }
        let data = perm.iter().flat_map(|&p| self.channel(p).iter().copied()).collect();
        Self::new(self.channels, self.height, self.width, data)
    }

    /// Parses the plain-text fixture format: a `C H W` header line followed
    /// by `C*H*W` whitespace-separated decimals.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing C H W header"))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 3 {
            return Err(Error::parse(hline + 1, "header must have exactly three integers"));
        }
        let mut shape = [0usize; 3];
        for (slot, tok) in shape.iter_mut().zip(&dims) {
            *slot = tok
                .parse()
                .map_err(|_| Error::parse(hline + 1, format!("bad dimension {tok:?}")))?;
        }
        let [c, h, w] = shape;
        let n = c
            .checked_mul(h)
            .and_then(|x| x.checked_mul(w))
            .filter(|&n| n > 0 && n <= MAX_TEXT_ELEMENTS)
            .ok_or_else(|| Error::parse(hline + 1, format!("unsupported shape {c}x{h}x{w}")))?;
        let mut data = Vec::with_capacity(n.min(1 << 16));
        let mut last_line = hline + 1;
        for (ln, line) in lines {
            last_line = ln + 1;
            for tok in line.split_whitespace() {
                if data.len() == n {
                    return Err(Error::parse(ln + 1, "more values than the header declares"));
                }
                let x: f64 = tok.parse().map_err(|_| Error::parse(ln + 1, format!("bad value {tok:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(ln + 1, format!("non-finite value {tok:?}")));
                }
                data.push(x);
            }
        }
        if data.len() != n {
            return Err(Error::parse(last_line, format!("expected {n} values, found {}", data.len())));
        }
        Self::new(c, h, w, data)
    }

    /// Writes the fixture format, one line per `(c, h)` row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.channels, self.height, self.width);
        for row in self.data.chunks(self.width) {
            let mut first = true;
            for x in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{x:?}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }
}
